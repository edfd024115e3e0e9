//! Dataset files, the run manifest and the derived report CSVs.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::aggregation::{build_triangle, past_triangle, reaggregate, ClaimRecord, Extent, PaymentRecord, Triangle, TriangleKind};
use crate::chainladder::{
    default_buckets, dependency_table, reserve_report, DependencyTable, Grouping, ReserveReport, SizeBucket,
    DEFAULT_M_VALUES,
};
use crate::error::{Error, Result};

use super::config::{MonetaryUnit, ScenarioConfig};
use super::simulate::Dataset;

pub const CLAIMS_FILE: &str = "claims.csv";
pub const PAYMENTS_FILE: &str = "payments.csv";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const CONFIG_FILE: &str = "config.toml";
pub const TRIANGLE_FILE: &str = "triangle.csv";
pub const RESERVE_FILE: &str = "reserve_report.csv";
pub const DEPENDENCY_FILE: &str = "dependency_table.csv";
pub const DEVPATTERN_FILE: &str = "devpattern.csv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    /// SHA-256 of the canonical TOML of the effective config.
    pub config_hash: String,
    pub master_seed: u64,
    pub package_version: String,
    pub claims_rows: usize,
    pub payments_rows: usize,
    pub wall_clock_seconds: f64,
    pub periods: u32,
    pub years_per_period: f64,
    pub reference_claim_size: f64,
    pub monetary_unit: MonetaryUnit,
}

pub fn config_hash(config: &ScenarioConfig) -> String {
    hex::encode(Sha256::digest(config.to_toml().as_bytes()))
}

fn write_records<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

fn read_records<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Write claims, payments, the effective config and the manifest into `dir`.
/// `config.global.master_seed` should already hold the seed actually used.
pub fn write_dataset(dir: &Path, dataset: &Dataset, config: &ScenarioConfig, wall_clock_seconds: f64) -> Result<RunManifest> {
    fs::create_dir_all(dir)?;
    write_records(&dir.join(CLAIMS_FILE), &dataset.claims)?;
    write_records(&dir.join(PAYMENTS_FILE), &dataset.payments)?;
    fs::write(dir.join(CONFIG_FILE), config.to_toml())?;
    let manifest = RunManifest {
        config_hash: config_hash(config),
        master_seed: config.global.master_seed,
        package_version: env!("CARGO_PKG_VERSION").to_string(),
        claims_rows: dataset.claims.len(),
        payments_rows: dataset.payments.len(),
        wall_clock_seconds,
        periods: config.global.periods,
        years_per_period: config.global.time_unit.years_per_unit(),
        reference_claim_size: config.global.reference_claim_size,
        monetary_unit: config.output.monetary_unit,
    };
    fs::write(dir.join(MANIFEST_FILE), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

pub fn read_dataset(dir: &Path) -> Result<Dataset> {
    Ok(Dataset {
        claims: read_records::<ClaimRecord>(&dir.join(CLAIMS_FILE))?,
        payments: read_records::<PaymentRecord>(&dir.join(PAYMENTS_FILE))?,
    })
}

/// The config stored next to a dataset (parsed and validated).
pub fn read_config(dir: &Path) -> Result<ScenarioConfig> {
    super::config::load_config(&dir.join(CONFIG_FILE))
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(dir.join(MANIFEST_FILE))?)?)
}

fn kind_label(kind: TriangleKind) -> &'static str {
    match kind {
        TriangleKind::Incremental => "incr",
        TriangleKind::Cumulative => "cum",
    }
}

/// Header: kind label, development indices `1..=n`, then `tail` if present.
/// Unobserved cells are left empty.
pub fn write_triangle<W: std::io::Write>(out: W, tri: &Triangle) -> Result<()> {
    let n = tri.size();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![kind_label(tri.kind).to_string()];
    header.extend((1..=n).map(|j| j.to_string()));
    if tri.tail.is_some() {
        header.push("tail".into());
    }
    w.write_record(&header)?;
    for (i, row) in tri.cells.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        rec.extend((0..n).map(|j| if tri.is_observed(i, j) { row[j].to_string() } else { String::new() }));
        if let Some(t) = &tri.tail {
            rec.push(t[i].to_string());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_triangle(path: &Path) -> Result<Triangle> {
    let mut r = csv::ReaderBuilder::new().flexible(true).from_path(path)?;
    let header = r.headers()?.clone();
    let kind = match header.get(0) {
        Some("incr") => TriangleKind::Incremental,
        Some("cum") => TriangleKind::Cumulative,
        other => {
            return Err(Error::Parse(format!(
                "{}: first header cell must be 'incr' or 'cum', found {other:?}",
                path.display()
            )))
        }
    };
    let has_tail = header.iter().next_back() == Some("tail");
    let mut rows = Vec::new();
    let mut tail = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let mut cells: Vec<&str> = rec.iter().skip(1).collect();
        if has_tail {
            let t = cells.pop().unwrap_or("");
            tail.push(parse_cell(t, path)?);
        }
        let values = cells
            .iter()
            .take_while(|c| !c.trim().is_empty())
            .map(|c| parse_cell(c, path))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(values);
    }
    let mut tri = Triangle::from_rows(&rows, kind)?;
    if has_tail {
        tri.tail = Some(tail);
    }
    Ok(tri)
}

fn parse_cell(s: &str, path: &Path) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("{}: bad number '{s}'", path.display())))
}

/// Divisor and decimals used for report amounts.
fn money_format(unit: MonetaryUnit) -> (f64, usize) {
    match unit {
        MonetaryUnit::Currency => (1000.0, 1),
        MonetaryUnit::ReferenceMultiples => (1.0, 4),
    }
}

/// Amounts in thousands with one decimal, ratios in whole percent.
pub fn write_reserve_report<W: std::io::Write>(out: W, report: &ReserveReport, unit: MonetaryUnit) -> Result<()> {
    let (div, dp) = money_format(unit);
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["occurrence_periods", "target", "chain_ladder", "ratio_pct"])?;
    for row in report.rows.iter().chain(std::iter::once(&report.total)) {
        w.write_record([
            row.label.clone(),
            format!("{:.dp$}", row.target / div),
            format!("{:.dp$}", row.estimate / div),
            row.ratio_pct().map_or(String::new(), |r| format!("{}", r.round())),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub const NO_CLAIMS: &str = "no claims";

pub fn write_dependency_table<W: std::io::Write>(out: W, table: &DependencyTable, unit: MonetaryUnit) -> Result<()> {
    let (div, dp) = money_format(unit);
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["size_of_payment_m".to_string()];
    header.extend(table.m_values.iter().map(|m| format!("m={m}")));
    w.write_record(&header)?;
    for (b, bucket) in table.buckets.iter().enumerate() {
        let mut rec = vec![bucket_label(bucket, unit)];
        rec.extend(table.cells[b].iter().map(|c| match c {
            Some(c) => format!("{:.dp$}", c.mean_next / div),
            None => NO_CLAIMS.to_string(),
        }));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn bucket_label(b: &SizeBucket, unit: MonetaryUnit) -> String {
    match unit {
        MonetaryUnit::Currency => b.label(),
        MonetaryUnit::ReferenceMultiples => match b.upper {
            Some(u) => format!("{} to {}", b.lower, u),
            None => format!("over {}", b.lower),
        },
    }
}

/// Cumulative share of each row's total paid by each development period.
pub fn development_pattern(full: &Triangle) -> Vec<Option<Vec<f64>>> {
    let cum = full.to_cumulative();
    cum.cells
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let tail = full.tail.as_ref().map_or(0.0, |t| t[i]);
            let total = row.last().copied().unwrap_or(0.0) + tail;
            (total > 0.0).then(|| {
                let n = row.len();
                row.iter()
                    .enumerate()
                    .map(|(j, v)| (v + if j + 1 == n { tail } else { 0.0 }) / total)
                    .collect()
            })
        })
        .collect()
}

pub fn write_development_pattern<W: std::io::Write>(out: W, pattern: &[Option<Vec<f64>>]) -> Result<()> {
    let n = pattern.len();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["occurrence_period".to_string()];
    header.extend((1..=n).map(|j| j.to_string()));
    w.write_record(&header)?;
    for (i, row) in pattern.iter().enumerate() {
        let mut rec = vec![(i + 1).to_string()];
        match row {
            Some(r) => rec.extend(r.iter().map(f64::to_string)),
            None => rec.extend(std::iter::repeat_n(String::new(), n)),
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Size buckets in the dataset's monetary unit.
pub fn buckets_for(config: &ScenarioConfig) -> Vec<SizeBucket> {
    let div = match config.output.monetary_unit {
        MonetaryUnit::Currency => 1.0,
        MonetaryUnit::ReferenceMultiples => config.global.reference_claim_size,
    };
    default_buckets()
        .into_iter()
        .map(|b| SizeBucket {
            lower: b.lower / div,
            upper: b.upper.map(|u| u / div),
        })
        .collect()
}

/// The triangle selected by the output section: full square in the
/// configured out-of-bounds mode, reaggregated by the configured factor.
pub fn configured_triangle(dataset: &Dataset, config: &ScenarioConfig, kind: TriangleKind) -> Result<Triangle> {
    let tri = build_triangle(&dataset.payments, config.global.periods, config.output.out_of_bounds, TriangleKind::Incremental)?;
    Ok(reaggregate(&tri, config.output.aggregation_factor as usize)?.with_kind(kind))
}

pub fn report_for(dataset: &Dataset, config: &ScenarioConfig, grouping: Option<&Grouping>) -> Result<ReserveReport> {
    let periods = config.global.periods;
    let default = Grouping::default_for(periods);
    let past = past_triangle(&dataset.payments, periods, TriangleKind::Cumulative)?;
    reserve_report(&past, &dataset.payments, grouping.unwrap_or(&default))
}

pub fn dependency_for(dataset: &Dataset, config: &ScenarioConfig) -> Result<DependencyTable> {
    dependency_table(&dataset.claims, &dataset.payments, &DEFAULT_M_VALUES, &buckets_for(config))
}

/// Write triangle, reserve report, dependency table and development pattern.
pub fn emit_outputs(dir: &Path, dataset: &Dataset, config: &ScenarioConfig) -> Result<()> {
    fs::create_dir_all(dir)?;
    let unit = config.output.monetary_unit;
    let tri = configured_triangle(dataset, config, TriangleKind::Incremental)?;
    write_triangle(fs::File::create(dir.join(TRIANGLE_FILE))?, &tri)?;
    write_reserve_report(fs::File::create(dir.join(RESERVE_FILE))?, &report_for(dataset, config, None)?, unit)?;
    write_dependency_table(fs::File::create(dir.join(DEPENDENCY_FILE))?, &dependency_for(dataset, config)?, unit)?;
    let full = build_triangle(&dataset.payments, config.global.periods, config.output.out_of_bounds, TriangleKind::Incremental)?;
    debug_assert_eq!(full.extent, Extent::Full);
    write_development_pattern(fs::File::create(dir.join(DEVPATTERN_FILE))?, &development_pattern(&full))?;
    Ok(())
}

/// Parse every emitted report file present in `dir`, returning the names found.
pub fn check_outputs(dir: &Path) -> Result<Vec<&'static str>> {
    let mut found = Vec::new();
    if dir.join(TRIANGLE_FILE).exists() {
        read_triangle(&dir.join(TRIANGLE_FILE))?;
        found.push(TRIANGLE_FILE);
    }
    for name in [RESERVE_FILE, DEPENDENCY_FILE, DEVPATTERN_FILE] {
        let path = dir.join(name);
        if path.exists() {
            let mut r = csv::Reader::from_path(&path)?;
            let width = r.headers()?.len();
            for rec in r.records() {
                let rec = rec?;
                if rec.len() != width {
                    return Err(Error::Parse(format!("{}: ragged row", path.display())));
                }
            }
            found.push(name);
        }
    }
    Ok(found)
}
