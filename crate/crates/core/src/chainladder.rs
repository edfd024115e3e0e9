//! Chain-ladder reserving and the validation reports built on it.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use crate::aggregation::{ClaimRecord, PaymentRecord, Triangle};
use crate::error::{Error, Result};

/// Volume-weighted all-period development factors; `factors[j]` links
/// development period `j + 1` to `j + 2`.
#[derive(Debug, Clone, PartialEq)]
pub struct DevelopmentFactors {
    pub factors: Vec<f64>,
}

/// `f_j = sum_{i <= I-j} C[i, j+1] / sum_{i <= I-j} C[i, j]`, using only the
/// observed upper triangle of a cumulative triangle.
pub fn fit_chain_ladder(tri: &Triangle) -> Result<DevelopmentFactors> {
    let cum = tri.to_cumulative();
    let n = cum.size();
    let mut factors = Vec::with_capacity(n.saturating_sub(1));
    for j in 0..n.saturating_sub(1) {
        let rows = n - 1 - j;
        let (num, den) = cum.cells[..rows]
            .iter()
            .fold((0.0, 0.0), |(a, b), row| (a + row[j + 1], b + row[j]));
        if den == 0.0 {
            return Err(Error::Numeric(format!(
                "development factor {} undefined: column {} sums to zero",
                j + 1,
                j + 1
            )));
        }
        factors.push(num / den);
    }
    Ok(DevelopmentFactors { factors })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    /// Completed cumulative square.
    pub completed: Vec<Vec<f64>>,
    pub latest: Vec<f64>,
    pub ultimates: Vec<f64>,
    pub reserves: Vec<f64>,
}

impl Projection {
    pub fn total_reserve(&self) -> f64 {
        self.reserves.iter().sum()
    }
}

/// Fill the lower triangle with `C[i, j+1] = C[i, j] * f_j`.
pub fn project(tri: &Triangle, factors: &DevelopmentFactors) -> Result<Projection> {
    let cum = tri.to_cumulative();
    let n = cum.size();
    if factors.factors.len() + 1 != n {
        return Err(Error::Argument(format!(
            "{} factors for a {n}x{n} triangle",
            factors.factors.len()
        )));
    }
    let mut completed = cum.cells.clone();
    let mut latest = Vec::with_capacity(n);
    for (i, row) in completed.iter_mut().enumerate() {
        let last = n - 1 - i;
        latest.push(row[last]);
        for j in last..n - 1 {
            row[j + 1] = row[j] * factors.factors[j];
        }
    }
    let ultimates: Vec<f64> = completed.iter().map(|r| r[n - 1]).collect();
    let reserves = ultimates.iter().zip(&latest).map(|(u, l)| u - l).collect();
    Ok(Projection {
        completed,
        latest,
        ultimates,
        reserves,
    })
}

/// Contiguous bands of occurrence periods, 1-based and inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Grouping {
    pub groups: Vec<(u32, u32)>,
}

impl Grouping {
    /// Quarterly bands used for a 40-period history; one group per period otherwise.
    pub fn default_for(periods: u32) -> Self {
        if periods == 40 {
            let mut groups = vec![(1, 10), (11, 20), (21, 25), (26, 30)];
            groups.extend((31..=40).map(|i| (i, i)));
            Self { groups }
        } else {
            Self {
                groups: (1..=periods).map(|i| (i, i)).collect(),
            }
        }
    }

    /// Groups must partition `1..=periods` in order.
    pub fn validate(&self, periods: u32) -> Result<()> {
        let mut next = 1;
        for &(a, b) in &self.groups {
            if a != next || b < a {
                return Err(Error::Argument(format!(
                    "grouping must cover 1..={periods} in order without gaps; found {a}-{b} where {next} was expected"
                )));
            }
            next = b + 1;
        }
        if next != periods + 1 {
            return Err(Error::Argument(format!("grouping ends at {}, expected {periods}", next - 1)));
        }
        Ok(())
    }

    fn group_of(&self, period: u32) -> Option<usize> {
        self.groups.iter().position(|&(a, b)| (a..=b).contains(&period))
    }
}

impl FromStr for Grouping {
    type Err = Error;

    /// `"1-10,11-20,21"`.
    fn from_str(s: &str) -> Result<Self> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u32>()
                .map_err(|_| Error::Argument(format!("bad period '{t}' in grouping '{s}'")))
        };
        let groups = s
            .split(',')
            .filter(|t| !t.trim().is_empty())
            .map(|tok| match tok.split_once('-') {
                Some((a, b)) => Ok((parse(a)?, parse(b)?)),
                None => parse(tok).map(|v| (v, v)),
            })
            .collect::<Result<Vec<_>>>()?;
        if groups.is_empty() {
            return Err(Error::Argument("empty grouping".into()));
        }
        Ok(Self { groups })
    }
}

impl fmt::Display for Grouping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .groups
            .iter()
            .map(|&(a, b)| if a == b { a.to_string() } else { format!("{a}-{b}") })
            .collect();
        f.write_str(&parts.join(","))
    }
}

/// Future payments (payment periods after `I`) per group.
pub fn target_outstanding(payments: &[PaymentRecord], periods: u32, grouping: &Grouping) -> Result<Vec<f64>> {
    grouping.validate(periods)?;
    let mut out = vec![0.0; grouping.groups.len()];
    let mut future: Vec<&PaymentRecord> = payments.iter().filter(|p| p.payment_period > periods).collect();
    future.sort_by_key(|p| (p.claim_id, p.payment_no));
    for p in future {
        let g = grouping
            .group_of(p.occurrence_period())
            .ok_or_else(|| Error::Inconsistent(format!("occurrence period {} outside grouping", p.occurrence_period())))?;
        out[g] += p.amount_inflated;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReserveRow {
    pub label: String,
    pub target: f64,
    pub estimate: f64,
}

impl ReserveRow {
    /// `estimate / target - 1`, in percent.
    pub fn ratio_pct(&self) -> Option<f64> {
        (self.target != 0.0).then(|| 100.0 * (self.estimate / self.target - 1.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReserveReport {
    pub rows: Vec<ReserveRow>,
    pub total: ReserveRow,
}

/// Chain-ladder reserves from the observed triangle against the simulated
/// future payments, by occurrence group.
pub fn reserve_report(past: &Triangle, payments: &[PaymentRecord], grouping: &Grouping) -> Result<ReserveReport> {
    let periods = past.size() as u32;
    let targets = target_outstanding(payments, periods, grouping)?;
    let projection = project(past, &fit_chain_ladder(past)?)?;
    let rows: Vec<ReserveRow> = grouping
        .groups
        .iter()
        .zip(targets)
        .map(|(&(a, b), target)| ReserveRow {
            label: if a == b { a.to_string() } else { format!("{a} to {b}") },
            target,
            estimate: projection.reserves[(a - 1) as usize..b as usize].iter().sum(),
        })
        .collect();
    let total = ReserveRow {
        label: "Total".into(),
        target: rows.iter().map(|r| r.target).sum(),
        estimate: rows.iter().map(|r| r.estimate).sum(),
    };
    Ok(ReserveReport { rows, total })
}

/// Size band in currency units, `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SizeBucket {
    pub lower: f64,
    pub upper: Option<f64>,
}

impl SizeBucket {
    pub fn contains(&self, x: f64) -> bool {
        x >= self.lower && self.upper.is_none_or(|u| x < u)
    }

    pub fn label(&self) -> String {
        let k = |v: f64| format!("{}", v / 1000.0);
        match self.upper {
            Some(u) => format!("{} to {}", k(self.lower), k(u)),
            None => format!("over {}", k(self.lower)),
        }
    }
}

/// Size bands ($K): 0-1, 1-2, 4-5, 8-10, 20-50, 50-100, over 100.
pub fn default_buckets() -> Vec<SizeBucket> {
    let b = |lo: f64, hi: Option<f64>| SizeBucket {
        lower: lo * 1000.0,
        upper: hi.map(|h| h * 1000.0),
    };
    vec![
        b(0.0, Some(1.0)),
        b(1.0, Some(2.0)),
        b(4.0, Some(5.0)),
        b(8.0, Some(10.0)),
        b(20.0, Some(50.0)),
        b(50.0, Some(100.0)),
        b(100.0, None),
    ]
}

pub const DEFAULT_M_VALUES: [u32; 6] = [1, 2, 3, 5, 7, 9];

#[derive(Debug, Clone, PartialEq)]
pub struct DependencyCell {
    pub mean_next: f64,
    pub claims: usize,
}

/// Average constant-dollar size of payment `m + 1` given the size band of
/// payment `m`; `None` where no claim qualifies.
#[derive(Debug, Clone, PartialEq)]
pub struct DependencyTable {
    pub buckets: Vec<SizeBucket>,
    pub m_values: Vec<u32>,
    /// `cells[bucket][m_index]`.
    pub cells: Vec<Vec<Option<DependencyCell>>>,
}

impl DependencyTable {
    pub fn mean(&self, bucket: usize, m: u32) -> Option<f64> {
        let k = self.m_values.iter().position(|&v| v == m)?;
        self.cells[bucket][k].as_ref().map(|c| c.mean_next)
    }
}

pub fn dependency_table(
    claims: &[ClaimRecord],
    payments: &[PaymentRecord],
    m_values: &[u32],
    buckets: &[SizeBucket],
) -> Result<DependencyTable> {
    let counts: BTreeMap<u64, u32> = claims.iter().map(|c| (c.claim_id, c.payment_count)).collect();
    let mut by_claim: BTreeMap<u64, Vec<(u32, f64)>> = BTreeMap::new();
    for p in payments {
        by_claim.entry(p.claim_id).or_default().push((p.payment_no, p.amount_constant));
    }
    let mut sums = vec![vec![(0.0f64, 0usize); m_values.len()]; buckets.len()];
    for (id, mut seq) in by_claim {
        seq.sort_by_key(|(no, _)| *no);
        let count = counts.get(&id).copied().unwrap_or(seq.len() as u32);
        if count as usize != seq.len() {
            return Err(Error::Inconsistent(format!(
                "claim {id} lists {count} payments but {} were found",
                seq.len()
            )));
        }
        for (k, &m) in m_values.iter().enumerate() {
            if m == 0 || count < m + 1 {
                continue;
            }
            let this = seq[(m - 1) as usize].1;
            let next = seq[m as usize].1;
            if let Some(b) = buckets.iter().position(|b| b.contains(this)) {
                sums[b][k].0 += next;
                sums[b][k].1 += 1;
            }
        }
    }
    let cells = sums
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|(s, n)| (n > 0).then(|| DependencyCell { mean_next: s / n as f64, claims: n }))
                .collect()
        })
        .collect();
    Ok(DependencyTable {
        buckets: buckets.to_vec(),
        m_values: m_values.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aggregation::TriangleKind;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn oracle() -> Triangle {
        Triangle::from_rows(&[vec![100.0, 150.0, 165.0], vec![120.0, 180.0], vec![140.0]], TriangleKind::Cumulative).unwrap()
    }

    #[test]
    fn three_row_oracle() {
        let tri = oracle();
        let f = fit_chain_ladder(&tri).unwrap();
        assert_relative_eq!(f.factors[0], 1.5, max_relative = 1e-12);
        assert_relative_eq!(f.factors[1], 1.1, max_relative = 1e-12);
        let p = project(&tri, &f).unwrap();
        for (got, want) in p.ultimates.iter().zip([165.0, 198.0, 231.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        for (got, want) in p.reserves.iter().zip([0.0, 18.0, 91.0]) {
            assert!((got - want).abs() < 1e-9);
        }
        assert!((p.total_reserve() - 109.0).abs() < 1e-9);
    }

    #[test]
    fn single_row_triangle() {
        let tri = Triangle::from_rows(&[vec![5.0]], TriangleKind::Cumulative).unwrap();
        let f = fit_chain_ladder(&tri).unwrap();
        assert!(f.factors.is_empty());
        assert_eq!(project(&tri, &f).unwrap().reserves, vec![0.0]);
    }

    #[test]
    fn identical_rows_give_row_ratios() {
        let row = vec![10.0, 20.0, 25.0, 26.0];
        let tri = Triangle::from_rows(&vec![row.clone(); 4], TriangleKind::Cumulative).unwrap();
        let f = fit_chain_ladder(&tri).unwrap();
        for j in 0..3 {
            assert_relative_eq!(f.factors[j], row[j + 1] / row[j], max_relative = 1e-14);
        }
    }

    #[test]
    fn unit_factors_mean_no_reserve() {
        let tri = oracle();
        let p = project(&tri, &DevelopmentFactors { factors: vec![1.0, 1.0] }).unwrap();
        assert_eq!(p.reserves, vec![0.0, 0.0, 0.0]);
    }

    #[test]
    fn zero_column_is_an_error() {
        let tri = Triangle::from_rows(&[vec![0.0, 1.0], vec![0.0]], TriangleKind::Cumulative).unwrap();
        let err = fit_chain_ladder(&tri).unwrap_err();
        assert!(err.to_string().contains("factor 1"), "{err}");
    }

    #[test]
    fn last_row_reserve_telescopes() {
        let tri = oracle();
        let f = fit_chain_ladder(&tri).unwrap();
        let p = project(&tri, &f).unwrap();
        let prod: f64 = f.factors.iter().product();
        assert_relative_eq!(p.reserves[2], 140.0 * (prod - 1.0), max_relative = 1e-12);
    }

    #[test]
    fn grouping_parse_and_default() {
        let g: Grouping = "1-10,11-20,21-25,26-30,31,32,33,34,35,36,37,38,39,40".parse().unwrap();
        assert_eq!(g, Grouping::default_for(40));
        assert_eq!(g.to_string(), "1-10,11-20,21-25,26-30,31,32,33,34,35,36,37,38,39,40");
        assert!(g.validate(40).is_ok());
        assert!(g.validate(41).is_err());
        assert!("1-3,5".parse::<Grouping>().unwrap().validate(5).is_err());
        assert!("a-b".parse::<Grouping>().is_err());
        assert_eq!(Grouping::default_for(3).groups, vec![(1, 1), (2, 2), (3, 3)]);
    }

    fn payment(claim_id: u64, no: u32, i: u32, t: u32, constant: f64, inflated: f64) -> PaymentRecord {
        PaymentRecord {
            claim_id,
            payment_no: no,
            inter_partial_delay: 1.0,
            epoch: f64::from(t) - 0.5,
            capped_epoch: f64::from(t) - 0.5,
            payment_period: t,
            development_period: t + 1 - i,
            amount_constant: constant,
            amount_inflated: inflated,
        }
    }

    #[test]
    fn target_outstanding_groups() {
        let g = Grouping::default_for(3);
        assert_eq!(target_outstanding(&[], 3, &g).unwrap(), vec![0.0; 3]);
        let ps = vec![payment(1, 1, 2, 3, 1.0, 4.0), payment(1, 2, 2, 4, 1.0, 5.0), payment(2, 1, 3, 5, 1.0, 6.0)];
        let t = target_outstanding(&ps, 3, &g).unwrap();
        assert_eq!(t, vec![0.0, 5.0, 6.0]);
    }

    #[test]
    fn report_totals_consistent() {
        let ps = vec![
            payment(1, 1, 1, 1, 1.0, 100.0),
            payment(1, 2, 1, 2, 1.0, 50.0),
            payment(2, 1, 2, 2, 1.0, 120.0),
            payment(2, 2, 2, 3, 1.0, 60.0),
            payment(3, 1, 3, 3, 1.0, 140.0),
            payment(3, 2, 3, 4, 1.0, 70.0),
            payment(2, 3, 2, 4, 1.0, 10.0),
        ];
        let past = crate::aggregation::past_triangle(&ps, 3, TriangleKind::Cumulative).unwrap();
        let r = reserve_report(&past, &ps, &"1-2,3".parse().unwrap()).unwrap();
        assert_eq!(r.rows.len(), 2);
        assert_relative_eq!(r.total.target, 80.0);
        assert_relative_eq!(r.total.estimate, r.rows.iter().map(|x| x.estimate).sum::<f64>());
        assert_eq!(r.rows[0].label, "1 to 2");
    }

    fn claim(id: u64, count: u32) -> ClaimRecord {
        ClaimRecord {
            claim_id: id,
            occurrence_period: 1,
            occurrence_time: 0.5,
            claim_size: 1.0,
            notification_delay: 0.1,
            settlement_delay: 1.0,
            payment_count: count,
        }
    }

    #[test]
    fn dependency_cells() {
        let claims = vec![claim(1, 2), claim(2, 1)];
        let ps = vec![payment(1, 1, 1, 1, 1_500.0, 0.0), payment(1, 2, 1, 2, 700.0, 0.0), payment(2, 1, 1, 1, 600.0, 0.0)];
        let t = dependency_table(&claims, &ps, &DEFAULT_M_VALUES, &default_buckets()).unwrap();
        assert_eq!(t.mean(1, 1), Some(700.0));
        assert_eq!(t.mean(0, 1), None);
        assert_eq!(t.mean(1, 2), None);
        assert_eq!(t.buckets[6].label(), "over 100");
        assert_eq!(t.buckets[3].label(), "8 to 10");
    }

    proptest! {
        #[test]
        fn proportional_rows_reproduce_pattern(
            pattern in proptest::collection::vec(0.01f64..1.0, 2..10),
            scales in proptest::collection::vec(0.1f64..100.0, 10),
        ) {
            let n = pattern.len();
            let cum_pattern: Vec<f64> = pattern.iter().scan(0.0, |a, x| { *a += x; Some(*a) }).collect();
            let rows: Vec<Vec<f64>> = (0..n).map(|i| cum_pattern[..n - i].iter().map(|c| c * scales[i]).collect()).collect();
            let tri = Triangle::from_rows(&rows, TriangleKind::Cumulative).unwrap();
            let p = project(&tri, &fit_chain_ladder(&tri).unwrap()).unwrap();
            for i in 0..n {
                for j in 0..n {
                    let want = cum_pattern[j] * scales[i];
                    prop_assert!((p.completed[i][j] - want).abs() <= 1e-9 * want.max(1.0));
                }
            }
            let sum: f64 = p.reserves.iter().sum();
            prop_assert!((p.total_reserve() - sum).abs() < 1e-12 * sum.abs().max(1.0));
        }
    }
}
