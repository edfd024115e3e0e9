//! Transaction-level records and occurrence x development triangles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One simulated claim. Monetary fields are in currency units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimRecord {
    pub claim_id: u64,
    pub occurrence_period: u32,
    pub occurrence_time: f64,
    pub claim_size: f64,
    pub notification_delay: f64,
    pub settlement_delay: f64,
    pub payment_count: u32,
}

impl ClaimRecord {
    pub fn notification_time(&self) -> f64 {
        self.occurrence_time + self.notification_delay
    }

    pub fn settlement_time(&self) -> f64 {
        self.notification_time() + self.settlement_delay
    }
}

/// One partial payment. `epoch` is the simulated time; `capped_epoch` is
/// the time used for inflation and tabulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PaymentRecord {
    pub claim_id: u64,
    pub payment_no: u32,
    pub inter_partial_delay: f64,
    pub epoch: f64,
    pub capped_epoch: f64,
    pub payment_period: u32,
    pub development_period: u32,
    pub amount_constant: f64,
    pub amount_inflated: f64,
}

impl PaymentRecord {
    pub fn occurrence_period(&self) -> u32 {
        self.payment_period + 1 - self.development_period
    }

    pub fn is_out_of_bounds(&self) -> bool {
        self.epoch > self.capped_epoch
    }
}

/// Epochs beyond development period `I` are moved to its end, `i - 1 + I`.
pub fn cap_out_of_bounds(epoch: f64, occurrence_period: u32, periods: u32) -> f64 {
    epoch.min(f64::from(occurrence_period) - 1.0 + f64::from(periods))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutOfBoundsMode {
    /// Accumulate out-of-bounds payments into development period `I`.
    #[default]
    Cap,
    /// Keep them in a separate tail cell per occurrence period.
    Tail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum TriangleKind {
    #[default]
    #[serde(rename = "incr")]
    Incremental,
    #[serde(rename = "cum")]
    Cumulative,
}

/// Which cells carry data: the full square, or only the upper-left
/// triangle `i + j - 1 <= I` (payments observed to date).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Extent {
    #[default]
    Full,
    Upper,
}

/// Square triangle; rows are occurrence periods, columns development periods
/// (both 0-based in storage).
#[derive(Debug, Clone, PartialEq)]
pub struct Triangle {
    pub cells: Vec<Vec<f64>>,
    pub kind: TriangleKind,
    pub extent: Extent,
    pub tail: Option<Vec<f64>>,
}

impl Triangle {
    pub fn zeros(size: usize, kind: TriangleKind) -> Self {
        Self {
            cells: vec![vec![0.0; size]; size],
            kind,
            extent: Extent::Full,
            tail: None,
        }
    }

    /// Build from cumulative or incremental rows; row `k` may be shorter than
    /// the square (missing cells are unobserved). A ragged input is treated
    /// as an upper triangle.
    pub fn from_rows(rows: &[Vec<f64>], kind: TriangleKind) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::Argument("empty triangle".into()));
        }
        let mut extent = Extent::Full;
        let mut cells = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter().enumerate() {
            if row.len() > n {
                return Err(Error::Argument(format!("row {} has {} cells for a {n}x{n} triangle", i + 1, row.len())));
            }
            if row.len() < n {
                extent = Extent::Upper;
            }
            cells[i][..row.len()].copy_from_slice(row);
        }
        if extent == Extent::Upper {
            for (i, row) in rows.iter().enumerate() {
                if row.len() < n - i {
                    return Err(Error::Argument(format!(
                        "row {} has {} cells; an upper triangle needs {}",
                        i + 1,
                        row.len(),
                        n - i
                    )));
                }
            }
        }
        Ok(Self {
            cells,
            kind,
            extent,
            tail: None,
        })
    }

    pub fn size(&self) -> usize {
        self.cells.len()
    }

    /// Whether cell `(i, j)` (0-based) holds data.
    pub fn is_observed(&self, i: usize, j: usize) -> bool {
        match self.extent {
            Extent::Full => true,
            Extent::Upper => i + j < self.size(),
        }
    }

    pub fn to_cumulative(&self) -> Self {
        if self.kind == TriangleKind::Cumulative {
            return self.clone();
        }
        let mut out = self.clone();
        for (i, row) in out.cells.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, c) in row.iter_mut().enumerate() {
                if self.is_observed(i, j) {
                    acc += *c;
                    *c = acc;
                }
            }
        }
        out.kind = TriangleKind::Cumulative;
        out
    }

    pub fn to_incremental(&self) -> Self {
        if self.kind == TriangleKind::Incremental {
            return self.clone();
        }
        let mut out = self.clone();
        for (i, row) in out.cells.iter_mut().enumerate() {
            for j in (1..row.len()).rev() {
                if self.is_observed(i, j) {
                    row[j] -= row[j - 1];
                }
            }
        }
        out.kind = TriangleKind::Incremental;
        out
    }

    pub fn with_kind(&self, kind: TriangleKind) -> Self {
        match kind {
            TriangleKind::Incremental => self.to_incremental(),
            TriangleKind::Cumulative => self.to_cumulative(),
        }
    }

    /// Total mass: incremental cells plus tail.
    pub fn total(&self) -> f64 {
        let inc = self.to_incremental();
        let inc = &inc;
        let body: f64 = inc
            .cells
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().filter(move |(j, _)| inc.is_observed(i, *j)).map(|(_, v)| *v))
            .sum();
        body + self.tail.as_ref().map_or(0.0, |t| t.iter().sum())
    }

    /// Latest observed cumulative value per row (the diagonal of an upper triangle).
    pub fn latest(&self) -> Vec<f64> {
        let cum = self.to_cumulative();
        let n = self.size();
        (0..n)
            .map(|i| match self.extent {
                Extent::Full => cum.cells[i][n - 1],
                Extent::Upper => cum.cells[i][n - 1 - i],
            })
            .collect()
    }
}

/// Sum paid amounts into occurrence x development cells. Payments are
/// accumulated in `(claim_id, payment_no)` order so the result does not
/// depend on input order.
pub fn build_triangle(
    payments: &[PaymentRecord],
    periods: u32,
    mode: OutOfBoundsMode,
    kind: TriangleKind,
) -> Result<Triangle> {
    let n = periods as usize;
    let mut tri = Triangle::zeros(n, TriangleKind::Incremental);
    if mode == OutOfBoundsMode::Tail {
        tri.tail = Some(vec![0.0; n]);
    }
    let mut order: Vec<&PaymentRecord> = payments.iter().collect();
    order.sort_by_key(|p| (p.claim_id, p.payment_no));
    for p in order {
        let i = p.occurrence_period() as usize;
        let j = p.development_period as usize;
        if i == 0 || i > n || j == 0 || j > n {
            return Err(Error::Inconsistent(format!(
                "payment {}/{} maps to cell ({i}, {j}) outside a {n}x{n} triangle",
                p.claim_id, p.payment_no
            )));
        }
        match (mode, &mut tri.tail) {
            (OutOfBoundsMode::Tail, Some(tail)) if p.is_out_of_bounds() => tail[i - 1] += p.amount_inflated,
            _ => tri.cells[i - 1][j - 1] += p.amount_inflated,
        }
    }
    Ok(tri.with_kind(kind))
}

/// Coarsen periods by `factor` (e.g. quarters to years). A fine cell maps to
/// coarse row `ceil(i / f)` and the coarse development period implied by its
/// payment period, `ceil((i + j - 1) / f) - row + 1`. Cells whose coarse
/// development index would pass the last column are folded into it.
pub fn reaggregate(tri: &Triangle, factor: usize) -> Result<Triangle> {
    let n = tri.size();
    if factor == 0 || !n.is_multiple_of(factor) {
        return Err(Error::Argument(format!(
            "aggregation factor {factor} does not divide triangle size {n}"
        )));
    }
    let coarse = n / factor;
    let inc = tri.to_incremental();
    let mut out = Triangle::zeros(coarse, TriangleKind::Incremental);
    out.extent = tri.extent;
    for i in 1..=n {
        let a = i.div_ceil(factor);
        for j in 1..=n {
            if !inc.is_observed(i - 1, j - 1) {
                continue;
            }
            let b = ((i + j - 1).div_ceil(factor) + 1 - a).min(coarse);
            out.cells[a - 1][b - 1] += inc.cells[i - 1][j - 1];
        }
    }
    if let Some(tail) = &tri.tail {
        let mut t = vec![0.0; coarse];
        for (i, v) in tail.iter().enumerate() {
            t[i / factor] += v;
        }
        out.tail = Some(t);
    }
    Ok(out.with_kind(tri.kind))
}

/// Partition by payment period: `1..=I` observed, `I+1..` future.
pub fn split_past_future(payments: &[PaymentRecord], periods: u32) -> (Vec<PaymentRecord>, Vec<PaymentRecord>) {
    payments.iter().cloned().partition(|p| p.payment_period <= periods)
}

/// Triangle of payments made in payment periods `1..=I`.
pub fn past_triangle(payments: &[PaymentRecord], periods: u32, kind: TriangleKind) -> Result<Triangle> {
    let (past, _) = split_past_future(payments, periods);
    let mut tri = build_triangle(&past, periods, OutOfBoundsMode::Cap, TriangleKind::Incremental)?;
    tri.extent = Extent::Upper;
    Ok(tri.with_kind(kind))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn payment(claim_id: u64, i: u32, epoch: f64, periods: u32, amount: f64) -> PaymentRecord {
        let capped = cap_out_of_bounds(epoch, i, periods);
        let t = crate::time_model::payment_period_of(capped).unwrap();
        PaymentRecord {
            claim_id,
            payment_no: 1,
            inter_partial_delay: 1.0,
            epoch,
            capped_epoch: capped,
            payment_period: t,
            development_period: t + 1 - i,
            amount_constant: amount,
            amount_inflated: amount,
        }
    }

    #[test]
    fn capping_examples() {
        assert_eq!(cap_out_of_bounds(45.2, 3, 40), 42.0);
        assert_eq!(cap_out_of_bounds(10.0, 3, 40), 10.0);
        let p = payment(1, 3, 45.2, 40, 1.0);
        assert_eq!(p.epoch, 45.2);
        assert_eq!(p.development_period, 40);
        assert!(p.is_out_of_bounds());
    }

    #[test]
    fn single_payment_triangle() {
        let tri = build_triangle(&[payment(1, 1, 0.5, 3, 100.0)], 3, OutOfBoundsMode::Cap, TriangleKind::Incremental).unwrap();
        assert_eq!(tri.cells, vec![vec![100.0, 0.0, 0.0], vec![0.0; 3], vec![0.0; 3]]);
    }

    #[test]
    fn cumulative_running_sums() {
        let tri = Triangle::from_rows(&[vec![10.0, 5.0, 0.0], vec![1.0, 1.0, 1.0], vec![0.0; 3]], TriangleKind::Incremental).unwrap();
        assert_eq!(tri.to_cumulative().cells[0], vec![10.0, 15.0, 15.0]);
        assert_eq!(tri.to_cumulative().to_incremental(), tri);
    }

    #[test]
    fn tail_and_cap_differ_only_in_last_column() {
        let ps = vec![payment(1, 1, 0.5, 3, 10.0), payment(2, 2, 4.5, 3, 7.0), payment(3, 2, 3.5, 3, 2.0)];
        let cap = build_triangle(&ps, 3, OutOfBoundsMode::Cap, TriangleKind::Incremental).unwrap();
        let tail = build_triangle(&ps, 3, OutOfBoundsMode::Tail, TriangleKind::Incremental).unwrap();
        assert_eq!(cap.cells[1][2], 9.0);
        assert_eq!(tail.cells[1][2], 2.0);
        assert_eq!(tail.tail.as_ref().unwrap(), &vec![0.0, 7.0, 0.0]);
        assert_eq!(cap.total(), tail.total());
        for i in 0..3 {
            for j in 0..2 {
                assert_eq!(cap.cells[i][j], tail.cells[i][j]);
            }
        }
    }

    #[test]
    fn reaggregate_identity_and_shape() {
        let tri = Triangle::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]], TriangleKind::Incremental).unwrap();
        assert_eq!(reaggregate(&tri, 1).unwrap(), tri);
        let big = Triangle::zeros(40, TriangleKind::Incremental);
        assert_eq!(reaggregate(&big, 4).unwrap().size(), 10);
        assert!(reaggregate(&big, 3).is_err());
    }

    #[test]
    fn reaggregate_follows_payment_period() {
        // quarter 2 of year 1, development quarter 3 -> payment quarter 4 -> year 1, dev year 1
        let mut tri = Triangle::zeros(8, TriangleKind::Incremental);
        tri.cells[1][2] = 5.0;
        // quarter 4, dev quarter 2 -> payment quarter 5 -> year 2, dev year 2
        tri.cells[3][1] = 7.0;
        let y = reaggregate(&tri, 4).unwrap();
        assert_eq!(y.cells, vec![vec![5.0, 7.0], vec![0.0, 0.0]]);
    }

    #[test]
    fn split_boundary() {
        let ps = vec![payment(1, 1, 39.5, 40, 1.0), payment(2, 1, 40.5, 40, 1.0)];
        // the second is capped back into payment period 40
        let (past, future) = split_past_future(&ps, 40);
        assert_eq!(past.len(), 2);
        assert!(future.is_empty());
        assert!(past.iter().all(|p| p.payment_period == 40));
        let ps = vec![payment(1, 2, 40.5, 40, 1.0)];
        let (past, future) = split_past_future(&ps, 40);
        assert!(past.is_empty());
        assert_eq!(future[0].payment_period, 41);
    }

    #[test]
    fn latest_diagonal_of_upper_triangle() {
        let tri = Triangle::from_rows(&[vec![100.0, 150.0, 165.0], vec![120.0, 180.0], vec![140.0]], TriangleKind::Cumulative).unwrap();
        assert_eq!(tri.extent, Extent::Upper);
        assert_eq!(tri.latest(), vec![165.0, 180.0, 140.0]);
        assert_relative_eq!(tri.total(), 485.0);
    }

    fn arb_payments() -> impl Strategy<Value = Vec<(u32, f64, f64)>> {
        proptest::collection::vec((1u32..=8, 0.0f64..20.0, 0.0f64..1000.0), 0..200)
    }

    proptest! {
        #[test]
        fn mass_is_conserved(raw in arb_payments(), factor in prop_oneof![Just(1usize), Just(2), Just(4)], tail in any::<bool>()) {
            let periods = 8;
            let ps: Vec<PaymentRecord> = raw
                .iter()
                .enumerate()
                .map(|(k, &(i, off, amt))| payment(k as u64, i, f64::from(i) - 1.0 + off + 1e-6, periods, amt))
                .collect();
            let expected: f64 = ps.iter().map(|p| p.amount_inflated).sum();
            let mode = if tail { OutOfBoundsMode::Tail } else { OutOfBoundsMode::Cap };
            let tri = build_triangle(&ps, periods, mode, TriangleKind::Cumulative).unwrap();
            prop_assert!((tri.total() - expected).abs() <= 1e-9 * (1.0 + expected));
            let coarse = reaggregate(&tri, factor).unwrap();
            prop_assert!((coarse.total() - expected).abs() <= 1e-9 * (1.0 + expected));
            let past = past_triangle(&ps, periods, TriangleKind::Incremental).unwrap();
            let (p, _) = split_past_future(&ps, periods);
            let past_sum: f64 = p.iter().map(|x| x.amount_inflated).sum();
            prop_assert!((past.total() - past_sum).abs() <= 1e-9 * (1.0 + past_sum));
            for (i, row) in past.cells.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    if i + j >= periods as usize {
                        prop_assert_eq!(*v, 0.0);
                    }
                }
            }
        }
    }
}
