//! Series assembly from rectangle sweeps.
//!
//! Every walk has a unique bounding box. Boxes with `W < L` are swept once in
//! the lying orientation and counted twice; square boxes are swept directly.
//! The engine counts undirected walks, so every box contributes twice more
//! for the two directions of traversal.

use num_bigint::BigUint;
use thiserror::Error;

use crate::modseries::{ModError, ModulusSet, Quantity, SeriesTable, SeriesValues, TruncatedPolynomial};
use crate::tm::{sweep, CompletionLedger, EngineError, SweepConfig, SweepStats};

#[derive(Debug, Error)]
pub enum PlanError {
    #[error(transparent)]
    Modulus(#[from] ModError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("box {width}x{length} is not lying: width must not exceed length")]
    NotLying { width: usize, length: usize },
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

#[derive(Debug, Clone)]
pub struct RunPlan {
    pub w_max: usize,
    pub moduli: ModulusSet,
    pub workers: usize,
    pub prune: bool,
}

impl RunPlan {
    pub fn new(w_max: usize) -> Self {
        Self { w_max, moduli: ModulusSet::default_counts(), workers: 1, prune: true }
    }

    pub fn n_max(&self) -> u32 {
        2 * self.w_max as u32 + 1
    }

    /// Last column index swept at `width`.
    pub fn columns(&self, width: usize) -> usize {
        2 * self.w_max + 1 - width
    }

    fn config(&self, width: usize) -> SweepConfig {
        SweepConfig {
            width,
            columns: self.columns(width),
            n_max: self.n_max(),
            prune: self.prune,
            workers: self.workers,
            check_states: false,
        }
    }

    fn in_pool<T: Send>(&self, job: impl FnOnce() -> T + Send) -> Result<T, PlanError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.workers.max(1))
            .build()
            .map_err(|e| PlanError::Pool(e.to_string()))?;
        Ok(pool.install(job))
    }
}

/// Per-width sweep output, kept for inspection.
#[derive(Debug, Clone)]
pub struct WidthRun {
    pub width: usize,
    pub ledger: CompletionLedger,
    pub stats: SweepStats,
}

#[derive(Debug, Clone)]
pub struct Enumeration {
    pub series: SeriesTable,
    pub widths: Vec<WidthRun>,
}

/// Sums the ledgers of all widths into the residue series `c_0..=c_N`.
pub fn assemble(plan: &RunPlan, widths: &[WidthRun]) -> SeriesTable {
    let m = plan.moduli.len();
    let n_max = plan.n_max();
    let mut total = TruncatedPolynomial::zero();
    for run in widths {
        for (x, poly) in run.ledger.per_column.iter().enumerate().skip(run.width) {
            let factor = if x > run.width { 4 } else { 2 };
            let mut p = poly.clone();
            p.scale(factor, &plan.moduli);
            total.add_shifted(&p, 0, n_max, &plan.moduli);
        }
    }
    let mut rows = total.to_rows(n_max, m);
    rows[0] = vec![1; m];
    SeriesTable {
        quantity: Quantity::Count,
        first_n: 0,
        values: SeriesValues::Residues { moduli: plan.moduli.values(), rows },
        meta: Default::default(),
    }
    .with_meta("w_max", plan.w_max)
}

pub fn enumerate(plan: &RunPlan) -> Result<Enumeration, PlanError> {
    let widths = plan.in_pool(|| {
        (0..=plan.w_max)
            .map(|w| {
                sweep(&plan.config(w), &plan.moduli).map(|(ledger, stats)| WidthRun { width: w, ledger, stats })
            })
            .collect::<Result<Vec<_>, _>>()
    })??;
    Ok(Enumeration { series: assemble(plan, &widths), widths })
}

/// Directed walks of each length whose bounding box is exactly `width`
/// cells high and `length` cells long.
pub fn box_counts(plan: &RunPlan, width: usize, length: usize) -> Result<Vec<BigUint>, PlanError> {
    if width > length {
        return Err(PlanError::NotLying { width, length });
    }
    let cfg = SweepConfig { columns: length, ..plan.config(width) };
    let (ledger, _) = plan.in_pool(|| sweep(&cfg, &plan.moduli))??;
    let mut poly = ledger.per_column[length].clone();
    poly.scale(2, &plan.moduli);
    let rows = poly.to_rows(cfg.n_max, plan.moduli.len());
    let values = plan.moduli.values();
    rows.iter()
        .map(|r| crate::modseries::crt_reconstruct(r, &values).map_err(PlanError::from))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(plan: &RunPlan) -> Vec<BigUint> {
        enumerate(plan).unwrap().series.to_exact().unwrap().coefficients().unwrap()
    }

    #[test]
    fn smallest_plans() {
        let expect = |v: &[u32]| v.iter().map(|&x| BigUint::from(x)).collect::<Vec<_>>();
        assert_eq!(exact(&RunPlan::new(0)), expect(&[1, 4]));
        assert_eq!(exact(&RunPlan::new(1)), expect(&[1, 4, 12, 36]));
        assert_eq!(exact(&RunPlan::new(2)), expect(&[1, 4, 12, 36, 100, 284]));
    }

    #[test]
    fn degenerate_boxes() {
        let plan = RunPlan::new(2);
        let b = box_counts(&plan, 0, 1).unwrap();
        assert_eq!(b[1], BigUint::from(2u32));
        assert!(b.iter().enumerate().all(|(n, c)| n == 1 || *c == BigUint::from(0u32)));
        assert_eq!(box_counts(&plan, 1, 1).unwrap()[2], BigUint::from(8u32));
        assert!(matches!(box_counts(&plan, 2, 1), Err(PlanError::NotLying { .. })));
    }

    #[test]
    fn matches_oracle_up_to_width_four() {
        for w in [3, 4] {
            let plan = RunPlan::new(w);
            let oracle = crate::oracle::count_walks(2 * w + 1).coefficients().unwrap();
            assert_eq!(exact(&plan), oracle, "w_max = {w}");
        }
    }
}
