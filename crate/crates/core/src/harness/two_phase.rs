use serde::{Deserialize, Serialize};

use crate::concentration::{rho, DEFAULT_WALK_SUPPORT};
use crate::error::{Error, Result};
use crate::linalg::{kernel_basis, rank, FieldSpec};
use crate::matrix::{generate, ColumnSelection, SeedSpec, SignMatrix};
use crate::prob::ExactProb;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoPhaseConfig {
    pub n: usize,
    pub d: usize,
    pub s: usize,
    /// Fraction of rows held back; `n1 = ⌈(1-β)n⌉`.
    pub beta: f64,
    pub field: FieldSpec,
    pub seed: SeedSpec,
}

impl TwoPhaseConfig {
    /// `(n1, n2)` after validating the configuration.
    pub fn split(&self) -> Result<(usize, usize)> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::InvalidArgument(format!("beta must lie in (0, 1), got {}", self.beta)));
        }
        if self.n == 0 {
            return Err(Error::InvalidArgument("n must be positive".into()));
        }
        if self.s > self.d {
            return Err(Error::InvalidArgument(format!("s = {} exceeds d = {}", self.s, self.d)));
        }
        // The slack keeps products like 0.7 * 20 from rounding up past 14.
        let n1 = (((1.0 - self.beta) * self.n as f64 - 1e-9).ceil() as usize).min(self.n);
        Ok((n1, self.n - n1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TwoPhaseTrace {
    pub n1: usize,
    pub n2: usize,
    /// Rank of the target columns in the first `n1` rows.
    pub initial_rank: usize,
    /// Per exposed row: whether it raised the rank of `I ∪ {j}`.
    pub flags: Vec<bool>,
    /// Rank of all target columns after each exposed row.
    pub ranks: Vec<usize>,
    pub failures: usize,
    /// Per exposed row: ρ of the dependency that row was tested against,
    /// or `None` when its support is too large to enumerate.
    pub rhos: Vec<Option<ExactProb>>,
    pub final_rank: usize,
    pub exposed_rows: usize,
}

/// The two independently seeded row blocks `(M1, M2)`.
pub fn two_phase_matrices(cfg: &TwoPhaseConfig) -> Result<(SignMatrix, SignMatrix)> {
    let (n1, n2) = cfg.split()?;
    Ok((generate(n1, cfg.d, cfg.seed.derive(1)), generate(n2, cfg.d, cfg.seed.derive(2))))
}

/// Boosts the rank of `target` by exposing the rows of `M2` one at a time.
///
/// Before each row, `I` is a maximal independent subset of the target
/// columns and `j` the first target column outside `I`; the columns
/// `I ∪ {j}` carry a unique dependency `w`. A row is a success when it
/// raises the rank of `I ∪ {j}`, which happens unless the row is
/// orthogonal to `w`. Stops at full rank or when `M2` runs out.
pub fn two_phase_simulation(cfg: &TwoPhaseConfig, target: &ColumnSelection) -> Result<TwoPhaseTrace> {
    if target.len() != cfg.s {
        return Err(Error::InvalidArgument(format!("target has {} columns, expected s = {}", target.len(), cfg.s)));
    }
    if let Some(&j) = target.indices().iter().find(|&&j| j >= cfg.d) {
        return Err(Error::IndexOutOfRange { index: j, columns: cfg.d });
    }
    let (m1, m2) = two_phase_matrices(cfg)?;
    let (n1, n2) = (m1.rows(), m2.rows());
    let mut current = m1.select_columns(target)?;
    let rest = m2.select_columns(target)?;
    let initial = rank(&current, cfg.field);
    let mut trace = TwoPhaseTrace {
        n1,
        n2,
        initial_rank: initial.rank,
        flags: Vec::new(),
        ranks: Vec::new(),
        failures: 0,
        rhos: Vec::new(),
        final_rank: initial.rank,
        exposed_rows: 0,
    };
    let mut independent = initial.independent_columns;
    for r in 0..n2 {
        if independent.len() == cfg.s {
            break;
        }
        let j = (0..cfg.s).find(|c| !independent.indices().contains(c)).expect("rank below s");
        let mut cols = independent.indices().to_vec();
        cols.push(j);
        let step = ColumnSelection::from_unsorted(cols);
        let w = kernel_basis(&current.select_columns(&step)?, cfg.field)?;
        debug_assert_eq!(w.len(), 1);
        let rho_w = if w[0].support_size() <= DEFAULT_WALK_SUPPORT { Some(rho(&w[0].restrict(w[0].support()))?) } else { None };

        current = current.stack(&SignMatrix::from_rows(&[rest.row(r)])?)?;
        let success = rank(&current.select_columns(&step)?, cfg.field).rank > independent.len();
        let now = rank(&current, cfg.field);
        trace.flags.push(success);
        trace.failures += usize::from(!success);
        trace.rhos.push(rho_w);
        trace.ranks.push(now.rank);
        trace.final_rank = now.rank;
        trace.exposed_rows += 1;
        independent = now.independent_columns;
    }
    Ok(trace)
}
