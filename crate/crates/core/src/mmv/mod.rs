//! Finite joint-sparse recovery: the exhaustive ℓ0 oracle, the convex
//! ℓ2,1 program, Kruskal rank, and the reduction of a continuum of
//! measurement vectors to one finite system.

mod admm;
mod ctf;
mod kruskal;
mod l0;

pub use admm::l1_mmv_solve;
pub use ctf::{ctf_reduce, ctf_reduce_on, ctf_reduce_time, factor_q, CtfOutput};
pub use kruskal::{kruskal_rank, KRUSKAL_MAX_ATOMS, KRUSKAL_REL};
pub use l0::{l0_oracle, L0_BUDGET};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{frobenius, pinv, CMat};

/// Rows below this fraction of the largest row norm count as zero.
pub const SUPPORT_REL: f64 = 1e-6;
/// Relative residual accepted as an exact representation.
pub const EXACT_REL: f64 = 1e-8;

/// `X = D Γ` with row-sparse `Γ`.
#[derive(Clone, Debug, PartialEq)]
pub struct MmvProblem {
    d: CMat,
    x: CMat,
}

impl MmvProblem {
    pub fn new(d: CMat, x: CMat) -> Result<Self> {
        let (n, m) = d.shape();
        if n == 0 || m < n {
            return Err(Error::DimensionMismatch(format!("dictionary must be N x m with m >= N >= 1, got {n} x {m}")));
        }
        if x.nrows() != n || x.ncols() == 0 {
            return Err(Error::DimensionMismatch(format!(
                "measurements are {} x {}, expected {n} x p with p >= 1",
                x.nrows(),
                x.ncols()
            )));
        }
        if let Some(j) = (0..m).find(|&j| d.column(j).iter().all(|z| z.norm() == 0.0)) {
            return Err(Error::ZeroColumn(j));
        }
        Ok(MmvProblem { d, x })
    }

    pub fn dictionary(&self) -> &CMat {
        &self.d
    }

    pub fn measurements(&self) -> &CMat {
        &self.x
    }

    pub fn atoms(&self) -> usize {
        self.d.ncols()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MmvSolution {
    pub u: CMat,
    /// Sorted 0-based row indices.
    pub support: Vec<usize>,
    pub row_norms: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl MmvSolution {
    pub(crate) fn zero(m: usize, p: usize) -> Self {
        MmvSolution {
            u: CMat::zeros(m, p),
            support: Vec::new(),
            row_norms: vec![0.0; m],
            residual: 0.0,
            iterations: 0,
            converged: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Solver {
    #[default]
    L1,
    L0,
}

impl Solver {
    pub fn name(&self) -> &'static str {
        match self {
            Solver::L1 => "l1",
            Solver::L0 => "l0",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MmvOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for MmvOptions {
    fn default() -> Self {
        MmvOptions { tol: 1e-9, max_iter: 50_000 }
    }
}

/// Support of the sparsest (`L0`) or least ℓ2,1 (`L1`) solution of `V = D U`.
pub fn support_recover(v: &CMat, d: &CMat, solver: Solver, opts: &MmvOptions) -> Result<Vec<usize>> {
    if v.nrows() != d.nrows() {
        return Err(Error::DimensionMismatch(format!("V has {} rows, D has {}", v.nrows(), d.nrows())));
    }
    if v.ncols() == 0 || frobenius(v) == 0.0 {
        return Ok(Vec::new());
    }
    let proj = d * pinv(d, 1e-12) * v;
    let off = frobenius(&(v - proj));
    if off > EXACT_REL * frobenius(v) {
        return Err(Error::InconsistentSystem(format!(
            "measurements leave the column space of the dictionary (relative distance {:.3e})",
            off / frobenius(v)
        )));
    }
    let prob = MmvProblem::new(d.clone(), v.clone())?;
    let sol = match solver {
        Solver::L1 => l1_mmv_solve(&prob, opts.tol, opts.max_iter)?,
        Solver::L0 => l0_oracle(&prob, d.nrows().min(d.ncols()))?,
    };
    Ok(sol.support)
}

/// Debiased least-squares fit on a support: returns `(U, residual)`.
pub(crate) fn fit_on_support(d: &CMat, x: &CMat, support: &[usize]) -> (CMat, f64) {
    let m = d.ncols();
    let mut u = CMat::zeros(m, x.ncols());
    if support.is_empty() {
        return (u, frobenius(x));
    }
    let ds = crate::linalg::select_columns(d, support);
    let us = crate::linalg::lstsq(&ds, x);
    for (r, &s) in support.iter().enumerate() {
        u.row_mut(s).copy_from(&us.row(r));
    }
    let res = frobenius(&(&ds * us - x));
    (u, res)
}
