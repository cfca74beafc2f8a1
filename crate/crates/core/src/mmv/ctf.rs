use crate::linalg::{hermitian_eigen, CMat, C64};
use crate::sispace::CoeffSpectra;

pub const RANK_REL: f64 = 1e-10;

/// `Q` and a factor `V` with `Q = V V^H`.
#[derive(Clone, Debug, PartialEq)]
pub struct CtfOutput {
    pub q: CMat,
    pub v: CMat,
    pub rank_threshold: f64,
}

impl CtfOutput {
    pub fn rank(&self) -> usize {
        self.v.ncols()
    }
}

/// `Q = (1/K) Σ_i c(ω_i) c(ω_i)^H` over the whole grid.
pub fn ctf_reduce(samples: &CoeffSpectra) -> CtfOutput {
    let all: Vec<usize> = (0..samples.grid_size()).collect();
    ctf_reduce_on(samples, &all)
}

/// Same as [`ctf_reduce`] restricted to the listed grid points (still
/// normalized by the full grid size).
pub fn ctf_reduce_on(samples: &CoeffSpectra, points: &[usize]) -> CtfOutput {
    let n = samples.count();
    let k = samples.grid_size().max(1) as f64;
    let mut q = CMat::zeros(n, n);
    for &i in points {
        let c = samples.values().column(i);
        q += &c * c.adjoint();
    }
    factor_q(q / C64::new(k, 0.0))
}

/// `Q' = Σ_n c[n] c[n]^H` from time-domain sample vectors (one column per
/// time index).
pub fn ctf_reduce_time(sequences: &CMat) -> CtfOutput {
    factor_q(sequences * sequences.adjoint())
}

/// Factors a Hermitian PSD `Q` as `V V^H`, keeping eigenvalues above
/// `1e-10 λ_max`, largest first.
pub fn factor_q(q: CMat) -> CtfOutput {
    let n = q.nrows();
    let (vals, vecs) = hermitian_eigen(&q);
    let lmax = vals.last().copied().unwrap_or(0.0);
    if lmax <= 0.0 {
        return CtfOutput { q, v: CMat::zeros(n, 0), rank_threshold: 0.0 };
    }
    let cut = RANK_REL * lmax;
    let keep: Vec<usize> = (0..vals.len()).rev().filter(|&j| vals[j] > cut).collect();
    let mut v = CMat::zeros(n, keep.len());
    for (c, &j) in keep.iter().enumerate() {
        let s = vals[j].sqrt();
        v.column_mut(c).copy_from(&(vecs.column(j) * C64::new(s, 0.0)));
    }
    CtfOutput { q, v, rank_threshold: cut }
}
