//! Shift-invariant spaces on a discrete frequency grid: generator banks,
//! sampled cross-spectra, Gram matrices, Riesz bounds and the forward
//! sampling model.

mod bank;
mod dtft;
mod grid;
mod spectra;

pub use bank::{BandPoint, GeneratorBank};
pub use dtft::{dtft, dtft_real, idtft};
pub use grid::FrequencyGrid;
pub use spectra::{CoeffSpectra, SpectralMatrix};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_asymmetry, hermitian_eigen, CMat, ZERO};

/// Extreme eigenvalues of a Gram spectrum over the grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RieszBounds {
    pub alpha: f64,
    pub beta: f64,
}

impl RieszBounds {
    /// Strictly positive lower bound on the grid.
    pub fn is_riesz_basis(&self, tol: f64) -> bool {
        self.alpha > tol
    }
}

/// `R(ω_i)[l, r] = (1/T) Σ_k conj(Φ_l) Ψ_r`, summed over the band replicas.
pub fn cross_spectrum(
    bank_a: &GeneratorBank,
    bank_b: &GeneratorBank,
    grid: &FrequencyGrid,
) -> Result<SpectralMatrix> {
    bank_a.check_compatible(bank_b)?;
    bank_a.check_grid(grid)?;
    let inv_t = 1.0 / bank_a.period();
    let (na, nb) = (bank_a.count(), bank_b.count());
    let values = (0..grid.size())
        .map(|i| {
            CMat::from_fn(na, nb, |l, r| {
                let fa = bank_a.spectrum(l).column(i);
                let fb = bank_b.spectrum(r).column(i);
                let mut acc = ZERO;
                for k in 0..bank_a.replicas() {
                    acc += fa[k].conj() * fb[k];
                }
                acc * inv_t
            })
        })
        .collect();
    SpectralMatrix::new(values)
}

/// Gram spectrum `M_φφ(e^{jω})` of a bank.
pub fn gram_matrix(bank: &GeneratorBank, grid: &FrequencyGrid) -> Result<SpectralMatrix> {
    cross_spectrum(bank, bank, grid)
}

pub const HERMITIAN_TOL: f64 = 1e-10;

/// Minimum and maximum eigenvalue of a Gram spectrum over the grid.
pub fn riesz_bounds(gram: &SpectralMatrix, grid: &FrequencyGrid) -> Result<RieszBounds> {
    if gram.len() != grid.size() {
        return Err(Error::DimensionMismatch(format!(
            "gram spectrum has {} points, grid has {}",
            gram.len(),
            grid.size()
        )));
    }
    if gram.rows() != gram.cols() {
        return Err(Error::DimensionMismatch("gram spectrum is not square".into()));
    }
    let mut alpha = f64::INFINITY;
    let mut beta = f64::NEG_INFINITY;
    for (i, m) in gram.values().iter().enumerate() {
        let asym = hermitian_asymmetry(m);
        if asym > HERMITIAN_TOL {
            return Err(Error::NotHermitian { index: i, asymmetry: asym });
        }
        let (vals, _) = hermitian_eigen(m);
        alpha = alpha.min(vals[0]);
        beta = beta.max(vals[vals.len() - 1]);
    }
    // round-off can push a zero eigenvalue slightly negative
    Ok(RieszBounds { alpha: alpha.max(0.0), beta: beta.max(0.0) })
}

/// Largest `|gram(ω_i)[l, r] - δ_{lr}|` over the grid.
pub fn orthonormality_deviation(bank: &GeneratorBank, grid: &FrequencyGrid) -> Result<f64> {
    let g = gram_matrix(bank, grid)?;
    let id = CMat::identity(bank.count(), bank.count());
    Ok(g.values().iter().map(|m| crate::linalg::max_abs(&(m - &id))).fold(0.0, f64::max))
}

pub fn is_orthonormal(bank: &GeneratorBank, grid: &FrequencyGrid, tol: f64) -> bool {
    orthonormality_deviation(bank, grid).map(|d| d <= tol).unwrap_or(false)
}

/// `sqrt((1/K) Σ_i Σ_l |A_l(ω_i)|²)`, the energy of the stacked sequences.
///
/// ```
/// use sisparse::sispace::{signal_norm, CoeffSpectra, FrequencyGrid};
/// use num_complex::Complex64;
///
/// let grid = FrequencyGrid::new(16).unwrap();
/// let a = CoeffSpectra::from_fn(2, &grid, |l, _| Complex64::new([3.0, 4.0][l], 0.0));
/// assert!((signal_norm(&a, &grid) - 5.0).abs() < 1e-12);
/// ```
pub fn signal_norm(coeffs: &CoeffSpectra, grid: &FrequencyGrid) -> f64 {
    let k = grid.size() as f64;
    let s: f64 = coeffs.values().iter().map(|z| z.norm_sqr()).sum();
    (s / k).sqrt()
}

/// Forward model `c(ω_i) = D(ω_i) γ(ω_i)`.
pub fn synthesize_samples(dict: &SpectralMatrix, gamma: &CoeffSpectra) -> Result<CoeffSpectra> {
    if dict.cols() != gamma.count() || dict.len() != gamma.grid_size() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary is {}x{} on {} points, coefficients are {} on {} points",
            dict.rows(),
            dict.cols(),
            dict.len(),
            gamma.count(),
            gamma.grid_size()
        )));
    }
    let mut out = CMat::zeros(dict.rows(), dict.len());
    for (i, d) in dict.values().iter().enumerate() {
        let c = d * gamma.values().column(i);
        out.column_mut(i).copy_from(&c);
    }
    Ok(CoeffSpectra::new(out))
}
