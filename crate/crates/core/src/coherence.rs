//! Coherence of basis pairs and dictionaries, and the uncertainty relation
//! it controls.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{orthonormal_columns_deviation, CMat};
use crate::sispace::{cross_spectrum, orthonormality_deviation, CoeffSpectra, FrequencyGrid, GeneratorBank, SpectralMatrix};

/// Coherence value with the location of its maximum. Indices are 0-based.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CoherenceReport {
    pub mu: f64,
    pub argmax_pair: (usize, usize),
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub argmax_omega: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub argmax_index: Option<usize>,
    pub lower_bound: f64,
    pub upper_bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyCheck {
    pub a_count: usize,
    pub b_count: usize,
    pub geometric_mean: f64,
    pub arithmetic_mean: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub tight: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DictionaryCoherence {
    pub mu: f64,
    /// `sqrt((m - N) / (N (m - 1)))` for an `N × m` dictionary.
    pub lower_bound: f64,
}

pub const ORTHONORMAL_TOL_DISCRETE: f64 = 1e-10;
pub const ORTHONORMAL_TOL_ANALOG: f64 = 1e-8;
pub const BOUND_SLACK: f64 = 1e-9;
pub const TIGHT_TOL: f64 = 1e-9;
pub const ACTIVE_REL: f64 = 1e-8;

/// `max_{l,r} |a_l^H b_r|` for two orthonormal bases given as columns.
pub fn discrete_coherence(basis_a: &CMat, basis_b: &CMat) -> Result<CoherenceReport> {
    let n = basis_a.nrows();
    if !basis_a.is_square() || basis_b.shape() != basis_a.shape() {
        return Err(Error::DimensionMismatch(format!(
            "bases are {:?} and {:?}, expected two N x N matrices",
            basis_a.shape(),
            basis_b.shape()
        )));
    }
    for m in [basis_a, basis_b] {
        let dev = orthonormal_columns_deviation(m);
        if dev > ORTHONORMAL_TOL_DISCRETE {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
    }
    let g = basis_a.adjoint() * basis_b;
    let (mu, (l, r)) = argmax_abs(&g).unwrap_or((0.0, (0, 0)));
    Ok(CoherenceReport {
        mu,
        argmax_pair: (l, r),
        argmax_omega: None,
        argmax_index: None,
        lower_bound: 1.0 / (n as f64).sqrt(),
        upper_bound: 1.0,
    })
}

/// Largest modulus of a sampled cross-spectrum, ties to the smallest
/// `(l, r, i)`.
pub fn spectral_max(m: &SpectralMatrix) -> (f64, (usize, usize), usize) {
    let mut best = (f64::NEG_INFINITY, (0, 0), 0);
    for l in 0..m.rows() {
        for r in 0..m.cols() {
            for (i, v) in m.values().iter().enumerate() {
                let a = v[(l, r)].norm();
                if a > best.0 {
                    best = (a, (l, r), i);
                }
            }
        }
    }
    best
}

/// `max_{l,r} max_i |R_{φ_l ψ_r}(e^{jω_i})|` for two orthonormal banks of
/// the same space.
///
/// ```
/// use sisparse::bases::{fourier_basis, spike_basis};
/// use sisparse::coherence::analog_coherence;
/// use sisparse::sispace::FrequencyGrid;
///
/// let grid = FrequencyGrid::new(64).unwrap();
/// let phi = spike_basis(4, 1.0, &grid).unwrap();
/// let psi = fourier_basis(4, 1.0, &grid).unwrap();
/// let rep = analog_coherence(&phi, &psi, &grid).unwrap();
/// assert!((rep.mu - 0.5).abs() < 1e-12);
/// ```
pub fn analog_coherence(
    bank_a: &GeneratorBank,
    bank_b: &GeneratorBank,
    grid: &FrequencyGrid,
) -> Result<CoherenceReport> {
    bank_a.check_compatible(bank_b)?;
    if bank_a.count() != bank_b.count() {
        return Err(Error::MismatchedBanks("generator count"));
    }
    for b in [bank_a, bank_b] {
        let dev = orthonormality_deviation(b, grid)?;
        if dev > ORTHONORMAL_TOL_ANALOG {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
    }
    let r = cross_spectrum(bank_a, bank_b, grid)?;
    let (mu, pair, i) = spectral_max(&r);
    let n = bank_a.count() as f64;
    let lower = 1.0 / n.sqrt();
    if mu < lower - BOUND_SLACK || mu > 1.0 + BOUND_SLACK {
        return Err(Error::CoherenceBoundViolated { mu, lower, upper: 1.0 });
    }
    Ok(CoherenceReport {
        mu,
        argmax_pair: pair,
        argmax_omega: Some(grid.omega(i)),
        argmax_index: Some(i),
        lower_bound: lower,
        upper_bound: 1.0,
    })
}

/// Largest normalized inner product between distinct columns.
///
/// ```
/// use sisparse::coherence::dictionary_coherence;
/// use nalgebra::DMatrix;
/// use num_complex::Complex64;
///
/// let s = 0.5f64.sqrt();
/// let d = DMatrix::from_row_slice(2, 3, &[1.0, 0.0, s, 0.0, 1.0, s]).map(|x| Complex64::new(x, 0.0));
/// let c = dictionary_coherence(&d).unwrap();
/// assert!((c.mu - s).abs() < 1e-12);
/// assert!((c.lower_bound - 0.5).abs() < 1e-12);
/// ```
pub fn dictionary_coherence(d: &CMat) -> Result<DictionaryCoherence> {
    let (n, m) = d.shape();
    let norms: Vec<f64> = (0..m).map(|j| d.column(j).norm()).collect();
    if let Some(j) = norms.iter().position(|&x| x == 0.0) {
        return Err(Error::ZeroColumn(j));
    }
    let g = d.adjoint() * d;
    let mut mu = 0.0f64;
    for a in 0..m {
        for b in 0..m {
            if a != b {
                mu = mu.max(g[(a, b)].norm() / (norms[a] * norms[b]));
            }
        }
    }
    let lower_bound = if m > 1 && m >= n {
        (((m - n) as f64) / (n as f64 * (m - 1) as f64)).sqrt()
    } else {
        0.0
    };
    Ok(DictionaryCoherence { mu, lower_bound })
}

/// Evaluates `½(A+B) ≥ √(AB) ≥ 1/μ`.
pub fn uncertainty_check(a_count: usize, b_count: usize, mu: f64) -> Result<UncertaintyCheck> {
    if !(mu > 0.0 && mu <= 1.0) {
        return Err(Error::InvalidArgument(format!("coherence must lie in (0, 1], got {mu}")));
    }
    let geometric_mean = ((a_count * b_count) as f64).sqrt();
    let arithmetic_mean = 0.5 * (a_count + b_count) as f64;
    let bound = 1.0 / mu;
    let satisfied = geometric_mean >= bound - TIGHT_TOL;
    let tight = (arithmetic_mean - geometric_mean).abs() <= TIGHT_TOL
        && (geometric_mean - bound).abs() <= TIGHT_TOL;
    Ok(UncertaintyCheck { a_count, b_count, geometric_mean, arithmetic_mean, bound, satisfied, tight })
}

/// Number of sequences whose energy exceeds `1e-8` times the largest.
pub fn count_active(coeffs: &CoeffSpectra) -> usize {
    coeffs.active_rows(ACTIVE_REL).len()
}

fn argmax_abs(m: &CMat) -> Option<(f64, (usize, usize))> {
    let mut best: Option<(f64, (usize, usize))> = None;
    for l in 0..m.nrows() {
        for r in 0..m.ncols() {
            let a = m[(l, r)].norm();
            if best.is_none_or(|(b, _)| a > b) {
                best = Some((a, (l, r)));
            }
        }
    }
    best
}
