//! Concrete generator banks: the analog spike and Fourier bases, the LPF
//! train that meets the uncertainty bound with equality, basis changes and
//! unitary mixes of an existing bank.

use serde::{Deserialize, Serialize};

use crate::coherence::{count_active, uncertainty_check, UncertaintyCheck, ACTIVE_REL};
use crate::error::{Error, Result};
use crate::linalg::{unit_phase, unitary_deviation, CMat, C64, ZERO};
use crate::sispace::{
    cross_spectrum, orthonormality_deviation, synthesize_samples, CoeffSpectra, FrequencyGrid, GeneratorBank,
    SpectralMatrix,
};

pub const ORTHONORMAL_TOL: f64 = 1e-8;
pub const UNITARY_TOL: f64 = 1e-8;
pub const MIX_UNITARY_TOL: f64 = 1e-10;

/// Shifted sinc generators `Φ_l(Ω) = √(T/N) e^{-jΩ(l-1)T/N}` on
/// `(-πN/T, πN/T]`.
///
/// ```
/// use sisparse::bases::spike_basis;
/// use sisparse::sispace::{is_orthonormal, FrequencyGrid};
///
/// let grid = FrequencyGrid::new(64).unwrap();
/// let phi = spike_basis(4, 1.0, &grid).unwrap();
/// assert!(is_orthonormal(&phi, &grid, 1e-10));
/// ```
pub fn spike_basis(n: usize, period: f64, grid: &FrequencyGrid) -> Result<GeneratorBank> {
    grid.require_divisible(n)?;
    let amp = (period / n as f64).sqrt();
    let den = (grid.size() * n) as i64;
    GeneratorBank::from_fn(period, grid, n, n, |l, p| unit_phase(-p.n * l as i64, den) * amp)
}

/// 1-based index of the Fourier interval holding `ΩT/π = 2n/K`.
///
/// Positive frequencies use `(l-1, l]` and non-positive ones `[l-1, l)` in
/// `|ΩT/π|`, so every grid point of every replica falls in exactly one
/// interval.
pub fn fourier_interval(n: i64, grid_size: usize) -> usize {
    let half = (grid_size / 2) as i64;
    if n > 0 {
        ((n + half - 1) / half) as usize
    } else {
        ((-n) / half + 1) as usize
    }
}

/// Disjoint band generators `Ψ_l(Ω) = √T` on the `l`-th interval.
pub fn fourier_basis(n: usize, period: f64, grid: &FrequencyGrid) -> Result<GeneratorBank> {
    grid.require_divisible(n)?;
    let amp = C64::new(period.sqrt(), 0.0);
    let k = grid.size();
    GeneratorBank::from_fn(period, grid, n, n, |l, p| if fourier_interval(p.n, k) == l + 1 { amp } else { ZERO })
}

/// `m` lowpass-filtered sinc generators `D_l(Ω) = √(T/N) e^{-jΩlT/m}` on
/// `(-πN/T, πN/T]`: a redundant frame for the same space as
/// [`spike_basis`] when `m > N`.
pub fn sinc_frame(n: usize, m: usize, period: f64, grid: &FrequencyGrid) -> Result<GeneratorBank> {
    grid.require_divisible(n)?;
    if m == 0 {
        return Err(Error::InvalidArgument("frame needs at least one generator".into()));
    }
    let amp = (period / n as f64).sqrt();
    let den = (grid.size() * m) as i64;
    GeneratorBank::from_fn(period, grid, n, m, |l, p| unit_phase(-p.n * l as i64, den) * amp)
}

#[derive(Clone, Debug)]
pub struct SpikeFourierPair {
    pub spike: GeneratorBank,
    pub fourier: GeneratorBank,
    pub n: usize,
    pub period: f64,
}

pub fn spike_fourier_pair(n: usize, period: f64, grid: &FrequencyGrid) -> Result<SpikeFourierPair> {
    Ok(SpikeFourierPair {
        spike: spike_basis(n, period, grid)?,
        fourier: fourier_basis(n, period, grid)?,
        n,
        period,
    })
}

/// Train of `√N` lowpass pulses spaced `2π√N/T` apart, expanded in both
/// bases of the spike-Fourier pair. Index sets are 0-based.
#[derive(Clone, Debug)]
pub struct LpfTrainSignal {
    pub n: usize,
    pub fourier_coeffs: CoeffSpectra,
    pub spike_coeffs: CoeffSpectra,
    pub active_fourier: Vec<usize>,
    pub active_spike: Vec<usize>,
}

impl LpfTrainSignal {
    pub fn uncertainty(&self) -> Result<UncertaintyCheck> {
        uncertainty_check(self.active_spike.len(), self.active_fourier.len(), 1.0 / (self.n as f64).sqrt())
    }
}

/// 0-based Fourier indices occupied by the LPF train for `N = r²`.
pub fn lpf_train_fourier_indices(root: usize) -> Vec<usize> {
    let mut m: Vec<usize> = (1..=root / 2).map(|l| 2 * root * l).collect();
    m.extend((1..=root.div_ceil(2)).map(|l| 2 * root * (l - 1) + 1));
    let mut idx: Vec<usize> = m.into_iter().map(|v| v - 1).collect();
    idx.sort_unstable();
    idx
}

pub fn lpf_train(n: usize, period: f64, grid: &FrequencyGrid) -> Result<LpfTrainSignal> {
    let root = n.isqrt();
    if root * root != n || n == 0 {
        return Err(Error::NotPerfectSquare(n));
    }
    grid.require_divisible(n)?;
    let pair = spike_fourier_pair(n, period, grid)?;
    let active_fourier = lpf_train_fourier_indices(root);
    let level = C64::new(1.0 / period.sqrt(), 0.0);
    let fourier_coeffs =
        CoeffSpectra::from_fn(n, grid, |l, _| if active_fourier.contains(&l) { level } else { ZERO });
    let spike_coeffs = change_basis(&fourier_coeffs, &pair.fourier, &pair.spike, grid)?;
    let active_spike = spike_coeffs.active_rows(ACTIVE_REL);
    // drop round-off in the rows that vanish analytically
    let spike_coeffs = spike_coeffs.select_rows(&active_spike).embed(&active_spike, n)?;
    debug_assert_eq!(count_active(&fourier_coeffs), root);
    Ok(LpfTrainSignal { n, fourier_coeffs, spike_coeffs, active_fourier, active_spike })
}

/// Cross-spectrum `M_{to,from}` after checking both banks are orthonormal
/// and span the same space (`M` unitary on the grid).
pub fn basis_change_matrix(
    bank_from: &GeneratorBank,
    bank_to: &GeneratorBank,
    grid: &FrequencyGrid,
) -> Result<SpectralMatrix> {
    for b in [bank_from, bank_to] {
        let dev = orthonormality_deviation(b, grid)?;
        if dev > ORTHONORMAL_TOL {
            return Err(Error::NotOrthonormal { deviation: dev });
        }
    }
    let m = cross_spectrum(bank_to, bank_from, grid)?;
    for (i, v) in m.values().iter().enumerate() {
        if unitary_deviation(v) > UNITARY_TOL {
            return Err(Error::NotUnitaryCross { index: i });
        }
    }
    Ok(m)
}

/// Coefficients of the same signal in `bank_to`: `B(ω) = M_{to,from}(ω) A(ω)`.
pub fn change_basis(
    coeffs_in: &CoeffSpectra,
    bank_from: &GeneratorBank,
    bank_to: &GeneratorBank,
    grid: &FrequencyGrid,
) -> Result<CoeffSpectra> {
    let m = basis_change_matrix(bank_from, bank_to, grid)?;
    synthesize_samples(&m, coeffs_in)
}

/// `diag(e^{-jω_i z_r})`.
pub fn delay_phases(z: &[i64], grid: &FrequencyGrid, i: usize) -> CMat {
    let k = grid.size() as i64;
    CMat::from_diagonal(&nalgebra::DVector::from_iterator(
        z.len(),
        z.iter().map(|&zr| unit_phase(-(i as i64) * zr, k)),
    ))
}

/// `A·Z(e^{jω_i})` on the grid.
pub fn mixed_cross_spectrum(a: &CMat, z: &[i64], grid: &FrequencyGrid) -> Result<SpectralMatrix> {
    SpectralMatrix::from_fn(grid, |i, _| a * delay_phases(z, grid, i))
}

/// Orthonormal bank `φ` with `M_φψ(e^{jω}) = A·Z(e^{jω})`, where
/// `Z = diag(e^{-jω z_r})`.
pub fn unitary_mixed_basis(psi: &GeneratorBank, a: &CMat, z: &[i64], grid: &FrequencyGrid) -> Result<GeneratorBank> {
    let n = psi.count();
    if a.shape() != (n, n) || z.len() != n {
        return Err(Error::DimensionMismatch(format!(
            "mixing matrix {:?} and {} delays for a bank of {n}",
            a.shape(),
            z.len()
        )));
    }
    let dev = unitary_deviation(a);
    if dev > MIX_UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    let mix: Vec<CMat> = (0..grid.size()).map(|i| (a * delay_phases(z, grid, i)).map(|v| v.conj())).collect();
    psi.mixed(&mix)
}

/// Summary used by reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightnessSummary {
    pub n: usize,
    pub active_fourier: Vec<usize>,
    pub active_spike: Vec<usize>,
    pub check: UncertaintyCheck,
}
