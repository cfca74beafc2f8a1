//! Sparse decomposition of a signal over a union of shift-invariant
//! bases or a shift-invariant frame: structure detection, the finite
//! reduction of the support search, and recovery of the coefficient
//! spectra on the support.

mod structure;

pub use structure::{detect_constant_structure, ArcFactor, ConstantFactorization, FactorizationSummary, STRUCTURE_TOL};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::coherence::{analog_coherence, dictionary_coherence};
use crate::error::{Error, Result};
use crate::linalg::{pinv, select_columns, singular_values, CMat, CVec, C64};
use crate::mmv::{ctf_reduce_on, kruskal_rank, l0_oracle, l1_mmv_solve, support_recover, MmvOptions, MmvProblem, Solver};
use crate::sispace::{cross_spectrum, gram_matrix, riesz_bounds, CoeffSpectra, FrequencyGrid, GeneratorBank, SpectralMatrix};

/// Relative reconstruction error accepted for a returned solution.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Smallest singular value of `D_S`, relative to the largest, treated as
/// full rank.
pub const RANK_REL: f64 = 1e-10;
pub const SAMPLER_RIESZ_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecomposeOptions {
    pub solver: Solver,
    pub tol: f64,
    pub max_iter: usize,
    /// Largest number of arcs a factorization may use and still count as
    /// constant.
    pub max_arcs: usize,
}

impl Default for DecomposeOptions {
    fn default() -> Self {
        DecomposeOptions { solver: Solver::L1, tol: 1e-9, max_iter: 50_000, max_arcs: 2 }
    }
}

impl DecomposeOptions {
    pub fn with_solver(solver: Solver) -> Self {
        DecomposeOptions { solver, ..Self::default() }
    }

    fn mmv(&self) -> MmvOptions {
        MmvOptions { tol: self.tol, max_iter: self.max_iter }
    }
}

/// Recovery conditions evaluated for the returned support. Violations are
/// reported, never raised.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub pipeline: String,
    pub solver: String,
    /// Coherence the conditions refer to.
    pub mu: f64,
    pub mu_source: String,
    pub k: usize,
    /// `k < 1/μ` for two bases, `k < ½(1 + 1/μ)` for frames.
    pub uniqueness: bool,
    /// `k < (√2 - 0.5)/μ` for two bases; for frames the same bound as
    /// `uniqueness`.
    pub l1_guarantee: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kruskal_rank: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub kruskal_condition: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub sampler_riesz_alpha: Option<f64>,
    pub arcs: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub frequencies: Option<Vec<usize>>,
    pub warnings: Vec<String>,
}

/// Support `S` (0-based, sorted) and the coefficient spectra on it.
#[derive(Clone, Debug, PartialEq)]
pub struct JointSparseSolution {
    pub support: Vec<usize>,
    pub gamma_s: CoeffSpectra,
    /// Total number of dictionary columns.
    pub atoms: usize,
    /// `‖D γ - c‖ / ‖c‖` over the grid (0 for zero samples).
    pub residual: f64,
    pub diagnostics: Diagnostics,
}

impl JointSparseSolution {
    /// All `atoms` coefficient spectra, zero off the support.
    pub fn embed(&self) -> CoeffSpectra {
        self.gamma_s.embed(&self.support, self.atoms).expect("support lies within the dictionary")
    }
}

/// Per-point least squares `γ^S(ω_i) = D_S(ω_i)^† c(ω_i)`, embedded into
/// all columns of the dictionary.
pub fn recover_on_support(
    dict: &SpectralMatrix,
    support: &[usize],
    samples: &CoeffSpectra,
    grid: &FrequencyGrid,
) -> Result<CoeffSpectra> {
    let g = recover_restricted(dict, support, samples, grid)?;
    g.embed(support, dict.cols())
}

fn recover_restricted(
    dict: &SpectralMatrix,
    support: &[usize],
    samples: &CoeffSpectra,
    grid: &FrequencyGrid,
) -> Result<CoeffSpectra> {
    check_samples(dict, samples, grid)?;
    if let Some(&bad) = support.iter().find(|&&s| s >= dict.cols()) {
        return Err(Error::InvalidArgument(format!("support index {bad} outside {} atoms", dict.cols())));
    }
    let mut out = CMat::zeros(support.len(), grid.size());
    if support.is_empty() {
        return Ok(CoeffSpectra::new(out));
    }
    for i in 0..grid.size() {
        let ds = select_columns(dict.at(i), support);
        check_rank(&ds, i, grid)?;
        let g = pinv(&ds, RANK_REL) * samples.values().column(i);
        out.column_mut(i).copy_from(&g);
    }
    Ok(CoeffSpectra::new(out))
}

fn check_rank(m: &CMat, i: usize, grid: &FrequencyGrid) -> Result<()> {
    let s = singular_values(m);
    let (hi, lo) = (s.first().copied().unwrap_or(0.0), s.last().copied().unwrap_or(0.0));
    if s.len() < m.ncols() || !(lo > RANK_REL * hi) {
        return Err(Error::RankDeficientAtFrequency { index: i, omega: grid.omega(i) });
    }
    Ok(())
}

fn check_samples(dict: &SpectralMatrix, samples: &CoeffSpectra, grid: &FrequencyGrid) -> Result<()> {
    if dict.len() != grid.size() || samples.grid_size() != grid.size() || samples.count() != dict.rows() {
        return Err(Error::DimensionMismatch(format!(
            "dictionary {}x{} on {} points, samples {} on {} points, grid {}",
            dict.rows(),
            dict.cols(),
            dict.len(),
            samples.count(),
            samples.grid_size(),
            grid.size()
        )));
    }
    Ok(())
}

/// `‖D γ - c‖ / ‖c‖`, with `0` for `c = 0` and `γ = 0`.
pub fn relative_residual(dict: &SpectralMatrix, gamma: &CoeffSpectra, samples: &CoeffSpectra) -> Result<f64> {
    let c = crate::sispace::synthesize_samples(dict, gamma)?;
    let num = c.values() - samples.values();
    let num = crate::linalg::frobenius(&num);
    let den = samples.frobenius();
    Ok(if den == 0.0 { num } else { num / den })
}

/// Support search and recovery for a dictionary with a detected
/// factorization.
fn constant_pipeline(
    dict: &SpectralMatrix,
    fact: &ConstantFactorization,
    samples: &CoeffSpectra,
    grid: &FrequencyGrid,
    opts: &DecomposeOptions,
) -> Result<(Vec<usize>, CoeffSpectra)> {
    check_samples(dict, samples, grid)?;
    let m = dict.cols();
    // d(ω) = W^{-1}(ω) c(ω) = A Z(ω) γ(ω)
    let mut d = samples.clone();
    for i in 0..grid.size() {
        let w = &fact.w[i];
        let v = samples.at(i).component_div(w);
        d.set_at(i, &v);
    }
    let mut support: Vec<usize> = Vec::new();
    for arc in &fact.arcs {
        let ctf = ctf_reduce_on(&d, &arc.points);
        let s = support_recover(&ctf.v, &arc.a, opts.solver, &opts.mmv())?;
        support.extend(s);
    }
    support.sort_unstable();
    support.dedup();

    let mut out = CMat::zeros(support.len(), grid.size());
    if !support.is_empty() {
        for arc in &fact.arcs {
            let a_s = select_columns(&arc.a, &support);
            check_rank(&a_s, arc.reference, grid)?;
            let a_pinv = pinv(&a_s, RANK_REL);
            for &i in &arc.points {
                let zs = CVec::from_iterator(support.len(), support.iter().map(|&j| fact.z[i][j]));
                let g = (&a_pinv * d.at(i)).component_div(&zs);
                out.column_mut(i).copy_from(&g);
            }
        }
    }
    let gamma_s = CoeffSpectra::new(out);
    let residual = relative_residual(dict, &gamma_s.embed(&support, m)?, samples)?;
    if residual > RESIDUAL_TOL {
        return Err(Error::InconsistentSystem(format!(
            "support {support:?} leaves relative residual {residual:.3e}"
        )));
    }
    Ok((support, gamma_s))
}

fn structure_or_fail(dict: &SpectralMatrix, opts: &DecomposeOptions) -> Result<ConstantFactorization> {
    let fact = detect_constant_structure(dict, opts.max_arcs);
    if !fact.detected {
        return Err(Error::StructureNotConstant { max_deviation: fact.max_deviation, arcs: fact.arc_count() });
    }
    Ok(fact)
}

fn kruskal_of(a: &CMat) -> Option<usize> {
    if a.ncols() <= crate::mmv::KRUSKAL_MAX_ATOMS {
        kruskal_rank(a).ok()
    } else {
        None
    }
}

/// Decomposition of `x` over the union of two orthonormal bases `φ`, `ψ`
/// of the same space, from the samples `c_l[n] = <φ_l(t - nT), x(t)>`.
///
/// ```
/// use sisparse::bases::spike_fourier_pair;
/// use sisparse::decompose::{decompose_two_onb_constant, DecomposeOptions};
/// use sisparse::sispace::{cross_spectrum, synthesize_samples, CoeffSpectra, FrequencyGrid};
/// use num_complex::Complex64;
///
/// let grid = FrequencyGrid::new(32).unwrap();
/// let pair = spike_fourier_pair(4, 1.0, &grid).unwrap();
/// let dict = cross_spectrum(&pair.spike, &pair.fourier, &grid).unwrap().with_identity_block().unwrap();
/// // one Fourier sequence, a[n] = δ[n]
/// let gamma = CoeffSpectra::from_fn(8, &grid, |l, _| Complex64::new(if l == 6 { 1.0 } else { 0.0 }, 0.0));
/// let c = synthesize_samples(&dict, &gamma).unwrap();
/// let sol = decompose_two_onb_constant(&pair.spike, &pair.fourier, &c, &grid, &DecomposeOptions::default()).unwrap();
/// assert_eq!(sol.support, vec![6]);
/// ```
pub fn decompose_two_onb_constant(
    phi: &GeneratorBank,
    psi: &GeneratorBank,
    samples: &CoeffSpectra,
    grid: &FrequencyGrid,
    opts: &DecomposeOptions,
) -> Result<JointSparseSolution> {
    decompose_two_onb_with_sampler(phi, psi, phi, samples, grid, opts)
}

/// As [`decompose_two_onb_constant`], with samples taken by a different
/// sampler bank `h`: the dictionary is `[M_hφ M_hψ]`.
pub fn decompose_two_onb_with_sampler(
    phi: &GeneratorBank,
    psi: &GeneratorBank,
    sampler: &GeneratorBank,
    samples: &CoeffSpectra,
    grid: &FrequencyGrid,
    opts: &DecomposeOptions,
) -> Result<JointSparseSolution> {
    let coh = analog_coherence(phi, psi, grid)?;
    let alpha = sampler_alpha(sampler, grid)?;
    let dict = two_onb_dictionary(phi, psi, sampler, grid)?;
    let fact = structure_or_fail(&dict, opts)?;
    let (support, gamma_s) = constant_pipeline(&dict, &fact, samples, grid, opts)?;
    let k = support.len();
    let mu = coh.mu;
    let kr = kruskal_of(fact.a());
    let mut diag = Diagnostics {
        pipeline: "constant".into(),
        solver: opts.solver.name().into(),
        mu,
        mu_source: "analog coherence of the basis pair".into(),
        k,
        uniqueness: (k as f64) < 1.0 / mu,
        l1_guarantee: (k as f64) < (2f64.sqrt() - 0.5) / mu,
        kruskal_rank: kr,
        kruskal_condition: kr.map(|s| s >= 2 * k),
        sampler_riesz_alpha: (!std::ptr::eq(sampler, phi)).then_some(alpha),
        arcs: fact.arc_count(),
        frequencies: None,
        warnings: Vec::new(),
    };
    add_condition_warnings(&mut diag, opts.solver, "(sqrt(2) - 0.5)/mu");
    let residual = relative_residual(&dict, &gamma_s.embed(&support, dict.cols())?, samples)?;
    Ok(JointSparseSolution { support, gamma_s, atoms: dict.cols(), residual, diagnostics: diag })
}

/// `[M_hφ M_hψ]`, which is `[I M_φψ]` when `h = φ`.
pub fn two_onb_dictionary(
    phi: &GeneratorBank,
    psi: &GeneratorBank,
    sampler: &GeneratorBank,
    grid: &FrequencyGrid,
) -> Result<SpectralMatrix> {
    if std::ptr::eq(sampler, phi) {
        return cross_spectrum(phi, psi, grid)?.with_identity_block();
    }
    cross_spectrum(sampler, phi, grid)?.hstack(&cross_spectrum(sampler, psi, grid)?)
}

fn sampler_alpha(sampler: &GeneratorBank, grid: &FrequencyGrid) -> Result<f64> {
    let rb = riesz_bounds(&gram_matrix(sampler, grid)?, grid)?;
    if !rb.is_riesz_basis(SAMPLER_RIESZ_TOL) {
        return Err(Error::SamplerNotBasis { alpha: rb.alpha });
    }
    Ok(rb.alpha)
}

fn add_condition_warnings(diag: &mut Diagnostics, solver: Solver, l1_bound: &str) {
    if !diag.uniqueness {
        diag.warnings.push(format!(
            "sparsity k = {} does not meet the uniqueness condition for mu = {:.6}",
            diag.k, diag.mu
        ));
    }
    if solver == Solver::L1 && !diag.l1_guarantee {
        diag.warnings.push(format!(
            "sparsity k = {} exceeds the l1 recovery guarantee k < {l1_bound}; the returned support is consistent but not certified",
            diag.k
        ));
    }
}

/// Decomposition over an overcomplete shift-invariant frame `{d_r}` of
/// `m > N` generators, from samples taken by a basis `{h_l}` of the space.
pub fn decompose_frame(
    frame_dict: &GeneratorBank,
    sampler: &GeneratorBank,
    samples: &CoeffSpectra,
    grid: &FrequencyGrid,
    opts: &DecomposeOptions,
) -> Result<JointSparseSolution> {
    frame_dict.check_compatible(sampler)?;
    let alpha = sampler_alpha(sampler, grid)?;
    let dict = cross_spectrum(sampler, frame_dict, grid)?;
    let fact = structure_or_fail(&dict, opts)?;
    let (support, gamma_s) = constant_pipeline(&dict, &fact, samples, grid, opts)?;
    let k = support.len();
    let mut mu = 0.0f64;
    for arc in &fact.arcs {
        mu = mu.max(dictionary_coherence(&arc.a)?.mu);
    }
    let bound = if mu > 0.0 { 0.5 * (1.0 + 1.0 / mu) } else { f64::INFINITY };
    let kr = kruskal_of(fact.a());
    let mut diag = Diagnostics {
        pipeline: "frame".into(),
        solver: opts.solver.name().into(),
        mu,
        mu_source: "coherence of the constant factor A".into(),
        k,
        uniqueness: (k as f64) < bound,
        l1_guarantee: (k as f64) < bound,
        kruskal_rank: kr,
        kruskal_condition: kr.map(|s| s >= 2 * k),
        sampler_riesz_alpha: Some(alpha),
        arcs: fact.arc_count(),
        frequencies: None,
        warnings: Vec::new(),
    };
    add_condition_warnings(&mut diag, opts.solver, "(1 + 1/mu)/2");
    let residual = relative_residual(&dict, &gamma_s.embed(&support, dict.cols())?, samples)?;
    Ok(JointSparseSolution { support, gamma_s, atoms: dict.cols(), residual, diagnostics: diag })
}

/// One grid index drawn uniformly from each of `count` equal strata of the
/// grid, in increasing order.
pub fn select_frequencies(grid_size: usize, count: usize, seed: u64) -> Vec<usize> {
    let count = count.clamp(1, grid_size.max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|s| {
            let lo = s * grid_size / count;
            let hi = (s + 1) * grid_size / count;
            lo + rng.random_range(0..hi - lo)
        })
        .collect()
}

/// Support from a few frequencies, solved independently, then recovery on
/// the whole grid. Assumes the union of the per-frequency supports is the
/// full joint support.
pub fn decompose_rich(
    dict: &SpectralMatrix,
    samples: &CoeffSpectra,
    grid: &FrequencyGrid,
    m_freqs: usize,
    seed: u64,
    opts: &DecomposeOptions,
) -> Result<JointSparseSolution> {
    check_samples(dict, samples, grid)?;
    let freqs = select_frequencies(grid.size(), m_freqs, seed);
    let mut support = Vec::new();
    for &i in &freqs {
        let x = CMat::from_column_slice(dict.rows(), 1, samples.at(i).as_slice());
        let prob = MmvProblem::new(dict.at(i).clone(), x)?;
        let sol = match opts.solver {
            Solver::L1 => l1_mmv_solve(&prob, opts.tol, opts.max_iter)?,
            Solver::L0 => l0_oracle(&prob, dict.rows().min(dict.cols()))?,
        };
        support.extend(sol.support);
    }
    support.sort_unstable();
    support.dedup();
    let gamma_s = recover_restricted(dict, &support, samples, grid)?;
    let residual = relative_residual(dict, &gamma_s.embed(&support, dict.cols())?, samples)?;
    if residual > RESIDUAL_TOL {
        return Err(Error::InconsistentSystem(format!(
            "union support {support:?} from {} frequencies leaves relative residual {residual:.3e}",
            freqs.len()
        )));
    }
    let k = support.len();
    let mut mu = 0.0f64;
    for i in 0..grid.size() {
        mu = mu.max(dictionary_coherence(dict.at(i))?.mu);
    }
    let diag = Diagnostics {
        pipeline: "rich".into(),
        solver: opts.solver.name().into(),
        mu,
        mu_source: "largest dictionary coherence over the grid".into(),
        k,
        uniqueness: mu == 0.0 || (k as f64) < 0.5 * (1.0 + 1.0 / mu),
        l1_guarantee: mu == 0.0 || (k as f64) < 0.5 * (1.0 + 1.0 / mu),
        kruskal_rank: None,
        kruskal_condition: None,
        sampler_riesz_alpha: None,
        arcs: 0,
        frequencies: Some(freqs),
        warnings: Vec::new(),
    };
    Ok(JointSparseSolution { support, gamma_s, atoms: dict.cols(), residual, diagnostics: diag })
}

/// Helper for callers building planted problems.
pub fn zero_spectra(count: usize, grid: &FrequencyGrid) -> CoeffSpectra {
    CoeffSpectra::from_fn(count, grid, |_, _| C64::new(0.0, 0.0))
}
