//! Problem specifications: a JSON document describing the generator banks,
//! the grid and (optionally) a planted sparse signal.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bases::{fourier_basis, sinc_frame, spike_basis, unitary_mixed_basis};
use crate::decompose::two_onb_dictionary;
use crate::linalg::{complex_gaussian, random_unitary, CMat, C64};
use crate::mmv::Solver;
use crate::sispace::{cross_spectrum, synthesize_samples, CoeffSpectra, FrequencyGrid, GeneratorBank, SpectralMatrix};

use super::CliError;

/// Complex number as `[re, im]`.
pub type Cx = [f64; 2];

pub const DEFAULT_PERIOD: f64 = 1.0;
pub const GRID_ENV: &str = "SISPARSE_GRID_K";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ProblemKind {
    SpikeFourier,
    UnitaryMixed,
    SincFrame,
    Custom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pipeline {
    Constant,
    Rich,
    Frame,
}

/// Planted support (0-based dictionary columns) with either explicit
/// sequences or seeded Gaussian ones of the given length.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Planted {
    pub rows: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sequences: Option<Vec<Vec<Cx>>>,
}

/// Explicit unitary `A` (row-major) and integer delays for
/// `unitary_mixed`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mix {
    pub matrix: Vec<Vec<Cx>>,
    pub delays: Vec<i64>,
}

/// Generator spectra tables for `custom`: each generator is `replicas`
/// rows of `k` values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomGenerators {
    pub first: Vec<Vec<Vec<Cx>>>,
    pub second: Vec<Vec<Vec<Cx>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default = "default_period")]
    pub period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub solver: Solver,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipeline: Option<Pipeline>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rich_freqs: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted: Option<Planted>,
    /// Time-domain samples `c_l[n]`, one sequence per sampler generator.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<Vec<Cx>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mix: Option<Mix>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generators: Option<CustomGenerators>,
}

fn default_period() -> f64 {
    DEFAULT_PERIOD
}

fn invalid(field: &str, message: impl Into<String>) -> CliError {
    CliError::Validation { field: field.to_string(), message: message.into() }
}

/// Grid size used when a spec or flag leaves it open.
pub fn default_grid_size() -> Result<usize, CliError> {
    match std::env::var(GRID_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| invalid(GRID_ENV, format!("expected a positive integer, got {v:?}"))),
        Err(_) => Ok(FrequencyGrid::DEFAULT_SIZE),
    }
}

/// Smallest even multiple of `n` not below `k`, used when the grid size
/// is defaulted rather than given.
pub fn fit_grid(k: usize, n: usize) -> usize {
    let step = if n % 2 == 0 { n } else { 2 * n };
    k.div_ceil(step).max(1) * step
}

impl ProblemSpec {
    /// Minimal spec for flag-driven subcommands.
    pub fn basic(kind: ProblemKind, n: usize) -> Self {
        ProblemSpec {
            kind,
            n,
            m: None,
            k: None,
            period: DEFAULT_PERIOD,
            seed: None,
            solver: Solver::default(),
            pipeline: None,
            rich_freqs: None,
            planted: None,
            samples: None,
            mix: None,
            generators: None,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de).map_err(|e| CliError::Parse {
            field: e.path().to_string(),
            message: e.inner().to_string(),
        })
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("spec serializes");
        s.push('\n');
        s
    }

    fn is_two_basis(&self) -> bool {
        match self.kind {
            ProblemKind::SpikeFourier | ProblemKind::UnitaryMixed => true,
            ProblemKind::SincFrame => false,
            ProblemKind::Custom => self.pipeline != Some(Pipeline::Frame),
        }
    }

    pub fn grid_size(&self) -> usize {
        self.k.unwrap_or(FrequencyGrid::DEFAULT_SIZE)
    }

    pub fn atoms(&self) -> usize {
        self.m.unwrap_or(2 * self.n)
    }

    /// Fills defaults and checks every invariant, reporting the first
    /// offending field.
    pub fn resolve(mut self, default_k: usize) -> Result<Self, CliError> {
        let n = self.n;
        if n == 0 {
            return Err(invalid("n", "must be at least 1"));
        }
        let k = *self.k.get_or_insert_with(|| fit_grid(default_k, n));
        if k < 2 || k % 2 != 0 {
            return Err(invalid("k", format!("K = {k} must be even and at least 2")));
        }
        if k % n != 0 {
            return Err(invalid("k", format!("K divisible by N required (K = {k}, N = {n})")));
        }
        if !(self.period.is_finite() && self.period > 0.0) {
            return Err(invalid("period", "must be positive and finite"));
        }
        if self.kind == ProblemKind::Custom {
            let g = self.generators.as_ref().ok_or_else(|| invalid("generators", "required for kind custom"))?;
            if g.first.len() != n {
                return Err(invalid("generators.first", format!("expected {n} generators, got {}", g.first.len())));
            }
            let replicas = g.first.first().map(Vec::len).unwrap_or(0);
            if replicas == 0 {
                return Err(invalid("generators.first", "tables need at least one replica row"));
            }
            for (name, bank) in [("first", &g.first), ("second", &g.second)] {
                for (l, table) in bank.iter().enumerate() {
                    if table.len() != replicas || table.iter().any(|row| row.len() != k) {
                        return Err(invalid(
                            &format!("generators.{name}[{l}]"),
                            format!("expected {replicas} rows of {k} values"),
                        ));
                    }
                }
            }
        } else if self.generators.is_some() {
            return Err(invalid("generators", "only allowed for kind custom"));
        }
        let pipeline = *self.pipeline.get_or_insert(match self.kind {
            ProblemKind::SincFrame => Pipeline::Frame,
            _ => Pipeline::Constant,
        });
        let second = match (&self.kind, &self.generators) {
            (ProblemKind::Custom, Some(g)) => Some(g.second.len()),
            _ => None,
        };
        let m = match (self.is_two_basis(), second) {
            (true, Some(s)) if s != n => {
                return Err(invalid("generators.second", format!("two-basis problems need {n} generators")))
            }
            (true, _) => 2 * n,
            (false, Some(s)) => s,
            (false, None) => self.m.unwrap_or(2 * n),
        };
        if let Some(given) = self.m {
            if given != m {
                return Err(invalid("m", format!("expected {m} dictionary atoms, got {given}")));
            }
        }
        if !self.is_two_basis() && m < n {
            return Err(invalid("m", format!("frame needs m >= N (m = {m}, N = {n})")));
        }
        self.m = Some(m);
        if pipeline == Pipeline::Constant && !self.is_two_basis() {
            return Err(invalid("pipeline", "constant pipeline needs two bases; use frame or rich"));
        }
        if pipeline == Pipeline::Frame && self.is_two_basis() {
            return Err(invalid("pipeline", "frame pipeline needs kind sinc_frame or custom"));
        }
        if pipeline == Pipeline::Rich {
            let r = *self.rich_freqs.get_or_insert(2 * n);
            if r == 0 || r > k {
                return Err(invalid("rich_freqs", format!("must lie in 1..={k}")));
            }
        } else if self.rich_freqs.is_some() {
            return Err(invalid("rich_freqs", "only used by the rich pipeline"));
        }
        match (&self.kind, &self.mix) {
            (ProblemKind::UnitaryMixed, Some(mix)) => {
                if mix.matrix.len() != n || mix.matrix.iter().any(|r| r.len() != n) {
                    return Err(invalid("mix.matrix", format!("expected {n}x{n}")));
                }
                if mix.delays.len() != n {
                    return Err(invalid("mix.delays", format!("expected {n} delays")));
                }
            }
            (ProblemKind::UnitaryMixed, None) if self.seed.is_none() => {
                return Err(invalid("seed", "required to draw a random unitary mix"));
            }
            (ProblemKind::UnitaryMixed, None) => {}
            (_, Some(_)) => return Err(invalid("mix", "only allowed for kind unitary_mixed")),
            (_, None) => {}
        }
        if let Some(p) = &self.planted {
            if self.samples.is_some() {
                return Err(invalid("samples", "give either planted or samples, not both"));
            }
            if p.rows.windows(2).any(|w| w[0] >= w[1]) {
                return Err(invalid("planted.rows", "must be strictly increasing"));
            }
            if let Some(&r) = p.rows.iter().find(|&&r| r >= m) {
                return Err(invalid("planted.rows", format!("row {r} outside {m} atoms")));
            }
            match (&p.length, &p.sequences) {
                (Some(_), Some(_)) | (None, None) => {
                    return Err(invalid("planted", "give exactly one of length and sequences"))
                }
                (Some(len), None) => {
                    if *len == 0 || *len > k {
                        return Err(invalid("planted.length", format!("must lie in 1..={k}")));
                    }
                    if self.seed.is_none() {
                        return Err(invalid("seed", "required for random planted sequences"));
                    }
                }
                (None, Some(seqs)) => {
                    if seqs.len() != p.rows.len() {
                        return Err(invalid("planted.sequences", "need one sequence per planted row"));
                    }
                    if let Some(i) = seqs.iter().position(|s| s.len() > k) {
                        return Err(invalid(&format!("planted.sequences[{i}]"), format!("longer than K = {k}")));
                    }
                }
            }
        }
        if let Some(s) = &self.samples {
            if s.len() != n {
                return Err(invalid("samples", format!("need {n} sequences")));
            }
            if let Some(i) = s.iter().position(|q| q.len() > k) {
                return Err(invalid(&format!("samples[{i}]"), format!("longer than K = {k}")));
            }
        }
        let finite = |v: &[Cx]| v.iter().all(|z| z[0].is_finite() && z[1].is_finite());
        if self.samples.iter().flatten().any(|s| !finite(s)) {
            return Err(invalid("samples", "non-finite value"));
        }
        if self.planted.iter().flat_map(|p| p.sequences.iter().flatten()).any(|s| !finite(s)) {
            return Err(invalid("planted.sequences", "non-finite value"));
        }
        Ok(self)
    }

    /// Banks, dictionary spectrum and (if present) samples.
    pub fn build(&self) -> crate::Result<Instance> {
        let grid = FrequencyGrid::new(self.grid_size())?;
        let n = self.n;
        let t = self.period;
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed.unwrap_or(0));
        let (first, second) = match self.kind {
            ProblemKind::SpikeFourier => (spike_basis(n, t, &grid)?, fourier_basis(n, t, &grid)?),
            ProblemKind::UnitaryMixed => {
                let psi = fourier_basis(n, t, &grid)?;
                let (a, z) = match &self.mix {
                    Some(mix) => (CMat::from_fn(n, n, |r, c| cx(mix.matrix[r][c])), mix.delays.clone()),
                    None => {
                        let a = random_unitary(n, &mut rng);
                        let z: Vec<i64> = (0..n).map(|_| rng.random_range(-3..=3)).collect();
                        (a, z)
                    }
                };
                (unitary_mixed_basis(&psi, &a, &z, &grid)?, psi)
            }
            ProblemKind::SincFrame => (spike_basis(n, t, &grid)?, sinc_frame(n, self.atoms(), t, &grid)?),
            ProblemKind::Custom => {
                let g = self.generators.as_ref().ok_or_else(|| crate::Error::InvalidArgument("missing generators".into()))?;
                (bank_from_tables(&g.first, t, &grid)?, bank_from_tables(&g.second, t, &grid)?)
            }
        };
        let dictionary = if self.is_two_basis() {
            two_onb_dictionary(&first, &second, &first, &grid)?
        } else {
            cross_spectrum(&first, &second, &grid)?
        };
        let truth = match &self.planted {
            Some(p) => {
                let mut seqs = vec![Vec::new(); dictionary.cols()];
                match (&p.sequences, p.length) {
                    (Some(given), _) => {
                        for (&r, s) in p.rows.iter().zip(given) {
                            seqs[r] = s.iter().copied().map(cx).collect();
                        }
                    }
                    (None, Some(len)) => {
                        let draws = complex_gaussian(p.rows.len(), len, &mut rng);
                        for (i, &r) in p.rows.iter().enumerate() {
                            seqs[r] = draws.row(i).iter().copied().collect();
                        }
                    }
                    (None, None) => {}
                }
                Some(CoeffSpectra::from_sequences(&seqs, &grid)?)
            }
            None => None,
        };
        let samples = match (&truth, &self.samples) {
            (Some(g), _) => Some(synthesize_samples(&dictionary, g)?),
            (None, Some(s)) => {
                let seqs: Vec<Vec<C64>> = s.iter().map(|q| q.iter().copied().map(cx).collect()).collect();
                Some(CoeffSpectra::from_sequences(&seqs, &grid)?)
            }
            (None, None) => None,
        };
        Ok(Instance { grid, first, second, dictionary, truth, samples, two_basis: self.is_two_basis() })
    }
}

pub fn cx(z: Cx) -> C64 {
    C64::new(z[0], z[1])
}

pub fn to_cx(z: C64) -> Cx {
    [z.re, z.im]
}

fn bank_from_tables(tables: &[Vec<Vec<Cx>>], period: f64, grid: &FrequencyGrid) -> crate::Result<GeneratorBank> {
    let spectra = tables
        .iter()
        .map(|t| {
            let rows = t.len();
            CMat::from_fn(rows, grid.size(), |s, i| cx(t[s][i]))
        })
        .collect();
    GeneratorBank::from_spectra(period, grid, spectra)
}

/// Concrete objects behind a resolved spec.
#[derive(Clone, Debug)]
pub struct Instance {
    pub grid: FrequencyGrid,
    /// `φ` for two-basis problems, the sampler `h` for frames.
    pub first: GeneratorBank,
    /// `ψ` for two-basis problems, the frame `d` otherwise.
    pub second: GeneratorBank,
    pub dictionary: SpectralMatrix,
    pub truth: Option<CoeffSpectra>,
    pub samples: Option<CoeffSpectra>,
    pub two_basis: bool,
}

/// Reads, parses and validates a spec file. A missing or unreadable file
/// is a usage error.
pub fn load_problem(path: &Path) -> Result<ProblemSpec, CliError> {
    load_problem_with(path, default_grid_size()?)
}

pub fn load_problem_with(path: &Path, default_k: usize) -> Result<ProblemSpec, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::SpecRead { path: path.display().to_string(), message: e.to_string() })?;
    ProblemSpec::from_json(&text)?.resolve(default_k)
}

pub fn save_problem(spec: &ProblemSpec, path: &Path) -> Result<(), CliError> {
    std::fs::write(path, spec.to_json())
        .map_err(|e| CliError::ReportWrite { path: path.display().to_string(), message: e.to_string() })
}
