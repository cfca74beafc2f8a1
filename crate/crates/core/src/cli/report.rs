//! Reports: one JSON document per run, plus a long-format CSV of the
//! per-grid-point spectra for plotting.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bases::TightnessSummary;
use crate::coherence::CoherenceReport;
use crate::decompose::{Diagnostics, FactorizationSummary};
use crate::sispace::{CoeffSpectra, FrequencyGrid, SpectralMatrix};

use super::spec::{Cx, ProblemSpec};
use super::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolutionSummary {
    pub support: Vec<usize>,
    /// Support split into the two blocks of a two-basis dictionary,
    /// indices relative to each block.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub blocks: Option<[Vec<usize>; 2]>,
    pub k: usize,
    pub residual: f64,
    pub diagnostics: Diagnostics,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub planted_support: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support_matches: Option<bool>,
    /// `‖γ̂ - γ‖_F / ‖γ‖_F` over the grid against the planted spectra.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub relative_error: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BankRiesz {
    pub bank: String,
    pub count: usize,
    pub alpha: f64,
    pub beta: f64,
    pub riesz_basis: bool,
    pub orthonormal_deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthesisSummary {
    pub planted_support: Vec<usize>,
    /// `‖c‖`, the signal norm when the sampler is orthonormal.
    pub samples_norm: f64,
    /// `c_l[n]` for `n = 0..K`, one sequence per sampler generator.
    pub samples: Vec<Vec<Cx>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub total_seconds: f64,
}

/// Per-grid-point magnitudes for plotting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlotData {
    pub omega: Vec<f64>,
    /// `|D_rc(ω_i)|`, `dictionary[i][r][c]`.
    pub dictionary: Vec<Vec<Vec<f64>>>,
    /// `|γ_l(ω_i)|`, `gamma[i][l]`.
    pub gamma: Vec<Vec<f64>>,
    pub gamma_norms: Vec<f64>,
    /// Block label of every coefficient row.
    pub blocks: Vec<String>,
}

impl PlotData {
    pub fn new(grid: &FrequencyGrid, dict: &SpectralMatrix, gamma: &CoeffSpectra, blocks: Vec<String>) -> Self {
        let k = grid.size();
        PlotData {
            omega: grid.points().collect(),
            dictionary: (0..k)
                .map(|i| {
                    let m = dict.at(i);
                    (0..m.nrows()).map(|r| (0..m.ncols()).map(|c| m[(r, c)].norm()).collect()).collect()
                })
                .collect(),
            gamma: (0..k).map(|i| gamma.values().column(i).iter().map(|z| z.norm()).collect()).collect(),
            gamma_norms: gamma.row_energies(),
            blocks,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub grid_size: usize,
    pub period: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spec: Option<ProblemSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coherence: Option<CoherenceReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tightness: Option<TightnessSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub riesz: Option<Vec<BankRiesz>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub factorization: Option<FactorizationSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solution: Option<SolutionSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub synthesis: Option<SynthesisSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plot: Option<PlotData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timings: Option<Timings>,
}

impl Report {
    pub fn new(command: &str, grid: &FrequencyGrid, period: f64) -> Self {
        Report {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            grid_size: grid.size(),
            period,
            spec: None,
            coherence: None,
            tightness: None,
            riesz: None,
            factorization: None,
            solution: None,
            synthesis: None,
            plot: None,
            timings: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let mut de = serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(&mut de)
            .map_err(|e| CliError::Parse { field: e.path().to_string(), message: e.inner().to_string() })
    }

    /// Long-format table `table,grid_index,omega,row,col,block,value`.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["table", "grid_index", "omega", "row", "col", "block", "value"])?;
        if let Some(p) = &self.plot {
            for (i, m) in p.dictionary.iter().enumerate() {
                let (idx, om) = (i.to_string(), p.omega[i].to_string());
                for (r, row) in m.iter().enumerate() {
                    for (c, v) in row.iter().enumerate() {
                        w.write_record(["dictionary", &idx, &om, &r.to_string(), &c.to_string(), "", &v.to_string()])?;
                    }
                }
            }
            for (i, g) in p.gamma.iter().enumerate() {
                let (idx, om) = (i.to_string(), p.omega[i].to_string());
                for (l, v) in g.iter().enumerate() {
                    w.write_record(["gamma", &idx, &om, &l.to_string(), "", &p.blocks[l], &v.to_string()])?;
                }
            }
            for (l, v) in p.gamma_norms.iter().enumerate() {
                w.write_record(["gamma_norm", "", "", &l.to_string(), "", &p.blocks[l], &v.to_string()])?;
            }
        }
        let bytes = w.into_inner().map_err(|e| e.into_error())?;
        Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
    }
}

pub fn write_report(report: &Report, path: &Path, format: Format) -> Result<(), CliError> {
    let write_err = |message: String| CliError::ReportWrite { path: path.display().to_string(), message };
    let text = match format {
        Format::Json => report.to_json(),
        Format::Csv => report.to_csv().map_err(|e| write_err(e.to_string()))?,
    };
    std::fs::write(path, text).map_err(|e| write_err(e.to_string()))
}
