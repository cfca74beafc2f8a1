use crate::error::{Error, Result};
use crate::linalg::{max_abs, CMat, CVec, C64};

use super::FrequencyGrid;

/// Matrix-valued function on the frequency grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralMatrix {
    rows: usize,
    cols: usize,
    values: Vec<CMat>,
}

impl SpectralMatrix {
    pub fn new(values: Vec<CMat>) -> Result<Self> {
        let first = values
            .first()
            .ok_or_else(|| Error::InvalidArgument("spectral matrix needs at least one grid point".into()))?;
        let (rows, cols) = first.shape();
        if values.iter().any(|m| m.shape() != (rows, cols)) {
            return Err(Error::DimensionMismatch("matrix shape varies across grid points".into()));
        }
        if values.iter().flat_map(|m| m.iter()).any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidArgument("spectral matrix has non-finite entries".into()));
        }
        Ok(SpectralMatrix { rows, cols, values })
    }

    pub fn from_fn(grid: &FrequencyGrid, mut f: impl FnMut(usize, f64) -> CMat) -> Result<Self> {
        Self::new((0..grid.size()).map(|i| f(i, grid.omega(i))).collect())
    }

    /// The same matrix at every grid point.
    pub fn constant(grid: &FrequencyGrid, m: &CMat) -> Self {
        SpectralMatrix { rows: m.nrows(), cols: m.ncols(), values: vec![m.clone(); grid.size()] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn at(&self, i: usize) -> &CMat {
        &self.values[i]
    }

    pub fn values(&self) -> &[CMat] {
        &self.values
    }

    pub fn map(&self, f: impl FnMut(&CMat) -> CMat) -> Result<Self> {
        Self::new(self.values.iter().map(f).collect())
    }

    /// `[A B]` pointwise.
    pub fn hstack(&self, other: &SpectralMatrix) -> Result<Self> {
        if self.len() != other.len() || self.rows != other.rows {
            return Err(Error::DimensionMismatch("cannot stack spectral matrices".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| {
                let mut m = CMat::zeros(a.nrows(), a.ncols() + b.ncols());
                m.columns_mut(0, a.ncols()).copy_from(a);
                m.columns_mut(a.ncols(), b.ncols()).copy_from(b);
                m
            })
            .collect();
        Ok(SpectralMatrix { rows: self.rows, cols: self.cols + other.cols, values })
    }

    /// `[I M]` for the dictionary of two orthonormal bases.
    pub fn with_identity_block(&self) -> Result<Self> {
        let id = CMat::identity(self.rows, self.rows);
        let eye = SpectralMatrix { rows: self.rows, cols: self.rows, values: vec![id; self.len()] };
        eye.hstack(self)
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let values = self.values.iter().map(|m| crate::linalg::select_columns(m, idx)).collect();
        SpectralMatrix { rows: self.rows, cols: idx.len(), values }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(max_abs).fold(0.0, f64::max)
    }

    /// Largest entrywise distance to another spectral matrix.
    pub fn max_distance(&self, other: &SpectralMatrix) -> f64 {
        if self.len() != other.len() || self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.values.iter().zip(&other.values).map(|(a, b)| max_abs(&(a - b))).fold(0.0, f64::max)
    }
}

/// Vector-valued function on the frequency grid, stored as a
/// `count × K` matrix (row `l` is the spectrum of sequence `l`).
#[derive(Clone, Debug, PartialEq)]
pub struct CoeffSpectra {
    values: CMat,
}

impl CoeffSpectra {
    pub fn new(values: CMat) -> Self {
        CoeffSpectra { values }
    }

    pub fn zeros(count: usize, grid: &FrequencyGrid) -> Self {
        CoeffSpectra { values: CMat::zeros(count, grid.size()) }
    }

    /// Rows given by `f(l, i)`.
    pub fn from_fn(count: usize, grid: &FrequencyGrid, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        CoeffSpectra { values: CMat::from_fn(count, grid.size(), |l, i| f(l, i)) }
    }

    /// Grid DTFTs of finite sequences, one row per sequence.
    pub fn from_sequences(seqs: &[Vec<C64>], grid: &FrequencyGrid) -> Result<Self> {
        let mut values = CMat::zeros(seqs.len(), grid.size());
        for (l, s) in seqs.iter().enumerate() {
            let row = super::dtft(s, grid)?;
            values.row_mut(l).copy_from(&row.transpose());
        }
        Ok(CoeffSpectra { values })
    }

    pub fn count(&self) -> usize {
        self.values.nrows()
    }

    pub fn grid_size(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &CMat {
        &self.values
    }

    pub fn into_values(self) -> CMat {
        self.values
    }

    /// The vector at grid point `i`.
    pub fn at(&self, i: usize) -> CVec {
        self.values.column(i).into_owned()
    }

    pub fn set_at(&mut self, i: usize, v: &CVec) {
        self.values.column_mut(i).copy_from(v);
    }

    /// Inverse grid DTFT of every row (length `K` each).
    pub fn to_sequences(&self) -> Vec<Vec<C64>> {
        (0..self.count())
            .map(|l| super::idtft(&self.values.row(l).transpose()))
            .collect()
    }

    /// `sqrt((1/K) Σ_i |v_l(ω_i)|²)` per row.
    pub fn row_energies(&self) -> Vec<f64> {
        let k = self.grid_size().max(1) as f64;
        (0..self.count())
            .map(|l| (self.values.row(l).iter().map(|z| z.norm_sqr()).sum::<f64>() / k).sqrt())
            .collect()
    }

    /// Indices of rows whose energy exceeds `rel` times the largest one.
    pub fn active_rows(&self, rel: f64) -> Vec<usize> {
        let e = self.row_energies();
        let max = e.iter().copied().fold(0.0, f64::max);
        if max == 0.0 {
            return Vec::new();
        }
        e.iter().enumerate().filter(|(_, &v)| v > rel * max).map(|(l, _)| l).collect()
    }

    /// Places these rows at positions `support` of a `total`-row spectrum.
    pub fn embed(&self, support: &[usize], total: usize) -> Result<CoeffSpectra> {
        if support.len() != self.count() || support.iter().any(|&s| s >= total) {
            return Err(Error::DimensionMismatch(format!(
                "cannot embed {} rows at {:?} into {total}",
                self.count(),
                support
            )));
        }
        let mut out = CMat::zeros(total, self.grid_size());
        for (r, &s) in support.iter().enumerate() {
            out.row_mut(s).copy_from(&self.values.row(r));
        }
        Ok(CoeffSpectra { values: out })
    }

    pub fn select_rows(&self, rows: &[usize]) -> CoeffSpectra {
        CoeffSpectra { values: CMat::from_fn(rows.len(), self.grid_size(), |r, i| self.values[(rows[r], i)]) }
    }

    /// Largest `|v(ω_i) - conj(v(2π - ω_i))|`.
    pub fn conjugate_asymmetry(&self) -> f64 {
        let k = self.grid_size();
        let mut worst = 0.0f64;
        for l in 0..self.count() {
            for i in 0..k {
                let j = (k - i) % k;
                worst = worst.max((self.values[(l, i)] - self.values[(l, j)].conj()).norm());
            }
        }
        worst
    }

    pub fn scale(&self, c: C64) -> CoeffSpectra {
        CoeffSpectra { values: &self.values * c }
    }

    pub fn add(&self, other: &CoeffSpectra) -> Result<CoeffSpectra> {
        if self.values.shape() != other.values.shape() {
            return Err(Error::DimensionMismatch("coefficient spectra shapes differ".into()));
        }
        Ok(CoeffSpectra { values: &self.values + &other.values })
    }

    /// Largest entrywise distance.
    pub fn max_distance(&self, other: &CoeffSpectra) -> f64 {
        if self.values.shape() != other.values.shape() {
            return f64::INFINITY;
        }
        max_abs(&(&self.values - &other.values))
    }

    /// Frobenius norm of the whole table.
    pub fn frobenius(&self) -> f64 {
        crate::linalg::frobenius(&self.values)
    }
}
