use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CMat, C64, ZERO};

use super::FrequencyGrid;

/// One analog frequency touched by the grid: `Ω = 2πn/(KT)`, so that
/// `ΩT/π = 2n/K` is known exactly through the integer `n`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandPoint {
    pub n: i64,
    pub grid_size: usize,
    pub period: f64,
}

impl BandPoint {
    /// Analog frequency in rad/s.
    pub fn omega(&self) -> f64 {
        2.0 * PI * self.n as f64 / (self.grid_size as f64 * self.period)
    }

    /// `ΩT/π` as a float.
    pub fn normalized(&self) -> f64 {
        2.0 * self.n as f64 / self.grid_size as f64
    }
}

/// A finite bank of generators of a shift-invariant space, stored by their
/// continuous-time Fourier transforms on the `B` band replicas hit by each
/// grid point.
///
/// Grid point `i` and replica slot `k` correspond to the analog frequency
/// `Ω = (ω_i - 2πs)/T` with `s = s_min(i) + k`, where the `B` consecutive
/// values of `s` are chosen so that `ΩT ∈ (-πB, πB]`.
#[derive(Clone, Debug, PartialEq)]
pub struct GeneratorBank {
    period: f64,
    replicas: usize,
    grid_size: usize,
    spectra: Vec<CMat>,
}

fn first_replica(i: usize, replicas: usize, grid_size: usize) -> i64 {
    // ceil((2i - BK) / (2K))
    let a = 2 * i as i64 - (replicas * grid_size) as i64;
    let b = 2 * grid_size as i64;
    -((-a).div_euclid(b))
}

impl GeneratorBank {
    pub fn from_fn<F>(
        period: f64,
        grid: &FrequencyGrid,
        replicas: usize,
        count: usize,
        mut f: F,
    ) -> Result<Self>
    where
        F: FnMut(usize, BandPoint) -> C64,
    {
        check_shape(period, replicas, count)?;
        let k = grid.size();
        let mut spectra = Vec::with_capacity(count);
        for l in 0..count {
            let mut m = CMat::zeros(replicas, k);
            for i in 0..k {
                for r in 0..replicas {
                    m[(r, i)] = f(l, point(i, r, replicas, k, period));
                }
            }
            spectra.push(m);
        }
        Self::from_spectra(period, grid, spectra)
    }

    /// Builds a bank from `B × K` spectrum tables, one per generator.
    pub fn from_spectra(period: f64, grid: &FrequencyGrid, spectra: Vec<CMat>) -> Result<Self> {
        let replicas = spectra.first().map(|m| m.nrows()).unwrap_or(0);
        check_shape(period, replicas, spectra.len())?;
        for (l, m) in spectra.iter().enumerate() {
            if m.nrows() != replicas || m.ncols() != grid.size() {
                return Err(Error::DimensionMismatch(format!(
                    "generator {l} table is {}x{}, expected {replicas}x{}",
                    m.nrows(),
                    m.ncols(),
                    grid.size()
                )));
            }
            if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::InvalidArgument(format!(
                    "generator {l} has non-finite spectrum values"
                )));
            }
        }
        Ok(GeneratorBank { period, replicas, grid_size: grid.size(), spectra })
    }

    pub fn zeros(period: f64, grid: &FrequencyGrid, replicas: usize, count: usize) -> Result<Self> {
        Self::from_fn(period, grid, replicas, count, |_, _| ZERO)
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn replicas(&self) -> usize {
        self.replicas
    }

    pub fn grid_size(&self) -> usize {
        self.grid_size
    }

    pub fn count(&self) -> usize {
        self.spectra.len()
    }

    /// `B × K` table of generator `l`.
    pub fn spectrum(&self, l: usize) -> &CMat {
        &self.spectra[l]
    }

    pub fn spectra(&self) -> &[CMat] {
        &self.spectra
    }

    pub fn band_point(&self, i: usize, slot: usize) -> BandPoint {
        point(i, slot, self.replicas, self.grid_size, self.period)
    }

    pub(crate) fn check_compatible(&self, other: &GeneratorBank) -> Result<()> {
        if self.period != other.period {
            return Err(Error::MismatchedBanks("period"));
        }
        if self.replicas != other.replicas {
            return Err(Error::MismatchedBanks("replica count"));
        }
        if self.grid_size != other.grid_size {
            return Err(Error::MismatchedBanks("grid size"));
        }
        Ok(())
    }

    pub(crate) fn check_grid(&self, grid: &FrequencyGrid) -> Result<()> {
        if self.grid_size != grid.size() {
            return Err(Error::MismatchedBanks("grid size"));
        }
        Ok(())
    }

    /// Sub-bank of the listed generators, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut spectra = Vec::with_capacity(indices.len());
        for &l in indices {
            let s = self.spectra.get(l).ok_or_else(|| {
                Error::InvalidArgument(format!("generator index {l} out of range 0..{}", self.count()))
            })?;
            spectra.push(s.clone());
        }
        check_shape(self.period, self.replicas, spectra.len())?;
        Ok(GeneratorBank { spectra, ..self.clone_empty() })
    }

    /// Generators of `self` followed by those of `other`.
    pub fn concat(&self, other: &GeneratorBank) -> Result<Self> {
        self.check_compatible(other)?;
        let mut spectra = self.spectra.clone();
        spectra.extend(other.spectra.iter().cloned());
        Ok(GeneratorBank { spectra, ..self.clone_empty() })
    }

    pub fn with_generator_scaled(&self, l: usize, factor: C64) -> Self {
        let mut out = self.clone();
        out.spectra[l] *= factor;
        out
    }

    /// New bank whose generator `l` at grid point `i` is
    /// `Σ_r mix[i][(l, r)] · old_r`, replica by replica.
    pub fn mixed(&self, mix: &[CMat]) -> Result<Self> {
        if mix.len() != self.grid_size {
            return Err(Error::DimensionMismatch(format!(
                "{} mixing matrices for a grid of {}",
                mix.len(),
                self.grid_size
            )));
        }
        let rows = mix[0].nrows();
        if mix.iter().any(|m| m.nrows() != rows || m.ncols() != self.count()) {
            return Err(Error::DimensionMismatch("mixing matrices have inconsistent shapes".into()));
        }
        check_shape(self.period, self.replicas, rows)?;
        let mut spectra = vec![CMat::zeros(self.replicas, self.grid_size); rows];
        for (i, m) in mix.iter().enumerate() {
            for (l, out) in spectra.iter_mut().enumerate() {
                for k in 0..self.replicas {
                    let mut acc = ZERO;
                    for r in 0..self.count() {
                        acc += m[(l, r)] * self.spectra[r][(k, i)];
                    }
                    out[(k, i)] = acc;
                }
            }
        }
        Ok(GeneratorBank { spectra, ..self.clone_empty() })
    }

    /// Generator `l` at time `t`, by a Riemann sum of the inverse Fourier
    /// integral over the stored band samples (spacing `2π/(KT)`).
    pub fn sample_time(&self, l: usize, t: f64) -> C64 {
        let s = &self.spectra[l];
        let mut acc = ZERO;
        for i in 0..self.grid_size {
            for k in 0..self.replicas {
                let p = self.band_point(i, k);
                // e^{jΩt} with Ω t = 2π n t / (K T)
                let phase = 2.0 * PI * p.n as f64 * t / (self.grid_size as f64 * self.period);
                acc += s[(k, i)] * C64::from_polar(1.0, phase);
            }
        }
        acc / (self.grid_size as f64 * self.period)
    }

    fn clone_empty(&self) -> Self {
        GeneratorBank {
            period: self.period,
            replicas: self.replicas,
            grid_size: self.grid_size,
            spectra: Vec::new(),
        }
    }
}

fn point(i: usize, slot: usize, replicas: usize, grid_size: usize, period: f64) -> BandPoint {
    let s = first_replica(i, replicas, grid_size) + slot as i64;
    BandPoint { n: i as i64 - s * grid_size as i64, grid_size, period }
}

fn check_shape(period: f64, replicas: usize, count: usize) -> Result<()> {
    if !(period.is_finite() && period > 0.0) {
        return Err(Error::InvalidArgument(format!("period must be positive, got {period}")));
    }
    if replicas == 0 {
        return Err(Error::InvalidArgument("replica count must be positive".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("a bank needs at least one generator".into()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn replicas_tile_the_band_once() {
        for &(b, k) in &[(1usize, 4usize), (2, 8), (3, 6), (4, 16), (5, 10)] {
            let grid = FrequencyGrid::new(k).unwrap();
            let bank = GeneratorBank::zeros(1.0, &grid, b, 1).unwrap();
            let mut seen: Vec<i64> = (0..k)
                .flat_map(|i| (0..b).map(move |s| (i, s)))
                .map(|(i, s)| bank.band_point(i, s).n)
                .collect();
            seen.sort_unstable();
            let half = (b * k) as i64 / 2;
            let expected: Vec<i64> = (-half + 1..=half).collect();
            assert_eq!(seen, expected, "B={b} K={k}");
            for i in 0..k {
                for s in 0..b {
                    let n = bank.band_point(i, s).n;
                    assert_eq!((n - i as i64).rem_euclid(k as i64), 0);
                }
            }
        }
    }

    #[test]
    fn select_and_concat() {
        let grid = FrequencyGrid::new(4).unwrap();
        let bank = GeneratorBank::from_fn(1.0, &grid, 2, 3, |l, _| C64::new(l as f64, 0.0)).unwrap();
        let sub = bank.select(&[2, 0]).unwrap();
        assert_eq!(sub.count(), 2);
        assert_eq!(sub.spectrum(0)[(0, 0)].re, 2.0);
        let both = sub.concat(&bank).unwrap();
        assert_eq!(both.count(), 5);
        assert!(bank.select(&[3]).is_err());
        let other = GeneratorBank::zeros(2.0, &grid, 2, 1).unwrap();
        assert!(matches!(bank.concat(&other), Err(Error::MismatchedBanks(_))));
    }

    #[test]
    fn non_finite_rejected() {
        let grid = FrequencyGrid::new(4).unwrap();
        let r = GeneratorBank::from_fn(1.0, &grid, 1, 1, |_, _| C64::new(f64::NAN, 0.0));
        assert!(r.is_err());
    }
}
