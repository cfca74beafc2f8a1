#![allow(dead_code)]

use num_complex::Complex64;
use rand::seq::index::sample;
use rand::seq::SliceRandom;
use rand::Rng;
use sisparse::linalg::{complex_gaussian, frobenius, CMat, C64};
use sisparse::sispace::{CoeffSpectra, FrequencyGrid};

/// Seeded Gaussian sequences of length `1..=max_len` on `rows`, zero
/// elsewhere.
pub fn planted<R: Rng>(rows: &[usize], total: usize, max_len: usize, grid: &FrequencyGrid, rng: &mut R) -> CoeffSpectra {
    let mut seqs = vec![Vec::new(); total];
    for &r in rows {
        let len = rng.random_range(1..=max_len);
        seqs[r] = complex_gaussian(1, len, rng).iter().copied().collect();
    }
    CoeffSpectra::from_sequences(&seqs, grid).unwrap()
}

/// `count` distinct sorted indices below `total`.
pub fn random_support<R: Rng>(total: usize, count: usize, rng: &mut R) -> Vec<usize> {
    let mut s = sample(rng, total, count).into_vec();
    s.sort_unstable();
    s
}

pub fn relative_error(got: &CoeffSpectra, want: &CoeffSpectra) -> f64 {
    frobenius(&(got.values() - want.values())) / want.frobenius()
}

/// The `N × N` DFT scaled to be unitary, with its columns permuted and
/// multiplied by random unimodular phases.
pub fn scrambled_dft<R: Rng>(n: usize, rng: &mut R) -> CMat {
    let f = sisparse::linalg::dft_matrix(n).scale(1.0 / (n as f64).sqrt());
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let phases: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
    CMat::from_fn(n, n, |r, c| f[(r, order[c])] * Complex64::from_polar(1.0, phases[c]))
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// `‖x‖` by direct time-domain evaluation of
/// `x(t) = Σ_r Σ_n a_r[n] φ'_r(t - nT)` for the box bank
/// `φ_l(t) = √(N/T)·1[lT/N, (l+1)T/N)` mixed as
/// `φ'_r(t) = Σ_l u_rl φ_l(t - z_l T)`. The signal is constant on cells
/// of width `T/N`, so the midpoint rule is exact.
pub fn box_signal_norm(a: &[Vec<C64>], u: &CMat, z: &[i64], period: f64) -> f64 {
    let n = u.nrows();
    let cell = period / n as f64;
    let amp = (n as f64 / period).sqrt();
    let max_len = a.iter().map(Vec::len).max().unwrap_or(0) as i64;
    let (zmin, zmax) = (*z.iter().min().unwrap(), *z.iter().max().unwrap());
    let first = zmin * n as i64 - 1;
    let last = (max_len + zmax + 1) * n as i64;
    let boxed = |t: f64, l: usize| -> f64 {
        let lo = l as f64 * cell;
        if t >= lo && t < lo + cell {
            amp
        } else {
            0.0
        }
    };
    let mut energy = 0.0;
    for j in first..=last {
        let t = (j as f64 + 0.5) * cell;
        let mut x = C64::new(0.0, 0.0);
        for (r, seq) in a.iter().enumerate() {
            for (k, v) in seq.iter().enumerate() {
                for l in 0..n {
                    let shift = (k as i64 + z[l]) as f64 * period;
                    x += v * u[(r, l)] * boxed(t - shift, l);
                }
            }
        }
        energy += x.norm_sqr() * cell;
    }
    energy.sqrt()
}
