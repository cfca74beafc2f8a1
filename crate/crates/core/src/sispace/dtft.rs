use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::linalg::{CVec, C64, ZERO};

use super::FrequencyGrid;

/// `X(ω_i) = Σ_n x[n] e^{-jω_i n}` for a sequence starting at `n = 0`.
///
/// ```
/// use sisparse::sispace::{dtft, FrequencyGrid};
/// use num_complex::Complex64;
///
/// let grid = FrequencyGrid::new(4).unwrap();
/// let x = [Complex64::new(0.0, 0.0), Complex64::new(1.0, 0.0)];
/// let spec = dtft(&x, &grid).unwrap();
/// assert!((spec[1] - Complex64::new(0.0, -1.0)).norm() < 1e-15);
/// ```
pub fn dtft(sequence: &[C64], grid: &FrequencyGrid) -> Result<CVec> {
    let k = grid.size();
    if sequence.len() > k {
        return Err(Error::TooLong { len: sequence.len(), grid: k });
    }
    let mut buf = vec![ZERO; k];
    buf[..sequence.len()].copy_from_slice(sequence);
    FftPlanner::new().plan_fft_forward(k).process(&mut buf);
    Ok(CVec::from_vec(buf))
}

/// Real-valued convenience wrapper around [`dtft`].
pub fn dtft_real(sequence: &[f64], grid: &FrequencyGrid) -> Result<CVec> {
    let c: Vec<C64> = sequence.iter().map(|&x| C64::new(x, 0.0)).collect();
    dtft(&c, grid)
}

/// Inverse of [`dtft`]: the length-`K` sequence whose grid DTFT is `spectrum`.
pub fn idtft(spectrum: &CVec) -> Vec<C64> {
    let k = spectrum.len();
    if k == 0 {
        return Vec::new();
    }
    let mut buf: Vec<C64> = spectrum.iter().copied().collect();
    FftPlanner::new().plan_fft_inverse(k).process(&mut buf);
    let s = 1.0 / k as f64;
    buf.iter_mut().for_each(|z| *z *= s);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn direct(x: &[C64], k: usize) -> Vec<C64> {
        (0..k)
            .map(|i| {
                let w = 2.0 * PI * i as f64 / k as f64;
                x.iter()
                    .enumerate()
                    .map(|(n, &v)| v * C64::from_polar(1.0, -w * n as f64))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn impulse_is_flat() {
        let g = FrequencyGrid::new(8).unwrap();
        let s = dtft(&[C64::new(1.0, 0.0)], &g).unwrap();
        assert!(s.iter().all(|z| (z - C64::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn delayed_impulse_k4() {
        let g = FrequencyGrid::new(4).unwrap();
        let s = dtft_real(&[0.0, 1.0], &g).unwrap();
        let want = [C64::new(1.0, 0.0), C64::new(0.0, -1.0), C64::new(-1.0, 0.0), C64::new(0.0, 1.0)];
        for (a, b) in s.iter().zip(want) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn matches_direct_sum_and_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let g = FrequencyGrid::new(32).unwrap();
        for len in [1, 5, 17, 32] {
            let x: Vec<C64> = (0..len).map(|_| C64::new(rng.random::<f64>() - 0.5, 0.0)).collect();
            let s = dtft(&x, &g).unwrap();
            for (a, b) in s.iter().zip(direct(&x, 32)) {
                assert!((a - b).norm() < 1e-12);
            }
            let back = idtft(&s);
            for (n, v) in back.iter().enumerate() {
                let want = x.get(n).copied().unwrap_or(ZERO);
                assert!((v - want).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn too_long() {
        let g = FrequencyGrid::new(4).unwrap();
        assert!(matches!(dtft_real(&[0.0; 5], &g), Err(Error::TooLong { len: 5, grid: 4 })));
    }
}
