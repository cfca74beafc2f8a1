use std::collections::VecDeque;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::linalg::{max_abs, CMat, CVec, C64, ONE};
use crate::sispace::{FrequencyGrid, SpectralMatrix};

pub const STRUCTURE_TOL: f64 = 1e-8;
const MASK_REL: f64 = 1e-10;
const MIN_FACTOR: f64 = 1e-8;

/// One stretch of consecutive grid points (cyclically) on which
/// `D(ω_i) = W(ω_i) A Z(ω_i)` holds with a single constant `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ArcFactor {
    /// Grid indices in scan order (cyclically increasing frequency).
    pub points: Vec<usize>,
    pub reference: usize,
    pub a: CMat,
}

/// Factorization `D(e^{jω}) = W(e^{jω}) A Z(e^{jω})` with diagonal `W`, `Z`,
/// piecewise constant `A`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstantFactorization {
    pub arcs: Vec<ArcFactor>,
    /// Arc index for each grid point.
    pub arc_of: Vec<usize>,
    /// Diagonal of `W` at each grid point.
    pub w: Vec<CVec>,
    /// Diagonal of `Z` at each grid point.
    pub z: Vec<CVec>,
    pub detected: bool,
    pub max_deviation: f64,
    pub tolerance: f64,
}

/// Compact description for reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FactorizationSummary {
    pub detected: bool,
    pub arcs: usize,
    pub max_deviation: f64,
    pub w_is_identity: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub z_shifts: Option<Vec<i64>>,
}

impl ConstantFactorization {
    /// `A` of the first arc.
    pub fn a(&self) -> &CMat {
        &self.arcs[0].a
    }

    pub fn arc_count(&self) -> usize {
        self.arcs.len()
    }

    pub fn w_matrix(&self, i: usize) -> CMat {
        CMat::from_diagonal(&self.w[i])
    }

    pub fn z_matrix(&self, i: usize) -> CMat {
        CMat::from_diagonal(&self.z[i])
    }

    /// `W(ω_i) A Z(ω_i)`.
    pub fn evaluate(&self, i: usize) -> CMat {
        scaled(&self.arcs[self.arc_of[i]].a, &self.w[i], &self.z[i])
    }

    /// True when `W(ω_i) = I` on the whole grid (within `1e-12`).
    pub fn w_is_identity(&self) -> bool {
        self.w.iter().all(|w| w.iter().all(|v| (v - ONE).norm() < 1e-12))
    }

    /// Integer delays `z_r` with `Z_r(e^{jω}) = e^{-jω z_r}`, if the
    /// factorization is a single arc with identity `W` and every column of
    /// `Z` is such a delay (up to a constant folded into `A`).
    pub fn z_shifts(&self, grid: &FrequencyGrid) -> Option<Vec<i64>> {
        if self.arcs.len() != 1 || !self.w_is_identity() {
            return None;
        }
        let arc = &self.arcs[0];
        let cols = self.z[0].len();
        let k = grid.size() as i64;
        let mut out = Vec::with_capacity(cols);
        for r in 0..cols {
            let slope = phase_slope(arc, grid, |i| self.z[i][r]);
            let delay = (-slope).round() as i64;
            let base = self.z[arc.reference][r];
            let ok = arc.points.iter().all(|&i| {
                let steps = i as i64 - arc.reference as i64;
                let want = base * crate::linalg::unit_phase(-steps * delay, k);
                (self.z[i][r] - want).norm() <= STRUCTURE_TOL
            });
            if !ok {
                return None;
            }
            out.push(delay);
        }
        Some(out)
    }

    /// Least-squares phase slopes `d arg / dω` of each diagonal entry of `W`
    /// and `Z`, per arc.
    pub fn phase_slopes(&self, grid: &FrequencyGrid) -> Vec<(Vec<f64>, Vec<f64>)> {
        self.arcs
            .iter()
            .map(|arc| {
                let ws = (0..self.w[0].len()).map(|l| phase_slope(arc, grid, |i| self.w[i][l])).collect();
                let zs = (0..self.z[0].len()).map(|r| phase_slope(arc, grid, |i| self.z[i][r])).collect();
                (ws, zs)
            })
            .collect()
    }

    pub fn summary(&self, grid: &FrequencyGrid) -> FactorizationSummary {
        FactorizationSummary {
            detected: self.detected,
            arcs: self.arcs.len(),
            max_deviation: self.max_deviation,
            w_is_identity: self.w_is_identity(),
            z_shifts: self.z_shifts(grid),
        }
    }
}

fn scaled(a: &CMat, w: &CVec, z: &CVec) -> CMat {
    CMat::from_fn(a.nrows(), a.ncols(), |l, r| w[l] * a[(l, r)] * z[r])
}

/// Unwrapped phase along the arc, fitted against the unwrapped frequency.
fn phase_slope(arc: &ArcFactor, grid: &FrequencyGrid, f: impl Fn(usize) -> C64) -> f64 {
    if arc.points.len() < 2 {
        return 0.0;
    }
    let step = 2.0 * PI / grid.size() as f64;
    let mut xs = Vec::with_capacity(arc.points.len());
    let mut ys = Vec::with_capacity(arc.points.len());
    let mut x = 0.0;
    let mut y = f(arc.points[0]).arg();
    let mut prev_i = arc.points[0];
    let mut prev_v = f(prev_i);
    xs.push(x);
    ys.push(y);
    for &i in &arc.points[1..] {
        let v = f(i);
        let di = (i + grid.size() - prev_i) % grid.size();
        x += di as f64 * step;
        y += (v / prev_v).arg();
        xs.push(x);
        ys.push(y);
        prev_i = i;
        prev_v = v;
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Spanning forest of the bipartite graph of nonzero entries of `A₀`,
/// used to read `W`, `Z` off entrywise ratios.
struct Skeleton {
    reference: CMat,
    // (is_row, index, via) in BFS order; via = None for a root
    order: Vec<(bool, usize, Option<usize>)>,
}

impl Skeleton {
    fn new(reference: &CMat, scale: f64) -> Self {
        let (rows, cols) = reference.shape();
        let cut = MASK_REL * scale;
        let nz = |l: usize, r: usize| reference[(l, r)].norm() > cut;
        let mut seen_row = vec![false; rows];
        let mut seen_col = vec![false; cols];
        let mut order = Vec::with_capacity(rows + cols);
        let mut queue = VecDeque::new();
        let starts = (0..rows).map(|l| (true, l)).chain((0..cols).map(|r| (false, r)));
        for (is_row, idx) in starts {
            let seen = if is_row { seen_row[idx] } else { seen_col[idx] };
            if seen {
                continue;
            }
            if is_row {
                seen_row[idx] = true;
            } else {
                seen_col[idx] = true;
            }
            order.push((is_row, idx, None));
            queue.push_back((is_row, idx));
            while let Some((is_row, idx)) = queue.pop_front() {
                if is_row {
                    for r in 0..cols {
                        if !seen_col[r] && nz(idx, r) {
                            seen_col[r] = true;
                            order.push((false, r, Some(idx)));
                            queue.push_back((false, r));
                        }
                    }
                } else {
                    for l in 0..rows {
                        if !seen_row[l] && nz(l, idx) {
                            seen_row[l] = true;
                            order.push((true, l, Some(idx)));
                            queue.push_back((true, l));
                        }
                    }
                }
            }
        }
        Skeleton { reference: reference.clone(), order }
    }

    /// `(w, z, deviation)` explaining `target` as `diag(w) A₀ diag(z)`;
    /// `None` if a factor would vanish.
    fn fit(&self, target: &CMat) -> Option<(CVec, CVec, f64)> {
        let (rows, cols) = self.reference.shape();
        let mut w = CVec::from_element(rows, ONE);
        let mut z = CVec::from_element(cols, ONE);
        let ratio = |l: usize, r: usize| target[(l, r)] / self.reference[(l, r)];
        for &(is_row, idx, via) in &self.order {
            match (is_row, via) {
                (_, None) => {}
                (false, Some(l)) => z[idx] = ratio(l, idx) / w[l],
                (true, Some(r)) => w[idx] = ratio(idx, r) / z[r],
            }
            let v = if is_row { w[idx] } else { z[idx] };
            if !(v.norm() > MIN_FACTOR) || !v.re.is_finite() || !v.im.is_finite() {
                return None;
            }
        }
        let dev = max_abs(&(target - scaled(&self.reference, &w, &z)));
        Some((w, z, dev))
    }
}

/// Searches for `D(e^{jω}) = W(e^{jω}) A Z(e^{jω})` with diagonal `W`, `Z`
/// and `A` constant on at most `max_arcs` cyclic arcs of the grid.
///
/// The grid is scanned in order; each arc takes its first point as the
/// reference `A`, and a point joins the current arc when the entrywise
/// ratios `D(ω_i) / A` form a rank-one pattern `w_l z_r` that reproduces
/// `D(ω_i)` within `1e-8` (relative to the largest entry of `D`). The last
/// arc is merged into the first when it fits there too. Columns of `Z` are
/// normalized to unit peak modulus on each arc.
pub fn detect_constant_structure(d: &SpectralMatrix, max_arcs: usize) -> ConstantFactorization {
    let k = d.len();
    let scale = d.max_abs().max(f64::MIN_POSITIVE);
    let tol = STRUCTURE_TOL * scale.max(1.0);

    let mut arcs: Vec<(usize, Vec<usize>, Skeleton)> = Vec::new();
    let mut current = (0usize, vec![0usize], Skeleton::new(d.at(0), scale));
    for i in 1..k {
        let fits = current.2.fit(d.at(i)).is_some_and(|(_, _, dev)| dev <= tol);
        if fits {
            current.1.push(i);
        } else {
            let next = (i, vec![i], Skeleton::new(d.at(i), scale));
            arcs.push(std::mem::replace(&mut current, next));
        }
    }
    arcs.push(current);
    if arcs.len() > 1 {
        let last = arcs.last().unwrap();
        let wraps = last.1.iter().all(|&i| arcs[0].2.fit(d.at(i)).is_some_and(|(_, _, dev)| dev <= tol));
        if wraps {
            let last = arcs.pop().unwrap();
            let mut pts = last.1;
            pts.extend(arcs[0].1.iter().copied());
            arcs[0].1 = pts;
        }
    }

    let rows = d.rows();
    let cols = d.cols();
    let mut w = vec![CVec::from_element(rows, ONE); k];
    let mut z = vec![CVec::from_element(cols, ONE); k];
    let mut arc_of = vec![0usize; k];
    let mut out_arcs = Vec::with_capacity(arcs.len());
    for (a_idx, (reference, points, skel)) in arcs.into_iter().enumerate() {
        let mut a = d.at(reference).clone();
        for &i in &points {
            let (wi, zi, _) = skel.fit(d.at(i)).unwrap_or_else(|| {
                (CVec::from_element(rows, ONE), CVec::from_element(cols, ONE), f64::INFINITY)
            });
            w[i] = wi;
            z[i] = zi;
            arc_of[i] = a_idx;
        }
        for r in 0..cols {
            let peak = points.iter().map(|&i| z[i][r].norm()).fold(0.0, f64::max);
            if peak > 0.0 && peak.is_finite() {
                for &i in &points {
                    z[i][r] /= peak;
                }
                a.column_mut(r).scale_mut(peak);
            }
        }
        out_arcs.push(ArcFactor { points, reference, a });
    }
    let mut fact = ConstantFactorization {
        arcs: out_arcs,
        arc_of,
        w,
        z,
        detected: false,
        max_deviation: 0.0,
        tolerance: tol,
    };
    let max_deviation = (0..k).map(|i| max_abs(&(d.at(i) - fact.evaluate(i)))).fold(0.0, f64::max);
    fact.max_deviation = max_deviation;
    fact.detected = fact.arcs.len() <= max_arcs && max_deviation <= tol;
    fact
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bases::{mixed_cross_spectrum, spike_fourier_pair};
    use crate::linalg::{dft_matrix, random_unitary, unitary_deviation};
    use crate::sispace::cross_spectrum;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid(k: usize) -> FrequencyGrid {
        FrequencyGrid::new(k).unwrap()
    }

    #[test]
    fn constant_matrix_has_zero_delays() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = random_unitary(3, &mut rng);
        let m = SpectralMatrix::constant(&g, &a);
        let f = detect_constant_structure(&m, 2);
        assert!(f.detected);
        assert_eq!(f.arc_count(), 1);
        assert_eq!(f.z_shifts(&g), Some(vec![0, 0, 0]));
        assert!(max_abs(&(f.a() - &a)) < 1e-14);
    }

    #[test]
    fn integer_delays_recovered() {
        let g = grid(64);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = random_unitary(4, &mut rng);
        let z = [0, 3, -2, 7];
        let m = mixed_cross_spectrum(&a, &z, &g).unwrap();
        let f = detect_constant_structure(&m, 2);
        assert!(f.detected);
        let shifts = f.z_shifts(&g).unwrap();
        // delays are fixed up to the common gauge of the reference point
        assert_eq!(shifts, z.to_vec());
        assert!(f.max_deviation < 1e-12);
    }

    #[test]
    fn spike_fourier_has_two_half_band_arcs() {
        let g = grid(64);
        let p = spike_fourier_pair(4, 1.0, &g).unwrap();
        let m = cross_spectrum(&p.spike, &p.fourier, &g).unwrap();
        let f = detect_constant_structure(&m, 2);
        assert!(f.detected);
        assert_eq!(f.arc_count(), 2);
        let mut first = f.arcs[0].points.clone();
        first.sort_unstable();
        let mut want: Vec<usize> = (33..64).collect();
        want.insert(0, 0);
        assert_eq!(first, want);
        assert_eq!(f.arcs[1].points, (1..=32).collect::<Vec<_>>());
        for arc in &f.arcs {
            assert!(arc.a.iter().all(|v| (v.norm() - 0.5).abs() < 1e-12));
            assert!(unitary_deviation(&arc.a) < 1e-12);
        }
        // W carries the fractional row phases e^{jω(l-1)/N}
        let slopes = f.phase_slopes(&g);
        for (ws, _) in slopes {
            for (l, s) in ws.iter().enumerate() {
                assert!((s - l as f64 / 4.0).abs() < 1e-9, "{s}");
            }
        }
    }

    #[test]
    fn dft_mix_matches_conjugate_dft_up_to_gauge() {
        // A = conj(F4)/2 with z = (0, 1, 2, 3)
        let g = grid(32);
        let a = dft_matrix(4).map(|v| v.conj()).scale(0.5);
        let m = mixed_cross_spectrum(&a, &[0, 1, 2, 3], &g).unwrap();
        let f = detect_constant_structure(&m, 2);
        assert!(f.detected);
        assert_eq!(f.z_shifts(&g), Some(vec![0, 1, 2, 3]));
        assert!(max_abs(&(f.a() - &a)) < 1e-12);
    }

    #[test]
    fn non_separable_spectrum_rejected() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a0 = random_unitary(3, &mut rng);
        let a1 = random_unitary(3, &mut rng);
        let m = SpectralMatrix::from_fn(&g, |_, w| &a0 + &a1 * C64::from_polar(1.0, -w)).unwrap();
        let f = detect_constant_structure(&m, 2);
        assert!(!f.detected);
        assert!(f.arc_count() > 2);
    }

    #[test]
    fn half_sample_phase_is_not_an_integer_delay() {
        let g = grid(32);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let a = random_unitary(2, &mut rng);
        let m = SpectralMatrix::from_fn(&g, |_, w| {
            let mut v = a.clone();
            let col = v.column(1) * C64::from_polar(1.0, -w / 2.0);
            v.column_mut(1).copy_from(&col);
            v
        })
        .unwrap();
        let f = detect_constant_structure(&m, 2);
        // the diagonal phase is still a valid Z on the grid, but not a delay
        assert!(f.detected);
        assert_eq!(f.z_shifts(&g), None);
    }
}
