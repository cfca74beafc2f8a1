//! Small dense complex linear-algebra helpers on top of nalgebra.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// `e^{j 2π num / den}` with the numerator reduced first so that large
/// integer phases stay exact.
pub fn unit_phase(num: i64, den: i64) -> C64 {
    let r = num.rem_euclid(den);
    C64::from_polar(1.0, 2.0 * PI * r as f64 / den as f64)
}

/// Unnormalized DFT matrix, `F[k, l] = e^{-j 2π k l / n}`.
pub fn dft_matrix(n: usize) -> CMat {
    let n_i = n as i64;
    CMat::from_fn(n, n, |k, l| unit_phase(-((k * l) as i64), n_i))
}

/// Haar-distributed unitary matrix (QR of a complex Gaussian with the
/// diagonal phases of R folded back into Q).
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = CMat::from_fn(n, n, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    });
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Real orthonormal matrix from the QR of a real Gaussian.
pub fn random_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    let g = DMatrix::<f64>::from_fn(n, n, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..n {
        if r[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    q.map(|x| C64::new(x, 0.0))
}

pub fn complex_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im)
    })
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `max |M^H M - I|`.
pub fn unitary_deviation(m: &CMat) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let g = m.adjoint() * m;
    max_abs(&(g - CMat::identity(m.nrows(), m.ncols())))
}

/// `max |M^H M - I|` over the columns of a tall matrix.
pub fn orthonormal_columns_deviation(m: &CMat) -> f64 {
    let g = m.adjoint() * m;
    max_abs(&(g - CMat::identity(m.ncols(), m.ncols())))
}

pub fn hermitian_asymmetry(m: &CMat) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn singular_values(m: &CMat) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Moore-Penrose pseudo-inverse with singular values below
/// `rel * sigma_max` treated as zero.
pub fn pinv(m: &CMat, rel: f64) -> CMat {
    if m.nrows() == 0 || m.ncols() == 0 {
        return CMat::zeros(m.ncols(), m.nrows());
    }
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.iter().fold(0.0f64, |a, &b| a.max(b));
    let cut = (rel * smax).max(f64::MIN_POSITIVE);
    svd.pseudo_inverse(cut).unwrap_or_else(|_| CMat::zeros(m.ncols(), m.nrows()))
}

/// Least-squares solution of `A X = B` through the SVD.
pub fn lstsq(a: &CMat, b: &CMat) -> CMat {
    pinv(a, 1e-13) * b
}

/// Columns `idx` of `m`.
pub fn select_columns(m: &CMat, idx: &[usize]) -> CMat {
    CMat::from_fn(m.nrows(), idx.len(), |r, c| m[(r, idx[c])])
}

pub fn frobenius(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn row_norms(m: &CMat) -> Vec<f64> {
    (0..m.nrows())
        .map(|r| m.row(r).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dft_of_size_four() {
        let f = dft_matrix(4);
        assert!((f[(1, 1)] - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert!((f[(2, 3)] - C64::new(-1.0, 0.0)).norm() < 1e-15);
        assert!(unitary_deviation(&f.scale(0.5)) < 1e-14);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..8 {
            assert!(unitary_deviation(&random_unitary(n, &mut rng)) < 1e-12);
            assert!(unitary_deviation(&random_orthogonal(n, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn eigen_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = complex_gaussian(5, 5, &mut rng);
        let h = &g * g.adjoint();
        let (vals, vecs) = hermitian_eigen(&h);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        let d = CMat::from_diagonal(&CVec::from_iterator(5, vals.iter().map(|&v| C64::new(v, 0.0))));
        let back = &vecs * d * vecs.adjoint();
        assert!(max_abs(&(back - h)) < 1e-10);
    }

    #[test]
    fn lstsq_solves_consistent_system() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let a = complex_gaussian(6, 3, &mut rng);
        let x = complex_gaussian(3, 2, &mut rng);
        let b = &a * &x;
        assert!(max_abs(&(lstsq(&a, &b) - x)) < 1e-10);
    }
}
