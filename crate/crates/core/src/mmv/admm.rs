use crate::error::{Error, Result};
use crate::linalg::{frobenius, pinv, row_norms, CMat};

use super::{fit_on_support, MmvProblem, MmvSolution, EXACT_REL, SUPPORT_REL};

/// Minimizes `Σ_l ‖U_l‖₂` over the rows of `U` subject to `D U = X`.
///
/// ADMM on the split `U = Y`: `U` is projected onto the affine set,
/// `Y` takes the row-wise shrinkage. Data are scaled to unit Frobenius
/// norm before iterating, so `tol` is relative. The returned `U` is the
/// least-squares fit on the detected support whenever that fit is exact.
pub fn l1_mmv_solve(prob: &MmvProblem, tol: f64, max_iter: usize) -> Result<MmvSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let d = prob.dictionary();
    let x = prob.measurements();
    let (m, p) = (d.ncols(), x.ncols());
    let scale = frobenius(x);
    if scale == 0.0 {
        return Ok(MmvSolution::zero(m, p));
    }
    let xn = x.map(|z| z / scale);
    let dp = pinv(d, 1e-12);
    let base = &dp * &xn;
    let kernel = CMat::identity(m, m) - &dp * d;
    let rho = 1.0;
    let thresh = 1.0 / rho;

    let mut y = shrink(&base, thresh);
    let mut lam = CMat::zeros(m, p);
    let mut primal = f64::INFINITY;
    let mut dual = f64::INFINITY;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        iterations += 1;
        let u = &base + &kernel * (&y - &lam);
        let y_old = std::mem::replace(&mut y, shrink(&(&u + &lam), thresh));
        let diff = &u - &y;
        lam += &diff;
        primal = frobenius(&diff);
        dual = rho * frobenius(&(&y - &y_old));
        if primal <= tol && dual <= tol {
            converged = true;
            break;
        }
    }

    let norms = row_norms(&y);
    let max = norms.iter().copied().fold(0.0, f64::max);
    let support: Vec<usize> = (0..m).filter(|&j| max > 0.0 && norms[j] > SUPPORT_REL * max).collect();
    let (u_fit, res_fit) = fit_on_support(d, x, &support);
    let (u, residual) = if res_fit <= EXACT_REL * scale {
        (u_fit, res_fit)
    } else {
        let mut u = y.map(|z| z * scale);
        for j in (0..m).filter(|j| !support.contains(j)) {
            u.row_mut(j).fill(crate::linalg::C64::new(0.0, 0.0));
        }
        let r = frobenius(&(d * &u - x));
        (u, r)
    };
    let sol = MmvSolution { row_norms: row_norms(&u), u, support, residual, iterations, converged };
    if converged {
        Ok(sol)
    } else {
        Err(Error::NotConverged { iterations, primal, dual, best: Box::new(sol) })
    }
}

fn shrink(v: &CMat, t: f64) -> CMat {
    let mut out = v.clone();
    for (r, n) in row_norms(v).into_iter().enumerate() {
        let f = if n > t { 1.0 - t / n } else { 0.0 };
        out.row_mut(r).scale_mut(f);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, dft_matrix, max_abs, C64};
    use crate::mmv::l0_oracle;
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_onb(n: usize) -> CMat {
        let mut d = CMat::zeros(n, 2 * n);
        d.columns_mut(0, n).copy_from(&CMat::identity(n, n));
        d.columns_mut(n, n).copy_from(&dft_matrix(n).scale(1.0 / (n as f64).sqrt()));
        d
    }

    #[test]
    fn zero_measurements() {
        let p = MmvProblem::new(two_onb(4), CMat::zeros(4, 2)).unwrap();
        let s = l1_mmv_solve(&p, 1e-9, 100).unwrap();
        assert!(s.support.is_empty());
        assert_eq!(max_abs(&s.u), 0.0);
    }

    #[test]
    fn one_sparse_single_vector_exact() {
        let d = two_onb(4);
        for j in 0..8 {
            let mut g = CMat::zeros(8, 1);
            g[(j, 0)] = C64::new(0.7, -1.3);
            let p = MmvProblem::new(d.clone(), &d * &g).unwrap();
            let s = l1_mmv_solve(&p, 1e-9, 50_000).unwrap();
            assert_eq!(s.support, vec![j]);
            assert!(max_abs(&(&s.u - &g)) < 1e-10);
        }
    }

    #[test]
    fn matches_oracle_for_dft16() {
        let d = two_onb(16);
        let mut rng = ChaCha8Rng::seed_from_u64(1234);
        for _ in 0..5 {
            let mut supp = sample(&mut rng, 32, 3).into_vec();
            supp.sort_unstable();
            let vals = complex_gaussian(3, 4, &mut rng);
            let mut g = CMat::zeros(32, 4);
            for (r, &s) in supp.iter().enumerate() {
                g.row_mut(s).copy_from(&vals.row(r));
            }
            let p = MmvProblem::new(d.clone(), &d * &g).unwrap();
            let a = l1_mmv_solve(&p, 1e-9, 50_000).unwrap();
            let b = l0_oracle(&p, 3).unwrap();
            assert_eq!(a.support, b.support);
            assert_eq!(a.support, supp);
        }
    }

    #[test]
    fn not_converged_carries_iterate() {
        let d = two_onb(4);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = complex_gaussian(4, 2, &mut rng);
        let p = MmvProblem::new(d, x).unwrap();
        match l1_mmv_solve(&p, 1e-12, 3) {
            Err(Error::NotConverged { iterations, best, .. }) => {
                assert_eq!(iterations, 3);
                assert_eq!(best.iterations, 3);
                assert!(!best.converged);
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
