use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{frobenius, row_norms};

use super::{fit_on_support, MmvProblem, MmvSolution, EXACT_REL};

/// Most candidate supports the oracle will try before giving up.
pub const L0_BUDGET: u64 = 1 << 24;

/// Smallest row support `S` with `min ‖D_S U_S - X‖_F ≤ 1e-8 ‖X‖_F`,
/// searched by size then lexicographically.
pub fn l0_oracle(prob: &MmvProblem, k_max: usize) -> Result<MmvSolution> {
    let d = prob.dictionary();
    let x = prob.measurements();
    let m = d.ncols();
    if k_max > m {
        return Err(Error::InvalidArgument(format!("k_max = {k_max} exceeds the {m} atoms")));
    }
    let scale = frobenius(x);
    if scale == 0.0 {
        return Ok(MmvSolution::zero(m, x.ncols()));
    }
    let bound = EXACT_REL * scale;
    let mut tried: u64 = 0;
    for size in 1..=k_max {
        let layer = binomial(m as u64, size as u64);
        if tried.saturating_add(layer) > L0_BUDGET {
            return Err(Error::TooLarge(format!(
                "supports up to size {size} over {m} atoms exceed {L0_BUDGET} candidates"
            )));
        }
        for support in (0..m).combinations(size) {
            tried += 1;
            let (u, residual) = fit_on_support(d, x, &support);
            if residual <= bound {
                return Ok(MmvSolution {
                    row_norms: row_norms(&u),
                    u,
                    support,
                    residual,
                    iterations: tried as usize,
                    converged: true,
                });
            }
        }
    }
    Err(Error::NoSolution { k_max })
}

fn binomial(n: u64, k: u64) -> u64 {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = match acc.checked_mul(n - i) {
            Some(v) => v / (i + 1),
            None => return u64::MAX,
        };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{complex_gaussian, dft_matrix, max_abs, CMat, C64};
    use rand::seq::index::sample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_gives_empty() {
        let p = MmvProblem::new(CMat::identity(3, 3), CMat::zeros(3, 2)).unwrap();
        let s = l0_oracle(&p, 2).unwrap();
        assert!(s.support.is_empty());
        assert_eq!(max_abs(&s.u), 0.0);
    }

    #[test]
    fn one_row_in_two_onb() {
        let mut d = CMat::zeros(4, 8);
        d.columns_mut(0, 4).copy_from(&CMat::identity(4, 4));
        d.columns_mut(4, 4).copy_from(&dft_matrix(4).scale(0.5));
        let mut g = CMat::zeros(8, 2);
        g[(6, 0)] = C64::new(1.0, 2.0);
        g[(6, 1)] = C64::new(-0.5, 0.0);
        let p = MmvProblem::new(d.clone(), &d * &g).unwrap();
        let s = l0_oracle(&p, 3).unwrap();
        assert_eq!(s.support, vec![6]);
        assert!(max_abs(&(s.u - g)) < 1e-12);
    }

    #[test]
    fn random_dictionary_two_rows() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut d = complex_gaussian(4, 8, &mut rng);
        for j in 0..8 {
            let n = d.column(j).norm();
            d.column_mut(j).unscale_mut(n);
        }
        let mut supp = sample(&mut rng, 8, 2).into_vec();
        supp.sort_unstable();
        let vals = complex_gaussian(2, 3, &mut rng);
        let mut g = CMat::zeros(8, 3);
        for (r, &s) in supp.iter().enumerate() {
            g.row_mut(s).copy_from(&vals.row(r));
        }
        let x = &d * &g;
        let p = MmvProblem::new(d, x.clone()).unwrap();
        let s = l0_oracle(&p, 4).unwrap();
        assert_eq!(s.support, supp);
        assert!(s.residual <= 1e-10 * frobenius(&x));
    }

    #[test]
    fn no_solution_when_k_too_small() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let d = complex_gaussian(3, 5, &mut rng);
        let x = complex_gaussian(3, 1, &mut rng);
        let p = MmvProblem::new(d, x).unwrap();
        assert!(matches!(l0_oracle(&p, 2), Err(Error::NoSolution { k_max: 2 })));
        assert_eq!(l0_oracle(&p, 3).unwrap().support.len(), 3);
    }

    #[test]
    fn budget_exceeded_is_too_large() {
        // a generic target in dimension 3 needs 3 of the 6000 atoms, and
        // the pairs alone exceed the budget
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = complex_gaussian(3, 6000, &mut rng);
        let x = complex_gaussian(3, 1, &mut rng);
        let p = MmvProblem::new(d, x).unwrap();
        assert!(matches!(l0_oracle(&p, 3), Err(Error::TooLarge(_))));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(32, 3), 4960);
        assert_eq!(binomial(24, 12), 2_704_156);
        assert_eq!(binomial(5, 0), 1);
        assert_eq!(binomial(200, 100), u64::MAX);
    }
}
