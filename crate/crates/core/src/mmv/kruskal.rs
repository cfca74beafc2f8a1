use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::{select_columns, singular_values, CMat};

pub const KRUSKAL_MAX_ATOMS: usize = 24;
pub const KRUSKAL_REL: f64 = 1e-10;

/// Largest `q` such that every `q` columns of `D` are linearly independent.
pub fn kruskal_rank(d: &CMat) -> Result<usize> {
    let (n, m) = d.shape();
    if m > KRUSKAL_MAX_ATOMS {
        return Err(Error::TooLarge(format!("{m} atoms, exhaustive search limited to {KRUSKAL_MAX_ATOMS}")));
    }
    if let Some(j) = (0..m).find(|&j| d.column(j).iter().all(|z| z.norm() == 0.0)) {
        return Err(Error::ZeroColumn(j));
    }
    let smax = singular_values(d).first().copied().unwrap_or(0.0);
    let cut = KRUSKAL_REL * smax;
    for q in 1..=n.min(m) {
        for idx in (0..m).combinations(q) {
            let s = singular_values(&select_columns(d, &idx));
            if s.last().copied().unwrap_or(0.0) <= cut {
                return Ok(q - 1);
            }
        }
    }
    Ok(n.min(m))
}
