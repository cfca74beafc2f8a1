use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `ω_i = 2πi/K`, `i = 0..K`, on one period of the DTFT axis.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FrequencyGrid {
    size: usize,
}

impl FrequencyGrid {
    pub const DEFAULT_SIZE: usize = 256;

    pub fn new(size: usize) -> Result<Self> {
        if size < 2 || size % 2 != 0 {
            return Err(Error::InvalidGrid(format!(
                "K must be even and at least 2, got {size}"
            )));
        }
        Ok(FrequencyGrid { size })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn omega(&self, i: usize) -> f64 {
        2.0 * PI * i as f64 / self.size as f64
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.size).map(|i| self.omega(i))
    }

    /// Index of the mirrored point `2π - ω_i`.
    pub fn mirror(&self, i: usize) -> usize {
        (self.size - i) % self.size
    }

    pub(crate) fn require_divisible(&self, n: usize) -> Result<()> {
        if n == 0 || self.size % n != 0 {
            return Err(Error::GridNotDivisible { grid: self.size, n });
        }
        Ok(())
    }
}

impl Default for FrequencyGrid {
    fn default() -> Self {
        FrequencyGrid { size: Self::DEFAULT_SIZE }
    }
}
