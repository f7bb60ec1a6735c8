//! Uniform sampling grids for spectral offsets (rad/s) and delays (µm).

use crate::error::{Error, Result};

/// Uniform grid of angular-frequency offsets Ω, symmetric about zero.
///
/// Node `j` sits at `(2j - (len - 1)) * step / 2`. The integer factor is
/// negated exactly under `j -> len - 1 - j`, so mirrored nodes are bitwise
/// negatives of each other. Odd lengths include Ω = 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OmegaGrid {
    len: usize,
    step: f64,
}

impl OmegaGrid {
    pub fn new(len: usize, step: f64) -> Result<Self> {
        if len < 2 {
            return Err(Error::contract(format!(
                "spectral grid needs at least 2 points, got {len}"
            )));
        }
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::contract(format!(
                "spectral grid step must be positive and finite, got {step}"
            )));
        }
        Ok(Self { len, step })
    }

    /// Grid of `len` points spanning `[-half_width, half_width]`.
    pub fn with_half_width(len: usize, half_width: f64) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::contract(format!(
                "spectral grid half-width must be positive, got {half_width}"
            )));
        }
        let step = 2.0 * half_width / (len.max(2) - 1) as f64;
        Self::new(len, step)
    }

    /// Validates an explicit list of offsets and returns the equivalent grid.
    pub fn from_samples(omega: &[f64]) -> Result<Self> {
        if omega.len() < 2 {
            return Err(Error::contract("spectral grid needs at least 2 points"));
        }
        let n = omega.len();
        let step = (omega[n - 1] - omega[0]) / (n - 1) as f64;
        let grid = Self::new(n, step)?;
        let tol = 1e-9 * step;
        for (j, &w) in omega.iter().enumerate() {
            if (w + omega[n - 1 - j]).abs() > tol {
                return Err(Error::contract(format!(
                    "spectral grid is not symmetric about 0 (node {j}: {w} vs {})",
                    omega[n - 1 - j]
                )));
            }
            if (w - grid.value(j)).abs() > tol {
                return Err(Error::contract(format!(
                    "spectral grid is not uniform at node {j}"
                )));
            }
        }
        Ok(grid)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn half_width(&self) -> f64 {
        self.value(self.len - 1)
    }

    #[inline]
    pub fn value(&self, j: usize) -> f64 {
        let m = 2 * j as i64 - (self.len as i64 - 1);
        m as f64 * (self.step * 0.5)
    }

    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        self.len - 1 - j
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|j| self.value(j)).collect()
    }

    /// Grid with twice the density over the same span; node `j` of `self`
    /// coincides bitwise with node `2j` of the result.
    pub fn refined(&self) -> Self {
        Self {
            len: 2 * self.len - 1,
            step: self.step * 0.5,
        }
    }

    /// Trapezoid weights (half weight on the two end nodes).
    #[inline]
    pub fn weight(&self, j: usize) -> f64 {
        if j == 0 || j == self.len - 1 {
            0.5 * self.step
        } else {
            self.step
        }
    }

    pub fn trapezoid(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.len);
        samples
            .iter()
            .enumerate()
            .map(|(j, &s)| self.weight(j) * s)
            .sum()
    }
}

/// Uniform delay axis in µm.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XGrid {
    start_um: f64,
    step_um: f64,
    len: usize,
}

impl XGrid {
    /// Inclusive grid from `start_um` to `stop_um` (the last node is the
    /// largest `start + i*step` not exceeding `stop` by more than 1e-9 steps).
    pub fn new(start_um: f64, stop_um: f64, step_um: f64) -> Result<Self> {
        if !(step_um.is_finite() && step_um > 0.0) {
            return Err(Error::contract(format!(
                "x grid step must be positive, got {step_um}"
            )));
        }
        if !(start_um.is_finite() && stop_um.is_finite()) || stop_um < start_um {
            return Err(Error::contract(format!(
                "x grid needs start <= stop, got [{start_um}, {stop_um}]"
            )));
        }
        let len = ((stop_um - start_um) / step_um + 1e-9).floor() as usize + 1;
        Ok(Self {
            start_um,
            step_um,
            len,
        })
    }

    pub fn from_len(start_um: f64, step_um: f64, len: usize) -> Result<Self> {
        if len == 0 {
            return Err(Error::contract("x grid is empty"));
        }
        if !(step_um.is_finite() && step_um > 0.0 && start_um.is_finite()) {
            return Err(Error::contract("x grid needs a finite start and positive step"));
        }
        Ok(Self {
            start_um,
            step_um,
            len,
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn start_um(&self) -> f64 {
        self.start_um
    }

    pub fn step_um(&self) -> f64 {
        self.step_um
    }

    #[inline]
    pub fn value(&self, i: usize) -> f64 {
        self.start_um + i as f64 * self.step_um
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    /// Same spacing, shifted by `offset_um`.
    pub fn shifted(&self, offset_um: f64) -> Self {
        Self {
            start_um: self.start_um + offset_um,
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mirrored_nodes_are_exact_negatives() {
        let g = OmegaGrid::with_half_width(8192, 1.66e14).unwrap();
        for j in 0..g.len() {
            assert_eq!(g.value(j), -g.value(g.mirror(j)));
        }
        assert!((g.half_width() - 1.66e14).abs() < 1e-3 * g.step());
    }

    #[test]
    fn refined_grid_shares_nodes_bitwise() {
        let g = OmegaGrid::new(1025, 3.7e10).unwrap();
        let r = g.refined();
        for j in 0..g.len() {
            assert_eq!(g.value(j).to_bits(), r.value(2 * j).to_bits());
        }
    }

    #[test]
    fn odd_grid_contains_zero() {
        let g = OmegaGrid::new(7, 1.0).unwrap();
        assert_eq!(g.value(3), 0.0);
    }

    #[test]
    fn asymmetric_samples_rejected() {
        assert!(OmegaGrid::from_samples(&[-1.0, 0.0, 1.0, 2.0]).is_err());
        assert!(OmegaGrid::from_samples(&[-1.5, -0.5, 0.5, 1.5]).is_ok());
    }

    #[test]
    fn x_grid_is_inclusive() {
        let x = XGrid::new(-1.0, 1.0, 0.5).unwrap();
        assert_eq!(x.len(), 5);
        assert_eq!(x.value(4), 1.0);
        assert!(XGrid::new(0.0, 1.0, 0.0).is_err());
    }
}
