use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest dimension the radial quadrature supports.
pub const MAX_DIM: usize = 3;

/// Exponent, dimension and diffusion time of a fractional heat flow
/// `e^{-t|∇|^α}` on `ℝ^d` (or the torus `𝕋^d`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FractionalParams {
    pub alpha: f64,
    pub dim: usize,
    pub t: f64,
}

impl FractionalParams {
    pub fn new(alpha: f64, dim: usize, t: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0, 2], got {alpha}"
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParams("dimension must be at least 1".into()));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(Error::InvalidParams(format!("t must be positive, got {t}")));
        }
        Ok(Self { alpha, dim, t })
    }

    /// Same exponent and dimension at a different time.
    pub fn at_time(&self, t: f64) -> Result<Self> {
        Self::new(self.alpha, self.dim, t)
    }

    pub fn is_gaussian(&self) -> bool {
        self.alpha == 2.0
    }

    /// Symbol of `|∇|^α` at radial frequency `|ξ|`: `(2π|ξ|)^α`.
    pub fn symbol(&self, xi_norm: f64) -> f64 {
        (2.0 * std::f64::consts::PI * xi_norm).powf(self.alpha)
    }

    pub(crate) fn require_dim_supported(&self) -> Result<()> {
        if self.dim > MAX_DIM {
            return Err(Error::Unsupported(format!(
                "dimension {} exceeds the supported maximum {MAX_DIM}",
                self.dim
            )));
        }
        Ok(())
    }

    pub(crate) fn require_subgaussian(&self, what: &str) -> Result<()> {
        if self.alpha >= 2.0 {
            return Err(Error::Unsupported(format!(
                "{what} requires alpha < 2: the Gaussian kernel decays faster than any power, \
                 so the power-law comparison does not apply"
            )));
        }
        Ok(())
    }
}

/// Surface area of the unit sphere `S^{d-1}`.
pub fn sphere_area(dim: usize) -> f64 {
    let d = dim as f64;
    2.0 * std::f64::consts::PI.powf(d / 2.0) / libm::tgamma(d / 2.0)
}
