//! Gaussian kernel used by every correntropy and information-potential
//! estimator in the crate.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Kernel size of a Gaussian kernel, with its normalisation constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelConfig {
    sigma: f64,
    norm: f64,
    exponent_scale: f64,
}

impl KernelConfig {
    pub fn new(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "kernel size must be positive, got {sigma}"
            )));
        }
        Ok(KernelConfig {
            sigma,
            norm: 1.0 / ((2.0 * PI).sqrt() * sigma),
            exponent_scale: -0.5 / (sigma * sigma),
        })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `G_sigma(0) = 1 / (sqrt(2 pi) sigma)`, the kernel's maximum.
    #[inline]
    pub fn peak(&self) -> f64 {
        self.norm
    }

    #[inline]
    pub fn eval(&self, distance: f64) -> f64 {
        self.norm * (distance * distance * self.exponent_scale).exp()
    }

    /// `-1 / (2 sigma^2)`.
    #[inline]
    pub(crate) fn exponent_scale(&self) -> f64 {
        self.exponent_scale
    }
}

/// `G_sigma(d) = exp(-d^2 / (2 sigma^2)) / (sqrt(2 pi) sigma)`.
pub fn gaussian_kernel(distance: f64, config: &KernelConfig) -> f64 {
    config.eval(distance)
}
