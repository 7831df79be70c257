//! Physical constants of the field-road system.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

fn default_dim() -> usize {
    2
}

/// Diffusivities `d` (field) and `D` (road), exchange rates `mu` (road to
/// field) and `nu` (field to road), and the ambient dimension `N`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelParams {
    pub d: f64,
    #[serde(rename = "D")]
    pub road_d: f64,
    pub mu: f64,
    pub nu: f64,
    #[serde(default = "default_dim")]
    pub dim: usize,
}

impl ModelParams {
    /// Planar parameters (`N = 2`), validated.
    pub fn new(d: f64, road_d: f64, mu: f64, nu: f64) -> Result<Self> {
        let p = Self {
            d,
            road_d,
            mu,
            nu,
            dim: 2,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_dim(mut self, dim: usize) -> Result<Self> {
        self.dim = dim;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("d", self.d), ("D", self.road_d), ("mu", self.mu), ("nu", self.nu)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if (self.road_d - self.d).abs() <= 1e-12 * self.d.max(self.road_d) {
            return Err(invalid("D", "D = d is not supported"));
        }
        if self.dim < 2 {
            return Err(invalid("dim", format!("must be >= 2, got {}", self.dim)));
        }
        Ok(())
    }

    /// `A = nu / d`.
    pub fn a(&self) -> f64 {
        self.nu / self.d
    }

    /// `B = mu / d`.
    pub fn b(&self) -> f64 {
        self.mu / self.d
    }

    /// `theta = nu / (1 + nu)`, the Robin weight of the field problem.
    pub fn theta(&self) -> f64 {
        self.nu / (1.0 + self.nu)
    }

    /// `A sqrt(d) = nu / sqrt(d)`, the quadratic coefficient of `P_delta`.
    pub fn drift(&self) -> f64 {
        self.nu / self.d.sqrt()
    }

    /// `A^2 d = nu^2 / d`, the scale of the regime thresholds.
    pub fn k(&self) -> f64 {
        self.nu * self.nu / self.d
    }

    /// `delta = (D - d) xi^2`.
    pub fn delta_of_xi(&self, xi: f64) -> f64 {
        (self.road_d - self.d) * xi * xi
    }
}
