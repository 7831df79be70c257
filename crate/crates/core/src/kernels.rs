//! Gaussian and half-space heat kernels, and the migration kernel `Lambda`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cubic::Regime;
use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;
use crate::phi::PhiEvaluator;
use crate::quadrature::GaussLegendre;
use crate::special::{erf_real, erfc_ratio_derivs_scaled, erfc_ratio_scaled, erfc_real};

/// `-ln(1e-16)`: Fourier integrands are cut where their Gaussian factor drops below `1e-16`.
const GAUSS_CUTOFF: f64 = 36.841_361_487_904_734;
/// Below this time `lambda_kernel` needs an explicit `xi_max`.
pub const LAMBDA_MIN_TIME: f64 = 1e-3;

/// A point `(x, y)` of the closed half-space, `x` tangential and `y >= 0` the depth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfSpacePoint {
    pub x: Vec<f64>,
    pub y: f64,
}

impl HalfSpacePoint {
    pub fn new(x: Vec<f64>, y: f64) -> Result<Self> {
        if !(y >= 0.0 && y.is_finite()) || x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("y", format!("need finite coordinates and y >= 0, got y = {y}")));
        }
        Ok(Self { x, y })
    }

    /// A point of the half-plane.
    pub fn planar(x: f64, y: f64) -> Result<Self> {
        Self::new(vec![x], y)
    }
}

/// `(4 pi diff t)^{-dim/2} exp(-|x|^2 / (4 diff t))`.
pub fn gauss_kernel(t: f64, x: &[f64], diffusivity: f64, dim: usize) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let s = 4.0 * diffusivity * t;
    (PI * s).powf(-0.5 * dim as f64) * (-r2 / s).exp()
}

/// `A = theta / (d (1 - theta))`, infinite at `theta = 1`.
pub fn robin_coefficient(theta: f64, d: f64) -> f64 {
    if theta >= 1.0 {
        f64::INFINITY
    } else {
        theta / (d * (1.0 - theta))
    }
}

/// Inverse of [`robin_coefficient`].
pub fn robin_theta(a: f64, d: f64) -> f64 {
    let ad = a * d;
    ad / (1.0 + ad)
}

/// One-dimensional kernel `H_theta^{(1)}(t, y, w)` on the half-line with
/// `theta H - (1 - theta) d H_y = 0` at `y = 0`.
///
/// The formula is analytic in `y` and `w`, so it may also be evaluated at
/// slightly negative depths (used by finite-difference checks).
pub fn robin_kernel_1d(theta: f64, t: f64, y: f64, w: f64, d: f64) -> f64 {
    let g_minus = gauss_kernel(t, &[y - w], d, 1);
    let g_plus = gauss_kernel(t, &[y + w], d, 1);
    if theta <= 0.0 {
        return g_minus + g_plus;
    }
    if theta >= 1.0 {
        return g_minus - g_plus;
    }
    let a = robin_coefficient(theta, d) * (d * t).sqrt();
    let q = (y + w) / (2.0 * (d * t).sqrt());
    let (r, r1, _) =
        erfc_ratio_derivs_scaled(Complex64::new(a + q, 0.0), 0.0).expect("finite argument");
    let (r, r1) = (r.re, r1.re);
    if theta <= 0.5 {
        g_minus + g_plus - 2.0 * PI.sqrt() * a * g_plus * r
    } else {
        // 1 - sqrt(pi) a R(a + q) = -(sqrt(pi)/2) R'(a + q) + sqrt(pi) q R(a + q)
        g_minus - g_plus + 2.0 * g_plus * (-0.5 * PI.sqrt() * r1 + PI.sqrt() * q * r)
    }
}

/// Half-space kernel `H_theta(t, X, Z)` in dimension `dim`: the tangential
/// Gaussian times the one-dimensional Robin kernel in depth.
///
/// Panics if the tangential coordinates of `X` and `Z` do not have `dim - 1` components.
pub fn half_space_kernel(
    theta: f64,
    t: f64,
    x: &HalfSpacePoint,
    z: &HalfSpacePoint,
    d: f64,
    dim: usize,
) -> f64 {
    assert!(
        x.x.len() + 1 == dim && z.x.len() + 1 == dim,
        "tangential coordinates must have dim - 1 = {} components",
        dim.saturating_sub(1)
    );
    let dx: Vec<f64> = x.x.iter().zip(&z.x).map(|(a, b)| a - b).collect();
    gauss_kernel(t, &dx, d, dim - 1) * robin_kernel_1d(theta, t, x.y, z.y, d)
}

/// `int_a^b G(t, x - z) dz` for the one-dimensional Gaussian of diffusivity `diff`.
pub fn gauss_cell_mass(t: f64, x: f64, a: f64, b: f64, diff: f64) -> f64 {
    let s = 2.0 * (diff * t).sqrt();
    let (u1, u2) = ((x - a) / s, (x - b) / s);
    if u2 >= 0.0 {
        0.5 * (erfc_real(u2) - erfc_real(u1))
    } else if u1 <= 0.0 {
        0.5 * (erfc_real(-u1) - erfc_real(-u2))
    } else {
        0.5 * (erf_real(u1) - erf_real(u2))
    }
}

/// Antiderivative in `w` of `H_theta^{(1)}(t, y, w)`, up to a constant.
fn robin_antiderivative(a: f64, s: f64, y: f64, w: f64) -> f64 {
    let u = (y + w) / s;
    let corr = if a.is_infinite() {
        0.0
    } else if a == 0.0 {
        erfc_real(u)
    } else {
        let r = erfc_ratio_scaled(Complex64::new(a + u, 0.0), 0.0).expect("finite argument").re;
        (-u * u).exp() * r
    };
    0.5 * erf_real((w - y) / s) - 0.5 * erf_real(u) - corr
}

/// `int_{w0}^{w1} H_theta^{(1)}(t, y, w) dw` in closed form.
pub fn robin_cell_mass(theta: f64, t: f64, y: f64, w0: f64, w1: f64, d: f64) -> f64 {
    let s = 2.0 * (d * t).sqrt();
    let a = robin_coefficient(theta, d) * (d * t).sqrt();
    let a = if theta <= 0.0 { 0.0 } else { a };
    robin_antiderivative(a, s, y, w1) - robin_antiderivative(a, s, y, w0)
}

/// Controls of the Fourier quadratures.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Fourier truncation; when absent it is chosen so the Gaussian factor is below `1e-16`.
    pub xi_max: Option<f64>,
    /// Panel budget of the adaptive `xi` quadrature.
    pub panels: usize,
    pub nodes_per_panel: usize,
    /// Relative tolerance between successive refinements.
    pub tol: f64,
    /// Grading exponent of the time meshes near each endpoint.
    pub graded_time_exponent: f64,
    /// Gauss-Legendre nodes per half of each time mesh.
    pub time_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            xi_max: None,
            panels: 1024,
            nodes_per_panel: 16,
            tol: 1e-6,
            graded_time_exponent: 2.0,
            time_nodes: 24,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(x) = self.xi_max {
            if !(x.is_finite() && x > 0.0) {
                return Err(invalid("xi_max", format!("must be finite and > 0, got {x}")));
            }
        }
        if self.panels == 0 {
            return Err(invalid("panels", "must be > 0"));
        }
        if !(1..=256).contains(&self.nodes_per_panel) {
            return Err(invalid("nodes_per_panel", "must be in 1..=256"));
        }
        if !(self.tol > 0.0 && self.tol <= 1e-2) {
            return Err(invalid("tol", format!("must be in (0, 1e-2], got {}", self.tol)));
        }
        if !(self.graded_time_exponent >= 1.0 && self.graded_time_exponent.is_finite()) {
            return Err(invalid("graded_time_exponent", "must be finite and >= 1"));
        }
        if !(1..=256).contains(&self.time_nodes) {
            return Err(invalid("time_nodes", "must be in 1..=256"));
        }
        Ok(())
    }

    /// Truncation for an integrand decaying like `e^{-diff t xi^2}`.
    pub fn xi_cutoff(&self, t: f64, diff: f64) -> Result<f64> {
        match self.xi_max {
            Some(x) => Ok(x),
            None if t < LAMBDA_MIN_TIME => Err(Error::QuadratureNotConverged {
                tol: self.tol,
                achieved: f64::INFINITY,
            }),
            None => Ok((GAUSS_CUTOFF / (diff * t)).sqrt()),
        }
    }
}

/// Panel boundaries on `[0, xi_max]`: the ends plus every `xi` mapping to a
/// singular `delta`.
pub fn xi_breakpoints(params: &ModelParams, regime: &Regime, xi_max: f64) -> Vec<f64> {
    let gap = params.road_d - params.d;
    let mut b = vec![0.0];
    for &s in &regime.singular_deltas {
        if s > 0.0 && gap > 0.0 {
            let xi = (s / gap).sqrt();
            if xi < xi_max {
                b.push(xi);
            }
        }
    }
    b.push(xi_max);
    b
}

/// Composite Gauss-Legendre rule with each interval between consecutive
/// breakpoints split into `per_interval` equal panels.
pub fn composite_rule(breaks: &[f64], per_interval: usize, nodes: usize) -> Vec<(f64, f64)> {
    let gl = GaussLegendre::new(nodes);
    let mut out = Vec::with_capacity((breaks.len() - 1) * per_interval * nodes);
    for w in breaks.windows(2) {
        let h = (w[1] - w[0]) / per_interval as f64;
        for p in 0..per_interval {
            let a = w[0] + p as f64 * h;
            out.extend(gl.on(a, a + h));
        }
    }
    out
}

/// Adaptive integration of a real integrand over the breakpoint intervals by
/// panel doubling. Returns the value and the last change, which is below
/// `tol` relative to the L1 norm of the integrand.
pub fn integrate_doubling(
    breaks: &[f64],
    quad: &QuadratureConfig,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    let intervals = breaks.len() - 1;
    let mut per = 2;
    let mut prev: Option<f64> = None;
    loop {
        let mut sum = 0.0;
        let mut l1 = 0.0;
        for (x, w) in composite_rule(breaks, per, quad.nodes_per_panel) {
            let v = w * f(x)?;
            sum += v;
            l1 += v.abs();
        }
        if let Some(p) = prev {
            let err = (sum - p).abs();
            if err <= quad.tol * l1 || l1 == 0.0 {
                return Ok((sum, err));
            }
            if 2 * per * intervals > quad.panels {
                return Err(Error::QuadratureNotConverged {
                    tol: quad.tol,
                    achieved: err / l1,
                });
            }
        }
        prev = Some(sum);
        per *= 2;
    }
}

/// Fourier transform of `Lambda` in `x`, `e^{-y^2/(4dt)} Phi(t, xi, y) e^{-dt xi^2}`.
pub fn lambda_hat(eval: &PhiEvaluator, t: f64, xi: f64, y: f64, d: f64) -> Result<f64> {
    eval.eval_scaled(t, y, d * t * xi * xi + y * y / (4.0 * d * t))
}

/// Migration kernel `Lambda(t, x, y)` for the planar problem.
///
/// Computed as `(1/pi) int_0^{xi_max} Lambda_hat(t, xi, y) cos(xi x) dxi`.
pub fn lambda_kernel(
    t: f64,
    x: f64,
    y: f64,
    params: &ModelParams,
    regime: &Regime,
    quad: &QuadratureConfig,
) -> Result<f64> {
    lambda_kernel_with_error(t, x, y, params, regime, quad).map(|(v, _)| v)
}

/// [`lambda_kernel`] together with the last refinement change.
pub fn lambda_kernel_with_error(
    t: f64,
    x: f64,
    y: f64,
    params: &ModelParams,
    regime: &Regime,
    quad: &QuadratureConfig,
) -> Result<(f64, f64)> {
    check_planar(params)?;
    if !(t > 0.0) {
        return Err(invalid("t", format!("must be > 0, got {t}")));
    }
    quad.validate()?;
    let xi_max = quad.xi_cutoff(t, params.d.min(params.road_d))?;
    let breaks = xi_breakpoints(params, regime, xi_max);
    let x = x.abs();
    let (v, e) = integrate_doubling(&breaks, quad, |xi| {
        let eval = PhiEvaluator::new(params, regime, params.delta_of_xi(xi));
        Ok(lambda_hat(&eval, t, xi, y, params.d)? * (xi * x).cos())
    })?;
    Ok((v / PI, e / PI))
}

pub(crate) fn check_planar(params: &ModelParams) -> Result<()> {
    if params.dim != 2 {
        return Err(invalid("dim", format!("only dim = 2 is supported here, got {}", params.dim)));
    }
    Ok(())
}
