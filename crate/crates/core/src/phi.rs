//! The combination `Phi = a alpha Phi_alpha + b beta Phi_beta + c gamma Phi_gamma`
//! over the roots of `P_delta`, with `Phi_lambda = R((-2 lambda sqrt(d) t + y) / (2 sqrt(dt)))`.
//!
//! `Phi` is the second divided difference `f[alpha, beta, gamma]` of
//! `f(lambda) = lambda Phi_lambda`, so it stays bounded when roots merge even
//! though `a, b, c` blow up. Near a merge the divided difference is evaluated
//! from integral representations instead of the partial-fraction sum.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cubic::{classify_regime, raw_coeffs, solve_p_delta, Regime, RegimeKind, RootTriple};
use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::quadrature::GaussLegendre;
use crate::special::{erfc_ratio, erfc_ratio_derivs_scaled, erfc_ratio_scaled, ComplexPoint};

type C = ComplexPoint;

/// Below this value of `sqrt(t) * (closest root distance)` the partial-fraction
/// sum loses more than about two digits and an integral form is used instead.
pub const CLUSTER_THRESHOLD: f64 = 0.1;
/// Above this value of `sqrt(t) * (root diameter)` a cluster is handled by the
/// two-root form rather than the full triangle integral.
const TRIANGLE_MAX_SPAN: f64 = 4.0;
/// Largest length in the `R`-argument plane covered by one Gauss-Legendre
/// panel, relative to `1 + (distance of the panel from z = 0)`; `R` varies on
/// that scale since it decays like `1/z`.
const PANEL_SPAN: f64 = 1.0;
const MAX_PANELS: usize = 64;
/// Tolerance on the imaginary residue, relative to `1 + |Phi|`.
pub const REALNESS_TOL: f64 = 1e-9;

/// Time, depth and `delta = (D - d) xi^2` at which `Phi` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhiEvalPoint {
    pub t: f64,
    pub y: f64,
    pub delta: f64,
}

/// How a value of `Phi` was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhiBranch {
    /// Partial-fraction sum.
    Direct,
    /// `(psi_p - psi_q) / (p - q)` with `psi_l = l (Phi_l - Phi_r) / (l - r)`,
    /// integrated along the segment between the merging roots `p, q`.
    TwoRoot,
    /// `g[p, q] + r g[r, p, q]` with `g = Phi_.`, both divided differences
    /// written as Hermite-Genocchi integrals of `R'` and `R''`.
    Triangle,
}

/// `(-2 lambda sqrt(d) t + y) / (2 sqrt(dt))`.
fn argument(t: f64, y: f64, d: f64, lambda: C) -> C {
    -lambda * t.sqrt() + y / (2.0 * (d * t).sqrt())
}

/// `Phi_lambda(t, y)` for `Re lambda <= 0`.
pub fn phi_bullet(t: f64, y: f64, d: f64, lambda: ComplexPoint) -> Result<ComplexPoint> {
    erfc_ratio(argument(t, y, d, lambda))
}

/// Evaluator for a fixed `delta`: the roots and partial fractions are computed once.
#[derive(Clone, Debug)]
pub struct PhiEvaluator {
    d: f64,
    roots: RootTriple,
    coeffs: (C, C, C),
    guard: Option<PhiBranch>,
    closest: (f64, usize, usize),
    diameter: f64,
}

impl PhiEvaluator {
    pub fn new(params: &ModelParams, regime: &Regime, delta: f64) -> Self {
        let roots = solve_p_delta(params, delta);
        let guard = if delta >= 0.0 {
            regime.guard_containing(delta).map(|_| match regime.kind {
                RegimeKind::TripleAt => PhiBranch::Triangle,
                _ => PhiBranch::TwoRoot,
            })
        } else {
            None
        };
        let closest = roots.closest_pair();
        Self {
            d: params.d,
            coeffs: raw_coeffs(&roots),
            diameter: roots.diameter(),
            roots,
            guard,
            closest,
        }
    }

    pub fn roots(&self) -> &RootTriple {
        &self.roots
    }

    /// The branch used at time `t`.
    pub fn branch(&self, t: f64) -> PhiBranch {
        if let Some(b) = self.guard {
            return b;
        }
        let st = t.sqrt();
        if st * self.closest.0 >= CLUSTER_THRESHOLD {
            PhiBranch::Direct
        } else if st * self.diameter <= TRIANGLE_MAX_SPAN {
            PhiBranch::Triangle
        } else {
            PhiBranch::TwoRoot
        }
    }

    /// `Phi(t, y) e^{-shift}` before projection to the reals.
    pub fn eval_complex_scaled(&self, t: f64, y: f64, shift: f64) -> Result<C> {
        self.eval_with(self.branch(t), t, y, shift)
    }

    /// `Phi` by a chosen branch, for cross-checks between branches.
    pub fn eval_with(&self, branch: PhiBranch, t: f64, y: f64, shift: f64) -> Result<C> {
        match branch {
            PhiBranch::Direct => self.direct(t, y, shift),
            PhiBranch::TwoRoot => self.two_root(t, y, shift),
            PhiBranch::Triangle => self.triangle(t, y, shift),
        }
    }

    /// `Phi(t, y) e^{-shift}`, checked to be real.
    pub fn eval_scaled(&self, t: f64, y: f64, shift: f64) -> Result<f64> {
        let v = self.eval_complex_scaled(t, y, shift)?;
        let scale = (-shift).exp() + v.re.abs();
        if v.im.abs() > REALNESS_TOL * scale {
            return Err(Error::ImaginaryResidue {
                residue: v.im.abs(),
                value: v.re,
            });
        }
        Ok(v.re)
    }

    pub fn eval(&self, t: f64, y: f64) -> Result<f64> {
        self.eval_scaled(t, y, 0.0)
    }

    /// The `lambda` at which the argument of `R` vanishes.
    fn origin(&self, t: f64, y: f64) -> C {
        C::new(y / (2.0 * self.d.sqrt() * t), 0.0)
    }

    fn g(&self, t: f64, y: f64, shift: f64, lambda: C) -> Result<C> {
        erfc_ratio_scaled(argument(t, y, self.d, lambda), shift)
    }

    fn direct(&self, t: f64, y: f64, shift: f64) -> Result<C> {
        let (a, b, c) = self.coeffs;
        let [x, w, z] = self.roots.roots();
        Ok(a * x * self.g(t, y, shift, x)?
            + b * w * self.g(t, y, shift, w)?
            + c * z * self.g(t, y, shift, z)?)
    }

    fn two_root(&self, t: f64, y: f64, shift: f64) -> Result<C> {
        let r3 = self.roots.roots();
        let (_, i, j) = self.closest;
        let (p, q) = (r3[i], r3[j]);
        let r = r3[3 - i - j];
        let st = t.sqrt();
        let g_r = self.g(t, y, shift, r)?;
        let seg = q - p;
        // Keep panels short against both the R scale and the pole of psi' at r.
        let dist_r = distance_to_segment(r, p, q);
        let len = seg.norm();
        let origin = self.origin(t, y);
        let reach = 1.0 + st * distance_to_segment(origin, p, q);
        let panels = ((st * len / (PANEL_SPAN * reach)).max(2.0 * len / dist_r.max(f64::MIN_POSITIVE)))
            .ceil()
            .clamp(1.0, MAX_PANELS as f64) as usize;
        let gl = GaussLegendre::new(16);
        let mut acc = C::new(0.0, 0.0);
        for k in 0..panels {
            let (a0, a1) = (k as f64 / panels as f64, (k + 1) as f64 / panels as f64);
            for (x, w) in gl.on(a0, a1) {
                let l = p + seg * x;
                let (g, g1, _) = erfc_ratio_derivs_scaled(argument(t, y, self.d, l), shift)?;
                let dg = -st * g1;
                let inv = (l - r).inv();
                let psi1 = l * dg * inv - r * (g - g_r) * inv * inv;
                acc += psi1 * w;
            }
        }
        Ok(acc)
    }

    fn triangle(&self, t: f64, y: f64, shift: f64) -> Result<C> {
        let [x0, x1, x2] = self.roots.roots();
        let st = t.sqrt();
        // g[x1, x2] along the segment.
        let seg = x2 - x1;
        let origin = self.origin(t, y);
        let reach = 1.0 + st * distance_to_segment(origin, x1, x2);
        let seg_panels = (st * seg.norm() / (PANEL_SPAN * reach))
            .ceil()
            .clamp(1.0, MAX_PANELS as f64) as usize;
        let gl = GaussLegendre::new(16);
        let mut first = C::new(0.0, 0.0);
        for k in 0..seg_panels {
            let (a0, a1) = (k as f64 / seg_panels as f64, (k + 1) as f64 / seg_panels as f64);
            for (s, w) in gl.on(a0, a1) {
                let (_, g1, _) = erfc_ratio_derivs_scaled(argument(t, y, self.d, x1 + seg * s), shift)?;
                first += -st * g1 * w;
            }
        }
        // g[x0, x1, x2] over the simplex, collapsed at x0:
        // lambda = x0 + rho ((1 - u)(x1 - x0) + u (x2 - x0)), weight rho.
        let hull = distance_to_segment(origin, x0, x1)
            .min(distance_to_segment(origin, x0, x2))
            .min(distance_to_segment(origin, x1, x2));
        let span = st * self.diameter / (1.0 + st * hull);
        let m = (span / PANEL_SPAN).ceil().clamp(1.0, 8.0) as usize;
        let gl12 = GaussLegendre::new(12);
        let mut second = C::new(0.0, 0.0);
        for kr in 0..m {
            let (r0, r1) = (kr as f64 / m as f64, (kr + 1) as f64 / m as f64);
            for (rho, wr) in gl12.on(r0, r1) {
                for ku in 0..m {
                    let (u0, u1) = (ku as f64 / m as f64, (ku + 1) as f64 / m as f64);
                    for (u, wu) in gl12.on(u0, u1) {
                        let l = x0 + ((x1 - x0) * (1.0 - u) + (x2 - x0) * u) * rho;
                        let (_, _, g2) = erfc_ratio_derivs_scaled(argument(t, y, self.d, l), shift)?;
                        second += t * g2 * (rho * wr * wu);
                    }
                }
            }
        }
        Ok(first + x0 * second)
    }
}

fn distance_to_segment(r: C, p: C, q: C) -> f64 {
    let seg = q - p;
    let len2 = seg.norm_sqr();
    if len2 == 0.0 {
        return (r - p).norm();
    }
    let s = ((r - p) * seg.conj()).re / len2;
    (r - (p + seg * s.clamp(0.0, 1.0))).norm()
}

/// `Phi(t, xi, y)` as a real number, with the branch chosen from the regime's
/// guard intervals and the root clustering at the given time.
pub fn phi_compensated(pt: PhiEvalPoint, params: &ModelParams, regime: &Regime) -> Result<f64> {
    check_point(&pt)?;
    PhiEvaluator::new(params, regime, pt.delta).eval(pt.t, pt.y)
}

/// `Phi` before projection to the reals.
pub fn phi_compensated_complex(pt: PhiEvalPoint, params: &ModelParams, regime: &Regime) -> Result<C> {
    check_point(&pt)?;
    PhiEvaluator::new(params, regime, pt.delta).eval_complex_scaled(pt.t, pt.y, 0.0)
}

fn check_point(pt: &PhiEvalPoint) -> Result<()> {
    if !(pt.t > 0.0 && pt.t.is_finite()) {
        return Err(Error::Domain(format!("t must be > 0, got {}", pt.t)));
    }
    if !(pt.y >= 0.0 && pt.y.is_finite()) {
        return Err(Error::Domain(format!("y must be >= 0, got {}", pt.y)));
    }
    if !pt.delta.is_finite() {
        return Err(Error::Domain(format!("delta must be finite, got {}", pt.delta)));
    }
    Ok(())
}

/// Grid maximum of `|Phi(t, ., .)|` over `delta_grid x y_grid`.
pub fn sup_phi_scan(t: f64, params: &ModelParams, delta_grid: &[f64], y_grid: &[f64]) -> Result<f64> {
    if delta_grid.is_empty() || y_grid.is_empty() {
        return Err(Error::Domain("sup_phi_scan needs nonempty grids".into()));
    }
    let regime = classify_regime(params)?;
    delta_grid
        .par_iter()
        .map(|&delta| {
            let ev = PhiEvaluator::new(params, &regime, delta);
            y_grid.iter().try_fold(0.0f64, |m, &y| {
                check_point(&PhiEvalPoint { t, y, delta })?;
                Ok(m.max(ev.eval(t, y)?.abs()))
            })
        })
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}
