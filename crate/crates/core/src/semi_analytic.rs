//! The explicit solution `(v, u)` of the planar field-road system.
//!
//! ```text
//! v = V + (mu/sqrt d) Lambda *_x u0 + (mu nu/sqrt d) int_0^t Lambda(s) *_x V|_0(t - s) ds
//! u = e^{-mu t} U + nu int_0^t e^{-mu (t-s)} G_D(t - s) *_x v|_0(s) ds
//! ```
//!
//! `V` and `U` are closed-form convolutions of the cell data. The two
//! coupling terms are computed in Fourier space in `x`, where every
//! convolution is a product and `Lambda_hat = e^{-y^2/(4dt)} Phi e^{-dt xi^2}`
//! needs no spatial quadrature; the time integrals run on meshes graded at
//! both ends, and the inverse transform is an adaptive `xi` quadrature whose
//! refinements are cached per time and depth.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cubic::{classify_regime, Regime};
use crate::data::InitialData;
use crate::error::{invalid, Error, Result};
use crate::kernels::{
    check_planar, composite_rule, gauss_cell_mass, lambda_hat, robin_cell_mass, xi_breakpoints,
    HalfSpacePoint, QuadratureConfig,
};
use crate::params::ModelParams;
use crate::phi::PhiEvaluator;
use crate::quadrature::graded_two_sided;

type C = Complex64;

/// A value with an error estimate: the last change of its adaptive `xi`
/// refinement plus the change from halving the time nodes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    Field { t: u64, y: u64 },
    Road { t: u64 },
}

/// Samples of a spectrum on one composite rule.
struct Level {
    nodes: Vec<(f64, f64)>,
    values: Vec<C>,
}

impl Level {
    /// `(1/pi) sum w Re[e^{i xi x} F(xi)]` and the matching L1 norm.
    fn invert(&self, x: f64) -> (f64, f64) {
        let mut sum = 0.0;
        let mut l1 = 0.0;
        for (&(xi, w), f) in self.nodes.iter().zip(&self.values) {
            let (s, c) = (xi * x).sin_cos();
            sum += w * (f.re * c - f.im * s);
            l1 += w * f.norm();
        }
        (sum / PI, l1 / PI)
    }
}

/// Time mesh with the trace cell masses needed at each node.
struct Mesh {
    nodes: Vec<(f64, f64)>,
    /// Trace masses at `t - s` for each node `s`.
    masses: Vec<Vec<f64>>,
}

/// Evaluator of the explicit solution for fixed parameters, data and quadrature.
///
/// Spectra are computed on demand and cached, so repeated evaluations at the
/// same time (and depth) only pay for the inverse transform. The cache is
/// safe to share between threads.
pub struct SemiAnalyticSolver {
    params: ModelParams,
    regime: Regime,
    quad: QuadratureConfig,
    data: InitialData,
    theta: f64,
    cache: RwLock<HashMap<Key, Vec<Arc<Level>>>>,
    /// Per key, the coarsest converged level recomputed on half the time nodes.
    time_check: RwLock<HashMap<Key, Arc<Level>>>,
}

fn cell_transform(center: f64, h: f64, xi: f64) -> C {
    let a = 0.5 * xi * h;
    let sinc = if a.abs() < 1e-8 { 1.0 - a * a / 6.0 } else { a.sin() / a };
    C::from_polar(h * sinc, -xi * center)
}

impl SemiAnalyticSolver {
    pub fn new(params: ModelParams, data: InitialData, quad: QuadratureConfig) -> Result<Self> {
        let regime = classify_regime(&params)?;
        Self::with_regime(params, regime, data, quad)
    }

    pub fn with_regime(
        params: ModelParams,
        regime: Regime,
        data: InitialData,
        quad: QuadratureConfig,
    ) -> Result<Self> {
        params.validate()?;
        check_planar(&params)?;
        quad.validate()?;
        data.validate()?;
        Ok(Self {
            theta: params.theta(),
            params,
            regime,
            quad,
            data,
            cache: RwLock::new(HashMap::new()),
            time_check: RwLock::new(HashMap::new()),
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn data(&self) -> &InitialData {
        &self.data
    }

    /// Robin part `V(t, x, y)`: the field started from `v0` with `nu V = d V_y` on the road.
    pub fn big_v(&self, t: f64, x: f64, y: f64) -> f64 {
        let v0 = &self.data.v0;
        let (hx, hy) = v0.spacing;
        let d = self.params.d;
        let gx: Vec<f64> = (0..v0.nx)
            .map(|i| {
                let c = v0.x(i);
                gauss_cell_mass(t, x, c - 0.5 * hx, c + 0.5 * hx, d)
            })
            .collect();
        (0..v0.ny)
            .map(|j| {
                let row: f64 = v0.row(j).iter().zip(&gx).map(|(v, g)| v * g).sum();
                if row == 0.0 {
                    return 0.0;
                }
                let c = v0.y(j);
                row * robin_cell_mass(self.theta, t, y, c - 0.5 * hy, c + 0.5 * hy, d)
            })
            .sum()
    }

    /// Free road flow `U(t, x)` of `u0` with diffusivity `D`.
    pub fn big_u(&self, t: f64, x: f64) -> f64 {
        let u0 = &self.data.u0;
        let h = u0.spacing;
        (0..u0.len())
            .filter(|&i| u0.values[i] != 0.0)
            .map(|i| {
                let c = u0.x(i);
                u0.values[i] * gauss_cell_mass(t, x, c - 0.5 * h, c + 0.5 * h, self.params.road_d)
            })
            .sum()
    }

    /// Field density `v(t, x, y)`.
    pub fn v(&self, t: f64, x: f64, y: f64) -> Result<f64> {
        self.v_estimate(t, x, y).map(|e| e.value)
    }

    /// Road density `u(t, x)`.
    pub fn u(&self, t: f64, x: f64) -> Result<f64> {
        self.u_estimate(t, x).map(|e| e.value)
    }

    pub fn v_estimate(&self, t: f64, x: f64, y: f64) -> Result<Estimate> {
        check_time(t)?;
        if !(y >= 0.0 && y.is_finite()) {
            return Err(invalid("y", format!("must be >= 0, got {y}")));
        }
        let base = self.big_v(t, x, y);
        let key = Key::Field {
            t: t.to_bits(),
            y: y.to_bits(),
        };
        let e = self.coupling(key, t, x)?;
        Ok(Estimate {
            value: base + e.value,
            error: e.error,
        })
    }

    pub fn u_estimate(&self, t: f64, x: f64) -> Result<Estimate> {
        check_time(t)?;
        let base = (-self.params.mu * t).exp() * self.big_u(t, x);
        let e = self.coupling(Key::Road { t: t.to_bits() }, t, x)?;
        Ok(Estimate {
            value: base + self.params.nu * e.value,
            error: self.params.nu * e.error,
        })
    }

    /// Inverse transform of the cached spectrum for `key`, refined until two
    /// successive levels agree.
    fn coupling(&self, key: Key, t: f64, x: f64) -> Result<Estimate> {
        if self.data.v0.values.iter().all(|&v| v == 0.0) && self.data.u0.values.iter().all(|&v| v == 0.0) {
            return Ok(Estimate { value: 0.0, error: 0.0 });
        }
        let xi_max = self.quad.xi_cutoff(t, self.params.d.min(self.params.road_d))?;
        let breaks = xi_breakpoints(&self.params, &self.regime, xi_max);
        loop {
            let levels = self.cache.read().expect("cache lock").get(&key).cloned().unwrap_or_default();
            let n = levels.len();
            if n >= 2 {
                let (fine, l1) = levels[n - 1].invert(x);
                let (coarse, _) = levels[n - 2].invert(x);
                let err = (fine - coarse).abs();
                if err <= self.quad.tol * l1 || l1 == 0.0 {
                    let half = self.time_check_level(key, t, &breaks, n - 2)?;
                    let time_err = (half.invert(x).0 - coarse).abs();
                    return Ok(Estimate { value: fine, error: err + time_err });
                }
                let panels = (breaks.len() - 1) << (n + 1);
                if panels > self.quad.panels {
                    return Err(Error::QuadratureNotConverged {
                        tol: self.quad.tol,
                        achieved: err / l1,
                    });
                }
            }
            let level = Arc::new(self.compute_level(key, t, &breaks, n, self.quad.time_nodes)?);
            let mut cache = self.cache.write().expect("cache lock");
            let entry = cache.entry(key).or_default();
            if entry.len() == n {
                entry.push(level);
            }
        }
    }

    fn time_check_level(&self, key: Key, t: f64, breaks: &[f64], index: usize) -> Result<Arc<Level>> {
        if let Some(level) = self.time_check.read().expect("cache lock").get(&key) {
            return Ok(level.clone());
        }
        let nodes = (self.quad.time_nodes / 2).max(2);
        let level = Arc::new(self.compute_level(key, t, breaks, index, nodes)?);
        self.time_check.write().expect("cache lock").entry(key).or_insert(level.clone());
        Ok(level)
    }

    fn compute_level(&self, key: Key, t: f64, breaks: &[f64], index: usize, time_nodes: usize) -> Result<Level> {
        let nodes = composite_rule(breaks, 2 << index, self.quad.nodes_per_panel);
        let values = match key {
            Key::Field { y, .. } => {
                let y = f64::from_bits(y);
                let mesh = self.mesh(t, time_nodes);
                nodes
                    .par_iter()
                    .map(|&(xi, _)| self.field_spectrum(t, y, xi, &mesh))
                    .collect::<Result<Vec<_>>>()?
            }
            Key::Road { .. } => {
                let (outer, inner) = self.road_meshes(t, time_nodes);
                nodes
                    .par_iter()
                    .map(|&(xi, _)| self.road_spectrum(t, xi, &outer, &inner))
                    .collect::<Result<Vec<_>>>()?
            }
        };
        Ok(Level { nodes, values })
    }

    /// Masses `int_cell H_theta(tau, 0, w) dw` of the `v0` rows.
    fn trace_masses(&self, tau: f64) -> Vec<f64> {
        let v0 = &self.data.v0;
        let hy = v0.spacing.1;
        (0..v0.ny)
            .map(|j| {
                let c = v0.y(j);
                robin_cell_mass(self.theta, tau, 0.0, c - 0.5 * hy, c + 0.5 * hy, self.params.d)
            })
            .collect()
    }

    fn mesh(&self, t: f64, time_nodes: usize) -> Mesh {
        let nodes = graded_two_sided(t, time_nodes, self.quad.graded_time_exponent);
        let masses = nodes.iter().map(|&(s, _)| self.trace_masses(t - s)).collect();
        Mesh { nodes, masses }
    }

    /// Outer mesh on `[0, t]` (masses at `s`) and one inner mesh on `[0, s]` per outer node.
    fn road_meshes(&self, t: f64, time_nodes: usize) -> (Mesh, Vec<Mesh>) {
        let nodes = graded_two_sided(t, time_nodes, self.quad.graded_time_exponent);
        let masses = nodes.iter().map(|&(s, _)| self.trace_masses(s)).collect();
        let inner = nodes.iter().map(|&(s, _)| self.mesh(s, time_nodes)).collect();
        (Mesh { nodes, masses }, inner)
    }

    /// Row transforms of `v0` and the transform of `u0` at `xi`.
    fn data_transforms(&self, xi: f64) -> (Vec<C>, C) {
        let v0 = &self.data.v0;
        let hx = v0.spacing.0;
        let cells: Vec<C> = (0..v0.nx).map(|i| cell_transform(v0.x(i), hx, xi)).collect();
        let rows = (0..v0.ny)
            .map(|j| v0.row(j).iter().zip(&cells).map(|(&v, c)| c * v).sum())
            .collect();
        let u0 = &self.data.u0;
        let road = (0..u0.len())
            .filter(|&i| u0.values[i] != 0.0)
            .map(|i| cell_transform(u0.x(i), u0.spacing, xi) * u0.values[i])
            .sum();
        (rows, road)
    }

    /// Transform of `V|_0(tau)` given the trace masses at `tau`.
    fn trace_hat(&self, tau: f64, xi: f64, rows: &[C], masses: &[f64]) -> C {
        let s: C = rows.iter().zip(masses).map(|(r, m)| r * m).sum();
        s * (-self.params.d * tau * xi * xi).exp()
    }

    /// Transform in `x` of `v - V` at `(t, y)`.
    fn field_spectrum(&self, t: f64, y: f64, xi: f64, mesh: &Mesh) -> Result<C> {
        let p = &self.params;
        let eval = PhiEvaluator::new(p, &self.regime, p.delta_of_xi(xi));
        let (rows, road) = self.data_transforms(xi);
        let sd = p.d.sqrt();
        let mut out = C::new(0.0, 0.0);
        if road != C::new(0.0, 0.0) {
            out += road * (p.mu / sd * lambda_hat(&eval, t, xi, y, p.d)?);
        }
        if !rows.is_empty() {
            let mut q = C::new(0.0, 0.0);
            for (&(s, w), m) in mesh.nodes.iter().zip(&mesh.masses) {
                let l = lambda_hat(&eval, s, xi, y, p.d)?;
                if l != 0.0 {
                    q += self.trace_hat(t - s, xi, &rows, m) * (w * l);
                }
            }
            out += q * (p.mu * p.nu / sd);
        }
        Ok(out)
    }

    /// Transform in `x` of `int_0^t e^{-mu(t-s)} G_D(t-s) * v|_0(s) ds`.
    fn road_spectrum(&self, t: f64, xi: f64, outer: &Mesh, inner: &[Mesh]) -> Result<C> {
        let p = &self.params;
        let eval = PhiEvaluator::new(p, &self.regime, p.delta_of_xi(xi));
        let (rows, road) = self.data_transforms(xi);
        let sd = p.d.sqrt();
        let decay = p.mu + p.road_d * xi * xi;
        let mut out = C::new(0.0, 0.0);
        for (k, &(s, w)) in outer.nodes.iter().enumerate() {
            let mut trace = self.trace_hat(s, xi, &rows, &outer.masses[k]);
            if road != C::new(0.0, 0.0) {
                trace += road * (p.mu / sd * lambda_hat(&eval, s, xi, 0.0, p.d)?);
            }
            if !rows.is_empty() {
                let mut q = C::new(0.0, 0.0);
                let mesh = &inner[k];
                for (&(sigma, ws), m) in mesh.nodes.iter().zip(&mesh.masses) {
                    let l = lambda_hat(&eval, sigma, xi, 0.0, p.d)?;
                    q += self.trace_hat(s - sigma, xi, &rows, m) * (ws * l);
                }
                trace += q * (p.mu * p.nu / sd);
            }
            out += trace * (w * (-decay * (t - s)).exp());
        }
        Ok(out)
    }
}

fn check_time(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(invalid("t", format!("must be finite and > 0, got {t}")))
    }
}

fn planar_point(x: &HalfSpacePoint) -> Result<(f64, f64)> {
    match x.x.as_slice() {
        [x0] => Ok((*x0, x.y)),
        _ => Err(Error::Shape(format!(
            "planar point needs one tangential coordinate, got {}",
            x.x.len()
        ))),
    }
}

/// `V(t, X)` for the given data.
#[allow(non_snake_case)]
pub fn solve_V(t: f64, x: &HalfSpacePoint, data: &InitialData, params: &ModelParams) -> Result<f64> {
    check_time(t)?;
    let (x, y) = planar_point(x)?;
    let s = SemiAnalyticSolver::with_regime(*params, trivial_regime(), data.clone(), QuadratureConfig::default())?;
    Ok(s.big_v(t, x, y))
}

/// `U(t, x)` for the given data.
#[allow(non_snake_case)]
pub fn solve_U(t: f64, x: f64, data: &InitialData, params: &ModelParams) -> Result<f64> {
    check_time(t)?;
    let s = SemiAnalyticSolver::with_regime(*params, trivial_regime(), data.clone(), QuadratureConfig::default())?;
    Ok(s.big_u(t, x))
}

/// `V` and `U` do not involve the roots of `P_delta`.
fn trivial_regime() -> Regime {
    Regime {
        kind: crate::cubic::RegimeKind::SimpleOnly,
        singular_deltas: vec![],
        guard_radius: 0.0,
        separation: 0.0,
    }
}

/// Field density `v(t, X)`. Builds a fresh solver; reuse a
/// [`SemiAnalyticSolver`] for many evaluations.
pub fn solve_v(
    t: f64,
    x: &HalfSpacePoint,
    data: &InitialData,
    params: &ModelParams,
    regime: &Regime,
    quad: &QuadratureConfig,
) -> Result<f64> {
    let (x, y) = planar_point(x)?;
    SemiAnalyticSolver::with_regime(*params, regime.clone(), data.clone(), quad.clone())?.v(t, x, y)
}

/// Road density `u(t, x)`. Builds a fresh solver; reuse a
/// [`SemiAnalyticSolver`] for many evaluations.
pub fn solve_u(
    t: f64,
    x: f64,
    data: &InitialData,
    params: &ModelParams,
    regime: &Regime,
    quad: &QuadratureConfig,
) -> Result<f64> {
    SemiAnalyticSolver::with_regime(*params, regime.clone(), data.clone(), quad.clone())?.u(t, x)
}
