//! Explicit finite-difference reference solver on the box `(-2M, 2M) x (0, M)`.
//!
//! Nodes sit at `x_i = -2M + i h`, `y_j = j h`; the road is the row `j = 0`.
//! The exchange condition enters through the ghost value
//! `v_{i,-1} = v_{i,1} + (2h/d)(mu u_i - nu v_{i,0})`, the artificial walls
//! through mirror ghosts. With trapezoidal weights the discrete mass
//! `h^2 sum v + h sum u` is conserved to rounding.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{overlap, InitialData, RoadProfile, ScalarField2D};
use crate::error::{invalid, Error, Result};
use crate::params::ModelParams;

/// Growth over the initial sup norm treated as a blow-up.
const BLOWUP_FACTOR: f64 = 1e6;
/// Flux values below this fraction of the profile's sup norm carry no sign.
pub const SIGN_NOISE_FLOOR: f64 = 1e-12;

fn default_cfl() -> f64 {
    0.9
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub params: ModelParams,
    /// Box scale: the box is `(-2M, 2M) x (0, M)`.
    #[serde(rename = "M")]
    pub m: f64,
    pub h: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    /// Diagnostic sampling period.
    pub record_every: f64,
    pub data: InitialData,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        for (name, v) in [("M", self.m), ("h", self.h), ("t_end", self.t_end), ("record_every", self.record_every)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(name, format!("must be finite and > 0, got {v}")));
            }
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety <= 1.0) {
            return Err(invalid("cfl_safety", format!("must be in (0, 1], got {}", self.cfl_safety)));
        }
        let r = self.m / self.h;
        if (r - r.round()).abs() > 1e-9 * r.max(1.0) || r.round() < 1.0 {
            return Err(invalid("h", format!("M / h = {r} must be a positive integer")));
        }
        self.data.validate()?;
        let v0 = &self.data.v0;
        let (hx, hy) = v0.spacing;
        let inside_x = |a: f64, b: f64| a >= -2.0 * self.m - 1e-9 && b <= 2.0 * self.m + 1e-9;
        for j in 0..v0.ny {
            for i in 0..v0.nx {
                if v0.get(i, j) != 0.0 {
                    let (x, y) = (v0.x(i), v0.y(j));
                    if !inside_x(x - 0.5 * hx, x + 0.5 * hx) || y + 0.5 * hy > self.m + 1e-9 {
                        return Err(invalid("data", "field datum leaves the box"));
                    }
                }
            }
        }
        let u0 = &self.data.u0;
        for i in 0..u0.len() {
            let x = u0.x(i);
            if u0.values[i] != 0.0 && !inside_x(x - 0.5 * u0.spacing, x + 0.5 * u0.spacing) {
                return Err(invalid("data", "road datum leaves the box"));
            }
        }
        Ok(())
    }

    /// Nodes per row and per column minus one: `(4M/h, M/h)`.
    pub fn grid(&self) -> (usize, usize) {
        let ny = (self.m / self.h).round() as usize;
        (4 * ny, ny)
    }

    /// Fixed time step.
    ///
    /// `cfl_safety * h^2 / (4 max(d, D))`, further capped so every explicit
    /// update (including the exchange rows) is a convex combination.
    pub fn time_step(&self) -> f64 {
        let p = &self.params;
        let h = self.h;
        let diffusive = h * h / (4.0 * p.d.max(p.road_d));
        let road_row = 1.0 / (4.0 * p.d / (h * h) + 2.0 * p.nu / h);
        let road = 1.0 / (2.0 * p.road_d / (h * h) + p.mu);
        self.cfl_safety * diffusive.min(road_row).min(road)
    }
}

/// Field and road densities at time `t`, sampled on the nodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimState {
    pub v: ScalarField2D,
    pub u: RoadProfile,
    pub t: f64,
}

/// Diagnostics at one sampling time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeriesRecord {
    pub t: f64,
    pub sup_v: f64,
    pub sup_u: f64,
    pub total_mass: f64,
    /// `F(t, x) = mu u - nu v|_{y=0}`.
    pub flux: RoadProfile,
    /// Rightmost sign change of the flux.
    pub x0: Option<f64>,
    /// Smallest value of `v` or `u` over all steps so far.
    pub min_value: f64,
}

/// Trapezoidal weight of node `i` out of `0..=n`.
fn weight(i: usize, n: usize) -> f64 {
    if i == 0 || i == n {
        0.5
    } else {
        1.0
    }
}

impl SimState {
    /// Initial state: each node carries the average of the cell data over its
    /// (clipped) dual cell, which preserves the mass exactly.
    pub fn initial(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        let (nx, ny) = config.grid();
        let (h, m) = (config.h, config.m);
        let dual = |c: f64, lo: f64, hi: f64| ((c - 0.5 * h).max(lo), (c + 0.5 * h).min(hi));
        let node_x = |i: usize| -2.0 * m + i as f64 * h;
        let mut v = ScalarField2D::zeros(nx + 1, ny + 1, (-2.0 * m, 0.0), (h, h));
        let v0 = &config.data.v0;
        let (hx, hy) = v0.spacing;
        let span = |c: f64, w: f64| {
            let lo = ((c - 0.5 * w - 0.5 * h) / h).floor().max(0.0) as usize;
            let hi = ((c + 0.5 * w + 0.5 * h) / h).ceil() as usize;
            (lo, hi)
        };
        for l in 0..v0.ny {
            for k in 0..v0.nx {
                let val = v0.get(k, l);
                if val == 0.0 {
                    continue;
                }
                let (cx, cy) = (v0.x(k), v0.y(l));
                let (i0, i1) = span(cx + 2.0 * m, hx);
                let (j0, j1) = span(cy, hy);
                for j in j0..=j1.min(ny) {
                    let (b0, b1) = dual(j as f64 * h, 0.0, m);
                    let oy = overlap(b0, b1, cy - 0.5 * hy, cy + 0.5 * hy);
                    if oy == 0.0 {
                        continue;
                    }
                    for i in i0..=i1.min(nx) {
                        let (a0, a1) = dual(node_x(i), -2.0 * m, 2.0 * m);
                        let ox = overlap(a0, a1, cx - 0.5 * hx, cx + 0.5 * hx);
                        v.values[j * (nx + 1) + i] += val * ox * oy / ((a1 - a0) * (b1 - b0));
                    }
                }
            }
        }
        let mut u = RoadProfile {
            values: vec![0.0; nx + 1],
            origin: -2.0 * m,
            spacing: h,
        };
        let u0 = &config.data.u0;
        for k in 0..u0.len() {
            let val = u0.values[k];
            if val == 0.0 {
                continue;
            }
            let c = u0.x(k);
            let (i0, i1) = span(c + 2.0 * m, u0.spacing);
            for i in i0..=i1.min(nx) {
                let (a0, a1) = dual(node_x(i), -2.0 * m, 2.0 * m);
                u.values[i] += val * overlap(a0, a1, c - 0.5 * u0.spacing, c + 0.5 * u0.spacing) / (a1 - a0);
            }
        }
        Ok(Self { v, u, t: 0.0 })
    }

    pub fn sup_v(&self) -> f64 {
        self.v.sup_norm()
    }

    pub fn sup_u(&self) -> f64 {
        self.u.sup_norm()
    }

    pub fn min_value(&self) -> f64 {
        self.v.values.iter().chain(&self.u.values).fold(f64::INFINITY, |m, &v| m.min(v))
    }

    /// Bilinear interpolation of `v` at `(x, y)` inside the box.
    pub fn v_at(&self, x: f64, y: f64) -> f64 {
        let h = self.v.spacing.0;
        let fx = ((x - self.v.origin.0) / h).clamp(0.0, (self.v.nx - 1) as f64);
        let fy = (y / h).clamp(0.0, (self.v.ny - 1) as f64);
        let (i, j) = ((fx.floor() as usize).min(self.v.nx - 2), (fy.floor() as usize).min(self.v.ny - 2));
        let (a, b) = (fx - i as f64, fy - j as f64);
        (1.0 - a) * (1.0 - b) * self.v.get(i, j)
            + a * (1.0 - b) * self.v.get(i + 1, j)
            + (1.0 - a) * b * self.v.get(i, j + 1)
            + a * b * self.v.get(i + 1, j + 1)
    }

    /// Linear interpolation of `u` at `x`.
    pub fn u_at(&self, x: f64) -> f64 {
        let f = ((x - self.u.origin) / self.u.spacing).clamp(0.0, (self.u.len() - 1) as f64);
        let i = (f.floor() as usize).min(self.u.len() - 2);
        let a = f - i as f64;
        (1.0 - a) * self.u.values[i] + a * self.u.values[i + 1]
    }
}

/// `h^2 sum v + h sum u` with trapezoidal weights at the walls.
pub fn total_mass(state: &SimState, _config: &SimConfig) -> f64 {
    let v = &state.v;
    let h = v.spacing.0;
    let (nx, ny) = (v.nx - 1, v.ny - 1);
    let field: f64 = (0..=ny)
        .map(|j| weight(j, ny) * v.row(j).iter().enumerate().map(|(i, x)| weight(i, nx) * x).sum::<f64>())
        .sum();
    let road: f64 = state.u.values.iter().enumerate().map(|(i, x)| weight(i, nx) * x).sum();
    h * h * field + h * road
}

/// `F = mu u - nu v|_{y=0}` on the road nodes.
pub fn flux_profile(state: &SimState, params: &ModelParams) -> RoadProfile {
    let values = state
        .u
        .values
        .iter()
        .zip(state.v.row(0))
        .map(|(u, v)| params.mu * u - params.nu * v)
        .collect();
    RoadProfile {
        values,
        origin: state.u.origin,
        spacing: state.u.spacing,
    }
}

/// Largest `x` at which the profile changes sign, by linear interpolation
/// between bracketing nodes; `None` if the profile is single-signed.
///
/// Values within `SIGN_NOISE_FLOOR` of zero (relative to the sup norm) count
/// as zero, so rounding noise in far tails is not mistaken for a crossing.
pub fn rightmost_sign_change(profile: &RoadProfile) -> Option<f64> {
    let floor = SIGN_NOISE_FLOOR * profile.sup_norm();
    let sign = |v: f64| if v.abs() <= floor { 0 } else if v > 0.0 { 1 } else { -1 };
    let vals = &profile.values;
    // Scan from the right, remembering the nearest signed node on the right.
    let mut right: Option<usize> = None;
    for i in (0..vals.len()).rev() {
        let s = sign(vals[i]);
        if s == 0 {
            continue;
        }
        if let Some(r) = right {
            if s != sign(vals[r]) {
                if r == i + 1 {
                    let (a, b) = (vals[i], vals[r]);
                    return Some(profile.x(i) + profile.spacing * a / (a - b));
                }
                // A run of zeros between opposite signs: the crossing is its midpoint.
                return Some(0.5 * (profile.x(i + 1) + profile.x(r - 1)));
            }
        }
        right = Some(i);
    }
    None
}

/// Least-squares line through `(ln t, ln value)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub max_residual: f64,
}

pub fn fit_decay_rate(series: &[(f64, f64)]) -> Result<DecayFit> {
    if series.len() < 8 {
        return Err(invalid("series", format!("need at least 8 samples, got {}", series.len())));
    }
    if let Some(&(t, v)) = series.iter().find(|&&(t, v)| !(t > 0.0 && v > 0.0)) {
        return Err(invalid("series", format!("times and values must be > 0, got ({t}, {v})")));
    }
    let pts: Vec<(f64, f64)> = series.iter().map(|&(t, v)| (t.ln(), v.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(invalid("series", "all samples at the same time"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let max_residual = pts.iter().map(|p| (p.1 - intercept - slope * p.0).abs()).fold(0.0, f64::max);
    Ok(DecayFit {
        slope,
        intercept,
        max_residual,
    })
}

/// A run in progress: owns its state and a scratch buffer.
pub struct Simulation {
    config: SimConfig,
    state: SimState,
    next_v: Vec<f64>,
    next_u: Vec<f64>,
    dt: f64,
    limit: f64,
    min_seen: f64,
}

impl Simulation {
    pub fn new(config: SimConfig) -> Result<Self> {
        let state = SimState::initial(&config)?;
        let limit = BLOWUP_FACTOR * state.sup_v().max(state.sup_u()).max(f64::MIN_POSITIVE);
        Ok(Self {
            dt: config.time_step(),
            next_v: vec![0.0; state.v.values.len()],
            next_u: vec![0.0; state.u.len()],
            min_seen: state.min_value(),
            config,
            state,
            limit,
        })
    }

    pub fn state(&self) -> &SimState {
        &self.state
    }

    pub fn config(&self) -> &SimConfig {
        &self.config
    }

    pub fn time_step(&self) -> f64 {
        self.dt
    }

    /// Smallest value of `v` or `u` seen at any step.
    pub fn min_seen(&self) -> f64 {
        self.min_seen
    }

    pub fn record(&self) -> TimeSeriesRecord {
        let flux = flux_profile(&self.state, &self.config.params);
        TimeSeriesRecord {
            t: self.state.t,
            sup_v: self.state.sup_v(),
            sup_u: self.state.sup_u(),
            total_mass: total_mass(&self.state, &self.config),
            x0: rightmost_sign_change(&flux),
            flux,
            min_value: self.min_seen,
        }
    }

    /// Steps until `t`; the last step is shortened to land on `t` exactly.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while self.state.t < t {
            let remaining = t - self.state.t;
            let dt = if remaining < self.dt * (1.0 + 1e-9) { remaining } else { self.dt };
            self.step_by(dt)?;
            if remaining == dt {
                self.state.t = t;
            }
        }
        Ok(())
    }

    fn step_by(&mut self, dt: f64) -> Result<()> {
        let p = self.config.params;
        let h = self.config.h;
        let v = &self.state.v;
        let nx1 = v.nx;
        let ny = v.ny - 1;
        let cur = &v.values;
        let u = &self.state.u.values;
        let kd = dt * p.d / (h * h);
        let ghost_gain = 2.0 * h / p.d;
        self.next_v.par_chunks_mut(nx1).enumerate().for_each(|(j, out)| {
            let row = &cur[j * nx1..(j + 1) * nx1];
            let up = if j == ny { &cur[(ny - 1) * nx1..ny * nx1] } else { &cur[(j + 1) * nx1..(j + 2) * nx1] };
            let down = if j > 0 { Some(&cur[(j - 1) * nx1..j * nx1]) } else { None };
            for i in 0..nx1 {
                let c = row[i];
                let l = if i == 0 { row[1] } else { row[i - 1] };
                let r = if i + 1 == nx1 { row[nx1 - 2] } else { row[i + 1] };
                let dn = match down {
                    Some(d) => d[i],
                    None => up[i] + ghost_gain * (p.mu * u[i] - p.nu * c),
                };
                out[i] = c + kd * (l + r + up[i] + dn - 4.0 * c);
            }
        });
        let kr = dt * p.road_d / (h * h);
        let road = &cur[0..nx1];
        for i in 0..nx1 {
            let c = u[i];
            let l = if i == 0 { u[1] } else { u[i - 1] };
            let r = if i + 1 == nx1 { u[nx1 - 2] } else { u[i + 1] };
            self.next_u[i] = c + kr * (l + r - 2.0 * c) + dt * (p.nu * road[i] - p.mu * c);
        }
        std::mem::swap(&mut self.state.v.values, &mut self.next_v);
        std::mem::swap(&mut self.state.u.values, &mut self.next_u);
        self.state.t += dt;
        let (worst, least) = self.state.v.values.iter().chain(&self.state.u.values).fold(
            (0.0f64, f64::INFINITY),
            |(m, l), &x| if x.is_nan() { (f64::INFINITY, l) } else { (m.max(x.abs()), l.min(x)) },
        );
        self.min_seen = self.min_seen.min(least);
        if worst > self.limit {
            return Err(Error::Instability {
                t: self.state.t,
                value: worst,
            });
        }
        Ok(())
    }

    /// Runs to `t_end`, recording every `record_every` (and at `t_end`).
    pub fn run(&mut self) -> Result<Vec<TimeSeriesRecord>> {
        let mut out = vec![self.record()];
        let every = self.config.record_every;
        let t_end = self.config.t_end;
        let mut k = 1usize;
        loop {
            let target = (k as f64 * every).min(t_end);
            self.advance_to(target)?;
            out.push(self.record());
            if target >= t_end {
                break;
            }
            k += 1;
        }
        Ok(out)
    }
}

/// One explicit Euler step.
pub fn step(state: &SimState, config: &SimConfig) -> Result<SimState> {
    let mut sim = Simulation::new(config.clone())?;
    sim.state = state.clone();
    sim.limit = BLOWUP_FACTOR * state.sup_v().max(state.sup_u()).max(f64::MIN_POSITIVE);
    let dt = sim.dt;
    sim.step_by(dt)?;
    Ok(sim.state)
}

/// Full run from the configured data.
pub fn run(config: &SimConfig) -> Result<Vec<TimeSeriesRecord>> {
    Simulation::new(config.clone())?.run()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{BoxDatum, DataSpec};

    fn config(d: f64, road_d: f64, h: f64) -> SimConfig {
        let data = DataSpec {
            boxes: vec![BoxDatum { x: [-1.0, 1.0], y: [0.0, 1.0], height: 1.0 }],
            intervals: vec![],
        }
        .rasterize(h)
        .unwrap();
        SimConfig {
            params: ModelParams::new(d, road_d, 1.0, 1.0).unwrap(),
            m: 4.0,
            h,
            t_end: 1.0,
            cfl_safety: 0.9,
            record_every: 0.5,
            data,
        }
    }

    #[test]
    fn sign_change_of_a_tent() {
        let xs: Vec<f64> = (0..=8).map(|i| 1.0 - (-2.0 + 0.5 * i as f64).abs()).collect();
        let p = RoadProfile::new(xs, -2.0, 0.5).unwrap();
        assert_eq!(rightmost_sign_change(&p), Some(1.0));
        let p = RoadProfile::new(vec![1.0, 2.0, 0.5], 0.0, 1.0).unwrap();
        assert_eq!(rightmost_sign_change(&p), None);
        let p = RoadProfile::new(vec![1.0, 0.5, -1.5], 0.0, 1.0).unwrap();
        assert!((rightmost_sign_change(&p).unwrap() - 1.25).abs() < 1e-15);
    }

    #[test]
    fn power_law_fit_is_exact() {
        let s: Vec<(f64, f64)> = (1..=12).map(|k| (k as f64, 7.0 * (k as f64).powf(-1.5))).collect();
        let f = fit_decay_rate(&s).unwrap();
        assert!((f.slope + 1.5).abs() < 1e-10);
        assert!((f.intercept - 7f64.ln()).abs() < 1e-10);
        assert!(fit_decay_rate(&s[..5]).is_err());
        let mut bad = s.clone();
        bad[3].1 = 0.0;
        assert!(fit_decay_rate(&bad).is_err());
    }

    #[test]
    fn initial_mass_matches_data() {
        for h in [0.25, 0.5] {
            let c = config(1.0, 2.0, h);
            let s = SimState::initial(&c).unwrap();
            assert!((total_mass(&s, &c) - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved_over_steps() {
        let c = config(1.0, 3.0, 0.25);
        let mut sim = Simulation::new(c.clone()).unwrap();
        let m0 = total_mass(sim.state(), &c);
        sim.advance_to(1.0).unwrap();
        assert!((total_mass(sim.state(), &c) - m0).abs() < 1e-12 * m0);
        assert!(sim.state().min_value() >= 0.0);
    }
}
