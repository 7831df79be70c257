//! Experiment orchestration: one table and one summary per command.

use fieldroad::fd_solver::rightmost_sign_change;
use fieldroad::kernels::{half_space_kernel, lambda_kernel_with_error, HalfSpacePoint};
use fieldroad::{
    classify_regime, discriminant, fit_decay_rate, run, solve_p_delta, sup_phi_scan, SemiAnalyticSolver,
    SimConfig, Simulation, TimeSeriesRecord,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::error::{CliError, Result};
use crate::spec::{Command, ExperimentSpec, KernelChoice};

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub(crate) fn new(header: &[&'static str]) -> Self {
        Self { header: header.to_vec(), rows: Vec::new() }
    }

    fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    /// Column by name, numeric cells only.
    pub fn column(&self, name: &str) -> Vec<f64> {
        let Some(k) = self.header.iter().position(|h| *h == name) else { return vec![] };
        self.rows
            .iter()
            .filter_map(|r| match r[k] {
                Cell::Num(v) => Some(v),
                _ => None,
            })
            .collect()
    }
}

/// Result of an experiment before anything is written.
#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Value,
}

pub fn execute(spec: &ExperimentSpec, verbose: bool) -> Result<Outcome> {
    spec.validate()?;
    let log = |msg: String| {
        if verbose {
            eprintln!("[{}] {msg}", spec.command.name());
        }
    };
    match spec.command {
        Command::KernelEval => kernel_eval(spec, &log),
        Command::PhiScan => phi_scan(spec, &log),
        Command::Roots => roots(spec),
        Command::SimulateFd => simulate_fd(spec, &log),
        Command::SimulateAnalytic => simulate_analytic(spec, &log),
        Command::Compare => compare(spec, &log),
        Command::Decay => decay(spec, &log),
        Command::Flux => flux(spec, &log),
    }
}

/// Grid probes followed by the seeded random ones.
pub fn probe_points(spec: &ExperimentSpec) -> Vec<(f64, f64)> {
    let p = &spec.probes;
    let mut out: Vec<(f64, f64)> = p.xs.iter().flat_map(|&x| p.ys.iter().map(move |&y| (x, y))).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    for _ in 0..p.random {
        let x = p.x_range * rng.random_range(-1.0..=1.0);
        let y = p.y_range * rng.random_range(0.0..=1.0);
        out.push((x, y));
    }
    out
}

/// Distinct road abscissae of the probes, in order of appearance.
fn road_points(points: &[(f64, f64)]) -> Vec<f64> {
    let mut xs: Vec<f64> = Vec::new();
    for &(x, _) in points {
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    xs
}

fn kernel_eval(spec: &ExperimentSpec, log: &dyn Fn(String)) -> Result<Outcome> {
    let p = &spec.params;
    let regime = classify_regime(p)?;
    let points = probe_points(spec);
    let mut table = Table::new(&["t", "x", "y", "value", "error"]);
    for &t in &spec.times {
        log(format!("t = {t}"));
        for &(x, y) in &points {
            let (value, error) = match &spec.kernel {
                KernelChoice::Lambda => lambda_kernel_with_error(t, x, y, p, &regime, &spec.quad)?,
                KernelChoice::HalfSpace { theta, source } => {
                    let at = HalfSpacePoint::planar(x, y)?;
                    let from = HalfSpacePoint::planar(source[0], source[1])?;
                    (half_space_kernel(*theta, t, &at, &from, p.d, 2), 0.0)
                }
            };
            table.push(vec![t.into(), x.into(), y.into(), value.into(), error.into()]);
        }
    }
    let summary = json!({ "kernel": spec.kernel, "points": points.len(), "times": spec.times.len() });
    Ok(Outcome { table, summary })
}

fn phi_scan(spec: &ExperimentSpec, log: &dyn Fn(String)) -> Result<Outcome> {
    let p = &spec.params;
    let regime = classify_regime(p)?;
    let mut deltas: Vec<f64> = match &spec.deltas {
        Some(s) => s.points(),
        None => std::iter::once(0.0).chain((0..=90).map(|i| 10f64.powf(-6.0 + i as f64 / 10.0))).collect(),
    };
    for &s in &regime.singular_deltas {
        for e in [0.0, 1e-8, 1e-6, 1e-4, 1e-2] {
            deltas.extend([s - e, s + e]);
        }
    }
    deltas.retain(|&d| d >= 0.0);
    let mut table = Table::new(&["t", "sup_phi", "sup_phi_scaled"]);
    let mut worst = 0.0f64;
    for &t in &spec.times {
        let ys: Vec<f64> = (0..=40).map(|i| 2.0 * (p.d * t).sqrt() * 0.1 * i as f64).collect();
        let s = sup_phi_scan(t, p, &deltas, &ys)?;
        let scaled = s * (1.0 + t).sqrt();
        worst = worst.max(scaled);
        log(format!("t = {t}: S = {s:e}"));
        table.push(vec![t.into(), s.into(), scaled.into()]);
    }
    let summary = json!({
        "regime": regime.kind,
        "singular_deltas": regime.singular_deltas,
        "deltas": deltas.len(),
        "max_sup_phi_scaled": worst,
    });
    Ok(Outcome { table, summary })
}

fn roots(spec: &ExperimentSpec) -> Result<Outcome> {
    let p = &spec.params;
    let regime = classify_regime(p)?;
    let sweep = spec.deltas.as_ref().ok_or_else(|| CliError::missing(spec.command, "deltas"))?;
    let mut table = Table::new(&[
        "delta", "alpha_re", "alpha_im", "beta_re", "beta_im", "gamma_re", "gamma_im", "discriminant", "kind",
        "near_singular",
    ]);
    for delta in sweep.points() {
        let r = solve_p_delta(p, delta);
        let mut row: Vec<Cell> = vec![delta.into()];
        for s in r.roots() {
            row.push(s.re.into());
            row.push(s.im.into());
        }
        row.push(discriminant(p, delta).into());
        row.push(Cell::Text(format!("{:?}", r.kind)));
        row.push(Cell::Text(regime.guard_containing(delta).is_some().to_string()));
        table.push(row);
    }
    let summary = json!({
        "regime": regime.kind,
        "singular_deltas": regime.singular_deltas,
        "guard_radius": regime.guard_radius,
    });
    Ok(Outcome { table, summary })
}

fn sim_config(spec: &ExperimentSpec) -> Result<SimConfig> {
    spec.sim_config()?.ok_or_else(|| CliError::missing(spec.command, "sim"))
}

fn records(spec: &ExperimentSpec, log: &dyn Fn(String)) -> Result<(SimConfig, Vec<TimeSeriesRecord>)> {
    let cfg = sim_config(spec)?;
    let (nx, ny) = cfg.grid();
    log(format!("grid {}x{}, dt = {:e}", nx + 1, ny + 1, cfg.time_step()));
    let recs = run(&cfg)?;
    Ok((cfg, recs))
}

/// Flux at the road node `x = 0`.
fn flux_at_origin(r: &TimeSeriesRecord) -> f64 {
    let f = &r.flux;
    let i = (-f.origin / f.spacing).round() as usize;
    f.values[i]
}

fn mass_summary(recs: &[TimeSeriesRecord]) -> Value {
    let m0 = recs[0].total_mass;
    let drift = recs.iter().map(|r| (r.total_mass / m0 - 1.0).abs()).fold(0.0, f64::max);
    json!({ "initial_mass": m0, "max_mass_drift": drift, "min_value": recs.last().map(|r| r.min_value) })
}

fn simulate_fd(spec: &ExperimentSpec, log: &dyn Fn(String)) -> Result<Outcome> {
    let (_, recs) = records(spec, log)?;
    let mut table = Table::new(&["t", "sup_v", "sup_u", "total_mass", "flux0", "x0", "min_value"]);
    for r in &recs {
        table.push(vec![
            r.t.into(),
            r.sup_v.into(),
            r.sup_u.into(),
            r.total_mass.into(),
            flux_at_origin(r).into(),
            r.x0.into(),
            r.min_value.into(),
        ]);
    }
    Ok(Outcome { table, summary: mass_summary(&recs) })
}

fn simulate_analytic(spec: &ExperimentSpec, log: &dyn Fn(String)) -> Result<Outcome> {
    let solver = SemiAnalyticSolver::new(spec.params, spec.analytic_data()?, spec.quad.clone())?;
    let points = probe_points(spec);
    let road = road_points(&points);
    let mut table = Table::new(&["t", "x", "y", "component", "value", "error"]);
    for &t in &spec.times {
        log(format!("t = {t}"));
        for &(x, y) in &points {
            let e = solver.v_estimate(t, x, y)?;
            table.push(vec![t.into(), x.into(), y.into(), "v".into(), e.value.into(), e.error.into()]);
        }
        for &x in &road {
            let e = solver.u_estimate(t, x)?;
            table.push(vec![t.into(), x.into(), 0.0.into(), "u".into(), e.value.into(), e.error.into()]);
        }
    }
    let summary = json!({ "points": points.len(), "road_points": road.len(), "times": spec.times.len() });
    Ok(Outcome { table, summary })
}

fn compare(spec: &ExperimentSpec, log: &dyn Fn(String)) -> Result<Outcome> {
    let cfg = sim_config(spec)?;
    let solver = SemiAnalyticSolver::new(spec.params, spec.analytic_data()?, spec.quad.clone())?;
    let mut sim = Simulation::new(cfg)?;
    let points = probe_points(spec);
    let road = road_points(&points);
    let mut times = spec.times.clone();
    times.sort_by(f64::total_cmp);
    let mut table = Table::new(&["t", "x", "y", "component", "semi_analytic", "fd", "abs_diff", "rel_diff"]);
    let (mut worst_v, mut worst_u) = (0.0f64, 0.0f64);
    for &t in &times {
        sim.advance_to(t)?;
        log(format!("t = {t}"));
        let fd = sim.state();
        let field: Vec<(f64, f64, f64, f64)> = points
            .iter()
            .map(|&(x, y)| Ok((x, y, solver.v(t, x, y)?, fd.v_at(x, y))))
            .collect::<Result<_>>()?;
        let on_road: Vec<(f64, f64, f64, f64)> =
            road.iter().map(|&x| Ok((x, 0.0, solver.u(t, x)?, fd.u_at(x)))).collect::<Result<_>>()?;
        for (rows, name, worst) in [(&field, "v", &mut worst_v), (&on_road, "u", &mut worst_u)] {
            let scale = rows.iter().fold(0.0f64, |m, r| m.max(r.3.abs()));
            for &(x, y, a, b) in rows {
                let rel = if scale > 0.0 { (a - b).abs() / scale } else { 0.0 };
                *worst = worst.max(rel);
                table.push(vec![t.into(), x.into(), y.into(), name.into(), a.into(), b.into(), (a - b).abs().into(), rel.into()]);
            }
        }
    }
    let summary = json!({
        "max_rel_diff_v": worst_v,
        "max_rel_diff_u": worst_u,
        "probes": points.len() + road.len(),
    });
    Ok(Outcome { table, summary })
}

fn window(spec: &ExperimentSpec, t_end: f64) -> [f64; 2] {
    spec.fit_window.unwrap_or([t_end / 10.0, t_end])
}

fn fit(series: Vec<(f64, f64)>) -> Value {
    match fit_decay_rate(&series) {
        Ok(f) => json!({ "slope": f.slope, "intercept": f.intercept, "max_residual": f.max_residual, "samples": series.len() }),
        Err(e) => json!({ "error": e.to_string(), "samples": series.len() }),
    }
}

fn decay(spec: &ExperimentSpec, log: &dyn Fn(String)) -> Result<Outcome> {
    let (cfg, recs) = records(spec, log)?;
    let mut table = Table::new(&["t", "sup_v", "sup_u"]);
    for r in &recs {
        table.push(vec![r.t.into(), r.sup_v.into(), r.sup_u.into()]);
    }
    let [a, b] = window(spec, cfg.t_end);
    let tail: Vec<&TimeSeriesRecord> = recs.iter().filter(|r| r.t >= a && r.t <= b).collect();
    let summary = json!({
        "fit_window": [a, b],
        "sup_v": fit(tail.iter().map(|r| (r.t, r.sup_v)).collect()),
        "sup_u": fit(tail.iter().map(|r| (r.t, r.sup_u)).collect()),
        "mass": mass_summary(&recs),
    });
    Ok(Outcome { table, summary })
}

fn flux(spec: &ExperimentSpec, log: &dyn Fn(String)) -> Result<Outcome> {
    let (cfg, recs) = records(spec, log)?;
    let mut table = Table::new(&["t", "flux0", "x0"]);
    for r in &recs {
        table.push(vec![r.t.into(), flux_at_origin(r).into(), rightmost_sign_change(&r.flux).into()]);
    }
    let [a, b] = window(spec, cfg.t_end);
    let tail: Vec<&TimeSeriesRecord> = recs.iter().filter(|r| r.t >= a && r.t <= b).collect();
    let f0: Vec<f64> = tail.iter().map(|r| flux_at_origin(r)).collect();
    let sign = if f0.iter().all(|&f| f < 0.0) {
        "negative"
    } else if f0.iter().all(|&f| f > 0.0) {
        "positive"
    } else {
        "mixed"
    };
    let summary = json!({
        "fit_window": [a, b],
        "flux0_sign": sign,
        "flux0_at_t_end": flux_at_origin(recs.last().expect("at least one record")),
        "abs_flux0": fit(tail.iter().map(|r| (r.t, flux_at_origin(r).abs())).collect()),
        "x0": fit(tail.iter().filter_map(|r| r.x0.map(|x| (r.t, x))).collect()),
        "mass": mass_summary(&recs),
    });
    Ok(Outcome { table, summary })
}
