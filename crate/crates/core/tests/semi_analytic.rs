use fieldroad::kernels::HalfSpacePoint;
use fieldroad::special::erf_real;
use fieldroad::*;

fn params(d: f64, road_d: f64, mu: f64, nu: f64) -> ModelParams {
    ModelParams::new(d, road_d, mu, nu).unwrap()
}

fn pt(x: f64, y: f64) -> HalfSpacePoint {
    HalfSpacePoint::planar(x, y).unwrap()
}

fn field_box(x: [f64; 2], y: [f64; 2]) -> DataSpec {
    DataSpec { boxes: vec![BoxDatum { x, y, height: 1.0 }], intervals: vec![] }
}

fn road_interval(x: [f64; 2], height: f64) -> DataSpec {
    DataSpec { boxes: vec![], intervals: vec![IntervalDatum { x, height }] }
}

/// `int_a^b G_diff(t, x - z) dz`.
fn gauss_strip(t: f64, x: f64, a: f64, b: f64, diff: f64) -> f64 {
    let s = 2.0 * (diff * t).sqrt();
    0.5 * (erf_real((x - a) / s) - erf_real((x - b) / s))
}

#[test]
fn zero_data_give_zero() {
    let data = DataSpec::default().rasterize(0.5).unwrap();
    let p = params(1.0, 3.0, 1.0, 1.0);
    let r = classify_regime(&p).unwrap();
    let q = QuadratureConfig::default();
    assert_eq!(solve_V(2.0, &pt(0.3, 1.0), &data, &p).unwrap(), 0.0);
    assert_eq!(solve_U(2.0, 0.3, &data, &p).unwrap(), 0.0);
    assert_eq!(solve_v(2.0, &pt(0.3, 1.0), &data, &p, &r, &q).unwrap(), 0.0);
    assert_eq!(solve_u(2.0, 0.3, &data, &p, &r, &q).unwrap(), 0.0);
}

#[test]
fn robin_part_tends_to_the_neumann_image_sum() {
    let data = field_box([-1.0, 1.0], [0.5, 2.0]).rasterize(0.25).unwrap();
    let p = params(1.0, 2.0, 1.0, 1e-8);
    for &(t, x, y) in &[(0.5, 0.0, 0.0), (2.0, 1.5, 1.0), (10.0, -3.0, 4.0)] {
        let gx = gauss_strip(t, x, -1.0, 1.0, 1.0);
        let images = gauss_strip(t, y, 0.5, 2.0, 1.0) + gauss_strip(t, y, -2.0, -0.5, 1.0);
        let got = solve_V(t, &pt(x, y), &data, &p).unwrap();
        assert!((got - gx * images).abs() <= 1e-6 * gx * images, "t {t}: {got} vs {}", gx * images);
    }
}

#[test]
fn robin_part_matches_a_robin_finite_difference_run() {
    // With mu negligible the field sees d v_y = nu v on the road, which is the V problem.
    let spec = field_box([-10.0, 10.0], [10.0, 30.0]);
    let h = 0.5;
    let p = params(1.0, 2.0, 1e-12, 1.0);
    let cfg = SimConfig {
        params: p,
        m: 60.0,
        h,
        t_end: 50.0,
        cfl_safety: 0.9,
        record_every: 50.0,
        data: spec.rasterize(h).unwrap(),
    };
    let mut sim = Simulation::new(cfg).unwrap();
    sim.advance_to(50.0).unwrap();
    let data = spec.rasterize(h).unwrap();
    let want = sim.state().v_at(0.0, 5.0);
    let got = solve_V(50.0, &pt(0.0, 5.0), &data, &p).unwrap();
    assert!((got - want).abs() <= 1e-2 * want, "{got} vs {want}");
}

#[test]
fn free_road_flow_of_an_indicator_is_closed_form() {
    let data = road_interval([-2.0, 3.0], 1.0).rasterize(0.5).unwrap();
    let p = params(1.0, 4.0, 1.0, 1.0);
    for &(t, x) in &[(0.01, 3.0), (0.3, -2.1), (1.0, 0.0), (25.0, 10.0), (400.0, -50.0)] {
        let want = gauss_strip(t, x, -2.0, 3.0, 4.0);
        assert!((solve_U(t, x, &data, &p).unwrap() - want).abs() <= 1e-10);
    }
}

#[test]
fn narrow_bump_gives_the_fundamental_solution() {
    let w = 0.01;
    let data = road_interval([-0.5 * w, 0.5 * w], 1.0 / w).rasterize(w).unwrap();
    let p = params(2.0, 1.0, 1.0, 1.0);
    let got = solve_U(1.0, 0.0, &data, &p).unwrap();
    let want = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
    assert!((got - want).abs() <= w * w, "{got}");
}

#[test]
fn road_without_uptake_is_damped_free_flow() {
    // mu ~ 0: nothing enters the field, so v stays 0 and u = e^{-mu t} U.
    let data = road_interval([-1.0, 1.0], 1.0).rasterize(0.5).unwrap();
    let p = params(1.0, 3.0, 1e-10, 1.0);
    let s = SemiAnalyticSolver::new(p, data, QuadratureConfig::default()).unwrap();
    for &(t, x) in &[(1.0, 0.0), (5.0, 2.0)] {
        let want = (-p.mu * t).exp() * s.big_u(t, x);
        assert!((s.u(t, x).unwrap() - want).abs() <= 1e-8 * want);
        assert!(s.v(t, x, 0.5).unwrap().abs() <= 1e-8);
    }
}

#[test]
fn even_data_give_even_solutions() {
    let spec = DataSpec {
        boxes: vec![BoxDatum { x: [-2.0, 2.0], y: [0.0, 1.0], height: 1.0 }],
        intervals: vec![IntervalDatum { x: [-1.0, 1.0], height: 2.0 }],
    };
    let p = params(1.0, 5.0, 1.5, 2.0);
    let s = SemiAnalyticSolver::new(p, spec.rasterize(0.5).unwrap(), QuadratureConfig::default()).unwrap();
    for &(t, x, y) in &[(1.0, 0.7, 0.0), (4.0, 3.0, 1.5)] {
        let (a, b) = (s.v(t, x, y).unwrap(), s.v(t, -x, y).unwrap());
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300));
        let (a, b) = (s.u(t, x).unwrap(), s.u(t, -x).unwrap());
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300));
    }
}

#[test]
fn solution_is_nonnegative_and_bounded() {
    let spec = DataSpec {
        boxes: vec![BoxDatum { x: [-3.0, 3.0], y: [1.0, 4.0], height: 1.0 }],
        intervals: vec![IntervalDatum { x: [-2.0, 2.0], height: 1.0 }],
    };
    // Frozen constant K in sup |v|, |u| <= K max(|v0|, |u0|).
    const K: f64 = 1.0;
    for p in [params(1.0, 10.0, 2.0, 1.0), params(1.0, 0.2, 1.0, 1.0)] {
        let data = spec.rasterize(0.5).unwrap();
        let scale = data.sup_norm();
        let s = SemiAnalyticSolver::new(p, data, QuadratureConfig::default()).unwrap();
        for &t in &[0.5, 3.0, 20.0] {
            for &x in &[0.0, 1.0, 4.0, 12.0] {
                for &y in &[0.0, 0.5, 2.0, 8.0] {
                    let v = s.v(t, x, y).unwrap();
                    assert!(v >= -1e-6 * scale && v <= K * scale, "v({t}, {x}, {y}) = {v}");
                }
                let u = s.u(t, x).unwrap();
                assert!(u >= -1e-6 * scale && u <= K * scale, "u({t}, {x}) = {u}");
            }
        }
    }
}

#[test]
fn refinement_stays_within_the_error_estimate() {
    let spec = field_box([-2.0, 2.0], [0.0, 2.0]);
    let p = params(1.0, 10.0, 1.0, 1.0);
    let coarse = SemiAnalyticSolver::new(p, spec.rasterize(0.5).unwrap(), QuadratureConfig::default()).unwrap();
    let fine_quad = QuadratureConfig { time_nodes: 48, tol: 5e-7, ..Default::default() };
    let fine = SemiAnalyticSolver::new(p, spec.rasterize(0.25).unwrap(), fine_quad).unwrap();
    for &(t, x, y) in &[(2.0, 0.0, 0.0), (10.0, 3.0, 1.0)] {
        let a = coarse.v_estimate(t, x, y).unwrap();
        let b = fine.v(t, x, y).unwrap();
        assert!((a.value - b).abs() <= a.error, "v: |{} - {b}| > {:e}", a.value, a.error);
        let a = coarse.u_estimate(t, x).unwrap();
        let b = fine.u(t, x).unwrap();
        assert!((a.value - b).abs() <= a.error, "u: |{} - {b}| > {:e}", a.value, a.error);
    }
}

#[test]
fn road_datum_matches_finite_differences() {
    let spec = road_interval([-5.0, 5.0], 1.0);
    let p = params(1.0, 100.0, 1.0, 1.0);
    let h = 1.0;
    let cfg = SimConfig {
        params: p,
        m: 100.0,
        h,
        t_end: 20.0,
        cfl_safety: 0.9,
        record_every: 20.0,
        data: spec.rasterize(h).unwrap(),
    };
    let mut sim = Simulation::new(cfg).unwrap();
    sim.advance_to(20.0).unwrap();
    let fd = sim.state();
    let s = SemiAnalyticSolver::new(p, spec.rasterize(0.5).unwrap(), QuadratureConfig::default()).unwrap();
    let (mut ev, mut sv, mut eu, mut su) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for &x in &[0.0, 2.0, 5.0, 10.0, 20.0, 40.0] {
        for &y in &[0.0, 2.0, 5.0] {
            let b = fd.v_at(x, y);
            ev = ev.max((s.v(20.0, x, y).unwrap() - b).abs());
            sv = sv.max(b);
        }
        let b = fd.u_at(x);
        eu = eu.max((s.u(20.0, x).unwrap() - b).abs());
        su = su.max(b);
    }
    assert!(ev <= 2e-2 * sv && eu <= 2e-2 * su, "v {:e} u {:e}", ev / sv, eu / su);
}

#[test]
fn rejects_bad_arguments() {
    let p = params(1.0, 3.0, 1.0, 1.0);
    let data = field_box([0.0, 1.0], [0.0, 1.0]).rasterize(0.5).unwrap();
    let s = SemiAnalyticSolver::new(p, data, QuadratureConfig::default()).unwrap();
    assert!(s.v(-1.0, 0.0, 0.0).is_err());
    assert!(s.v(1.0, 0.0, -0.5).is_err());
    let three = p.with_dim(3).unwrap();
    let data = DataSpec::default().rasterize(0.5).unwrap();
    assert!(SemiAnalyticSolver::new(three, data, QuadratureConfig::default()).is_err());
}
