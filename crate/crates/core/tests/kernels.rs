use fieldroad::kernels::{
    gauss_kernel, half_space_kernel, lambda_kernel, lambda_kernel_with_error,
    robin_cell_mass, robin_coefficient, robin_kernel_1d, HalfSpacePoint, QuadratureConfig,
};
use fieldroad::quadrature::GaussLegendre;
use fieldroad::{classify_regime, ModelParams, PhiEvaluator};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

fn pt(x: f64, y: f64) -> HalfSpacePoint {
    HalfSpacePoint::planar(x, y).unwrap()
}

#[test]
fn gaussian_has_unit_mass() {
    let gl = GaussLegendre::new(128);
    for (t, diff) in [(0.01, 1.0), (1.0, 3.0), (50.0, 0.1)] {
        let r = 12.0 * f64::sqrt(diff * t);
        let m1 = gl.integrate(-r, r, |x| gauss_kernel(t, &[x], diff, 1));
        assert!((m1 - 1.0).abs() < 1e-8);
        let m2 = gl.integrate(-r, r, |x| {
            gl.integrate(-r, r, |y| gauss_kernel(t, &[x, y], diff, 2))
        });
        assert!((m2 - 1.0).abs() < 1e-8);
    }
}

#[test]
fn endpoint_thetas_give_neumann_and_dirichlet() {
    let g = |x: f64, y: f64| gauss_kernel(1.0, &[x, y], 1.0, 2);
    let (x, z) = (pt(0.4, 0.3), pt(-0.2, 1.1));
    let h0 = half_space_kernel(0.0, 1.0, &x, &z, 1.0, 2);
    let h1 = half_space_kernel(1.0, 1.0, &x, &z, 1.0, 2);
    assert!((h0 - (g(0.6, -0.8) + g(0.6, 1.4))).abs() < 1e-16);
    assert!((h1 - (g(0.6, -0.8) - g(0.6, 1.4))).abs() < 1e-16);
    assert_eq!(half_space_kernel(1.0, 1.0, &pt(0.4, 0.0), &z, 1.0, 2), 0.0);
}

#[test]
fn theta_limits_recover_image_sums() {
    let mut worst: f64 = 0.0;
    for &t in &[0.05, 1.0, 20.0] {
        for &d in &[0.5, 1.0, 3.0] {
            for &y in &[0.0, 0.3, 2.0] {
                for &w in &[0.0, 0.5, 1.7] {
                    let scale = robin_kernel_1d(0.0, t, y, w, d);
                    let lo = robin_kernel_1d(1e-8, t, y, w, d) - robin_kernel_1d(0.0, t, y, w, d);
                    let hi = robin_kernel_1d(1.0 - 1e-8, t, y, w, d)
                        - robin_kernel_1d(1.0, t, y, w, d);
                    worst = worst.max(lo.abs().max(hi.abs()) / scale);
                }
            }
        }
    }
    assert!(worst <= 1e-6, "worst relative deviation {worst:e}");
}

#[test]
fn robin_boundary_condition_holds() {
    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for &theta in &[0.1, 0.5, 0.9] {
        for &d in &[0.5, 1.0, 2.0] {
            for &t in &[0.1, 1.0, 10.0] {
                for &w in &[0.0, 0.4, 1.5, 4.0] {
                    for &dx in &[0.0, 0.7] {
                        let z = pt(0.0, w);
                        let at = |y: f64| half_space_kernel(theta, t, &pt(dx, y), &z, d, 2);
                        // Depth enters analytically, so y = -h is a valid stencil point.
                        let dy = (robin_kernel_1d(theta, t, h, w, d)
                            - robin_kernel_1d(theta, t, -h, w, d))
                            / (2.0 * h)
                            * gauss_kernel(t, &[dx], d, 1);
                        let res = theta * at(0.0) - (1.0 - theta) * d * dy;
                        let scale = half_space_kernel(0.0, t, &pt(dx, w), &z, d, 2)
                            .max(at(0.0))
                            .max(1e-300);
                        worst = worst.max(res.abs() / scale);
                    }
                }
            }
        }
    }
    assert!(worst <= 1e-5, "worst scaled residual {worst:e}");
}

#[test]
fn robin_kernel_lies_between_dirichlet_and_neumann() {
    for &theta in &[0.01, 0.3, 0.5, 0.7, 0.99] {
        // Depths where the image term is resolvable next to the direct term.
        for &t in &[0.5, 1.0, 5.0] {
            for &y in &[0.1, 0.3, 1.0, 1.5] {
                for &w in &[0.1, 0.3, 1.0, 1.5] {
                    for &dx in &[0.0, 0.5, 1.5] {
                        let (x, z) = (pt(dx, y), pt(0.0, w));
                        let h0 = half_space_kernel(0.0, t, &x, &z, 1.0, 2);
                        let h1 = half_space_kernel(1.0, t, &x, &z, 1.0, 2);
                        let ht = half_space_kernel(theta, t, &x, &z, 1.0, 2);
                        assert!(h1 < ht && ht < h0, "{theta} {t} {y} {w}: {h1} {ht} {h0}");
                    }
                }
            }
        }
    }
    let (x, z) = (pt(0.0, 0.3), pt(0.0, 0.3));
    let h = [0.0, 0.5, 1.0].map(|th| half_space_kernel(th, 1.0, &x, &z, 1.0, 2));
    assert!(h[2] < h[1] && h[1] < h[0]);
}

#[test]
fn kernels_solve_the_heat_equation() {
    let e = 1e-3;
    for &theta in &[0.0, 0.3, 0.8, 1.0] {
        for &d in &[0.5, 1.0, 2.0] {
            let z = pt(0.2, 0.8);
            let k = |t: f64, x: f64, y: f64| half_space_kernel(theta, t, &pt(x, y), &z, d, 2);
            let scale = half_space_kernel(0.0, 0.5, &z, &z, d, 2);
            for &t in &[0.5, 1.0, 3.0] {
                for &(x, y) in &[(0.0, 0.5), (1.0, 1.0), (-0.5, 2.0), (0.3, 0.05)] {
                    let kt = (k(t + e, x, y) - k(t - e, x, y)) / (2.0 * e);
                    let lap = (k(t, x + e, y) + k(t, x - e, y) + k(t, x, y + e) + k(t, x, y - e)
                        - 4.0 * k(t, x, y))
                        / (e * e);
                    let res = kt - d * lap;
                    assert!(res.abs() <= 1e-4 * scale, "theta {theta}: residual {res:e}");
                }
            }
        }
    }
}

/// Reflected walk with absorption on boundary local time, sampled exactly in
/// one step: the minimum of the Brownian bridge fixes the local time.
#[allow(clippy::too_many_arguments)]
fn monte_carlo_mass(a: f64, d: f64, t: f64, w: f64, lo: f64, hi: f64, n: usize, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let var = 2.0 * d * t;
    let mut hits = 0usize;
    for _ in 0..n {
        let g: f64 = StandardNormal.sample(&mut rng);
        let end = w + var.sqrt() * g;
        let u: f64 = rng.random::<f64>();
        let min = 0.5 * (w + end - ((w - end).powi(2) - 2.0 * var * (1.0 - u).ln()).sqrt());
        let local = (-min).max(0.0);
        let y = end + local;
        let e: f64 = Exp1.sample(&mut rng);
        if a * local <= e && (lo..hi).contains(&y) {
            hits += 1;
        }
    }
    hits as f64 / n as f64
}

#[test]
fn robin_kernel_matches_monte_carlo() {
    let (d, t, w) = (1.0, 1.0, 0.5);
    let n = 1_000_000;
    for (i, &theta) in [0.25, 0.5, 0.75].iter().enumerate() {
        let a = robin_coefficient(theta, d);
        for (j, &(lo, hi)) in [(0.0, 0.5), (0.5, 1.5), (1.5, 4.0)].iter().enumerate() {
            let mc = monte_carlo_mass(a, d, t, w, lo, hi, n, 17 + 10 * i as u64 + j as u64);
            let exact = robin_cell_mass(theta, t, w, lo, hi, d);
            assert!((mc - exact).abs() < 1e-2, "theta {theta} [{lo},{hi}]: {mc} vs {exact}");
        }
    }
}

fn lambda_setup() -> (ModelParams, fieldroad::Regime, QuadratureConfig) {
    let p = ModelParams::new(1.0, 4.0, 0.2, 1.0).unwrap();
    let r = classify_regime(&p).unwrap();
    (p, r, QuadratureConfig { tol: 1e-9, ..Default::default() })
}

#[test]
fn lambda_is_even_and_decays() {
    let (p, r, q) = lambda_setup();
    for &(x, y) in &[(0.5, 0.0), (3.0, 1.0), (10.0, 2.0)] {
        let a = lambda_kernel(2.0, x, y, &p, &r, &q).unwrap();
        let b = lambda_kernel(2.0, -x, y, &p, &r, &q).unwrap();
        assert_eq!(a, b);
    }
    let early = lambda_kernel(100.0, 0.0, 0.0, &p, &r, &q).unwrap();
    let late = lambda_kernel(400.0, 0.0, 0.0, &p, &r, &q).unwrap();
    assert!(late < early && late > 0.0, "{late} vs {early}");
}

#[test]
fn lambda_marginal_matches_zero_frequency() {
    // int Lambda(t, x, y) dx = e^{-y^2/(4dt)} Phi(t, 0, y).
    let (p, r, q) = lambda_setup();
    let (t, y) = (3.0, 0.8);
    let width = 2.0 * (p.road_d * t).sqrt() * 8.0;
    let gl = GaussLegendre::new(48);
    let mut total = 0.0;
    let panels = 16;
    for k in 0..panels {
        let a = k as f64 * width / panels as f64;
        total += 2.0 * gl.integrate(a, a + width / panels as f64, |x| {
            lambda_kernel(t, x, y, &p, &r, &q).unwrap()
        });
    }
    let phi0 = PhiEvaluator::new(&p, &r, 0.0).eval(t, y).unwrap();
    let want = (-y * y / (4.0 * p.d * t)).exp() * phi0;
    assert!((total - want).abs() < 1e-6 * want, "{total} vs {want}");
}

#[test]
fn lambda_refinement_is_within_its_error_estimate() {
    let (p, r, _) = lambda_setup();
    for &(t, x, y) in &[(0.5, 0.3, 0.0), (5.0, 2.0, 1.0), (40.0, 10.0, 3.0)] {
        let coarse = QuadratureConfig { tol: 1e-6, ..Default::default() };
        let fine = QuadratureConfig { tol: 5e-7, ..Default::default() };
        let (a, err) = lambda_kernel_with_error(t, x, y, &p, &r, &coarse).unwrap();
        let (b, _) = lambda_kernel_with_error(t, x, y, &p, &r, &fine).unwrap();
        assert!((a - b).abs() <= err.max(1e-300), "t {t}: |{a} - {b}| > {err:e}");
    }
}

#[test]
fn lambda_handles_slow_road() {
    let p = ModelParams::new(1.0, 0.1, 1.0, 1.0).unwrap();
    let r = classify_regime(&p).unwrap();
    let q = QuadratureConfig::default();
    for &(t, x, y) in &[(1.0, 0.0, 0.0), (5.0, 1.0, 0.5), (50.0, 3.0, 2.0)] {
        let v = lambda_kernel(t, x, y, &p, &r, &q).unwrap();
        assert!(v.is_finite() && v > 0.0, "Lambda({t}, {x}, {y}) = {v}");
    }
}
