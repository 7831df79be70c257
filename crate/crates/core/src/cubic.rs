//! Roots of `P_delta(s) = s^3 + A sqrt(d) s^2 + (mu + delta) s + A sqrt(d) delta`
//! and the classification of `(mu, nu, d)` by where roots of `P_delta` merge.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::ModelParams;
use crate::special::ComplexPoint;

type C = ComplexPoint;

/// Relative distance below which two roots count as merged, scaled by `1 + |lambda0|`.
pub const MERGE_TOL: f64 = 1e-7;
/// Relative distance to a regime threshold treated as lying on it.
pub const THRESHOLD_REL_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RootKind {
    ThreeRealSimple,
    OneRealConjugatePair,
    DoubleRoot,
    TripleRoot,
}

/// The roots of `P_delta`.
///
/// With a conjugate pair, `alpha` is the real root, `Im beta > 0` and
/// `gamma = conj(beta)`. Three real roots are sorted ascending. For a double
/// root, `alpha` is the simple one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RootTriple {
    pub alpha: C,
    pub beta: C,
    pub gamma: C,
    pub kind: RootKind,
    pub delta: f64,
}

impl RootTriple {
    pub fn roots(&self) -> [C; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// Smallest pairwise distance and the indices of that pair.
    pub fn closest_pair(&self) -> (f64, usize, usize) {
        let r = self.roots();
        let mut best = (f64::INFINITY, 0, 1);
        for (i, j) in [(0, 1), (0, 2), (1, 2)] {
            let dist = (r[i] - r[j]).norm();
            if dist < best.0 {
                best = (dist, i, j);
            }
        }
        best
    }

    pub fn diameter(&self) -> f64 {
        let r = self.roots();
        (r[0] - r[1])
            .norm()
            .max((r[0] - r[2]).norm())
            .max((r[1] - r[2]).norm())
    }
}

/// `P_delta(s)`.
pub fn poly_eval(params: &ModelParams, delta: f64, s: C) -> C {
    let c = params.drift();
    ((s + c) * s + (params.mu + delta)) * s + c * delta
}

fn poly_deriv(params: &ModelParams, delta: f64, s: C) -> C {
    let c = params.drift();
    (3.0 * s + 2.0 * c) * s + (params.mu + delta)
}

/// Discriminant of `P_delta`, zero exactly when `P_delta` has a multiple root.
pub fn discriminant(params: &ModelParams, delta: f64) -> f64 {
    let k = params.k();
    let m = params.mu + delta;
    18.0 * k * m * delta - 4.0 * k * k * delta + k * m * m - 4.0 * m * m * m - 27.0 * k * delta * delta
}

/// Coefficients of the discriminant as a cubic in `delta`, constant term first.
fn discriminant_coeffs(params: &ModelParams) -> [f64; 4] {
    let k = params.k();
    let mu = params.mu;
    [
        mu * mu * (k - 4.0 * mu),
        20.0 * k * mu - 4.0 * k * k - 12.0 * mu * mu,
        -8.0 * k - 12.0 * mu,
        -4.0,
    ]
}

fn polish(params: &ModelParams, delta: f64, s: C) -> C {
    let mut s = s;
    for _ in 0..2 {
        let p = poly_eval(params, delta, s);
        let dp = poly_deriv(params, delta, s);
        if dp.norm() == 0.0 || p.norm() == 0.0 {
            break;
        }
        let next = s - p / dp;
        if poly_eval(params, delta, next).norm() < p.norm() {
            s = next;
        } else {
            break;
        }
    }
    s
}

fn polish_real(params: &ModelParams, delta: f64, s: f64) -> f64 {
    polish(params, delta, C::new(s, 0.0)).re
}

/// Roots of `s^2 + b s + c`, computed without cancellation.
fn quadratic(b: f64, c: f64) -> (C, C) {
    let disc = b * b - 4.0 * c;
    if disc >= 0.0 {
        let q = -0.5 * (b + b.signum() * disc.sqrt());
        if q == 0.0 {
            return (C::new(0.0, 0.0), C::new(0.0, 0.0));
        }
        let (r1, r2) = (q, c / q);
        (C::new(r1.min(r2), 0.0), C::new(r1.max(r2), 0.0))
    } else {
        let im = 0.5 * (-disc).sqrt();
        (C::new(-0.5 * b, im), C::new(-0.5 * b, -im))
    }
}

fn assemble(params: &ModelParams, delta: f64, real: Vec<f64>, pair: Option<C>) -> RootTriple {
    let scale = 1.0 + params.drift() / 3.0;
    let tol = MERGE_TOL * scale;
    let (alpha, beta, gamma) = match pair {
        Some(b) => (C::new(real[0], 0.0), b, b.conj()),
        None => {
            let mut r = real;
            r.sort_by(|a, b| a.partial_cmp(b).unwrap());
            // Put the simple root first when two of the three merge.
            if (r[1] - r[2]).abs() >= tol && (r[0] - r[1]).abs() < tol {
                (C::new(r[2], 0.0), C::new(r[0], 0.0), C::new(r[1], 0.0))
            } else {
                (C::new(r[0], 0.0), C::new(r[1], 0.0), C::new(r[2], 0.0))
            }
        }
    };
    let mut t = RootTriple {
        alpha,
        beta,
        gamma,
        kind: RootKind::ThreeRealSimple,
        delta,
    };
    let d_ab = (alpha - beta).norm();
    let d_ag = (alpha - gamma).norm();
    let d_bg = (beta - gamma).norm();
    let merged = [d_ab < tol, d_ag < tol, d_bg < tol];
    t.kind = match merged.iter().filter(|&&m| m).count() {
        0 if pair.is_some() => RootKind::OneRealConjugatePair,
        0 => RootKind::ThreeRealSimple,
        1 => RootKind::DoubleRoot,
        _ => RootKind::TripleRoot,
    };
    if t.kind == RootKind::DoubleRoot && !merged[2] {
        // Reorder so that beta, gamma is the merging pair.
        if merged[0] {
            t = RootTriple { alpha: gamma, beta: alpha, gamma: beta, ..t };
        } else {
            t = RootTriple { alpha: beta, beta: alpha, gamma, ..t };
        }
    }
    t
}

/// Roots of `P_delta` by the closed form (trigonometric branch for three
/// real roots), each refined by Newton steps. Any real `delta` is accepted;
/// negative values arise when `D < d`.
pub fn solve_p_delta(params: &ModelParams, delta: f64) -> RootTriple {
    let c = params.drift();
    let b1 = params.mu + delta;
    if delta == 0.0 {
        let (r1, r2) = quadratic(c, params.mu);
        return if r1.im != 0.0 {
            let b = if r1.im > 0.0 { r1 } else { r2 };
            assemble(params, delta, vec![0.0], Some(b))
        } else {
            assemble(params, delta, vec![0.0, r1.re, r2.re], None)
        };
    }
    let shift = -c / 3.0;
    let p = b1 - c * c / 3.0;
    let q = 2.0 * c * c * c / 27.0 - c * b1 / 3.0 + c * delta;
    let scale = c.max(b1.abs().sqrt()).max((c * delta).abs().cbrt());
    let eps = 8.0 * f64::EPSILON;
    if p.abs() <= eps * scale * scale && q.abs() <= eps * scale * scale * scale {
        let l0 = C::new(shift, 0.0);
        return RootTriple {
            alpha: l0,
            beta: l0,
            gamma: l0,
            kind: RootKind::TripleRoot,
            delta,
        };
    }
    let disc_dep = -(4.0 * p * p * p + 27.0 * q * q);
    if disc_dep > 0.0 {
        // p < 0 here.
        let m = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * m)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        let roots: Vec<f64> = (0..3)
            .map(|j| {
                let s = m * (phi - 2.0 * std::f64::consts::PI * j as f64 / 3.0).cos() + shift;
                polish_real(params, delta, s)
            })
            .collect();
        assemble(params, delta, roots, None)
    } else {
        let sq = (q * q / 4.0 + p * p * p / 27.0).max(0.0).sqrt();
        let u = (-q / 2.0 - q.signum() * sq).cbrt();
        let s_real = if u == 0.0 { 0.0 } else { u - p / (3.0 * u) };
        let r = polish_real(params, delta, s_real + shift);
        // The remaining quadratic factor, from deflation in the original variable.
        let qb = r + c;
        let qc = b1 + r * qb;
        let (q1, q2) = quadratic(qb, qc);
        if q1.im != 0.0 {
            let b = polish(params, delta, if q1.im > 0.0 { q1 } else { q2 });
            let b = if b.im < 0.0 { b.conj() } else { b };
            assemble(params, delta, vec![r], Some(b))
        } else {
            let r1 = polish_real(params, delta, q1.re);
            let r2 = polish_real(params, delta, q2.re);
            assemble(params, delta, vec![r, r1, r2], None)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RegimeKind {
    /// `mu > 8k/27`: all roots simple for every `delta >= 0`.
    SimpleOnly,
    /// `mu = 8k/27`: a triple root at `delta0 = k/27`.
    TripleAt,
    /// `k/4 <= mu < 8k/27`: a double root at `delta1` and at `delta2`.
    DoubleTwice,
    /// `mu < k/4`: a double root at `delta2`.
    DoubleOnce,
}

/// Where roots of `P_delta` merge for a given parameter point (`k = nu^2/d`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Regime {
    pub kind: RegimeKind,
    /// Nonnegative `delta` at which `P_delta` has a multiple root, ascending.
    pub singular_deltas: Vec<f64>,
    /// Half-width of the guard interval around each singular value; zero when there is none.
    pub guard_radius: f64,
    /// Smallest pairwise root distance observed outside the guard intervals.
    pub separation: f64,
}

impl Regime {
    /// The singular value whose guard interval contains `delta`, if any.
    pub fn guard_containing(&self, delta: f64) -> Option<f64> {
        self.singular_deltas
            .iter()
            .copied()
            .find(|&s| (delta - s).abs() < self.guard_radius)
    }
}

fn eval_poly(coeffs: &[f64; 4], x: f64) -> f64 {
    ((coeffs[3] * x + coeffs[2]) * x + coeffs[1]) * x + coeffs[0]
}

fn bisect(coeffs: &[f64; 4], mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = eval_poly(coeffs, lo);
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = eval_poly(coeffs, mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Nonnegative roots of the discriminant, by bisection on each monotone piece.
fn singular_values(params: &ModelParams) -> Vec<f64> {
    let co = discriminant_coeffs(params);
    let bound = 1.0 + co[..3].iter().map(|c| (c / co[3]).abs()).fold(0.0, f64::max);
    // Critical points of the discriminant split [0, bound] into monotone pieces.
    let (qa, qb, qc) = (3.0 * co[3], 2.0 * co[2], co[1]);
    let mut cuts = vec![0.0];
    let disc = qb * qb - 4.0 * qa * qc;
    if disc > 0.0 {
        let r = disc.sqrt();
        let q = -0.5 * (qb + qb.signum() * r);
        for x in [q / qa, qc / q] {
            if x > 0.0 && x < bound {
                cuts.push(x);
            }
        }
    }
    cuts.push(bound);
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let (fa, fb) = (eval_poly(&co, a), eval_poly(&co, b));
        if fa == 0.0 && a == 0.0 {
            out.push(0.0);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            out.push(bisect(&co, a, b));
        }
    }
    out.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * a.abs().max(1e-300));
    out
}

/// Classify `(mu, nu, d)` against the thresholds `8k/27` and `k/4`, with `k = nu^2/d`.
///
/// A `mu` within `THRESHOLD_REL_TOL` of `8k/27` is treated as exactly on it
/// (triple root). Within the same distance of `k/4` the answer depends on
/// rounding and an `AmbiguousRegime` error is returned.
pub fn classify_regime(params: &ModelParams) -> Result<Regime> {
    params.validate()?;
    let k = params.k();
    let mu = params.mu;
    let mu_triple = 8.0 * k / 27.0;
    let mu_double = k / 4.0;
    let (kind, singular_deltas, guard_radius) = if (mu - mu_triple).abs() <= THRESHOLD_REL_TOL * mu_triple {
        let d0 = k / 27.0;
        (RegimeKind::TripleAt, vec![d0], d0 / 2.0)
    } else if (mu - mu_double).abs() <= THRESHOLD_REL_TOL * mu_double {
        return Err(Error::AmbiguousRegime {
            threshold: mu_double,
            rel_tol: THRESHOLD_REL_TOL,
        });
    } else {
        let sing = singular_values(params);
        if mu > mu_triple {
            (RegimeKind::SimpleOnly, Vec::new(), 0.0)
        } else if mu > mu_double {
            if sing.len() != 2 {
                return Err(Error::Domain(format!(
                    "expected two singular deltas for mu = {mu}, found {sing:?}"
                )));
            }
            let eta = 0.5 * (sing[1] - sing[0]);
            (RegimeKind::DoubleTwice, sing, eta)
        } else {
            if sing.len() != 1 {
                return Err(Error::Domain(format!(
                    "expected one singular delta for mu = {mu}, found {sing:?}"
                )));
            }
            let eta = 0.5 * sing[0];
            (RegimeKind::DoubleOnce, sing, eta)
        }
    };
    let mut regime = Regime {
        kind,
        singular_deltas,
        guard_radius,
        separation: 0.0,
    };
    regime.separation = scan_separation(params, &regime);
    Ok(regime)
}

fn scan_separation(params: &ModelParams, regime: &Regime) -> f64 {
    let top = 10.0
        * regime
            .singular_deltas
            .iter()
            .copied()
            .fold(params.k().max(params.mu), f64::max);
    let mut best = f64::INFINITY;
    let n = 400;
    let lo = 1e-6 * top;
    let mut grid = vec![0.0];
    grid.extend((0..=n).map(|i| lo * (top / lo).powf(i as f64 / n as f64)));
    for s in &regime.singular_deltas {
        grid.push(s - regime.guard_radius);
        grid.push(s + regime.guard_radius);
    }
    for delta in grid {
        if delta < 0.0 {
            continue;
        }
        if regime
            .singular_deltas
            .iter()
            .any(|s| (delta - s).abs() < regime.guard_radius * (1.0 - 1e-12))
        {
            continue;
        }
        best = best.min(solve_p_delta(params, delta).closest_pair().0);
    }
    best
}

/// Partial-fraction coefficients `a = 1/((alpha-beta)(alpha-gamma))` and cyclic.
pub fn partial_fraction_coeffs(roots: &RootTriple, merge_threshold: f64) -> Result<(C, C, C)> {
    let (dist, _, _) = roots.closest_pair();
    if dist <= merge_threshold {
        return Err(Error::MergeTooClose {
            distance: dist,
            threshold: merge_threshold,
        });
    }
    Ok(raw_coeffs(roots))
}

pub(crate) fn raw_coeffs(roots: &RootTriple) -> (C, C, C) {
    let [x, y, z] = roots.roots();
    (
        ((x - y) * (x - z)).inv(),
        ((y - x) * (y - z)).inv(),
        ((z - x) * (z - y)).inv(),
    )
}
