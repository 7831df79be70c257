//! Complex complementary error function and its scaled ratio
//! `R(z) = e^{z^2} erfc(z)`, with the first two derivatives of `R`.
//!
//! Three evaluation regions cover the closed right half-plane:
//! the Maclaurin series of `erf` near the imaginary axis, the Laplace
//! continued fraction for moderate `|z|`, and the full asymptotic series
//! for `|z| >= ASYMPTOTIC_RADIUS`. The left half-plane is reached by
//! reflection.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A point of the complex plane.
pub type ComplexPoint = Complex64;

pub const FRAC_1_SQRT_PI: f64 = 0.564_189_583_547_756_3;
const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;

/// Radius beyond which the asymptotic series is used.
pub const ASYMPTOTIC_RADIUS: f64 = 7.0;
/// The Maclaurin series is used when `Re z` is below this and `|z|` is below `ASYMPTOTIC_RADIUS`.
pub const SERIES_MAX_RE: f64 = 1.5;
/// Term cap for the Maclaurin series.
pub const SERIES_MAX_TERMS: usize = 200;
const CF_MAX_TERMS: usize = 5000;

/// Upper bound of `|z| |R(z)|` on `Re z >= 0`, from a dense polar grid scan.
pub const RATIO_BOUND: f64 = 0.76;
/// Upper bound of `|z|^2 |R'(z)|` on `Re z >= 0`.
pub const RATIO_D1_BOUND: f64 = 1.05;
/// Upper bound of `|z|^3 |R''(z)|` on `Re z >= 0`.
pub const RATIO_D2_BOUND: f64 = 2.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Method {
    Series,
    ContinuedFraction,
    Asymptotic,
}

fn method_for(z: Complex64) -> Method {
    let r = z.norm();
    if r >= ASYMPTOTIC_RADIUS {
        Method::Asymptotic
    } else if z.re < SERIES_MAX_RE {
        Method::Series
    } else {
        Method::ContinuedFraction
    }
}

fn check_finite(z: Complex64) -> Result<()> {
    if z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("non-finite argument {z}")))
    }
}

/// `erf(z)` by its Maclaurin series, for `|z| < ASYMPTOTIC_RADIUS`.
fn erf_series(z: Complex64) -> Result<Complex64> {
    if z.norm() == 0.0 {
        return Ok(z);
    }
    let z2 = z * z;
    // power = (-1)^k z^{2k+1} / k!
    let mut power = z;
    let mut sum = z;
    for k in 1..SERIES_MAX_TERMS {
        power *= -z2 / k as f64;
        let term = power / (2 * k + 1) as f64;
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            return Ok(sum * FRAC_2_SQRT_PI);
        }
    }
    Err(Error::Domain(format!(
        "erf series did not converge in {SERIES_MAX_TERMS} terms at {z}"
    )))
}

/// `sqrt(pi) R(z)` by the Laplace continued fraction `1/(z + (1/2)/(z + 1/(z + ...)))`.
fn ratio_cf(z: Complex64) -> Result<Complex64> {
    const TINY: f64 = 1e-300;
    let tiny = Complex64::new(TINY, 0.0);
    let mut f = z;
    let mut c = z;
    let mut d = Complex64::new(0.0, 0.0);
    for j in 1..CF_MAX_TERMS {
        let a = j as f64 * 0.5;
        d = z + d * a;
        if d.norm() < TINY {
            d = tiny;
        }
        c = z + a / c;
        if c.norm() < TINY {
            c = tiny;
        }
        d = d.inv();
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).norm() < 1e-16 {
            return Ok(f.inv());
        }
    }
    Err(Error::Domain(format!("continued fraction did not converge at {z}")))
}

/// `(R, R', R'')` from the asymptotic series, for `|z| >= ASYMPTOTIC_RADIUS`.
fn ratio_asymptotic(z: Complex64) -> (Complex64, Complex64, Complex64) {
    let w = (2.0 * z * z).inv();
    // term_k = (-1)^k (2k-1)!! / (2 z^2)^k
    let mut term = Complex64::new(1.0, 0.0);
    let mut s0 = term;
    let mut s1 = term;
    let mut s2 = term * 2.0;
    let mut last = f64::INFINITY;
    for k in 1..200 {
        term *= -w * (2 * k - 1) as f64;
        let mag = term.norm();
        if mag > last {
            break;
        }
        last = mag;
        let kf = k as f64;
        s0 += term;
        s1 += term * (2.0 * kf + 1.0);
        s2 += term * ((2.0 * kf + 1.0) * (2.0 * kf + 2.0));
        if mag * (2.0 * kf + 2.0) * (2.0 * kf + 1.0) < 1e-17 * s0.norm() {
            break;
        }
    }
    let zi = z.inv();
    let r = s0 * zi * FRAC_1_SQRT_PI;
    let r1 = -s1 * zi * zi * FRAC_1_SQRT_PI;
    let r2 = s2 * zi * zi * zi * FRAC_1_SQRT_PI;
    (r, r1, r2)
}

/// `R(z)` for `Re z >= 0`, without argument checks.
fn ratio_right(z: Complex64) -> Result<Complex64> {
    match method_for(z) {
        Method::Series => Ok((z * z).exp() * (1.0 - erf_series(z)?)),
        Method::ContinuedFraction => Ok(ratio_cf(z)? * FRAC_1_SQRT_PI),
        Method::Asymptotic => Ok(ratio_asymptotic(z).0),
    }
}

fn derivs_right(z: Complex64) -> Result<(Complex64, Complex64, Complex64)> {
    match method_for(z) {
        Method::Asymptotic => Ok(ratio_asymptotic(z)),
        _ => {
            let r = ratio_right(z)?;
            let r1 = 2.0 * z * r - FRAC_2_SQRT_PI;
            let r2 = 2.0 * r + 2.0 * z * r1;
            Ok((r, r1, r2))
        }
    }
}

/// Complementary error function, continued holomorphically to the whole plane.
///
/// Returns NaN components for non-finite input. Underflows to zero when
/// `erfc(z)` is below the smallest double.
pub fn erfc(z: ComplexPoint) -> ComplexPoint {
    if check_finite(z).is_err() {
        return Complex64::new(f64::NAN, f64::NAN);
    }
    if z.re < 0.0 {
        return 2.0 - erfc(-z);
    }
    let value = match method_for(z) {
        Method::Series => erf_series(z).map(|e| 1.0 - e),
        _ => ratio_right(z).map(|r| (-z * z).exp() * r),
    };
    value.unwrap_or(Complex64::new(f64::NAN, f64::NAN))
}

/// Real error function.
pub fn erf_real(x: f64) -> f64 {
    if x.abs() < SERIES_MAX_RE {
        erf_series(Complex64::new(x, 0.0)).map_or(f64::NAN, |e| e.re)
    } else {
        x.signum() * (1.0 - erfc_real(x.abs()))
    }
}

/// Real complementary error function.
pub fn erfc_real(x: f64) -> f64 {
    erfc(Complex64::new(x, 0.0)).re
}

/// `R(z) = e^{z^2} erfc(z)` on the closed right half-plane.
pub fn erfc_ratio(z: ComplexPoint) -> Result<ComplexPoint> {
    check_finite(z)?;
    if z.re < 0.0 {
        return Err(Error::Domain(format!("erfc_ratio needs Re z >= 0, got {z}")));
    }
    ratio_right(z)
}

/// `(R, R', R'')` on the closed right half-plane.
///
/// For `|z| < ASYMPTOTIC_RADIUS` the derivatives follow from
/// `R' = 2zR - 2/sqrt(pi)` and `R'' = 2R + 2zR'`; beyond, the asymptotic
/// series is differentiated term by term, which avoids the cancellation in
/// `2zR - 2/sqrt(pi)`.
pub fn erfc_ratio_derivs(z: ComplexPoint) -> Result<(ComplexPoint, ComplexPoint, ComplexPoint)> {
    check_finite(z)?;
    if z.re < 0.0 {
        return Err(Error::Domain(format!(
            "erfc_ratio_derivs needs Re z >= 0, got {z}"
        )));
    }
    derivs_right(z)
}

/// `R(z) e^{-shift}` for any finite `z`.
///
/// Left of the imaginary axis `R(z) = 2e^{z^2} - R(-z)` grows like
/// `e^{Re z^2}`; folding the scale into the exponent keeps products such as
/// `R(z) e^{-dt xi^2}` finite.
pub fn erfc_ratio_scaled(z: ComplexPoint, shift: f64) -> Result<ComplexPoint> {
    check_finite(z)?;
    if z.re >= 0.0 {
        Ok(ratio_right(z)? * (-shift).exp())
    } else {
        Ok(2.0 * (z * z - shift).exp() - ratio_right(-z)? * (-shift).exp())
    }
}

/// `(R, R', R'') e^{-shift}` for any finite `z`.
pub fn erfc_ratio_derivs_scaled(
    z: ComplexPoint,
    shift: f64,
) -> Result<(ComplexPoint, ComplexPoint, ComplexPoint)> {
    check_finite(z)?;
    let s = (-shift).exp();
    if z.re >= 0.0 {
        let (r, r1, r2) = derivs_right(z)?;
        Ok((r * s, r1 * s, r2 * s))
    } else {
        // With g = 2e^{z^2}: g' = 2z g, g'' = (2 + 4z^2) g; and R(-z) contributes
        // -R(-z), +R'(-z), -R''(-z).
        let g = 2.0 * (z * z - shift).exp();
        let (q, q1, q2) = derivs_right(-z)?;
        Ok((
            g - q * s,
            2.0 * z * g + q1 * s,
            (2.0 + 4.0 * z * z) * g - q2 * s,
        ))
    }
}

/// Real `R(x)` for `x >= 0`.
pub fn erfc_ratio_real(x: f64) -> Result<f64> {
    erfc_ratio(Complex64::new(x, 0.0)).map(|r| r.re)
}
