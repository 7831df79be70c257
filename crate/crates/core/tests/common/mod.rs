//! Oracles shared by the integration tests. Each one is independent of the
//! library code path it checks.
#![allow(dead_code)]

use fieldroad::ModelParams;
use nalgebra::Matrix3;
use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Zero};

/// Roots of `s^3 + c2 s^2 + c1 s + c0` as eigenvalues of the companion matrix.
pub fn companion_roots(c2: f64, c1: f64, c0: f64) -> [Complex64; 3] {
    let m = Matrix3::new(0.0, 0.0, -c0, 1.0, 0.0, -c1, 0.0, 1.0, -c2);
    let ev = m.complex_eigenvalues();
    [ev[0], ev[1], ev[2]]
}

/// Largest distance between the two triples under the best matching.
pub fn triple_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS
        .iter()
        .map(|p| (0..3).map(|i| (a[i] - b[p[i]]).norm()).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

fn q(x: f64) -> BigRational {
    BigRational::from_f64(x).unwrap()
}

/// Exact determinant of a square matrix of rationals (fraction-free enough at size 5).
fn det(mut m: Vec<Vec<BigRational>>) -> BigRational {
    let n = m.len();
    let mut acc = BigRational::from_integer(BigInt::from(1));
    for col in 0..n {
        let Some(piv) = (col..n).find(|&r| !m[r][col].is_zero()) else {
            return BigRational::zero();
        };
        if piv != col {
            m.swap(piv, col);
            acc = -acc;
        }
        let p = m[col][col].clone();
        acc *= p.clone();
        let (top, rest) = m.split_at_mut(col + 1);
        let pivot_row = &top[col];
        for row in rest.iter_mut() {
            let f = row[col].clone() / p.clone();
            for (x, a) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= a.clone() * f.clone();
            }
        }
    }
    acc
}

/// Discriminant of `P_delta` as `-Res(P, P')` from the exact Sylvester determinant,
/// with the coefficients taken as exact rationals of the double inputs.
pub fn resultant_discriminant(params: &ModelParams, delta: f64) -> f64 {
    let c2 = q(params.drift());
    let c1 = q(params.mu) + q(delta);
    let c0 = c2.clone() * q(delta);
    let one = q(1.0);
    let z = BigRational::zero();
    let three = q(3.0);
    let two = q(2.0);
    let d2 = two * c2.clone();
    let rows = vec![
        vec![one.clone(), c2.clone(), c1.clone(), c0.clone(), z.clone()],
        vec![z.clone(), one.clone(), c2.clone(), c1.clone(), c0.clone()],
        vec![three.clone(), d2.clone(), c1.clone(), z.clone(), z.clone()],
        vec![z.clone(), three.clone(), d2.clone(), c1.clone(), z.clone()],
        vec![z.clone(), z.clone(), three, d2, c1],
    ];
    let res = det(rows);
    num_traits::ToPrimitive::to_f64(&(-res)).unwrap()
}
