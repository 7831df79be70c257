//! Gridded fields and declarative initial data.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Samples on the uniform grid `origin + (i hx, j hy)`, stored row by row
/// (`values[j * nx + i]`, `j` the depth index).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalarField2D {
    pub values: Vec<f64>,
    pub nx: usize,
    pub ny: usize,
    pub origin: (f64, f64),
    pub spacing: (f64, f64),
}

impl ScalarField2D {
    pub fn new(values: Vec<f64>, nx: usize, ny: usize, origin: (f64, f64), spacing: (f64, f64)) -> Result<Self> {
        let f = Self {
            values,
            nx,
            ny,
            origin,
            spacing,
        };
        f.validate()?;
        Ok(f)
    }

    pub fn zeros(nx: usize, ny: usize, origin: (f64, f64), spacing: (f64, f64)) -> Self {
        Self {
            values: vec![0.0; nx * ny],
            nx,
            ny,
            origin,
            spacing,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.nx * self.ny {
            return Err(Error::Shape(format!(
                "{} values for a {}x{} grid",
                self.values.len(),
                self.nx,
                self.ny
            )));
        }
        if !(self.spacing.0 > 0.0 && self.spacing.1 > 0.0) {
            return Err(invalid("spacing", format!("must be > 0, got {:?}", self.spacing)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "must be finite"));
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.values[j * self.nx..(j + 1) * self.nx]
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin.0 + i as f64 * self.spacing.0
    }

    pub fn y(&self, j: usize) -> f64 {
        self.origin.1 + j as f64 * self.spacing.1
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Samples on the uniform road grid `origin + i h`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoadProfile {
    pub values: Vec<f64>,
    pub origin: f64,
    pub spacing: f64,
}

impl RoadProfile {
    pub fn new(values: Vec<f64>, origin: f64, spacing: f64) -> Result<Self> {
        let p = Self {
            values,
            origin,
            spacing,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.spacing > 0.0) {
            return Err(invalid("spacing", format!("must be > 0, got {}", self.spacing)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "must be finite"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.origin + i as f64 * self.spacing
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Initial densities as piecewise-constant cell data: sample `(i, j)` of `v0`
/// is the value on the cell of width `spacing` centred at its grid point, and
/// likewise for `u0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub v0: ScalarField2D,
    pub u0: RoadProfile,
}

impl InitialData {
    pub fn new(v0: ScalarField2D, u0: RoadProfile) -> Result<Self> {
        let d = Self { v0, u0 };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        self.v0.validate()?;
        self.u0.validate()?;
        if self.v0.values.iter().chain(&self.u0.values).any(|&v| v < 0.0) {
            return Err(invalid("data", "initial densities must be nonnegative"));
        }
        if self.v0.ny > 0 && self.v0.origin.1 - 0.5 * self.v0.spacing.1 < -1e-12 * self.v0.spacing.1 {
            return Err(invalid("v0", "cells must lie in the half-plane y >= 0"));
        }
        Ok(())
    }

    /// `max(|v0|_inf, |u0|_inf)`.
    pub fn sup_norm(&self) -> f64 {
        self.v0.sup_norm().max(self.u0.sup_norm())
    }

    /// `int v0 + int u0`.
    pub fn total_mass(&self) -> f64 {
        let (hx, hy) = self.v0.spacing;
        self.v0.values.iter().sum::<f64>() * hx * hy + self.u0.values.iter().sum::<f64>() * self.u0.spacing
    }

    /// Whether `v0` is even in `x` and `u0` is even in `x`.
    pub fn is_even(&self) -> bool {
        let v = &self.v0;
        let centred = |o: f64, h: f64, n: usize| (2.0 * o + (n as f64 - 1.0) * h).abs() < 1e-12 * h;
        let field = v.nx == 0
            || (centred(v.origin.0, v.spacing.0, v.nx)
                && (0..v.ny).all(|j| (0..v.nx).all(|i| v.get(i, j) == v.get(v.nx - 1 - i, j))));
        let u = &self.u0;
        let road = u.is_empty()
            || (centred(u.origin, u.spacing, u.len()) && (0..u.len()).all(|i| u.values[i] == u.values[u.len() - 1 - i]));
        field && road
    }
}

/// `height` on the rectangle `[x0, x1] x [y0, y1]` of the field.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoxDatum {
    pub x: [f64; 2],
    pub y: [f64; 2],
    #[serde(default = "one")]
    pub height: f64,
}

/// `height` on the interval `[x0, x1]` of the road.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalDatum {
    pub x: [f64; 2],
    #[serde(default = "one")]
    pub height: f64,
}

fn one() -> f64 {
    1.0
}

/// Unions of boxes and intervals, the class of data used throughout.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSpec {
    #[serde(default)]
    pub boxes: Vec<BoxDatum>,
    #[serde(default)]
    pub intervals: Vec<IntervalDatum>,
}

/// Overlap length of `[a0, a1]` and `[b0, b1]`.
pub(crate) fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

impl DataSpec {
    pub fn validate(&self) -> Result<()> {
        for (k, b) in self.boxes.iter().enumerate() {
            let ok = b.x[0] < b.x[1] && b.y[0] < b.y[1] && b.y[0] >= 0.0 && b.height >= 0.0;
            if !ok || [b.x[0], b.x[1], b.y[0], b.y[1], b.height].iter().any(|v| !v.is_finite()) {
                return Err(invalid(
                    format!("boxes[{k}]"),
                    "need finite x0 < x1, 0 <= y0 < y1 and height >= 0",
                ));
            }
        }
        for (k, iv) in self.intervals.iter().enumerate() {
            let ok = iv.x[0] < iv.x[1] && iv.height >= 0.0;
            if !ok || [iv.x[0], iv.x[1], iv.height].iter().any(|v| !v.is_finite()) {
                return Err(invalid(
                    format!("intervals[{k}]"),
                    "need finite x0 < x1 and height >= 0",
                ));
            }
        }
        Ok(())
    }

    /// Cell data on the grid whose cell faces are the multiples of `h`; each
    /// cell carries the average of the datum over it.
    pub fn rasterize(&self, h: f64) -> Result<InitialData> {
        self.validate()?;
        if !(h > 0.0 && h.is_finite()) {
            return Err(invalid("h", format!("must be > 0, got {h}")));
        }
        let cells = |lo: f64, hi: f64| ((lo / h).floor() as i64, (hi / h).ceil() as i64);
        let (mut x0, mut x1, mut y1) = (i64::MAX, i64::MIN, 0i64);
        for b in &self.boxes {
            let (a, c) = cells(b.x[0], b.x[1]);
            x0 = x0.min(a);
            x1 = x1.max(c);
            y1 = y1.max(cells(b.y[0], b.y[1]).1);
        }
        let v0 = if self.boxes.is_empty() {
            ScalarField2D::zeros(0, 0, (0.5 * h, 0.5 * h), (h, h))
        } else {
            let (nx, ny) = ((x1 - x0) as usize, y1 as usize);
            let mut f = ScalarField2D::zeros(nx, ny, ((x0 as f64 + 0.5) * h, 0.5 * h), (h, h));
            for b in &self.boxes {
                for j in 0..ny {
                    let oy = overlap(j as f64 * h, (j + 1) as f64 * h, b.y[0], b.y[1]);
                    if oy == 0.0 {
                        continue;
                    }
                    for i in 0..nx {
                        let c = (x0 + i as i64) as f64 * h;
                        let ox = overlap(c, c + h, b.x[0], b.x[1]);
                        f.values[j * nx + i] += b.height * ox * oy / (h * h);
                    }
                }
            }
            f
        };
        let u0 = if self.intervals.is_empty() {
            RoadProfile {
                values: vec![],
                origin: 0.5 * h,
                spacing: h,
            }
        } else {
            let (mut a0, mut a1) = (i64::MAX, i64::MIN);
            for iv in &self.intervals {
                let (a, c) = cells(iv.x[0], iv.x[1]);
                a0 = a0.min(a);
                a1 = a1.max(c);
            }
            let n = (a1 - a0) as usize;
            let mut values = vec![0.0; n];
            for iv in &self.intervals {
                for (i, v) in values.iter_mut().enumerate() {
                    let c = (a0 + i as i64) as f64 * h;
                    *v += iv.height * overlap(c, c + h, iv.x[0], iv.x[1]) / h;
                }
            }
            RoadProfile {
                values,
                origin: (a0 as f64 + 0.5) * h,
                spacing: h,
            }
        };
        InitialData::new(v0, u0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rasterized_boxes_keep_their_mass() {
        let spec = DataSpec {
            boxes: vec![BoxDatum {
                x: [-10.0, 10.0],
                y: [10.0, 30.0],
                height: 1.0,
            }],
            intervals: vec![IntervalDatum {
                x: [-10.0, 10.0],
                height: 1.0,
            }],
        };
        let d = spec.rasterize(0.5).unwrap();
        assert!((d.total_mass() - 420.0).abs() < 1e-9);
        assert!(d.is_even());
        let d = spec.rasterize(0.3).unwrap();
        assert!((d.total_mass() - 420.0).abs() < 1e-9);
        assert!(d.v0.values.iter().all(|&v| (0.0..=1.0 + 1e-12).contains(&v)));
    }

    #[test]
    fn rejects_boxes_below_the_road() {
        let spec = DataSpec {
            boxes: vec![BoxDatum {
                x: [0.0, 1.0],
                y: [-1.0, 1.0],
                height: 1.0,
            }],
            intervals: vec![],
        };
        assert!(spec.rasterize(0.5).is_err());
    }
}
