//! Experiment documents: the JSON schema and its validation.

use fieldroad::{DataSpec, InitialData, ModelParams, QuadratureConfig, SimConfig};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    KernelEval,
    PhiScan,
    Roots,
    SimulateFd,
    SimulateAnalytic,
    Compare,
    Decay,
    Flux,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::KernelEval => "kernel-eval",
            Command::PhiScan => "phi-scan",
            Command::Roots => "roots",
            Command::SimulateFd => "simulate-fd",
            Command::SimulateAnalytic => "simulate-analytic",
            Command::Compare => "compare",
            Command::Decay => "decay",
            Command::Flux => "flux",
        }
    }
}

/// Box, step and sampling of a finite-difference run; the physics and the
/// data come from the enclosing spec.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSettings {
    #[serde(rename = "M")]
    pub m: f64,
    pub h: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_safety: f64,
    pub record_every: f64,
}

fn default_cfl() -> f64 {
    0.9
}

/// `count` points from `start` to `stop`, evenly spaced in value or in logarithm.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
    #[serde(default)]
    pub log: bool,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        (0..self.count)
            .map(|i| {
                let f = i as f64 / (self.count - 1) as f64;
                if self.log {
                    (self.start.ln() + f * (self.stop.ln() - self.start.ln())).exp()
                } else {
                    self.start + f * (self.stop - self.start)
                }
            })
            .collect()
    }

    fn validate(&self, key: &str) -> Result<()> {
        let ok = self.count >= 1
            && self.start.is_finite()
            && self.stop.is_finite()
            && (!self.log || (self.start > 0.0 && self.stop > 0.0));
        if ok {
            Ok(())
        } else {
            Err(CliError::range(key, "need count >= 1, finite ends, and positive ends for a log sweep"))
        }
    }
}

/// Probe points: the tensor grid `xs x ys`, optionally with `random`
/// extra points drawn (from `seed`) in `[-x_range, x_range] x [0, y_range]`.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Probes {
    #[serde(default)]
    pub xs: Vec<f64>,
    #[serde(default = "zero_depth")]
    pub ys: Vec<f64>,
    #[serde(default)]
    pub random: usize,
    #[serde(default)]
    pub x_range: f64,
    #[serde(default)]
    pub y_range: f64,
}

fn zero_depth() -> Vec<f64> {
    vec![0.0]
}

/// Which kernel `kernel-eval` tabulates.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum KernelChoice {
    /// The migration kernel `Lambda(t, x, y)`.
    #[default]
    Lambda,
    /// `H_theta(t, (x, y), source)` with diffusivity `d`.
    HalfSpace { theta: f64, source: [f64; 2] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub command: Command,
    pub params: ModelParams,
    #[serde(default)]
    pub data_spec: DataSpec,
    /// Cell size used to rasterize `data_spec` for the semi-analytic solver.
    #[serde(default = "default_raster")]
    pub raster_h: f64,
    #[serde(default)]
    pub quad: QuadratureConfig,
    #[serde(default)]
    pub sim: Option<SimSettings>,
    #[serde(default)]
    pub times: Vec<f64>,
    #[serde(default)]
    pub probes: Probes,
    #[serde(default)]
    pub deltas: Option<Sweep>,
    #[serde(default)]
    pub kernel: KernelChoice,
    /// Time window `[t0, t1]` of the log-log fits; the last decade when absent.
    #[serde(default)]
    pub fit_window: Option<[f64; 2]>,
    #[serde(default)]
    pub output_path: Option<String>,
    #[serde(default)]
    pub seed: u64,
}

fn default_raster() -> f64 {
    0.5
}

/// Parses and validates a JSON experiment document.
pub fn parse_config(text: &str) -> Result<ExperimentSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let spec: ExperimentSpec = serde_path_to_error::deserialize(de).map_err(|e| CliError::Schema {
        path: e.path().to_string(),
        message: e.inner().to_string(),
    })?;
    spec.validate()?;
    Ok(spec)
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<()> {
        self.params.validate().map_err(|e| CliError::from_core("params", e))?;
        self.data_spec.validate().map_err(|e| CliError::from_core("data_spec", e))?;
        self.quad.validate().map_err(|e| CliError::from_core("quad", e))?;
        if !(self.raster_h > 0.0 && self.raster_h.is_finite()) {
            return Err(CliError::range("raster_h", format!("must be > 0, got {}", self.raster_h)));
        }
        if let Some((k, t)) = self.times.iter().enumerate().find(|(_, t)| !(**t > 0.0 && t.is_finite())) {
            return Err(CliError::range(format!("times[{k}]"), format!("must be > 0, got {t}")));
        }
        if let Some(d) = &self.deltas {
            d.validate("deltas")?;
        }
        if let Some([a, b]) = self.fit_window {
            if !(a > 0.0 && b > a) {
                return Err(CliError::range("fit_window", format!("need 0 < t0 < t1, got [{a}, {b}]")));
            }
        }
        if let Some((k, y)) = self.probes.ys.iter().enumerate().find(|(_, y)| !(**y >= 0.0)) {
            return Err(CliError::range(format!("probes.ys[{k}]"), format!("must be >= 0, got {y}")));
        }
        if let KernelChoice::HalfSpace { theta, source } = self.kernel {
            if !(0.0..=1.0).contains(&theta) {
                return Err(CliError::range("kernel.theta", format!("must be in [0, 1], got {theta}")));
            }
            if !(source[1] >= 0.0) {
                return Err(CliError::range("kernel.source", "depth must be >= 0"));
            }
        }
        let need = |ok: bool, field: &str| if ok { Ok(()) } else { Err(CliError::missing(self.command, field)) };
        let has_points = !self.probes.xs.is_empty() || self.probes.random > 0;
        match self.command {
            Command::KernelEval | Command::SimulateAnalytic => {
                need(!self.times.is_empty(), "times")?;
                need(has_points, "probes")?;
            }
            Command::PhiScan => need(!self.times.is_empty(), "times")?,
            Command::Roots => need(self.deltas.is_some(), "deltas")?,
            Command::Compare => {
                need(self.sim.is_some(), "sim")?;
                need(!self.times.is_empty(), "times")?;
                need(has_points, "probes")?;
            }
            Command::SimulateFd | Command::Decay | Command::Flux => need(self.sim.is_some(), "sim")?,
        }
        if let Some(c) = self.sim_config()? {
            c.validate().map_err(|e| CliError::from_core("sim", e))?;
            if let Some(&t) = self.times.iter().find(|&&t| t > c.t_end) {
                return Err(CliError::range("times", format!("{t} is past sim.t_end = {}", c.t_end)));
            }
        }
        Ok(())
    }

    /// The finite-difference configuration, with the data rasterized on the FD spacing.
    pub fn sim_config(&self) -> Result<Option<SimConfig>> {
        let Some(s) = &self.sim else { return Ok(None) };
        let data = self.data_spec.rasterize(s.h).map_err(|e| CliError::from_core("sim", e))?;
        Ok(Some(SimConfig {
            params: self.params,
            m: s.m,
            h: s.h,
            t_end: s.t_end,
            cfl_safety: s.cfl_safety,
            record_every: s.record_every,
            data,
        }))
    }

    /// Data rasterized for the semi-analytic solver.
    pub fn analytic_data(&self) -> Result<InitialData> {
        self.data_spec.rasterize(self.raster_h).map_err(|e| CliError::from_core("data_spec", e))
    }
}
