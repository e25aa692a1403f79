//! Experiment description as a TOML document.
//!
//! Only `[params]` is required. Everything else has a default:
//!
//! ```toml
//! dealias = true
//!
//! [params]
//! alpha1 = 1.0
//! alpha2 = 1.0
//! alpha3 = 1.0
//! sigma = 2
//!
//! [grid]
//! half_length = 30.0
//! points = 1024
//!
//! [ic]                      # gaussian | sech2 | file
//! kind = "gaussian"
//! amplitude = 1.0
//! width = 1.0
//! center = 0.0
//!
//! [psi_t0]                  # zero | file
//! kind = "zero"
//!
//! [control]
//! # dt = 5e-4               # omitted: 0.25 / omega_cap
//! t_max = 2.0
//! snapshot_stride = 100
//! blowup_threshold = 1e6
//! stepper = "classical"     # classical | half-increment
//!
//! [perturbation]            # optional
//! eps = 1e-3
//! k_p = 2.0
//!
//! [outputs]
//! diagnostics = "diagnostics.csv"
//! snapshots = "snapshots.csv"
//! plots = "plots"
//! snapshot_times = []       # empty: five evenly spaced times over [0, t_max]
//! ```
//!
//! `file` initial data are plain text, one sample per line, `#` comments allowed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::PerturbationSpec;
use crate::error::{Error, Result};
use crate::grid::{GridSpec, Spectral};
use crate::integrator::{default_dt, omega_cap, Blowup, RunOptions, StepControl, Stepper, DEFAULT_BLOWUP_THRESHOLD};
use crate::model::{FieldPair, ModelParams};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_true")]
    pub dealias: bool,
    pub params: ModelParams,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub ic: InitialCondition,
    #[serde(default)]
    pub psi_t0: InitialVelocity,
    #[serde(default)]
    pub control: ControlConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<PerturbationSpec>,
    #[serde(default)]
    pub outputs: OutputConfig,
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub half_length: f64,
    pub points: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            half_length: 30.0,
            points: 1024,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IcKind {
    Gaussian,
    Sech2,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialCondition {
    pub kind: IcKind,
    #[serde(default = "one")]
    pub amplitude: f64,
    #[serde(default = "one")]
    pub width: f64,
    #[serde(default)]
    pub center: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn one() -> f64 {
    1.0
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition {
            kind: IcKind::Gaussian,
            amplitude: 1.0,
            width: 1.0,
            center: 0.0,
            path: None,
        }
    }
}

impl InitialCondition {
    pub fn sample(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        let profile = |f: fn(f64) -> f64| {
            grid.nodes()
                .iter()
                .map(|x| self.amplitude * f((x - self.center) / self.width))
                .collect::<Vec<_>>()
        };
        match self.kind {
            IcKind::Gaussian => Ok(profile(|s| (-s * s).exp())),
            IcKind::Sech2 => Ok(profile(|s| 1.0 / s.cosh().powi(2))),
            IcKind::File => read_samples(self.path.as_deref(), "ic.path", grid.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityKind {
    #[default]
    Zero,
    File,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialVelocity {
    pub kind: VelocityKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
}

fn read_samples(path: Option<&Path>, key: &str, n: usize) -> Result<Vec<f64>> {
    let path = path.ok_or_else(|| Error::config(key, "kind = \"file\" requires a path"))?;
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::with_capacity(n);
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let v: f64 = line.parse().map_err(|_| {
            Error::config(key, format!("{}:{}: not a number: {line:?}", path.display(), lineno + 1))
        })?;
        values.push(v);
    }
    if values.len() != n {
        return Err(Error::config(
            key,
            format!("{} holds {} samples, grid has {n}", path.display(), values.len()),
        ));
    }
    Ok(values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControlConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "default_t_max")]
    pub t_max: f64,
    #[serde(default = "default_stride")]
    pub snapshot_stride: usize,
    #[serde(default = "default_threshold")]
    pub blowup_threshold: f64,
    #[serde(default)]
    pub stepper: Stepper,
}

fn default_t_max() -> f64 {
    2.0
}
fn default_stride() -> usize {
    100
}
fn default_threshold() -> f64 {
    DEFAULT_BLOWUP_THRESHOLD
}

impl Default for ControlConfig {
    fn default() -> Self {
        ControlConfig {
            dt: None,
            t_max: default_t_max(),
            snapshot_stride: default_stride(),
            blowup_threshold: default_threshold(),
            stepper: Stepper::Classical,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_diagnostics")]
    pub diagnostics: PathBuf,
    #[serde(default = "default_snapshots")]
    pub snapshots: PathBuf,
    #[serde(default = "default_plots")]
    pub plots: PathBuf,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

fn default_diagnostics() -> PathBuf {
    "diagnostics.csv".into()
}
fn default_snapshots() -> PathBuf {
    "snapshots.csv".into()
}
fn default_plots() -> PathBuf {
    "plots".into()
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            diagnostics: default_diagnostics(),
            snapshots: default_snapshots(),
            plots: default_plots(),
            snapshot_times: Vec::new(),
        }
    }
}

/// Everything a simulation needs, built from a validated [`RunConfig`].
#[derive(Debug, Clone)]
pub struct PreparedRun {
    pub params: ModelParams,
    pub spectral: Spectral,
    pub ic: FieldPair,
    pub control: StepControl,
    pub options: RunOptions,
    pub derived: Derived,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Derived {
    pub dx: f64,
    pub dt: f64,
    pub omega_cap: f64,
    pub k_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub snapped_k_p: Option<f64>,
    /// sigma below 2 lies outside the usual regime of the model.
    pub exploratory_sigma: bool,
}

impl RunConfig {
    pub fn with_params(params: ModelParams) -> Self {
        RunConfig {
            dealias: true,
            params,
            grid: GridConfig::default(),
            ic: InitialCondition::default(),
            psi_t0: InitialVelocity::default(),
            control: ControlConfig::default(),
            perturbation: None,
            outputs: OutputConfig::default(),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<document>", e.message().to_string()))?;
        let config: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<document>".to_string() } else { path };
            Error::config(field, e.into_inner().message().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        if path.extension().is_some_and(|e| e == "json") || text.trim_start().starts_with('{') {
            let manifest: RunManifest = serde_json::from_str(&text)
                .map_err(|e| Error::config("<manifest>", e.to_string()))?;
            manifest.config.validate()?;
            return Ok(manifest.config);
        }
        RunConfig::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration is always representable as TOML")
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        GridSpec::new(self.grid.half_length, self.grid.points)?;
        let ic = &self.ic;
        if !ic.amplitude.is_finite() {
            return Err(Error::config("ic.amplitude", "must be finite"));
        }
        if !(ic.width.is_finite() && ic.width > 0.0) {
            return Err(Error::config("ic.width", "must be positive"));
        }
        if !ic.center.is_finite() {
            return Err(Error::config("ic.center", "must be finite"));
        }
        if ic.kind == IcKind::File && ic.path.is_none() {
            return Err(Error::config("ic.path", "kind = \"file\" requires a path"));
        }
        if self.psi_t0.kind == VelocityKind::File && self.psi_t0.path.is_none() {
            return Err(Error::config("psi_t0.path", "kind = \"file\" requires a path"));
        }
        self.control()?;
        if let Some(p) = &self.perturbation {
            p.validate()?;
        }
        let out = &self.outputs;
        if out.diagnostics == out.snapshots || out.diagnostics == out.plots || out.snapshots == out.plots {
            return Err(Error::config("outputs", "output paths must be distinct"));
        }
        for &t in &out.snapshot_times {
            if !(t.is_finite() && t >= 0.0 && t <= self.control.t_max) {
                return Err(Error::config(
                    "outputs.snapshot_times",
                    format!("{t} outside [0, {}]", self.control.t_max),
                ));
            }
        }
        Ok(())
    }

    pub fn grid_spec(&self) -> Result<GridSpec> {
        GridSpec::new(self.grid.half_length, self.grid.points)
    }

    pub fn resolved_dt(&self) -> Result<f64> {
        Ok(match self.control.dt {
            Some(dt) => dt,
            None => default_dt(&self.params, &self.grid_spec()?),
        })
    }

    pub fn control(&self) -> Result<StepControl> {
        StepControl::new(
            self.resolved_dt()?,
            self.control.t_max,
            self.control.snapshot_stride,
            self.control.blowup_threshold,
        )
    }

    /// Requested snapshot times, or five evenly spaced ones when none are given.
    pub fn snapshot_times(&self) -> Vec<f64> {
        if !self.outputs.snapshot_times.is_empty() {
            return self.outputs.snapshot_times.clone();
        }
        let t = self.control.t_max;
        if t == 0.0 {
            return vec![0.0];
        }
        (0..5).map(|i| if i == 4 { t } else { t * i as f64 / 4.0 }).collect()
    }

    pub fn prepare(&self) -> Result<PreparedRun> {
        self.validate()?;
        let grid = self.grid_spec()?;
        let spectral = Spectral::new(grid);
        let psi = self.ic.sample(&grid)?;
        let psi_t = match self.psi_t0.kind {
            VelocityKind::Zero => vec![0.0; grid.len()],
            VelocityKind::File => read_samples(self.psi_t0.path.as_deref(), "psi_t0.path", grid.len())?,
        };
        let control = self.control()?;
        let derived = Derived {
            dx: grid.dx(),
            dt: control.dt,
            omega_cap: omega_cap(&self.params, &grid),
            k_max: grid.k_max(),
            snapped_k_p: self.perturbation.map(|p| grid.snap_wavenumber(p.k_p)),
            exploratory_sigma: self.params.is_exploratory(),
        };
        Ok(PreparedRun {
            params: self.params,
            spectral,
            ic: FieldPair::new(psi, psi_t)?,
            control,
            options: RunOptions {
                dealias: self.dealias,
                stepper: self.control.stepper,
                snapshot_times: self.snapshot_times(),
            },
            derived,
        })
    }
}

/// Named experiment setups.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Focusing coefficients, Gaussian hump.
    Fig1,
    /// Sign-flipped power term, Gaussian hump.
    Fig2,
    /// Focusing coefficients, sech^2 base, eps = 1e-3, k_p = 2.
    Fig5,
    /// As `Fig5` with the smaller perturbation wavenumber k_p = 1/4.
    Fig5Text,
    /// All coefficients negative.
    Blowup,
}

impl Preset {
    pub fn config(self) -> RunConfig {
        let params = |a1, a2, a3| ModelParams {
            alpha1: a1,
            alpha2: a2,
            alpha3: a3,
            sigma: 2,
        };
        let mut cfg = match self {
            Preset::Fig1 => RunConfig::with_params(params(1.0, 1.0, 1.0)),
            Preset::Fig2 => RunConfig::with_params(params(1.0, 1.0, -1.0)),
            Preset::Fig5 | Preset::Fig5Text => {
                let mut c = RunConfig::with_params(params(1.0, 1.0, 1.0));
                c.ic.kind = IcKind::Sech2;
                c.perturbation = Some(PerturbationSpec {
                    eps: 1e-3,
                    k_p: if self == Preset::Fig5 { 2.0 } else { 0.25 },
                });
                c
            }
            Preset::Blowup => RunConfig::with_params(params(-1.0, -1.0, -1.0)),
        };
        cfg.control.dt = Some(5e-4);
        cfg
    }
}

/// Everything needed to repeat a run, written next to its outputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub software: String,
    pub version: String,
    pub command: String,
    pub config: RunConfig,
    pub derived: Derived,
    pub blowup: Option<Blowup>,
}

impl RunManifest {
    pub fn new(command: &str, config: &RunConfig, derived: Derived, blowup: Option<Blowup>) -> Self {
        RunManifest {
            software: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            config: config.clone(),
            derived,
            blowup,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("manifest serializes")
    }
}
