//! Run configuration in TOML.
//!
//! Unknown keys are rejected everywhere and `version` is mandatory. Validation
//! collects every problem before reporting, so one pass over a bad file lists
//! all of them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::initial::InitialData;
use crate::energy::{EnergyOptions, MonitorConfig, MAX_ORDER};
use crate::error::{Error, Result};
use crate::fluid::eos::CRITICAL_K;
use crate::fluid::{EosParams, Orientation, TransformParams};
use crate::fuchsian::probe::ProbeConfig;
use crate::geometry::{Geometry, Grid, MetricSpec, Scheme};
use crate::solver::{Background, Ceiling, IntegratorConfig, StepControl};

pub const CONFIG_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub background: BackgroundSection,
    #[serde(default)]
    pub eos: EosSection,
    #[serde(default)]
    pub transform: TransformSection,
    #[serde(default)]
    pub grid: GridSection,
    #[serde(default)]
    pub integrator: IntegratorSection,
    #[serde(default)]
    pub initial: InitialData,
    #[serde(default)]
    pub energy: EnergyOptions,
    #[serde(default)]
    pub monitor: MonitorConfig,
    #[serde(default)]
    pub probe: ProbeConfig,
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub converge: ConvergeSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackgroundSection {
    pub geometry: MetricSpec,
    pub orientation: Orientation,
    /// Reference time `t₀`; `T = −ln(t/t₀)`.
    pub t0: f64,
}

impl Default for BackgroundSection {
    fn default() -> Self {
        Self { geometry: MetricSpec::Flat, orientation: Orientation::Future, t0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EosSection {
    pub k: f64,
    pub rho0: f64,
}

impl Default for EosSection {
    fn default() -> Self {
        Self { k: 0.2, rho0: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransformSection {
    pub c1: f64,
    pub c2: f64,
}

impl Default for TransformSection {
    fn default() -> Self {
        let p = TransformParams::default();
        Self { c1: p.c1(), c2: p.c2() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    /// Points per axis; an axis with one point is degenerate.
    pub dims: [usize; 3],
    pub scheme: Scheme,
}

impl Default for GridSection {
    fn default() -> Self {
        Self { dims: [16, 16, 16], scheme: Scheme::Fd4 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorSection {
    pub t_start: f64,
    pub t_end: f64,
    pub step: StepControl,
    pub dissipation: f64,
    pub capture_stride: usize,
    pub snapshot_stride: usize,
    pub ceiling: Ceiling,
    /// Capture energies at every capture; otherwise only norms.
    pub capture_energy: bool,
}

impl Default for IntegratorSection {
    fn default() -> Self {
        let d = IntegratorConfig::default();
        Self {
            t_start: d.t_start,
            t_end: d.t_end,
            step: d.step,
            dissipation: d.dissipation,
            capture_stride: d.capture_stride,
            snapshot_stride: d.snapshot_stride,
            ceiling: d.ceiling,
            capture_energy: true,
        }
    }
}

/// Decay-rate sweep over `K` with homogeneous data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub k_values: Vec<f64>,
    /// Initial `|z|`, placed in the first component.
    pub amplitude: f64,
    pub t_end: f64,
    pub dt: f64,
    /// Relative tolerance on the fitted rate against `1 − 3K`.
    pub rate_tolerance: f64,
    /// Absolute tolerance on the rate at `K = 1/3`.
    pub critical_tolerance: f64,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            k_values: vec![0.05, 0.10, 0.15, 0.20, 0.25, 0.30],
            amplitude: 1e-3,
            t_end: 5.0,
            dt: 0.01,
            rate_tolerance: 0.01,
            critical_tolerance: 1e-3,
        }
    }
}

/// Step-halving and grid-refinement studies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConvergeSection {
    /// Time steps for the temporal study, each half of the previous.
    pub dts: Vec<f64>,
    pub temporal_t_end: f64,
    pub temporal_amplitude: f64,
    /// Points along the single active axis for the spatial study.
    pub resolutions: Vec<usize>,
    pub spatial_t_end: f64,
    pub spatial_dt: f64,
    pub spatial_amplitude: f64,
    pub expected_order: f64,
    pub tolerance: f64,
}

impl Default for ConvergeSection {
    fn default() -> Self {
        Self {
            dts: vec![0.4, 0.2, 0.1, 0.05],
            temporal_t_end: 4.0,
            temporal_amplitude: 1e-3,
            resolutions: vec![16, 32, 64, 128],
            spatial_t_end: 0.5,
            spatial_dt: 0.002,
            spatial_amplitude: 1e-3,
            expected_order: 4.0,
            tolerance: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
    /// Write a checkpoint of the final state and of every kept snapshot.
    pub checkpoints: bool,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), checkpoints: true }
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            version: CONFIG_VERSION,
            background: BackgroundSection::default(),
            eos: EosSection::default(),
            transform: TransformSection::default(),
            grid: GridSection::default(),
            integrator: IntegratorSection::default(),
            initial: InitialData::default(),
            energy: EnergyOptions::default(),
            monitor: MonitorConfig::default(),
            probe: ProbeConfig::default(),
            sweep: SweepSection::default(),
            converge: ConvergeSection::default(),
            output: OutputSection::default(),
        }
    }
}

fn check_k(errs: &mut Vec<String>, what: &str, k: f64) {
    if !(k > 0.0 && k <= CRITICAL_K + 1e-12) {
        errs.push(format!("{what} = {k} must lie in (0, 1/3]"));
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: RunConfig =
            toml::from_str(text).map_err(|e| Error::Config(vec![e.to_string().trim_end().to_string()]))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(mut msgs) => {
                msgs.insert(0, format!("in {}", path.display()));
                Error::Config(msgs)
            }
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(vec![e.to_string()]))
    }

    /// SHA-256 of the canonical JSON serialisation, leaving out the `[output]`
    /// section so that the same experiment hashes alike wherever it is written.
    pub fn hash(&self) -> String {
        let mut value = serde_json::to_value(self).expect("configuration serialises");
        if let Some(map) = value.as_object_mut() {
            map.remove("output");
        }
        let bytes = serde_json::to_vec(&value).expect("configuration serialises");
        hex::encode(Sha256::digest(&bytes))
    }

    /// All validation problems at once.
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if self.version != CONFIG_VERSION {
            errs.push(format!("version = {} is not supported (expected {CONFIG_VERSION})", self.version));
        }
        check_k(&mut errs, "eos.k", self.eos.k);
        if !(self.eos.rho0 > 0.0 && self.eos.rho0.is_finite()) {
            errs.push(format!("eos.rho0 = {} must be positive", self.eos.rho0));
        }
        if let Err(e) = TransformParams::new(self.transform.c1, self.transform.c2) {
            errs.push(format!("transform: {e}"));
        }
        if !(self.background.t0 > 0.0 && self.background.t0.is_finite()) {
            errs.push(format!("background.t0 = {} must be positive", self.background.t0));
        }
        match self.background.geometry {
            MetricSpec::ConformalBump { amplitude, .. } | MetricSpec::DiagonalBump { amplitude } => {
                if !(amplitude.abs() < 0.5) {
                    errs.push(format!("background.geometry amplitude = {amplitude} must satisfy |A| < 0.5"));
                }
            }
            MetricSpec::Flat => {}
        }
        if let Err(e) = Grid::torus(self.grid.dims) {
            errs.push(format!("grid: {e}"));
        }
        if let Err(Error::Config(msgs)) = self.integrator_config().validate() {
            errs.extend(msgs.into_iter().map(|m| format!("integrator: {m}")));
        }
        let ceiling = &self.integrator.ceiling;
        if !(ceiling.z_max > 0.0 && ceiling.psi_max > 0.0) {
            errs.push("integrator.ceiling: bounds must be positive".into());
        }
        errs.extend(self.initial.validate(ceiling, self.eos.k));
        if self.energy.max_order > MAX_ORDER {
            errs.push(format!("energy.max_order = {} exceeds {MAX_ORDER}", self.energy.max_order));
        }
        if let Some(d) = self.energy.delta1 {
            if !(d >= 0.0) {
                errs.push(format!("energy.delta1 = {d} must be nonnegative"));
            }
        }
        if !(self.monitor.tail_fraction > 0.0 && self.monitor.tail_fraction <= 1.0) {
            errs.push(format!("monitor.tail_fraction = {} must lie in (0, 1]", self.monitor.tail_fraction));
        }
        if self.monitor.windows == 0 {
            errs.push("monitor.windows must be positive".into());
        }
        errs.extend(self.probe.validate());
        for &k in &self.sweep.k_values {
            check_k(&mut errs, "sweep.k_values entry", k);
        }
        if !(self.sweep.amplitude > 0.0 && self.sweep.amplitude <= ceiling.z_max) {
            errs.push(format!("sweep.amplitude = {} must lie in (0, {}]", self.sweep.amplitude, ceiling.z_max));
        }
        if !(self.sweep.dt > 0.0 && self.sweep.t_end > 0.0) {
            errs.push("sweep: dt and t_end must be positive".into());
        }
        let conv = &self.converge;
        if conv.dts.len() < 3 || conv.resolutions.len() < 3 {
            errs.push("converge: need at least three time steps and three resolutions".into());
        }
        if conv.dts.iter().any(|&d| !(d > 0.0)) || conv.resolutions.iter().any(|&n| n < 8) {
            errs.push("converge: time steps must be positive and resolutions at least 8".into());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }

    /// Non-fatal remarks, such as the critical value `K = 1/3`.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        let critical = |k: f64| (k - CRITICAL_K).abs() <= 1e-12;
        if critical(self.eos.k) {
            w.push("eos.k = 1/3 is the critical (radiation) value; decay is not expected".into());
        }
        if self.sweep.k_values.iter().any(|&k| critical(k)) {
            w.push("sweep includes the critical value K = 1/3".into());
        }
        w
    }

    pub fn eos(&self) -> Result<EosParams> {
        EosParams::new(self.eos.k, self.eos.rho0)
    }

    pub fn transform(&self) -> Result<TransformParams> {
        TransformParams::new(self.transform.c1, self.transform.c2)
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::torus(self.grid.dims)
    }

    pub fn geometry(&self) -> Result<Geometry> {
        let grid = self.grid()?;
        Geometry::new(grid, self.background.geometry.build(&grid), self.grid.scheme)
    }

    pub fn background(&self) -> Result<Background> {
        Background::new(
            self.geometry()?,
            self.eos()?,
            self.transform()?,
            self.background.orientation,
            self.background.t0,
        )
    }

    pub fn integrator_config(&self) -> IntegratorConfig {
        let s = &self.integrator;
        IntegratorConfig {
            t_start: s.t_start,
            t_end: s.t_end,
            step: s.step,
            dissipation: s.dissipation,
            capture_stride: s.capture_stride,
            snapshot_stride: s.snapshot_stride,
            ceiling: s.ceiling,
            energy: s.capture_energy.then_some(self.energy),
        }
    }
}
