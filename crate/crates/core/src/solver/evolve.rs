use serde::{Deserialize, Serialize};

use super::background::Background;
use super::cfl::cfl_dt;
use super::rhs::logtime_rhs;
use super::rk4::rk4_step;
use super::state::{Ceiling, Violation, ZField};
use crate::energy::{energy_report, EnergyOptions, EnergyReport};
use crate::error::{Error, Result};

/// Time step: a fixed value or a CFL fraction evaluated once on the initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "mode", deny_unknown_fields)]
pub enum StepControl {
    Fixed { dt: f64 },
    Auto { cfl: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegratorConfig {
    pub t_start: f64,
    pub t_end: f64,
    pub step: StepControl,
    /// Kreiss-Oliger coefficient; zero disables dissipation.
    pub dissipation: f64,
    /// Energies and norms are captured every `capture_stride` steps.
    pub capture_stride: usize,
    /// Full snapshots are kept every `snapshot_stride` captures; zero keeps none.
    pub snapshot_stride: usize,
    pub ceiling: Ceiling,
    /// `None` skips energy capture and records only norms.
    pub energy: Option<EnergyOptions>,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            t_start: 0.0,
            t_end: 1.0,
            step: StepControl::Fixed { dt: 0.01 },
            dissipation: 0.0,
            capture_stride: 1,
            snapshot_stride: 0,
            ceiling: Ceiling::default(),
            energy: Some(EnergyOptions::default()),
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let mut errs = Vec::new();
        if !(self.t_start >= 0.0) {
            errs.push(format!("T_start = {} must be nonnegative", self.t_start));
        }
        if !(self.t_end > self.t_start) {
            errs.push(format!("T_end = {} must exceed T_start = {}", self.t_end, self.t_start));
        }
        match self.step {
            StepControl::Fixed { dt } if !(dt > 0.0 && dt.is_finite()) => {
                errs.push(format!("dt = {dt} must be positive"))
            }
            StepControl::Auto { cfl } if !(cfl > 0.0 && cfl <= 1.0) => {
                errs.push(format!("cfl = {cfl} must lie in (0, 1]"))
            }
            _ => {}
        }
        if self.capture_stride == 0 {
            errs.push("capture stride must be at least 1".into());
        }
        if !(self.dissipation >= 0.0) {
            errs.push(format!("dissipation = {} must be nonnegative", self.dissipation));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(errs))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    Completed,
    Blowup { time: f64, step: usize, point: Option<usize>, values: Option<[f64; 4]>, reason: String },
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub field: ZField,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    /// Capture times, strictly increasing.
    pub times: Vec<f64>,
    pub energies: Vec<EnergyReport>,
    /// `max|Z|` over all components at each capture.
    pub max_norms: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: ZField,
    pub final_time: f64,
    pub dt: f64,
    pub steps: usize,
    pub termination: Termination,
}

fn blowup(time: f64, step: usize, err: &Error) -> Termination {
    let point = match err {
        Error::HyperbolicityLoss { point, .. } => *point,
        _ => None,
    };
    Termination::Blowup { time, step, point, values: None, reason: err.to_string() }
}

fn violation(time: f64, step: usize, v: Violation) -> Termination {
    Termination::Blowup { time, step, point: Some(v.point), values: Some(v.values), reason: v.reason }
}

/// Integrates `∂_TZ` from `T_start` to `T_end` with RK4.
///
/// Leaving the admissible region ends the run with a `Blowup` record instead of an error.
/// Errors are returned only for invalid configuration or a failure at the initial capture.
pub fn evolve(initial: &ZField, bg: &Background, cfg: &IntegratorConfig) -> Result<Trajectory> {
    cfg.validate()?;
    if initial.grid() != bg.geom.grid() {
        return Err(Error::Grid("initial data and background use different grids".into()));
    }
    let dt_nominal = match cfg.step {
        StepControl::Fixed { dt } => dt,
        StepControl::Auto { cfl } => cfl_dt(initial, bg, cfg.t_start, cfl)?,
    };
    let span = cfg.t_end - cfg.t_start;
    let steps = (span / dt_nominal).round().max(1.0) as usize;
    let dt = span / steps as f64;

    let mut traj = Trajectory {
        times: Vec::new(),
        energies: Vec::new(),
        max_norms: Vec::new(),
        snapshots: Vec::new(),
        final_state: initial.clone(),
        final_time: cfg.t_start,
        dt,
        steps: 0,
        termination: Termination::Completed,
    };
    let mut captures = 0usize;
    let mut capture = |traj: &mut Trajectory, z: &ZField, t: f64| -> Result<()> {
        if let Some(opts) = &cfg.energy {
            traj.energies.push(energy_report(z, bg, t, opts)?);
        }
        traj.times.push(t);
        traj.max_norms.push(z.max_abs());
        if cfg.snapshot_stride > 0 && captures.is_multiple_of(cfg.snapshot_stride) {
            traj.snapshots.push(Snapshot { time: t, field: z.clone() });
        }
        captures += 1;
        Ok(())
    };

    if let Some(v) = cfg.ceiling.check(initial, &bg.geom) {
        traj.termination = violation(cfg.t_start, 0, v);
        return Ok(traj);
    }
    capture(&mut traj, initial, cfg.t_start)?;

    let mut z = initial.clone();
    for n in 0..steps {
        let t = cfg.t_start + n as f64 * dt;
        let t_next = cfg.t_start + (n + 1) as f64 * dt;
        let next = match rk4_step(&z, t, dt, |f, s| logtime_rhs(f, s, bg, cfg.dissipation)) {
            Ok(next) => next,
            Err(e) => {
                traj.termination = blowup(t, n, &e);
                break;
            }
        };
        if let Some(v) = cfg.ceiling.check(&next, &bg.geom) {
            traj.termination = violation(t_next, n + 1, v);
            break;
        }
        z = next;
        traj.steps = n + 1;
        traj.final_time = t_next;
        if (n + 1) % cfg.capture_stride == 0 || n + 1 == steps {
            if let Err(e) = capture(&mut traj, &z, t_next) {
                traj.termination = blowup(t_next, n + 1, &e);
                break;
            }
        }
    }
    traj.final_state = z;
    Ok(traj)
}
