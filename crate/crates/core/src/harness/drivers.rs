//! Experiment drivers behind the CLI subcommands.
//!
//! Each driver takes a validated [`RunConfig`] and returns a serialisable
//! report with a pass flag. Nothing here writes files; see [`super::emit`].

use nalgebra::{Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::config::RunConfig;
use super::initial::InitialData;
use crate::energy::{coercivity_guard, corrected_monitor, decay_monitor, fit_log_rate, DecayMonitor, EnergyReport};
use crate::error::{Error, Result};
use crate::fluid::{
    assemble_transformed_matrices, transform_forward, transform_inverse, BackgroundPoint, ChristoffelBlocks, EosParams,
    PointContext,
};
use crate::fuchsian::probe::{probe_extended, probe_structure, ProbeReport, Verdict};
use crate::fuchsian::FuchsianConstants;
use crate::geometry::{Geometry, Grid, MetricField};
use crate::solver::{evolve, Background, IntegratorConfig, StepControl, Termination, Trajectory, ZField};

pub struct RunOutcome {
    pub trajectory: Trajectory,
    pub monitor: Option<DecayMonitor>,
    pub corrected: Option<DecayMonitor>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub termination: Termination,
    pub dt: f64,
    pub steps: usize,
    pub final_time: f64,
    pub captures: usize,
    pub final_max_abs: f64,
    pub monitor: Option<DecayMonitor>,
    pub corrected: Option<DecayMonitor>,
    pub pass: bool,
}

impl RunOutcome {
    /// A run passes when it reaches `T_end` without leaving the admissible region.
    pub fn passed(&self) -> bool {
        self.trajectory.termination.is_completed()
    }

    pub fn summary(&self) -> RunSummary {
        let t = &self.trajectory;
        RunSummary {
            termination: t.termination.clone(),
            dt: t.dt,
            steps: t.steps,
            final_time: t.final_time,
            captures: t.times.len(),
            final_max_abs: t.final_state.max_abs(),
            monitor: self.monitor.clone(),
            corrected: self.corrected.clone(),
            pass: self.passed(),
        }
    }
}

pub fn initial_field(cfg: &RunConfig, bg: &Background) -> Result<ZField> {
    cfg.initial.build(&bg.geom, &bg.eos, bg.constants().sigma)
}

/// Evolves the configured initial data and evaluates the decay monitors.
pub fn run(cfg: &RunConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let bg = cfg.background()?;
    let icfg = cfg.integrator_config();
    if let (Some(opts), true) = (icfg.energy, cfg.integrator.capture_energy) {
        if let Some(d) = opts.delta1 {
            coercivity_guard(&bg.geom, d).map_err(|e| Error::Config(vec![format!("energy.delta1: {e}")]))?;
        }
    }
    let z0 = initial_field(cfg, &bg)?;
    let trajectory = evolve(&z0, &bg, &icfg)?;
    let (monitor, corrected) = monitors(&trajectory.energies, &bg.eos, cfg)?;
    Ok(RunOutcome { trajectory, monitor, corrected })
}

fn monitors(
    reports: &[EnergyReport],
    eos: &EosParams,
    cfg: &RunConfig,
) -> Result<(Option<DecayMonitor>, Option<DecayMonitor>)> {
    if reports.len() < 2 {
        return Ok((None, None));
    }
    let order = cfg.energy.max_order;
    let monitor = if order >= 1 { Some(decay_monitor(reports, eos, &cfg.monitor)?) } else { None };
    let corrected = if order >= 3 && reports.iter().all(|r| r.generic.is_some()) {
        Some(corrected_monitor(reports, eos, &cfg.monitor)?)
    } else {
        None
    };
    Ok((monitor, corrected))
}

pub fn probe(cfg: &RunConfig) -> Result<ProbeReport> {
    probe_structure(&cfg.probe, &cfg.eos()?, &cfg.transform()?)
}

pub fn probe_ext(cfg: &RunConfig) -> Result<ProbeReport> {
    probe_extended(&cfg.probe, &cfg.eos()?, &cfg.transform()?)
}

/// A probe passes when every exact-exponent block passes.
pub fn probe_passed(report: &ProbeReport) -> bool {
    report
        .blocks
        .iter()
        .all(|b| b.expectation != crate::fuchsian::probe::Expectation::Band || b.verdict == Verdict::Pass)
}

#[derive(Debug, Clone, Serialize)]
pub struct TransformCheck {
    pub samples: usize,
    /// Largest `|Z − Z(U(Z))|` over all components.
    pub round_trip_max: f64,
    /// Largest relative discrepancy between `QᵀB^μQ` and the closed forms.
    pub conjugation_max: f64,
    /// Largest deviation of `Cᵏ` from `(0, δᵏ_j; δᵏ_i, 0)`.
    pub c_structure_max: f64,
    pub round_trip_tolerance: f64,
    pub conjugation_tolerance: f64,
    pub pass: bool,
}

pub const ROUND_TRIP_TOLERANCE: f64 = 1e-12;
pub const CONJUGATION_TOLERANCE: f64 = 1e-12;

/// Round trip `Z → U → Z`, conjugation identity and `Cᵏ` structure on random states.
pub fn verify_transform(cfg: &RunConfig, samples: usize) -> Result<TransformCheck> {
    let eos = cfg.eos()?;
    let params = cfg.transform()?;
    let ceiling = cfg.integrator.ceiling;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.probe.seed);
    let mut round_trip_max = 0.0f64;
    let mut conjugation_max = 0.0f64;
    for _ in 0..samples {
        let s: Matrix3<f64> = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let g = Matrix3::identity() + (s + s.transpose()) * 0.1;
        let g_inv = g.try_inverse().ok_or_else(|| Error::Domain("sampled metric is singular".into()))?;
        let t = rng.random_range(0.1..2.0);
        let psi = rng.random_range(-ceiling.psi_max..ceiling.psi_max);
        let dir: Vector3<f64> = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let len = dir.dot(&(g * dir)).sqrt().max(f64::MIN_POSITIVE);
        let z = dir * (rng.random_range(0.0..ceiling.z_max) / len);

        let (zeta, u) = transform_forward(psi, &z, &g, &eos, &params)?;
        let (psi2, z2) = transform_inverse(zeta, &u, &g, &eos, &params)?;
        round_trip_max = round_trip_max.max((psi2 - psi).abs()).max((z2 - z).amax());

        let bg = BackgroundPoint::mflrw(t, g, g_inv);
        let blocks = ChristoffelBlocks::new(&bg);
        let ctx = PointContext {
            bg: &bg,
            blocks: &blocks,
            eos: &eos,
            params: &params,
            orientation: cfg.background.orientation,
        };
        let tm = assemble_transformed_matrices(psi, &z, &ctx)?;
        conjugation_max = conjugation_max.max(tm.closed_form_discrepancy());
    }
    let bg = BackgroundPoint::mflrw(1.0, Matrix3::identity(), Matrix3::identity());
    let blocks = ChristoffelBlocks::new(&bg);
    let ctx =
        PointContext { bg: &bg, blocks: &blocks, eos: &eos, params: &params, orientation: cfg.background.orientation };
    let consts = FuchsianConstants::new(&ctx)?;
    let c_structure_max = c_structure_deviation(&consts);
    let pass =
        round_trip_max <= ROUND_TRIP_TOLERANCE && conjugation_max <= CONJUGATION_TOLERANCE && c_structure_max == 0.0;
    Ok(TransformCheck {
        samples,
        round_trip_max,
        conjugation_max,
        c_structure_max,
        round_trip_tolerance: ROUND_TRIP_TOLERANCE,
        conjugation_tolerance: CONJUGATION_TOLERANCE,
        pass,
    })
}

/// `max_k |Cᵏ − (0, δᵏ_j; δᵏ_i, 0)|` entrywise.
pub fn c_structure_deviation(consts: &FuchsianConstants) -> f64 {
    let mut worst = 0.0f64;
    for k in 0..3 {
        let mut expected = nalgebra::Matrix4::zeros();
        expected[(0, k + 1)] = 1.0;
        expected[(k + 1, 0)] = 1.0;
        worst = worst.max((consts.c[k] - expected).amax());
    }
    worst
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub k: f64,
    pub fitted_rate: f64,
    pub expected_rate: f64,
    /// Relative error for `K < 1/3`, absolute at `K = 1/3`.
    pub error: f64,
    pub critical: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepReport {
    pub amplitude: f64,
    pub t_end: f64,
    pub dt: f64,
    pub rows: Vec<SweepRow>,
    pub pass: bool,
}

/// Homogeneous run on a single point; returns capture times and `|z|_g`.
pub fn homogeneous_history(
    cfg: &RunConfig,
    k: f64,
    amplitude: f64,
    t_end: f64,
    dt: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut c = cfg.clone();
    c.eos.k = k;
    c.grid.dims = [1, 1, 1];
    c.background.geometry = crate::geometry::MetricSpec::Flat;
    c.initial = InitialData::Homogeneous { psi: 0.0, z: [amplitude, 0.0, 0.0] };
    let bg = c.background()?;
    let icfg = IntegratorConfig {
        t_start: 0.0,
        t_end,
        step: StepControl::Fixed { dt },
        dissipation: 0.0,
        capture_stride: 1,
        snapshot_stride: 1,
        ceiling: c.integrator.ceiling,
        energy: None,
    };
    let z0 = initial_field(&c, &bg)?;
    let traj = evolve(&z0, &bg, &icfg)?;
    if !traj.termination.is_completed() {
        return Err(Error::Domain(format!("homogeneous run at K = {k} did not complete: {:?}", traj.termination)));
    }
    let g = bg.geom.g(0);
    let norms = traj.snapshots.iter().map(|s| s.field.z(0).dot(&(g * s.field.z(0))).sqrt()).collect();
    Ok((traj.snapshots.iter().map(|s| s.time).collect(), norms))
}

/// Fitted `|z|` decay rate against `1 − 3K` for each configured `K`.
pub fn sweep_k(cfg: &RunConfig) -> Result<SweepReport> {
    let s = &cfg.sweep;
    let rows = s
        .k_values
        .iter()
        .map(|&k| {
            let (times, norms) = homogeneous_history(cfg, k, s.amplitude, s.t_end, s.dt)?;
            let fit = fit_log_rate(&times, &norms, 1.0).ok_or_else(|| Error::Domain("rate fit failed".into()))?;
            let fitted_rate = -fit.slope;
            let expected_rate = 1.0 - 3.0 * k;
            let critical = (k - crate::fluid::eos::CRITICAL_K).abs() <= 1e-12;
            let (error, pass) = if critical {
                let e = fitted_rate.abs();
                (e, e <= s.critical_tolerance)
            } else {
                let e = (fitted_rate - expected_rate).abs() / expected_rate.abs();
                (e, e <= s.rate_tolerance)
            };
            Ok(SweepRow { k, fitted_rate, expected_rate, error, critical, pass })
        })
        .collect::<Result<Vec<_>>>()?;
    let pass = rows.iter().all(|r| r.pass);
    Ok(SweepReport { amplitude: s.amplitude, t_end: s.t_end, dt: s.dt, rows, pass })
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderStudy {
    pub label: String,
    /// Time steps or grid sizes, coarse to fine.
    pub parameters: Vec<f64>,
    /// `max|u_i − u_{i+1}|` between consecutive levels.
    pub differences: Vec<f64>,
    /// Observed orders from consecutive difference ratios.
    pub orders: Vec<f64>,
    pub expected: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OrderStudy {
    fn new(label: &str, parameters: Vec<f64>, differences: Vec<f64>, expected: f64, tolerance: f64) -> Self {
        let orders: Vec<f64> = (0..differences.len().saturating_sub(1))
            .map(|i| {
                let r = parameters[i] / parameters[i + 1];
                let r = if r < 1.0 { 1.0 / r } else { r };
                (differences[i] / differences[i + 1]).ln() / r.ln()
            })
            .collect();
        let pass = orders.last().is_some_and(|p| (p - expected).abs() <= tolerance);
        Self { label: label.into(), parameters, differences, orders, expected, tolerance, pass }
    }

    /// The order from the two finest pairs.
    pub fn observed(&self) -> Option<f64> {
        self.orders.last().copied()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeReport {
    pub temporal: OrderStudy,
    pub spatial: OrderStudy,
    pub pass: bool,
}

/// Step halving of RK4 on a homogeneous state.
pub fn temporal_order(cfg: &RunConfig) -> Result<OrderStudy> {
    let c = &cfg.converge;
    let finals = c
        .dts
        .iter()
        .map(|&dt| {
            let mut run_cfg = cfg.clone();
            run_cfg.grid.dims = [1, 1, 1];
            run_cfg.background.geometry = crate::geometry::MetricSpec::Flat;
            run_cfg.initial = InitialData::Homogeneous { psi: 0.0, z: [c.temporal_amplitude, 0.0, 0.0] };
            let bg = run_cfg.background()?;
            final_state(&run_cfg, &bg, 0.0, c.temporal_t_end, dt)
        })
        .collect::<Result<Vec<_>>>()?;
    let diffs = finals.windows(2).map(|w| max_diff(w[0].data(), w[1].data())).collect();
    Ok(OrderStudy::new("rk4-step-halving", c.dts.clone(), diffs, c.expected_order, c.tolerance))
}

/// Grid refinement of a travelling linear eigenmode along one axis.
pub fn spatial_order(cfg: &RunConfig) -> Result<OrderStudy> {
    let c = &cfg.converge;
    let finals = c
        .resolutions
        .iter()
        .map(|&n| {
            let mut run_cfg = cfg.clone();
            run_cfg.grid.dims = [n, 1, 1];
            run_cfg.background.geometry = crate::geometry::MetricSpec::Flat;
            run_cfg.initial = InitialData::LinearEigenmode { mode: [1, 0, 0], amplitude: c.spatial_amplitude };
            let bg = run_cfg.background()?;
            final_state(&run_cfg, &bg, 0.0, c.spatial_t_end, c.spatial_dt)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut diffs = Vec::new();
    for w in finals.windows(2) {
        let (coarse, fine) = (&w[0], &w[1]);
        let ratio = fine.len() / coarse.len();
        if ratio * coarse.len() != fine.len() {
            return Err(Error::Config(vec!["converge.resolutions must be integer multiples of each other".into()]));
        }
        let d = (0..coarse.len()).map(|i| (coarse.point(i) - fine.point(i * ratio)).amax()).fold(0.0f64, f64::max);
        diffs.push(d);
    }
    let params = c.resolutions.iter().map(|&n| n as f64).collect();
    Ok(OrderStudy::new("fd4-grid-refinement", params, diffs, c.expected_order, c.tolerance))
}

pub fn converge(cfg: &RunConfig) -> Result<ConvergeReport> {
    let temporal = temporal_order(cfg)?;
    let spatial = spatial_order(cfg)?;
    let pass = temporal.pass && spatial.pass;
    Ok(ConvergeReport { temporal, spatial, pass })
}

fn final_state(cfg: &RunConfig, bg: &Background, t_start: f64, t_end: f64, dt: f64) -> Result<ZField> {
    let icfg = IntegratorConfig {
        t_start,
        t_end,
        step: StepControl::Fixed { dt },
        dissipation: 0.0,
        capture_stride: usize::MAX,
        snapshot_stride: 0,
        ceiling: cfg.integrator.ceiling,
        energy: None,
    };
    let z0 = initial_field(cfg, bg)?;
    let traj = evolve(&z0, bg, &icfg)?;
    if !traj.termination.is_completed() {
        return Err(Error::Domain(format!("run did not complete: {:?}", traj.termination)));
    }
    Ok(traj.final_state)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Background matching a checkpoint header, with geometry and orientation from `cfg`.
pub fn checkpoint_background(cfg: &RunConfig, header: &crate::solver::CheckpointHeader) -> Result<Background> {
    let grid = Grid::new(header.dims, header.spacing)?;
    let metric: MetricField = cfg.background.geometry.build(&grid);
    let geom = Geometry::new(grid, metric, header.scheme)?;
    Background::new(
        geom,
        EosParams::new(header.k, header.rho0)?,
        crate::fluid::TransformParams::new(header.c1, header.c2)?,
        cfg.background.orientation,
        header.t0,
    )
}

/// Energies of a checkpointed state.
pub fn energy_report_from_checkpoint(cfg: &RunConfig, path: &std::path::Path) -> Result<EnergyReport> {
    let (header, field) = crate::solver::load_checkpoint(path)?;
    let bg = checkpoint_background(cfg, &header)?;
    crate::energy::energy_report(&field, &bg, header.t, &cfg.energy)
}
