//! Command line interface.
//!
//! Exit codes: 0 when the subcommand succeeds and its verdict passes, 2 when
//! it runs but the verdict fails, 1 on any error.

use std::fs::File;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use super::config::RunConfig;
use super::drivers;
use super::emit::{save_json, write_energy_csv, write_sweep_csv, Provenance};
use crate::error::Result;
use crate::par;
use crate::solver::{save_checkpoint, CheckpointHeader, ZField};

pub const THREADS_ENV: &str = "FUCHSIAN_EULER_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "fuchsian-euler",
    version,
    about = "Relativistic Euler evolution in Fuchsian form on fixed expanding backgrounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// TOML configuration; built-in defaults when omitted.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,

    /// Output directory; overrides `[output] dir`.
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,

    /// Replaces the seed of random initial data and of the probes.
    #[arg(long, global = true)]
    pub seed_override: Option<u64>,

    /// Worker threads for the data-parallel kernels.
    #[arg(long, global = true, env = THREADS_ENV)]
    pub threads: Option<usize>,

    /// Capture energies every this many steps; overrides the config.
    #[arg(long, global = true)]
    pub capture_stride: Option<usize>,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evolve the configured initial data and write energies, summary and checkpoints.
    Run,
    /// Scaling probes of the Fuchsian blocks.
    Probe,
    /// Scaling probes of the extended system.
    ProbeExt,
    /// Round trip of the change of variables and the conjugation identity.
    VerifyTransform {
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
    },
    /// Temporal and spatial convergence orders.
    Converge,
    /// Homogeneous decay rate against `1 − 3K`.
    SweepK,
    /// Recompute energies from a checkpoint.
    EnergyReport {
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

/// Result of a completed subcommand.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            2
        }
    }
}

impl Cli {
    /// Loads the configuration and applies command line overrides.
    pub fn config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed_override {
            cfg.initial.with_seed(seed);
            cfg.probe.seed = seed;
        }
        if let Some(stride) = self.capture_stride {
            cfg.integrator.capture_stride = stride;
        }
        if let Some(dir) = &self.out_dir {
            cfg.output.dir = dir.clone();
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

pub fn execute(cli: &Cli) -> Result<Outcome> {
    if let Some(n) = cli.threads {
        par::init_threads(n.max(1));
    }
    let cfg = cli.config()?;
    let prov = Provenance::of(&cfg);
    let dir = cfg.output.dir.clone();
    std::fs::create_dir_all(&dir)?;
    let mut files = Vec::new();
    let mut warnings = cfg.warnings().join("; ");
    if !warnings.is_empty() {
        warnings = format!(" (warning: {warnings})");
    }

    let (pass, summary) = match &cli.command {
        Command::Run => {
            let out = drivers::run(&cfg)?;
            let traj = &out.trajectory;
            let csv_path = dir.join("energies.csv");
            write_energy_csv(
                File::create(&csv_path)?,
                traj,
                cfg.energy.max_order,
                out.monitor.as_ref(),
                out.corrected.as_ref(),
                &prov,
            )?;
            files.push(emit_json(&dir, "run.json", &prov, &out.summary())?);
            let mut extra = vec![csv_path];
            if cfg.output.checkpoints {
                let bg = cfg.background()?;
                let header = |t: f64| CheckpointHeader {
                    dims: bg.geom.grid().dims(),
                    spacing: bg.geom.grid().spacing(),
                    k: bg.eos.k(),
                    rho0: bg.eos.rho0(),
                    c1: bg.params.c1(),
                    c2: bg.params.c2(),
                    t,
                    t0: bg.t0,
                    scheme: bg.geom.scheme(),
                    config_hash: Some(prov.config_hash.clone()),
                };
                let write = |name: String, field: &ZField, t: f64| -> Result<PathBuf> {
                    let p = dir.join(name);
                    save_checkpoint(&p, &header(t), field)?;
                    Ok(p)
                };
                for (i, s) in traj.snapshots.iter().enumerate() {
                    extra.push(write(format!("snapshot_{i:04}.fez"), &s.field, s.time)?);
                }
                extra.push(write("final.fez".into(), &traj.final_state, traj.final_time)?);
            }
            files.extend(extra);
            let s = out.summary();
            let slack = s
                .monitor
                .as_ref()
                .map(|m| format!(", slack holds at {:.1}% of captures", 100.0 * m.fraction))
                .unwrap_or_default();
            (out.passed(), format!("run: {:?} after {} steps to T = {}{slack}", s.termination, s.steps, s.final_time))
        }
        Command::Probe | Command::ProbeExt => {
            let (report, name) = if matches!(cli.command, Command::Probe) {
                (drivers::probe(&cfg)?, "probe.json")
            } else {
                (drivers::probe_ext(&cfg)?, "probe_ext.json")
            };
            files.push(emit_json(&dir, name, &prov, &report)?);
            let lines: Vec<String> = report
                .blocks
                .iter()
                .map(|b| {
                    format!("{} slope {} (expected {}): {:?}", b.block, fmt_opt(b.slope), b.expected_slope, b.verdict)
                })
                .collect();
            (drivers::probe_passed(&report), lines.join("\n"))
        }
        Command::VerifyTransform { samples } => {
            let report = drivers::verify_transform(&cfg, *samples)?;
            files.push(emit_json(&dir, "verify_transform.json", &prov, &report)?);
            let s = format!(
                "round trip {:.3e}, conjugation {:.3e}, C structure {:.3e}",
                report.round_trip_max, report.conjugation_max, report.c_structure_max
            );
            (report.pass, s)
        }
        Command::Converge => {
            let report = drivers::converge(&cfg)?;
            files.push(emit_json(&dir, "converge.json", &prov, &report)?);
            let s = format!("temporal orders {:?}, spatial orders {:?}", report.temporal.orders, report.spatial.orders);
            (report.pass, s)
        }
        Command::SweepK => {
            let report = drivers::sweep_k(&cfg)?;
            files.push(emit_json(&dir, "sweep_k.json", &prov, &report)?);
            let csv_path = dir.join("sweep_k.csv");
            write_sweep_csv(File::create(&csv_path)?, &report, &prov)?;
            files.push(csv_path);
            let lines: Vec<String> = report
                .rows
                .iter()
                .map(|r| {
                    format!(
                        "K = {:.4}: rate {:.6} vs {:.6} (error {:.2e})",
                        r.k, r.fitted_rate, r.expected_rate, r.error
                    )
                })
                .collect();
            (report.pass, lines.join("\n"))
        }
        Command::EnergyReport { checkpoint } => {
            let report = drivers::energy_report_from_checkpoint(&cfg, checkpoint)?;
            files.push(emit_json(&dir, "energy_report.json", &prov, &report)?);
            let e0 = report.order(0).map(|o| o.e).unwrap_or(f64::NAN);
            (true, format!("energy report at T = {}: E0 = {e0:e}", report.t))
        }
    };
    Ok(Outcome { pass, summary: summary + &warnings, files })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "n/a".into())
}

fn emit_json<T: serde::Serialize>(dir: &Path, name: &str, prov: &Provenance, report: &T) -> Result<PathBuf> {
    let path = dir.join(name);
    save_json(&path, prov, report)?;
    Ok(path)
}
