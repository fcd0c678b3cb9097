//! CSV time series and JSON reports.
//!
//! Every output carries the configuration hash and the crate and config
//! versions. Formatting is deterministic, so identical inputs give identical bytes.

use std::io::Write;
use std::path::Path;

use serde::Serialize;

use super::config::{RunConfig, CONFIG_VERSION};
use super::drivers::SweepReport;
use crate::energy::DecayMonitor;
use crate::error::Result;
use crate::solver::Trajectory;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub config_version: u32,
    pub crate_version: String,
}

impl Provenance {
    pub fn of(cfg: &RunConfig) -> Self {
        Self { config_hash: cfg.hash(), config_version: CONFIG_VERSION, crate_version: crate::VERSION.to_string() }
    }
}

#[derive(Serialize)]
struct Envelope<'a, T> {
    provenance: &'a Provenance,
    report: &'a T,
}

pub fn write_json<T: Serialize>(w: impl Write, provenance: &Provenance, report: &T) -> Result<()> {
    let mut w = std::io::BufWriter::new(w);
    serde_json::to_writer_pretty(&mut w, &Envelope { provenance, report })?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn save_json<T: Serialize>(path: &Path, provenance: &Provenance, report: &T) -> Result<()> {
    write_json(std::fs::File::create(path)?, provenance, report)
}

/// Column names of the energy series for energies up to order `max_order`.
pub fn energy_columns(max_order: usize) -> Vec<String> {
    let mut cols = vec!["T".to_string()];
    for s in 0..=max_order {
        cols.extend([format!("E{s}"), format!("Ep{s}"), format!("Edot{s}")]);
    }
    cols.extend(
        [
            "E1_tilde",
            "E2_tilde",
            "milne_mismatch",
            "E1_gen",
            "pair_commutator",
            "pair_transport",
            "slack",
            "slack_gen",
            "max_abs",
        ]
        .map(String::from),
    );
    cols.extend(["config_hash", "version"].map(String::from));
    cols
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// One row per capture. Missing quantities are written as empty cells.
pub fn write_energy_csv(
    w: impl Write,
    traj: &Trajectory,
    max_order: usize,
    monitor: Option<&DecayMonitor>,
    corrected: Option<&DecayMonitor>,
    provenance: &Provenance,
) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(energy_columns(max_order))?;
    for (i, &t) in traj.times.iter().enumerate() {
        let mut row = vec![format!("{t:e}")];
        let rep = traj.energies.get(i);
        for s in 0..=max_order {
            let o = rep.and_then(|r| r.order(s));
            row.extend([opt(o.map(|o| o.e)), opt(o.map(|o| o.ep)), opt(o.map(|o| o.edot))]);
        }
        let milne = rep.and_then(|r| r.milne);
        let generic = rep.and_then(|r| r.generic);
        row.push(opt(milne.map(|m| m.e1)));
        row.push(opt(milne.and_then(|m| m.e2)));
        row.push(milne.map(|m| m.mismatch.to_string()).unwrap_or_default());
        row.push(opt(generic.map(|g| g.e1)));
        row.push(opt(generic.map(|g| g.pair.commutator)));
        row.push(opt(generic.map(|g| g.pair.transport)));
        row.push(opt(monitor.and_then(|m| m.samples.get(i)).map(|s| s.slack)));
        row.push(opt(corrected.and_then(|m| m.samples.get(i)).map(|s| s.slack)));
        row.push(format!("{:e}", traj.max_norms[i]));
        row.push(provenance.config_hash.clone());
        row.push(provenance.crate_version.clone());
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Sweep table: one row per `K`.
pub fn write_sweep_csv(w: impl Write, report: &SweepReport, provenance: &Provenance) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["K", "fitted_rate", "expected_rate", "error", "critical", "pass", "config_hash", "version"])?;
    for r in &report.rows {
        out.write_record([
            format!("{}", r.k),
            format!("{:e}", r.fitted_rate),
            format!("{:e}", r.expected_rate),
            format!("{:e}", r.error),
            r.critical.to_string(),
            r.pass.to_string(),
            provenance.config_hash.clone(),
            provenance.crate_version.clone(),
        ])?;
    }
    out.flush()?;
    Ok(())
}
