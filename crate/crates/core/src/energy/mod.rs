//! Energy functionals of the Fuchsian system and the inequalities they obey.
//!
//! `E_s = ½Σ_{l≤s}∫⟨∇ˡZ, M⁰∇ˡZ⟩μ_g`, its parallel part `E^p_s` with `Π` inserted
//! on both sides, and the homogeneous `Ė_s = ∫⟨∇ˢZ, M⁰∇ˢZ⟩μ_g`. Derivative
//! slots are contracted with `g⁻¹`; the `z` rows of `M⁰` already carry `g`.

pub mod corrected;
pub mod matter;
pub mod monitor;
pub mod sobolev;

use nalgebra::Matrix4;
use serde::{Deserialize, Serialize};

pub use corrected::{
    coercivity_guard, corrected_energy_generic, corrected_energy_milne, milne_deviation, CancellationPair,
    GenericCorrected, MilneCorrected,
};
pub use matter::{matter_diagnostics, matter_point, MatterDiagnostics, MatterNorms, MatterPoint};
pub use monitor::{
    corrected_monitor, decay_monitor, fit_log_rate, time_derivative, DecayMonitor, MonitorConfig, SlackSample,
};
pub use sobolev::{order_integrals, sobolev_energy, OrderIntegrals, SobolevEnergy, MAX_ORDER};

use crate::error::{Error, Result};
use crate::fuchsian::{assemble_fuchsian, FuchsianMatrices};
use crate::geometry::commutator_defect;
use crate::par;
use crate::solver::{spatial_gradients, Background, ZField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnergyOptions {
    /// Highest order `s ≤ 3` captured.
    pub max_order: usize,
    /// `δ₁` of the generic first order correction; `None` skips it.
    pub delta1: Option<f64>,
    pub matter: bool,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self { max_order: 3, delta1: Some(0.05), matter: false }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyReport {
    pub t: f64,
    pub orders: Vec<SobolevEnergy>,
    pub integrals: OrderIntegrals,
    pub milne: Option<MilneCorrected>,
    pub generic: Option<GenericCorrected>,
    /// `∫g^{mn}∇_mψ[∇_n, ∇_a]zᵃ` by nested covariant derivatives and through `−Ric`.
    pub b1_direct: Option<f64>,
    pub b1_ricci: Option<f64>,
    pub matter: Option<MatterNorms>,
}

impl EnergyReport {
    pub fn order(&self, s: usize) -> Option<&SobolevEnergy> {
        self.orders.get(s)
    }
}

/// Fuchsian blocks at every point for the state at log time `t_log`.
pub fn fuchsian_field(field: &ZField, bg: &Background, t_log: f64) -> Result<Vec<FuchsianMatrices>> {
    let t = bg.time(t_log);
    par::try_map_indexed(field.len(), |i| {
        bg.with_context(i, t, |ctx| assemble_fuchsian(field.psi(i), &field.z(i), ctx, bg.constants()))
            .map_err(|e| Error::HyperbolicityLoss { point: Some(i), detail: e.to_string() })
    })
}

pub fn m0_field(fm: &[FuchsianMatrices]) -> Vec<Matrix4<f64>> {
    fm.iter().map(|f| f.m0).collect()
}

/// All configured energies of one state.
pub fn energy_report(field: &ZField, bg: &Background, t_log: f64, opts: &EnergyOptions) -> Result<EnergyReport> {
    let geom = &bg.geom;
    let fm = fuchsian_field(field, bg, t_log)?;
    let m0 = m0_field(&fm);
    let integrals = order_integrals(field, geom, &m0, opts.max_order)?;
    let orders = (0..=opts.max_order).map(|s| integrals.energy(s)).collect();
    let milne = (opts.max_order >= 1).then(|| corrected_energy_milne(&integrals, geom));
    let generic = match opts.delta1 {
        Some(d) if opts.max_order >= 1 => {
            let grads = spatial_gradients(field, geom);
            Some(corrected_energy_generic(field, geom, &integrals, &fm, &grads, bg.constants(), d)?)
        }
        _ => None,
    };
    let (b1_direct, b1_ricci) = if geom.is_flat() {
        (Some(0.0), Some(0.0))
    } else if opts.delta1.is_some() {
        let zs: Vec<_> = (0..field.len()).map(|i| field.z(i)).collect();
        let d = commutator_defect(geom, &field.component(0), &zs)?;
        (Some(d.direct), Some(d.via_ricci))
    } else {
        (None, None)
    };
    let matter =
        if opts.matter { Some(matter_diagnostics(field, geom, &bg.eos, &bg.params, t_log)?.norms) } else { None };
    Ok(EnergyReport { t: t_log, orders, integrals, milne, generic, b1_direct, b1_ricci, matter })
}
