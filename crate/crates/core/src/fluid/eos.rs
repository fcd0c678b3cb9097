use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear equation of state `p = Kρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EosParams {
    k: f64,
    rho0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `0 < K < 1/3`.
    Stable,
    /// `K = 1/3` (radiation).
    Critical,
    /// `1/3 < K < 1`; outside the stabilised regime.
    Supercritical,
}

pub const CRITICAL_K: f64 = 1.0 / 3.0;

impl EosParams {
    pub fn new(k: f64, rho0: f64) -> Result<Self> {
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::Domain(format!("sound speed squared K = {k} must lie in (0, 1)")));
        }
        if !(rho0 > 0.0 && rho0.is_finite()) {
            return Err(Error::Domain(format!("reference density rho0 = {rho0} must be positive")));
        }
        Ok(Self { k, rho0 })
    }

    pub fn with_k(k: f64) -> Result<Self> {
        Self::new(k, 1.0)
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn rho0(&self) -> f64 {
        self.rho0
    }

    /// `κ = K⁻¹ − 2`.
    pub fn kappa(&self) -> f64 {
        1.0 / self.k - 2.0
    }

    /// Damping coefficient `K⁻¹ − 3` of the Fuchsian source.
    pub fn damping(&self) -> f64 {
        1.0 / self.k - 3.0
    }

    pub fn regime(&self) -> Regime {
        if (self.k - CRITICAL_K).abs() <= 1e-12 {
            Regime::Critical
        } else if self.k < CRITICAL_K {
            Regime::Stable
        } else {
            Regime::Supercritical
        }
    }

    /// `ζ = ln(ρ/ρ₀)/(1+K) − 3Ψ`.
    pub fn zeta_from_rho(&self, rho: f64, psi_conf: f64) -> Result<f64> {
        if !(rho > 0.0) {
            return Err(Error::Domain(format!("density {rho} must be positive")));
        }
        Ok((rho / self.rho0).ln() / (1.0 + self.k) - 3.0 * psi_conf)
    }

    /// `ρ = ρ₀ exp((1+K)(ζ + 3Ψ))`.
    pub fn rho_from_zeta(&self, zeta: f64, psi_conf: f64) -> f64 {
        self.rho0 * ((1.0 + self.k) * (zeta + 3.0 * psi_conf)).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_density_gives_zero() {
        let e = EosParams::new(0.2, 2.5).unwrap();
        assert_eq!(e.zeta_from_rho(2.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn direct_evaluation() {
        let e = EosParams::with_k(0.25).unwrap();
        let z = e.zeta_from_rho(1.25f64.exp(), 0.0).unwrap();
        assert!((z - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(EosParams::with_k(0.0).is_err());
        assert!(EosParams::with_k(1.0).is_err());
        assert!(EosParams::with_k(0.2).unwrap().zeta_from_rho(0.0, 0.0).is_err());
        assert_eq!(EosParams::with_k(1.0 / 3.0).unwrap().regime(), Regime::Critical);
        assert_eq!(EosParams::with_k(0.2).unwrap().regime(), Regime::Stable);
    }
}
