//! Independent oracle for spatially homogeneous tilted flow on the expanding background.
//!
//! In physical time `t̄` the background is `−dt̄² + t̄²δ`, so with `a = t̄` and
//! `T = ln t̄` the conservation laws of `T^{μν} = (ρ+p)uu + pg`, `p = Kρ`, give
//!
//! ```text
//! a⁴(1+K)ρΓU = const                                 (momentum along the flow)
//! d/dt̄[a³(−(1+K)ρΓ² + Kρ)] = a²ȧ((1+K)ρU² + 3Kρ)     (energy)
//! ```
//!
//! where `U = ΓV` is the spatial component of the conformal four-velocity and
//! `Γ² = 1 + U²`. Eliminating `ρ` leaves the separable equation
//! `dU/dT = −(1−3K)U(1+U²)/(1 + (1−K)U²)`, whose solution is implicit:
//! `ln|U| − (K/2)ln(1+U²) = ln|U₀| − (K/2)ln(1+U₀²) − (1−3K)T`.
//!
//! Nothing here calls into the crate, so it checks the assembled system from outside.

#![allow(dead_code)]

/// Velocity `U(T)` from the implicit solution, by Newton iteration in `ln|U|`.
pub fn velocity(u0: f64, k: f64, t: f64) -> f64 {
    if u0 == 0.0 {
        return 0.0;
    }
    let target = u0.abs().ln() - 0.5 * k * (1.0 + u0 * u0).ln() - (1.0 - 3.0 * k) * t;
    let mut l = target;
    for _ in 0..100 {
        let u2 = (2.0 * l).exp();
        let f = l - 0.5 * k * (1.0 + u2).ln() - target;
        let df = 1.0 - k * u2 / (1.0 + u2);
        let step = f / df;
        l -= step;
        if step.abs() < 1e-16 {
            break;
        }
    }
    u0.signum() * l.exp()
}

/// Modified density `ζ(T)` from momentum conservation, given `ζ₀` and `U₀`.
///
/// `ρ ∝ e^{−4T}/(ΓU)` and `ζ = ln(ρ/ρ₀)/(1+K) + 3T`, since the conformal
/// factor is `Ψ = ln t = −T`.
pub fn zeta(zeta0: f64, u0: f64, k: f64, t: f64) -> f64 {
    let u = velocity(u0, k, t);
    let gu = |x: f64| ((1.0 + x * x).sqrt() * x).abs();
    zeta0 + ((gu(u0) / gu(u)).ln() - 4.0 * t) / (1.0 + k) + 3.0 * t
}

/// Transformed variables `(ψ, z)` on a flat slice for `c₁ = 0`, `c₂ = −2`:
/// `ψ + c₂ = −2 exp((ζ − κU²/4)/2)` and `z = U(ψ + c₂)/2`.
pub fn to_z(zeta: f64, u: f64, k: f64) -> (f64, f64) {
    let kappa = 1.0 / k - 2.0;
    let s = -2.0 * ((zeta - kappa * u * u / 4.0) / 2.0).exp();
    (s + 2.0, u * s / 2.0)
}

/// Inverse of [`to_z`].
pub fn from_z(psi: f64, z: f64, k: f64) -> (f64, f64) {
    let kappa = 1.0 / k - 2.0;
    let s = psi - 2.0;
    let u = 2.0 * z / s;
    ((s * s / 4.0).ln() + kappa * u * u / 4.0, u)
}

/// `(ψ(T), z(T))` of homogeneous data `(ψ₀, z₀ ê₁)`.
pub fn homogeneous(psi0: f64, z0: f64, k: f64, t: f64) -> (f64, f64) {
    let (zeta0, u0) = from_z(psi0, z0, k);
    to_z(zeta(zeta0, u0, k, t), velocity(u0, k, t), k)
}
