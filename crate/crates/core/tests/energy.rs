use fuchsian_euler::energy::corrected::{MILNE_C1, MILNE_C2_GRAD, MILNE_C2_ZERO};
use fuchsian_euler::energy::*;
use fuchsian_euler::error::Error;
use fuchsian_euler::fluid::{EosParams, Orientation, TransformParams};
use fuchsian_euler::geometry::*;
use fuchsian_euler::harness::InitialData;
use fuchsian_euler::solver::*;
use nalgebra::{Matrix3, Vector3, Vector4};

fn background(grid: Grid, k: f64, metric: Option<MetricField>) -> Background {
    let geom = match metric {
        Some(m) => Geometry::new(grid, m, Scheme::Fd4).unwrap(),
        None => Geometry::flat(grid, Scheme::Fd4),
    };
    Background::new(geom, EosParams::with_k(k).unwrap(), TransformParams::default(), Orientation::Future, 1.0).unwrap()
}

fn random_state(bg: &Background, seed: u64, amplitude: f64) -> ZField {
    InitialData::RandomBand { seed: Some(seed), band: [1.0, 2.0], amplitude }
        .build(&bg.geom, &bg.eos, bg.constants().sigma)
        .unwrap()
}

fn report(field: &ZField, bg: &Background, opts: EnergyOptions) -> EnergyReport {
    energy_report(field, bg, 0.0, &opts).unwrap()
}

fn vol() -> f64 {
    std::f64::consts::TAU.powi(3)
}

#[test]
fn zero_state_has_zero_energies() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, Some(MetricField::conformal_bump(&grid, 0.1, [0, 1, 0])));
    let r = report(&ZField::zeros(grid), &bg, EnergyOptions::default());
    for o in &r.orders {
        assert_eq!((o.e, o.ep, o.edot), (0.0, 0.0, 0.0));
    }
    assert_eq!(r.milne.unwrap().e1, 0.0);
    assert_eq!(r.milne.unwrap().e2, Some(0.0));
    let g = r.generic.unwrap();
    assert_eq!((g.e1, g.correction, g.pair.commutator, g.pair.transport), (0.0, 0.0, 0.0, 0.0));
}

#[test]
fn constant_velocity_energy_matches_leading_block() {
    let k = 0.2;
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, k, None);
    for a in [1e-4, 1e-3, 1e-2] {
        let z = Vector3::new(0.6, -0.8, 0.0) * a;
        let field = ZField::from_fn(grid, |_| Vector4::new(0.0, z[0], z[1], z[2]));
        let e0 = report(&field, &bg, EnergyOptions { max_order: 0, delta1: None, matter: false }).orders[0].e;
        let leading = 0.5 / k * a * a * vol();
        assert!(((e0 - leading) / leading).abs() <= 2.0 * a, "a = {a}: {e0:e} vs {leading:e}");
    }
}

#[test]
fn psi_only_state_has_negligible_parallel_energy() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, None);
    let field = ZField::from_fn(grid, |i| {
        let x = grid.position(i);
        Vector4::new(1e-3 * (x[0] + x[2]).sin(), 0.0, 0.0, 0.0)
    });
    let r = report(&field, &bg, EnergyOptions { max_order: 2, delta1: None, matter: false });
    for o in &r.orders {
        assert!(o.e > 0.0);
        assert!(o.ep <= 1e-12 * o.e, "order {}: Ep {:e} vs E {:e}", o.order, o.ep, o.e);
    }
}

#[test]
fn energies_are_ordered_and_nonnegative_on_random_states() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.25, Some(MetricField::diagonal_bump(&grid, 0.05)));
    for seed in 0..5 {
        let r =
            report(&random_state(&bg, seed, 1e-2), &bg, EnergyOptions { max_order: 3, delta1: None, matter: false });
        for o in &r.orders {
            assert!(o.e >= 0.0 && o.ep >= 0.0 && o.ep <= o.e);
        }
        for w in r.orders.windows(2) {
            assert!(w[1].e >= w[0].e);
        }
    }
}

#[test]
fn milne_coefficients_are_fixed() {
    assert_eq!(MILNE_C1, -1.0 / 9.0);
    assert_eq!(MILNE_C2_GRAD, -4.0 / 9.0);
    assert_eq!(MILNE_C2_ZERO, -4.0 / 81.0);
}

#[test]
fn milne_correction_on_flat_metric_is_the_bare_definition() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, None);
    let field = random_state(&bg, 3, 1e-3);
    let r = report(&field, &bg, EnergyOptions { max_order: 2, delta1: None, matter: false });
    let m = r.milne.unwrap();
    let p = &r.integrals.parallel;
    assert_eq!(m.e1, r.orders[1].e - p[0] / 9.0);
    assert_eq!(m.e2.unwrap(), r.orders[2].e - 4.0 / 9.0 * p[1] - 4.0 / 81.0 * p[0]);
    assert!(m.mismatch, "a flat torus is not Einstein with constant -2/9");
}

#[test]
fn corrected_energies_stay_within_the_equivalence_band() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, Some(MetricField::conformal_bump(&grid, 0.1, [0, 1, 0])));
    for seed in 10..20 {
        let r = report(
            &random_state(&bg, seed, 1e-2),
            &bg,
            EnergyOptions { max_order: 2, delta1: Some(0.05), matter: false },
        );
        let (e1, e2) = (r.orders[1].e, r.orders[2].e);
        let m = r.milne.unwrap();
        let g = r.generic.unwrap();
        for (name, v, e) in [("E1~", m.e1, e1), ("E2~", m.e2.unwrap(), e2), ("E1~gen", g.e1, e1)] {
            assert!(0.5 * e <= v && v <= 2.0 * e, "seed {seed}: {name} = {v:e} outside [{:e}, {:e}]", 0.5 * e, 2.0 * e);
        }
    }
}

#[test]
fn generic_correction_vanishes_on_flat_metric() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, None);
    let field = random_state(&bg, 5, 1e-3);
    for d in [0.0, 0.05, 0.9] {
        let r = report(&field, &bg, EnergyOptions { max_order: 1, delta1: Some(d), matter: false });
        assert_eq!(r.generic.unwrap().e1, r.orders[1].e);
    }
}

#[test]
fn generic_correction_adds_the_ricci_weighted_parallel_integral() {
    let grid = Grid::cube(16).unwrap();
    let bg = background(grid, 0.2, Some(MetricField::conformal_bump(&grid, 0.1, [0, 1, 0])));
    let field = random_state(&bg, 8, 1e-3);
    let delta = 0.05;
    let r = report(&field, &bg, EnergyOptions { max_order: 1, delta1: Some(delta), matter: false });
    // Independent quadrature of ½∫ Ric_ab zᵃ zᵇ K⁻¹ at leading order in the state.
    let geom = &bg.geom;
    let direct = 0.5 / 0.2
        * geom.integrate_fn(|i| {
            let z = field.z(i);
            (z.transpose() * geom.ricci()[i] * z)[(0, 0)]
        });
    let g = r.generic.unwrap();
    assert!(((g.correction - direct) / direct).abs() < 1e-2, "{:e} vs {direct:e}", g.correction);
    assert!((g.e1 - (r.orders[1].e + delta * g.correction)).abs() <= 1e-15 * g.e1);
}

#[test]
fn coercivity_guard_rejects_large_delta() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, Some(MetricField::conformal_bump(&grid, 0.3, [1, 1, 0])));
    let ric = bg.geom.max_ricci_op();
    assert!(ric > 0.0);
    assert!(coercivity_guard(&bg.geom, 0.5 / ric).is_ok());
    assert!(matches!(coercivity_guard(&bg.geom, 1.5 / ric), Err(Error::Coercivity { .. })));
    assert!(coercivity_guard(&bg.geom, -0.1).is_err());
    let field = random_state(&bg, 1, 1e-3);
    let err = energy_report(&field, &bg, 0.0, &EnergyOptions { max_order: 1, delta1: Some(2.0 / ric), matter: false });
    assert!(matches!(err, Err(Error::Coercivity { .. })));
}

#[test]
fn cancellation_pair_tightens_as_the_amplitude_drops() {
    let grid = Grid::cube(16).unwrap();
    let bg = background(grid, 0.2, Some(MetricField::conformal_bump(&grid, 0.1, [0, 1, 0])));
    let rel = |amp: f64| {
        let field = InitialData::LinearEigenmode { mode: [1, 0, 0], amplitude: amp }
            .build(&bg.geom, &bg.eos, bg.constants().sigma)
            .unwrap();
        report(&field, &bg, EnergyOptions { max_order: 1, delta1: Some(0.05), matter: false })
            .generic
            .unwrap()
            .pair
            .relative_sum()
    };
    let (big, small) = (rel(1e-3), rel(1e-4));
    assert!(big <= 0.05, "relative sum {big:e}");
    assert!(small <= big, "{big:e} -> {small:e}");
}

#[test]
fn homogeneous_parallel_energy_decays_at_twice_the_velocity_rate() {
    let k = 0.2;
    let bg = background(Grid::torus([1, 1, 1]).unwrap(), k, None);
    let init = ZField::from_fn(*bg.geom.grid(), |_| Vector4::new(0.0, 1e-3, 0.0, 0.0));
    let cfg = IntegratorConfig {
        t_end: 10.0,
        step: StepControl::Fixed { dt: 0.01 },
        capture_stride: 10,
        energy: Some(EnergyOptions { max_order: 1, delta1: None, matter: false }),
        ..IntegratorConfig::default()
    };
    let traj = evolve(&init, &bg, &cfg).unwrap();
    let mon = decay_monitor(&traj.energies, &bg.eos, &MonitorConfig::default()).unwrap();
    let rate = mon.tail_rate.unwrap();
    assert!((rate - 2.0 * (1.0 - 3.0 * k)).abs() <= 0.01, "tail rate {rate}");
    assert!(mon.tail_decreasing);
}

#[test]
fn zero_trajectory_has_zero_slack() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, None);
    let cfg = IntegratorConfig { t_end: 1.0, step: StepControl::Fixed { dt: 0.1 }, ..IntegratorConfig::default() };
    let traj = evolve(&ZField::zeros(grid), &bg, &cfg).unwrap();
    let mon = decay_monitor(&traj.energies, &bg.eos, &MonitorConfig::default()).unwrap();
    assert!(mon.samples.iter().all(|s| s.slack == 0.0 && s.holds()));
    assert_eq!(mon.fraction, 1.0);
}

#[test]
fn matter_at_rest_matches_the_background_values() {
    for k in [0.1, 0.2, 1.0 / 3.0] {
        let eos = EosParams::new(k, 1.7).unwrap();
        let g = Matrix3::new(1.1, 0.1, 0.0, 0.1, 0.9, 0.0, 0.0, 0.0, 1.0);
        for t in [0.0, 1.5, 4.0] {
            let m = matter_point(0.0, &Vector3::zeros(), &g, 3.0, t, &eos);
            let e = 1.7 * (-3.0 * k * t).exp() * (1.0 + 2.0 * k);
            assert!((m.energy - e).abs() <= 1e-14 * e);
            assert_eq!(m.momentum, Vector3::zeros());
            let s = g * (k * (2.0 + k) * 1.7 * ((-1.0 - 3.0 * k) * t).exp());
            assert!((m.stress - s).amax() <= 1e-14);
        }
    }
}

#[test]
fn matter_diagnostics_of_zero_state_follow_the_background() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, None);
    let d = matter_diagnostics(&ZField::zeros(grid), &bg.geom, &bg.eos, &bg.params, 2.0).unwrap();
    let e = (-3.0f64 * 0.2 * 2.0).exp() * 1.4;
    assert!((d.norms.energy_l2 - e * vol().sqrt()).abs() <= 1e-12);
    assert_eq!(d.norms.momentum_l2, 0.0);
}
