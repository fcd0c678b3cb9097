#![allow(clippy::needless_range_loop)]

mod common;

use fuchsian_euler::fluid::{EosParams, Orientation, TransformParams};
use fuchsian_euler::geometry::*;
use fuchsian_euler::harness::InitialData;
use fuchsian_euler::solver::*;
use nalgebra::{Complex, Vector4};

fn background(grid: Grid, k: f64, metric: Option<MetricField>) -> Background {
    let geom = match metric {
        Some(m) => Geometry::new(grid, m, Scheme::Fd4).unwrap(),
        None => Geometry::flat(grid, Scheme::Fd4),
    };
    Background::new(geom, EosParams::with_k(k).unwrap(), TransformParams::default(), Orientation::Future, 1.0).unwrap()
}

fn plain(t_end: f64, dt: f64) -> IntegratorConfig {
    IntegratorConfig { t_end, step: StepControl::Fixed { dt }, energy: None, ..IntegratorConfig::default() }
}

fn homogeneous(psi: f64, z: [f64; 3]) -> ZField {
    ZField::from_fn(Grid::torus([1, 1, 1]).unwrap(), |_| Vector4::new(psi, z[0], z[1], z[2]))
}

fn eigenmode(bg: &Background, mode: [i32; 3], amplitude: f64) -> ZField {
    InitialData::LinearEigenmode { mode, amplitude }.build(&bg.geom, &bg.eos, bg.constants().sigma).unwrap()
}

fn max_diff(a: &ZField, b: &ZField) -> f64 {
    a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn fd4_gradient_converges_at_fourth_order_and_spectral_is_exact() {
    let err = |n: usize, scheme: Scheme| {
        let grid = Grid::torus([n, 4, 1]).unwrap();
        let geom = Geometry::flat(grid, scheme);
        let f = ZField::from_fn(grid, |i| {
            let x = grid.position(i)[0];
            Vector4::new(x.sin(), (2.0 * x).cos(), 0.0, 0.0)
        });
        let g = spatial_gradients(&f, &geom);
        (0..grid.len())
            .map(|i| {
                let x = grid.position(i)[0];
                (g[0][4 * i] - x.cos()).abs().max((g[0][4 * i + 1] + 2.0 * (2.0 * x).sin()).abs())
            })
            .fold(0.0, f64::max)
    };
    let (a, b, c) = (err(16, Scheme::Fd4), err(32, Scheme::Fd4), err(64, Scheme::Fd4));
    assert!((a / b).log2() >= 3.8 && (b / c).log2() >= 3.8, "{a:e} {b:e} {c:e}");
    assert!(err(16, Scheme::Spectral) < 1e-13);
}

#[test]
fn constant_field_has_zero_gradient() {
    let grid = Grid::cube(8).unwrap();
    let f = ZField::from_fn(grid, |_| Vector4::new(0.3, -1.0, 2.0, 0.5));
    for scheme in [Scheme::Fd4, Scheme::Spectral] {
        let g = spatial_gradients(&f, &Geometry::flat(grid, scheme));
        assert!(g.iter().all(|d| d.iter().all(|&v| v == 0.0)));
    }
}

#[test]
fn vector_slots_pick_up_the_connection_on_curved_metrics() {
    let grid = Grid::cube(16).unwrap();
    let geom = Geometry::new(grid, MetricField::conformal_bump(&grid, 0.05, [1, 0, 0]), Scheme::Fd4).unwrap();
    let z = nalgebra::Vector3::new(0.2, -0.1, 0.4);
    let f = ZField::from_fn(grid, |_| Vector4::new(0.0, z[0], z[1], z[2]));
    let g = spatial_gradients(&f, &geom);
    for p in 0..grid.len() {
        for k in 0..3 {
            let expected = geom.christoffel()[p].map(|m| (m.row(k) * z)[0]);
            for i in 0..3 {
                assert!((g[k][4 * p + 1 + i] - expected[i]).abs() < 1e-15);
            }
            assert_eq!(g[k][4 * p], 0.0);
        }
    }
}

#[test]
fn zero_state_stays_bit_identical() {
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, Some(MetricField::conformal_bump(&grid, 0.1, [0, 1, 0])));
    let traj = evolve(&ZField::zeros(grid), &bg, &plain(1.0, 0.05)).unwrap();
    assert!(traj.termination.is_completed());
    assert!(traj.final_state.data().iter().all(|&v| v == 0.0));
    assert!(traj.max_norms.iter().all(|&v| v == 0.0));
}

#[test]
fn rk4_has_fourth_order_temporal_accuracy() {
    let bg = background(Grid::torus([1, 1, 1]).unwrap(), 0.2, None);
    let z0 = homogeneous(2e-3, [1e-3, -5e-4, 0.0]);
    let run = |dt: f64| evolve(&z0, &bg, &plain(4.0, dt)).unwrap().final_state;
    let reference = run(0.4 / 64.0);
    let errs: Vec<f64> = [0.4, 0.2, 0.1].iter().map(|&dt| max_diff(&run(dt), &reference)).collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 4.0).abs() <= 0.2, "errors {errs:?}");
    }
}

#[test]
fn doubling_small_data_doubles_the_solution() {
    let bg = background(Grid::torus([16, 1, 1]).unwrap(), 0.2, None);
    let defect = |amp: f64| {
        let one = evolve(&eigenmode(&bg, [1, 0, 0], amp), &bg, &plain(2.0, 0.05)).unwrap().final_state;
        let two = evolve(&eigenmode(&bg, [1, 0, 0], 2.0 * amp), &bg, &plain(2.0, 0.05)).unwrap().final_state;
        let doubled: Vec<f64> = one.data().iter().map(|v| 2.0 * v).collect();
        max_diff(&two, &ZField::from_data(*one.grid(), doubled)) / (2.0 * one.max_abs())
    };
    let (big, small) = (defect(1e-3), defect(1e-4));
    assert!(big <= 1e-2, "relative nonlinearity {big:e}");
    assert!(small < big / 5.0, "defect should shrink with the amplitude: {big:e} {small:e}");
}

#[test]
fn homogeneous_decay_matches_the_physical_oracle() {
    let k = 0.2;
    let bg = background(Grid::torus([1, 1, 1]).unwrap(), k, None);
    let traj = evolve(&homogeneous(0.0, [1e-3, 0.0, 0.0]), &bg, &plain(5.0, 0.01)).unwrap();
    let z = traj.final_state.z(0);
    let (psi_oracle, z_oracle) = common::homogeneous(0.0, 1e-3, k, 5.0);
    assert!(((z[0] - z_oracle) / z_oracle).abs() <= 1e-6, "z {} vs oracle {z_oracle}", z[0]);
    assert!((traj.final_state.psi(0) - psi_oracle).abs() <= 1e-9);
    assert!(z[1] == 0.0 && z[2] == 0.0);
    let pure = 1e-3 * (-0.4f64 * 5.0).exp();
    assert!(((z[0] - pure) / pure).abs() <= 1e-6, "z {} vs exponential {pure}", z[0]);
}

#[test]
fn radiation_case_is_neutral_at_small_amplitude() {
    let k = 1.0 / 3.0;
    let bg = background(Grid::torus([1, 1, 1]).unwrap(), k, None);
    let mut cfg = plain(5.0, 0.01);
    cfg.capture_stride = 10;
    let traj = evolve(&homogeneous(0.0, [1e-3, 0.0, 0.0]), &bg, &cfg).unwrap();
    assert!(traj.termination.is_completed());
    for &m in &traj.max_norms {
        assert!((m - 1e-3).abs() <= 1e-6, "max|Z| drifted to {m:e}");
    }
    assert!((common::velocity(1e-3, k, 5.0) - 1e-3).abs() <= 1e-9 * 1e-3);
}

#[test]
fn travelling_mode_follows_the_dispersion_relation() {
    let k = 0.2;
    let amp = 1e-5;
    let grid = Grid::torus([64, 1, 1]).unwrap();
    let bg = background(grid, k, None);
    let t_end = 5.0;
    let traj = evolve(&eigenmode(&bg, [1, 0, 0], amp), &bg, &plain(t_end, 0.01)).unwrap();
    let n = grid.len() as f64;
    let coeff: Complex<f64> = (0..grid.len())
        .map(|i| Complex::from_polar(traj.final_state.psi(i), -grid.position(i)[0]))
        .sum::<Complex<f64>>()
        / n;
    let lambda = fuchsian_euler::harness::initial::eigen_rate(k, 1.0);
    let expected = (lambda * t_end).exp() * (amp / 2.0);
    assert!((coeff - expected).norm() <= 1e-4 * expected.norm(), "{coeff} vs {expected}");
}

#[test]
fn travelling_mode_parallel_energy_decreases_while_standing_wave_envelope_decays() {
    use fuchsian_euler::energy::EnergyOptions;
    let bg = background(Grid::torus([64, 1, 1]).unwrap(), 0.2, None);
    let mut cfg = plain(32.0, 0.05);
    cfg.energy = Some(EnergyOptions { max_order: 0, delta1: None, matter: false });
    cfg.capture_stride = 4;
    let ep =
        |z: &ZField| -> Vec<f64> { evolve(z, &bg, &cfg).unwrap().energies.iter().map(|r| r.orders[0].ep).collect() };
    let travelling = ep(&eigenmode(&bg, [1, 0, 0], 1e-3));
    assert!(travelling.windows(2).all(|w| w[1] < w[0]));

    let standing =
        InitialData::FourierModes { mode: [1, 0, 0], amplitude: 1e-3, slot: fuchsian_euler::harness::Component::Z1 }
            .build(&bg.geom, &bg.eos, -1.0)
            .unwrap();
    let series = ep(&standing);
    // Energy sloshes between ψ and z with period π/Im λ = π/0.4 in T, so compare
    // maxima over successive periods. Captures are 0.2 apart.
    let period = (std::f64::consts::PI / 0.4 / 0.2).ceil() as usize;
    let peaks: Vec<f64> = series.chunks(period).map(|c| c.iter().cloned().fold(0.0, f64::max)).collect();
    assert!(peaks.windows(2).all(|w| w[1] < w[0]), "peaks {peaks:?}");
}

#[test]
fn cfl_speed_is_the_sound_speed_at_the_origin() {
    for k in [0.1, 0.2, 1.0 / 3.0] {
        let grid = Grid::cube(8).unwrap();
        let bg = background(grid, k, None);
        let s = max_characteristic_speed(&ZField::zeros(grid), &bg, 0.0).unwrap();
        assert!((s - k.sqrt()).abs() < 1e-12, "K = {k}: {s}");
    }
}

#[test]
fn cfl_step_scales_with_the_spacing_and_tolerates_small_velocities() {
    let k = 0.2;
    let dt = |n: usize| {
        let grid = Grid::cube(n).unwrap();
        cfl_dt(&ZField::zeros(grid), &background(grid, k, None), 0.0, 0.5).unwrap()
    };
    assert!((dt(16) / dt(32) - 2.0).abs() < 1e-12);

    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, k, None);
    let mut last = k.sqrt();
    for amp in [1e-4, 1e-3, 1e-2] {
        let f = ZField::from_fn(grid, |_| Vector4::new(0.0, amp, 0.0, 0.0));
        let s = max_characteristic_speed(&f, &bg, 0.0).unwrap();
        assert!(s >= last && s <= 1.1 * k.sqrt(), "|z| = {amp}: speed {s}");
        last = s;
    }
}

#[test]
fn frozen_symmetric_flux_conserves_energy_to_high_order() {
    // Linear system at the origin with damping and sources removed:
    // M⁰∂_TZ = σCᵏ∂_kZ, M⁰ = diag(1, K⁻¹δ), σ = −1, on the spectral scheme.
    let k = 0.2;
    let grid = Grid::cube(16).unwrap();
    let z0 = ZField::from_fn(grid, |i| {
        let x = grid.position(i);
        Vector4::new((x[0] + x[1]).sin(), 0.3 * x[2].cos(), 0.2 * (x[0] - x[2]).sin(), 0.1 * (2.0 * x[1]).cos())
    });
    let rhs = |f: &ZField, _t: f64| -> fuchsian_euler::Result<Vec<f64>> {
        let d: Vec<Vec<f64>> = (0..3).map(|a| partial_flat(&grid, f.data(), 4, a, Scheme::Spectral)).collect();
        let mut out = vec![0.0; f.data().len()];
        for p in 0..grid.len() {
            for a in 0..3 {
                out[4 * p] -= d[a][4 * p + 1 + a];
                out[4 * p + 1 + a] -= k * d[a][4 * p];
            }
        }
        Ok(out)
    };
    let energy = |f: &ZField| (0..grid.len()).map(|p| f.psi(p).powi(2) + f.z(p).norm_squared() / k).sum::<f64>();
    let e0 = energy(&z0);
    let drift = |dt: f64| (energy(&rk4_step(&z0, 0.0, dt, rhs).unwrap()) - e0).abs() / e0;
    let (a, b) = (drift(0.1), drift(0.05));
    assert!(a < 1e-5, "one-step drift {a:e}");
    assert!((a / b).log2() >= 4.0, "drift {a:e} -> {b:e}");
}

#[test]
fn identical_inputs_give_identical_trajectories() {
    use fuchsian_euler::energy::EnergyOptions;
    let grid = Grid::cube(8).unwrap();
    let bg = background(grid, 0.2, Some(MetricField::conformal_bump(&grid, 0.1, [0, 1, 0])));
    let init = InitialData::RandomBand { seed: Some(42), band: [1.0, 2.0], amplitude: 1e-3 }
        .build(&bg.geom, &bg.eos, -1.0)
        .unwrap();
    let mut cfg = plain(0.5, 0.05);
    cfg.energy = Some(EnergyOptions::default());
    let a = evolve(&init, &bg, &cfg).unwrap();
    let b = evolve(&init, &bg, &cfg).unwrap();
    assert_eq!(a.final_state.data(), b.final_state.data());
    assert_eq!(a.energies, b.energies);
}

#[test]
fn leaving_the_admissible_region_is_recorded_not_thrown() {
    let grid = Grid::torus([16, 1, 1]).unwrap();
    let bg = background(grid, 0.2, None);
    let init =
        InitialData::FourierModes { mode: [1, 0, 0], amplitude: 0.4, slot: fuchsian_euler::harness::Component::Psi }
            .build(&bg.geom, &bg.eos, -1.0)
            .unwrap();
    let mut cfg = plain(5.0, 0.01);
    cfg.ceiling = Ceiling { z_max: 0.01, psi_max: 0.5 };
    let traj = evolve(&init, &bg, &cfg).unwrap();
    match traj.termination {
        Termination::Blowup { point, values, ref reason, .. } => {
            assert!(point.is_some() && values.is_some());
            assert!(reason.contains("ceiling"), "{reason}");
        }
        Termination::Completed => panic!("expected the ceiling to stop the run"),
    }
    assert!(traj.final_time < 5.0);
}
