use fuchsian_euler::fluid::*;
use fuchsian_euler::fuchsian::extended::{pack, pi_bar, ExtendedSystem, DEFAULT_FD_STEP};
use fuchsian_euler::fuchsian::probe::{probe_structure, ProbeConfig};
use fuchsian_euler::fuchsian::*;
use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Point {
    eos: EosParams,
    params: TransformParams,
    bg: BackgroundPoint,
    blocks: ChristoffelBlocks,
}

impl Point {
    fn new(k: f64, t: f64, g: Matrix3<f64>) -> Self {
        let bg = BackgroundPoint::mflrw(t, g, g.try_inverse().unwrap());
        let blocks = ChristoffelBlocks::new(&bg);
        Self { eos: EosParams::with_k(k).unwrap(), params: TransformParams::default(), bg, blocks }
    }

    fn ctx(&self) -> PointContext<'_> {
        PointContext {
            bg: &self.bg,
            blocks: &self.blocks,
            eos: &self.eos,
            params: &self.params,
            orientation: Orientation::Future,
        }
    }
}

fn skewed_metric() -> Matrix3<f64> {
    Matrix3::new(1.2, 0.1, -0.05, 0.1, 0.9, 0.02, -0.05, 0.02, 1.1)
}

fn random_state(rng: &mut impl Rng, scale: f64) -> (f64, Vector3<f64>) {
    (rng.random_range(-scale..scale), Vector3::from_fn(|_, _| rng.random_range(-scale..scale)))
}

#[test]
fn c_blocks_have_the_unit_off_diagonal_structure_on_any_metric() {
    for g in [Matrix3::identity(), skewed_metric()] {
        for k in [0.1, 0.2, 1.0 / 3.0] {
            let pt = Point::new(k, 0.7, g);
            let consts = FuchsianConstants::new(&pt.ctx()).unwrap();
            for kk in 0..3 {
                let mut expected = Matrix4::zeros();
                expected[(0, kk + 1)] = 1.0;
                expected[(kk + 1, 0)] = 1.0;
                assert_eq!(consts.c[kk], expected);
            }
            assert_eq!(consts.sigma, -1.0);
            assert_eq!(consts.damping, 1.0 / k - 3.0);
        }
    }
}

#[test]
fn origin_blocks_on_a_curved_point_carry_the_metric() {
    let g = skewed_metric();
    let pt = Point::new(0.25, 0.4, g);
    let consts = FuchsianConstants::new(&pt.ctx()).unwrap();
    let fm = assemble_fuchsian(0.0, &Vector3::zeros(), &pt.ctx(), &consts).unwrap();
    let mut expected = Matrix4::identity();
    expected.fixed_view_mut::<3, 3>(1, 1).copy_from(&(g * 4.0));
    assert!((fm.m0 - expected).amax() < 1e-14);
    assert!(fm.mk.iter().all(|m| m.amax() < 1e-15));
    assert!(fm.f.amax() < 1e-15);
}

#[test]
fn quadratic_source_has_the_predicted_leading_term() {
    // F₀ ≈ −((K⁻¹ − 3)/(ψ + c₂))|z|²_g at ψ = 0, with a relative gap shrinking like |z|.
    let pt = Point::new(0.2, 0.5, skewed_metric());
    let consts = FuchsianConstants::new(&pt.ctx()).unwrap();
    let dir = Vector3::new(0.3, -0.5, 0.8).normalize();
    let mut gaps = Vec::new();
    for amp in [1e-2, 1e-3] {
        let z = dir * amp;
        let fm = assemble_fuchsian(0.0, &z, &pt.ctx(), &consts).unwrap();
        let z_sq = (z.transpose() * pt.bg.g * z)[(0, 0)];
        let lead = -(pt.eos.damping() / pt.params.c2()) * z_sq;
        gaps.push(((fm.f[0] - lead) / lead).abs());
    }
    assert!(gaps[1] < 2e-2, "relative gaps {gaps:?}");
    assert!(gaps[1] < gaps[0] / 5.0, "gap should shrink linearly: {gaps:?}");
}

#[test]
fn zero_state_is_a_fixed_point_of_the_rhs() {
    let pt = Point::new(0.2, 0.3, skewed_metric());
    let consts = FuchsianConstants::new(&pt.ctx()).unwrap();
    let fm = assemble_fuchsian(0.0, &Vector3::zeros(), &pt.ctx(), &consts).unwrap();
    let zero = [Vector4::zeros(); 3];
    assert_eq!(rhs_logtime(&fm, &consts, &Vector3::zeros(), &pt.bg.g, &zero).unwrap(), Vector4::zeros());
    assert_eq!(rhs_logtime_fused(0.0, &Vector3::zeros(), &pt.ctx(), &zero).unwrap(), Vector4::zeros());
}

#[test]
fn constant_state_linearises_to_damped_velocity() {
    for k in [0.1, 0.2, 0.3] {
        let pt = Point::new(k, 0.8, Matrix3::identity());
        let zero = [Vector4::zeros(); 3];
        let z = Vector3::new(1e-4, -2e-4, 0.5e-4);
        let psi = 3e-4;
        let d = rhs_logtime_fused(psi, &z, &pt.ctx(), &zero).unwrap();
        let rate = 1.0 - 3.0 * k;
        let dz = Vector3::new(d[1], d[2], d[3]);
        assert!((dz + z * rate).norm() <= 1e-3 * z.norm(), "K = {k}: {dz} vs {}", -z * rate);
        assert!(d[0].abs() <= 10.0 * z.norm_squared(), "dpsi {:e}", d[0]);
    }
}

#[test]
fn log_time_rhs_equals_rescaled_compactified_rhs() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for t in [0.05, 0.5, 2.0] {
        let pt = Point::new(0.22, t, skewed_metric());
        for _ in 0..50 {
            let (psi, z) = random_state(&mut rng, 0.02);
            let grads: [Vector4<f64>; 3] =
                std::array::from_fn(|_| Vector4::from_fn(|_, _| rng.random_range(-0.1..0.1)));
            let log = rhs_logtime_fused(psi, &z, &pt.ctx(), &grads).unwrap();
            let comp = rhs_compactified(psi, &z, &pt.ctx(), &grads).unwrap();
            let scaled = -comp * t;
            assert!((log - scaled).norm() <= 1e-12 * log.norm().max(1e-6), "t = {t}: {log} vs {scaled}");
        }
    }
}

#[test]
fn positivity_chain_holds_for_small_states() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let pt = Point::new(0.2, 0.6, skewed_metric());
    let consts = FuchsianConstants::new(&pt.ctx()).unwrap();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for _ in 0..2000 {
        let (psi, z) = random_state(&mut rng, 0.01);
        let fm = assemble_fuchsian(psi, &z, &pt.ctx(), &consts).unwrap();
        assert_eq!(fm.m0, fm.m0.transpose());
        let (a, b) = m0_spectrum(&fm.m0, &pt.bg.g).unwrap();
        lo = lo.min(a);
        hi = hi.max(b);
    }
    let chain = PositivityChain::from_spectrum(lo, hi, consts.damping);
    assert!(chain.holds);
    // Near the origin M⁰ ≈ diag(1, K⁻¹g), so the spectrum hugs [1, K⁻¹].
    assert!((lo - 1.0).abs() < 0.05 && (hi - 5.0).abs() < 0.25, "spectrum [{lo}, {hi}]");
    assert!(1.0 / chain.gamma1 <= lo + 1e-15 && hi <= chain.gamma2 + 1e-15);
    assert!(chain.gamma3 > 0.0);
}

#[test]
fn orientation_flip_reverses_sigma() {
    let pt = Point::new(0.2, 0.5, Matrix3::identity());
    let mut ctx = pt.ctx();
    ctx.orientation = Orientation::Past;
    assert_eq!(FuchsianConstants::new(&ctx).unwrap().sigma, 1.0);
}

#[test]
fn extended_system_sources_vanish_at_the_origin() {
    let pt = Point::new(0.2, 0.5, skewed_metric());
    let sys = ExtendedSystem::new(pt.ctx(), DEFAULT_FD_STEP).unwrap();
    let v = pack(&Vector4::zeros(), &[Vector4::zeros(); 3]);
    let h = sys.h_bar(&v).unwrap();
    assert!((pi_bar() * h).amax() < 1e-15);
    assert!(h.amax() < 1e-15);
}

#[test]
fn structure_probe_reports_positivity_and_zero_origin_blocks() {
    let cfg = ProbeConfig { samples_per_decade: 8, ..ProbeConfig::default() };
    let report = probe_structure(&cfg, &EosParams::with_k(0.2).unwrap(), &TransformParams::default()).unwrap();
    assert!(report.positivity.expect("positivity chain").holds);
    for b in &report.blocks {
        assert!(b.norms.iter().all(|n| n.is_finite() && *n >= 0.0), "{}", b.block);
    }
}
