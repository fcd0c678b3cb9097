//! Scaling probes for the structural estimates of the Fuchsian and extended systems.
//!
//! Each block is sampled along log-spaced amplitudes, its operator norm (largest
//! singular value) recorded, and a least-squares line fitted in log-log space.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::extended::{pack, pi_bar, pi_bar_norm, pi_bar_perp, ExtMatrix, ExtVector, ExtendedSystem};
use super::{assemble_fuchsian, m0_spectrum, pi, pi_perp, FuchsianConstants, PositivityChain};
use crate::error::{Error, Result};
use crate::fluid::{
    assemble_transformed_matrices, BackgroundPoint, ChristoffelBlocks, EosParams, Orientation, PointContext,
    TransformParams,
};
use crate::par;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ProbeMetric {
    Flat,
    /// A random constant SPD metric `I + spread·S` with `S` symmetric, entries in `[−1, 1]`.
    RandomSpd {
        spread: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeConfig {
    pub seed: u64,
    pub z_min: f64,
    pub z_max: f64,
    pub samples_per_decade: usize,
    /// Fixed amplitude of `ψ` and its derivatives.
    pub psi_amplitude: f64,
    /// Shift magnitudes for the `|β|` sweep, if any.
    pub beta_range: Option<[f64; 2]>,
    pub metric: ProbeMetric,
    pub fd_step: f64,
    pub slope_tolerance: f64,
    /// Cap on the RMS residual of the log-log fit.
    pub residual_cap: f64,
    /// Minimum span of the fit in decades.
    pub min_decades: f64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        Self {
            seed: 7,
            z_min: 1e-4,
            z_max: 1e-2,
            samples_per_decade: 50,
            psi_amplitude: 0.01,
            beta_range: Some([1e-4, 1e-2]),
            metric: ProbeMetric::Flat,
            fd_step: super::extended::DEFAULT_FD_STEP,
            slope_tolerance: 0.1,
            residual_cap: 0.5,
            min_decades: 2.0,
        }
    }
}

impl ProbeConfig {
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.z_min > 0.0 && self.z_max > self.z_min) {
            errs.push(format!("probe: need 0 < z_min < z_max, got [{}, {}]", self.z_min, self.z_max));
        }
        if self.z_max > 0.1 {
            errs.push(format!("probe: z_max = {} exceeds the smallness ceiling 0.1", self.z_max));
        }
        if self.samples_per_decade == 0 {
            errs.push("probe: samples_per_decade must be positive".into());
        }
        if !(self.fd_step > 0.0) {
            errs.push("probe: fd_step must be positive".into());
        }
        if let ProbeMetric::RandomSpd { spread } = self.metric {
            if !(0.0..0.3).contains(&spread) {
                errs.push(format!("probe: metric spread {spread} must lie in [0, 0.3)"));
            }
        }
        errs
    }

    fn amplitudes(&self) -> Vec<f64> {
        let decades = (self.z_max / self.z_min).log10();
        let n = (decades * self.samples_per_decade as f64).round() as usize;
        (0..=n).map(|i| self.z_min * 10f64.powf(decades * i as f64 / n.max(1) as f64)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// How the fitted slope is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Expectation {
    /// `|slope − expected| ≤ tol`.
    Band,
    /// `slope ≥ expected − tol`, i.e. consistent with an upper bound `O(x^expected)`.
    Bound,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// RMS residual.
    pub residual: f64,
}

/// Least-squares line through `(x, y)`.
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    Some(LineFit { slope, intercept, residual: (ss / nf).sqrt() })
}

/// Fit of `ln y` against `ln x`; `None` unless every point is positive and finite.
pub fn loglog_fit(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    if xs.iter().chain(ys).any(|v| !(v.is_finite() && *v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    linear_fit(&lx, &ly)
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockFit {
    pub block: String,
    pub against: String,
    pub expected_slope: f64,
    pub expectation: Expectation,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    pub decades: f64,
    pub verdict: Verdict,
    /// Whether the slope is at least consistent with an `O(x^expected)` upper bound.
    pub bound_consistent: bool,
    pub amplitudes: Vec<f64>,
    pub norms: Vec<f64>,
}

impl BlockFit {
    fn new(
        block: &str,
        against: &str,
        expected: f64,
        expectation: Expectation,
        xs: Vec<f64>,
        ys: Vec<f64>,
        cfg: &ProbeConfig,
    ) -> Self {
        let span = |v: &[f64]| {
            let (lo, hi) = v.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
            if lo > 0.0 {
                (hi / lo).log10()
            } else {
                0.0
            }
        };
        let decades = span(&xs);
        let fit = loglog_fit(&xs, &ys);
        let tol = cfg.slope_tolerance;
        let (verdict, bound_consistent) = match fit {
            Some(f) if decades >= cfg.min_decades - 1e-9 && f.residual <= cfg.residual_cap => {
                let bound = f.slope >= expected - tol;
                let ok = match expectation {
                    Expectation::Band => (f.slope - expected).abs() <= tol,
                    Expectation::Bound => bound,
                };
                (if ok { Verdict::Pass } else { Verdict::Fail }, bound)
            }
            _ => (Verdict::Inconclusive, false),
        };
        Self {
            block: block.into(),
            against: against.into(),
            expected_slope: expected,
            expectation,
            slope: fit.map(|f| f.slope),
            intercept: fit.map(|f| f.intercept),
            residual: fit.map(|f| f.residual),
            decades,
            verdict,
            bound_consistent,
            amplitudes: xs,
            norms: ys,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeReport {
    pub kind: String,
    /// `flat`, `constant-metric`, or `extension` (extended system on a non-flat metric).
    pub metric_label: String,
    pub k: f64,
    pub samples: usize,
    pub blocks: Vec<BlockFit>,
    pub positivity: Option<PositivityChain>,
}

impl ProbeReport {
    pub fn block(&self, name: &str) -> Option<&BlockFit> {
        self.blocks.iter().find(|b| b.block == name)
    }
}

pub fn op_norm4(m: &Matrix4<f64>) -> f64 {
    m.singular_values().max()
}

pub fn op_norm_ext(m: &ExtMatrix) -> f64 {
    m.singular_values().max()
}

fn probe_metric(cfg: &ProbeConfig, rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    match cfg.metric {
        ProbeMetric::Flat => Matrix3::identity(),
        ProbeMetric::RandomSpd { spread } => {
            let s = Matrix3::from_fn(|_, _| rng.random_range(-1.0..1.0));
            Matrix3::identity() + (s + s.transpose()) * (0.5 * spread)
        }
    }
}

/// Random vector of unit `g`-norm.
fn unit(rng: &mut ChaCha8Rng, g: &Matrix3<f64>) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.random_range(-1.0..1.0));
        let n = v.dot(&(g * v)).sqrt();
        if n > 1e-3 {
            return v / n;
        }
    }
}

fn g_norm(v: &Vector3<f64>, g: &Matrix3<f64>) -> f64 {
    v.dot(&(g * v)).sqrt()
}

struct Sample {
    psi: f64,
    z: Vector3<f64>,
    dz: [Vector4<f64>; 3],
    w: [[Vector4<f64>; 3]; 3],
}

fn draw_samples(cfg: &ProbeConfig, g: &Matrix3<f64>, rng: &mut ChaCha8Rng) -> Vec<Sample> {
    let a = cfg.psi_amplitude;
    let vec4 = |rng: &mut ChaCha8Rng, r: f64| {
        let z = unit(rng, g) * r;
        Vector4::new(rng.random_range(-a..=a), z[0], z[1], z[2])
    };
    cfg.amplitudes()
        .into_iter()
        .map(|r| {
            let psi = rng.random_range(-a..=a);
            let z = unit(rng, g) * r;
            let dz = std::array::from_fn(|_| vec4(rng, r));
            let w = std::array::from_fn(|_| std::array::from_fn(|_| vec4(rng, r)));
            Sample { psi, z, dz, w }
        })
        .collect()
}

struct Setup {
    eos: EosParams,
    params: TransformParams,
    bg: BackgroundPoint,
    blocks: ChristoffelBlocks,
}

impl Setup {
    fn new(eos: &EosParams, params: &TransformParams, g: Matrix3<f64>) -> Result<Self> {
        let g_inv = g.try_inverse().ok_or_else(|| Error::Domain("probe metric is singular".into()))?;
        let bg = BackgroundPoint::mflrw(1.0, g, g_inv);
        Ok(Self { eos: *eos, params: *params, bg, blocks: ChristoffelBlocks::new(&bg) })
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

fn metric_label(cfg: &ProbeConfig, extended: bool) -> String {
    match (cfg.metric, extended) {
        (ProbeMetric::Flat, _) => "flat".into(),
        (_, false) => "constant-metric".into(),
        (_, true) => "extension".into(),
    }
}

/// Structural estimates of `A⁰`, `Aᵏ`, `M⁰`, `Mᵏ`, `F` and their state derivatives.
pub fn probe_structure(cfg: &ProbeConfig, eos: &EosParams, params: &TransformParams) -> Result<ProbeReport> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let g = probe_metric(cfg, &mut rng);
    let setup = Setup::new(eos, params, g)?;
    let samples = draw_samples(cfg, &g, &mut rng);
    let ctx = setup.ctx();
    let consts = FuchsianConstants::new(&ctx)?;
    let ext = ExtendedSystem::new(ctx, cfg.fd_step)?;
    let (p, q) = (pi(), pi_perp());
    let mut lead = Matrix4::identity();
    lead.fixed_view_mut::<3, 3>(1, 1).copy_from(&(g / eos.k()));

    const N: usize = 15;
    let rows: Vec<[f64; N]> = par::try_map_indexed(samples.len(), |i| -> Result<[f64; N]> {
        let s = &samples[i];
        let tm = assemble_transformed_matrices(s.psi, &s.z, &ctx)?;
        let fm = assemble_fuchsian(s.psi, &s.z, &ctx, &consts)?;
        let zstate = Vector4::new(s.psi, s.z[0], s.z[1], s.z[2]);
        let max_k = |f: &dyn Fn(usize) -> f64| (0..3).map(f).fold(0.0, f64::max);
        let mut d_blocks = [0.0f64; 5];
        for a in 0..3 {
            let (dm0, dmk) = ext.state_derivative(&zstate, &s.dz[a])?;
            d_blocks[4] = d_blocks[4].max(op_norm4(&dm0));
            for m in &dmk {
                d_blocks[0] = d_blocks[0].max(op_norm4(&(p * m * p)));
                d_blocks[1] = d_blocks[1].max(op_norm4(&(q * m * p)));
                d_blocks[2] = d_blocks[2].max(op_norm4(&(q * m * q)));
                d_blocks[3] = d_blocks[3].max(op_norm4(&(p * m * q)));
            }
        }
        let (lmin, lmax) = m0_spectrum(&fm.m0, &g)?;
        let dz_norm = (0..3).map(|a| g_norm(&s.dz[a].fixed_rows::<3>(1).into_owned(), &g).powi(2)).sum::<f64>().sqrt();
        Ok([
            g_norm(&s.z, &g),
            g_norm(&s.z, &g) + dz_norm,
            op_norm4(&(q * tm.a0 * p)),
            op_norm4(&(p * tm.a0 * q)),
            max_k(&|k| op_norm4(&(q * tm.ak[k] * q))),
            max_k(&|k| op_norm4(&(p * fm.mk[k] * p))),
            fm.f.norm(),
            fm.f[0].abs(),
            max_k(&|k| op_norm4(&fm.mk[k])),
            op_norm4(&(fm.m0 - lead)),
            d_blocks[0],
            d_blocks[1].max(d_blocks[2]).max(d_blocks[3]),
            d_blocks[4],
            lmin,
            lmax,
        ])
    })?;
    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<_>>();
    let (x, xd) = (col(0), col(1));
    use Expectation::{Band, Bound};
    let mut blocks = vec![
        BlockFit::new("PperpA0P", "|z|", 2.0, Band, x.clone(), col(2), cfg),
        BlockFit::new("PA0Pperp", "|z|", 2.0, Band, x.clone(), col(3), cfg),
        BlockFit::new("PperpAkPperp", "|z|", 2.0, Band, x.clone(), col(4), cfg),
        BlockFit::new("PMkP", "|z|", 1.0, Band, x.clone(), col(5), cfg),
        BlockFit::new("F", "|PiZ|", 2.0, Band, x.clone(), col(6), cfg),
        BlockFit::new("PperpF", "|PiZ|", 2.0, Bound, x.clone(), col(7), cfg),
        BlockFit::new("Mk", "|PiZ|", 1.0, Bound, x.clone(), col(8), cfg),
        BlockFit::new("M0-leading", "|z|", 2.0, Bound, x.clone(), col(9), cfg),
        BlockFit::new("PdMkP", "|PiZ|+|PiDZ|", 1.0, Bound, xd.clone(), col(10), cfg),
        BlockFit::new("offdiag-dMk", "|PiZ|+|PiDZ|", 2.0, Bound, xd.clone(), col(11), cfg),
        BlockFit::new("dM0", "|PiZ|+|PiDZ|", 2.0, Bound, xd, col(12), cfg),
    ];
    if let Some([b_lo, b_hi]) = cfg.beta_range {
        blocks.push(beta_sweep(cfg, eos, params, &g, b_lo, b_hi, &mut rng)?);
    }
    let lmin = col(13).into_iter().fold(f64::INFINITY, f64::min);
    let lmax = col(14).into_iter().fold(0.0, f64::max);
    Ok(ProbeReport {
        kind: "structure".into(),
        metric_label: metric_label(cfg, false),
        k: eos.k(),
        samples: rows.len(),
        blocks,
        positivity: Some(PositivityChain::from_spectrum(lmin, lmax, eos.damping())),
    })
}

/// `|Π^⊥A⁰Π|` at `Z = 0` against the shift magnitude.
fn beta_sweep(
    cfg: &ProbeConfig,
    eos: &EosParams,
    params: &TransformParams,
    g: &Matrix3<f64>,
    lo: f64,
    hi: f64,
    rng: &mut ChaCha8Rng,
) -> Result<BlockFit> {
    let sub = ProbeConfig { z_min: lo, z_max: hi, ..cfg.clone() };
    let g_inv = g.try_inverse().ok_or_else(|| Error::Domain("probe metric is singular".into()))?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for b in sub.amplitudes() {
        let mut bg = BackgroundPoint::mflrw(1.0, *g, g_inv);
        bg.beta = unit(rng, g) * b;
        let blocks = ChristoffelBlocks::new(&bg);
        let ctx = PointContext { bg: &bg, blocks: &blocks, eos, params, orientation: Orientation::Future };
        let tm = assemble_transformed_matrices(0.0, &Vector3::zeros(), &ctx)?;
        xs.push(b);
        ys.push(op_norm4(&(pi_perp() * tm.a0 * pi())));
    }
    Ok(BlockFit::new("PperpA0P-beta", "|beta|", 1.0, Expectation::Band, xs, ys, cfg))
}

/// Scaling of the extended system's blocks against `|Π̄Z̄|`.
///
/// `B0` is the deviation of `B̄⁰` from its origin value plus its off-diagonal
/// blocks. `PH` and `PperpH` are the two projections of the source `H̄`. `BK1`
/// collects every block of `B̄ᵏ` touching `Π̄^⊥` and `BK2` is its `Π̄Π̄` block.
/// `div1` to `div3` are the `Π̄Π̄`, mixed and `Π̄^⊥Π̄^⊥` blocks of `div B̄`.
pub fn probe_extended(cfg: &ProbeConfig, eos: &EosParams, params: &TransformParams) -> Result<ProbeReport> {
    let errs = cfg.validate();
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(1));
    let g = probe_metric(cfg, &mut rng);
    let setup = Setup::new(eos, params, g)?;
    let samples = draw_samples(cfg, &g, &mut rng);
    let ext = ExtendedSystem::new(setup.ctx(), cfg.fd_step)?;
    let (pb, qb) = (pi_bar(), pi_bar_perp());
    let b0_origin = ext.b0(&ExtVector::zeros())?;

    const N: usize = 9;
    let rows: Vec<[f64; N]> = par::try_map_indexed(samples.len(), |i| -> Result<[f64; N]> {
        let s = &samples[i];
        let v = pack(&Vector4::new(s.psi, s.z[0], s.z[1], s.z[2]), &s.dz);
        let w: [ExtVector; 3] = std::array::from_fn(|k| pack(&s.dz[k], &s.w[k]));
        let b0 = ext.b0(&v)?;
        let d = b0 - b0_origin;
        let b0_dev = op_norm_ext(&(pb * d * pb))
            + op_norm_ext(&(qb * d * qb))
            + op_norm_ext(&(qb * b0 * pb))
            + op_norm_ext(&(pb * b0 * qb));
        let h = ext.h_bar(&v)?;
        let mut bk1 = 0.0f64;
        let mut bk2 = 0.0f64;
        for k in 0..3 {
            let bk = ext.bk(&v, k)?;
            bk1 = bk1.max(op_norm_ext(&(qb * bk * pb)) + op_norm_ext(&(qb * bk * qb)) + op_norm_ext(&(pb * bk * qb)));
            bk2 = bk2.max(op_norm_ext(&(pb * bk * pb)));
        }
        let div = ext.div_b(1.0, &v, &w)?;
        Ok([
            pi_bar_norm(&v, &g),
            b0_dev,
            (pb * h).norm(),
            (qb * h).norm(),
            bk1,
            bk2,
            op_norm_ext(&(pb * div * pb)),
            op_norm_ext(&(pb * div * qb)) + op_norm_ext(&(qb * div * pb)),
            op_norm_ext(&(qb * div * qb)),
        ])
    })?;
    let col = |c: usize| rows.iter().map(|r| r[c]).collect::<Vec<_>>();
    let x = col(0);
    use Expectation::{Band, Bound};
    let blocks = vec![
        BlockFit::new("B0", "|PbarZbar|", 2.0, Band, x.clone(), col(1), cfg),
        BlockFit::new("PH", "|PbarZbar|", 1.0, Band, x.clone(), col(2), cfg),
        BlockFit::new("PperpH", "|PbarZbar|", 2.0, Band, x.clone(), col(3), cfg),
        BlockFit::new("BK1", "|PbarZbar|", 2.0, Band, x.clone(), col(4), cfg),
        BlockFit::new("BK2", "|PbarZbar|", 1.0, Band, x.clone(), col(5), cfg),
        BlockFit::new("div1", "|PbarZbar|", 0.0, Bound, x.clone(), col(6), cfg),
        BlockFit::new("div2", "|PbarZbar|", 1.0, Bound, x.clone(), col(7), cfg),
        BlockFit::new("div3", "|PbarZbar|", 2.0, Bound, x, col(8), cfg),
    ];
    Ok(ProbeReport {
        kind: "extended".into(),
        metric_label: metric_label(cfg, true),
        k: eos.k(),
        samples: rows.len(),
        blocks,
        positivity: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fit_recovers_power_law() {
        let xs: Vec<f64> = (0..20).map(|i| 1e-4 * 10f64.powf(i as f64 / 10.0)).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x * x).collect();
        let f = loglog_fit(&xs, &ys).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!(loglog_fit(&xs, &[0.0; 20]).is_none());
    }

    #[test]
    fn narrow_span_is_inconclusive() {
        let cfg = ProbeConfig::default();
        let xs = vec![1.0, 2.0, 3.0];
        let b = BlockFit::new("x", "x", 1.0, Expectation::Band, xs.clone(), xs, &cfg);
        assert_eq!(b.verdict, Verdict::Inconclusive);
    }
}
