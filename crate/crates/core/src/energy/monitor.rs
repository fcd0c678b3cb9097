//! Monitoring of the energy decay inequalities along a trajectory.
//!
//! The zero order inequality `∂_TE₀ ≤ (3−K⁻¹+C)E^p₀ + C E^p₁` and its first
//! order corrected analogue `∂_TẼ₁ ≤ (3−K⁻¹+C)E^p₁ + C E^p₃` are evaluated with
//! the unspecified constant exposed as `C_slack`. The exponentially decaying
//! background term is dropped since the geometry is frozen. Slack is
//! `bound − derivative`, so the inequality holds where slack is nonnegative.

use serde::{Deserialize, Serialize};

use super::EnergyReport;
use crate::error::{Error, Result};
use crate::fluid::EosParams;
use crate::fuchsian::probe::{linear_fit, LineFit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MonitorConfig {
    /// `C_slack`; `None` selects `0.1/K`.
    pub c_slack: Option<f64>,
    /// Fraction of captures, counted from the end, used for tail fits.
    pub tail_fraction: f64,
    pub windows: usize,
}

impl Default for MonitorConfig {
    fn default() -> Self {
        Self { c_slack: None, tail_fraction: 0.5, windows: 4 }
    }
}

impl MonitorConfig {
    pub fn c_slack(&self, eos: &EosParams) -> f64 {
        self.c_slack.unwrap_or(0.1 / eos.k())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlackSample {
    pub t: f64,
    pub derivative: f64,
    pub bound: f64,
    pub slack: f64,
}

impl SlackSample {
    /// Nonnegative up to the round-off of the two compared quantities.
    pub fn holds(&self) -> bool {
        self.slack >= -4.0 * f64::EPSILON * (self.derivative.abs() + self.bound.abs())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WindowVerdict {
    pub t_start: f64,
    pub t_end: f64,
    pub fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayMonitor {
    pub quantity: String,
    pub c_slack: f64,
    pub samples: Vec<SlackSample>,
    /// Fraction of samples where the inequality holds.
    pub fraction: f64,
    pub windows: Vec<WindowVerdict>,
    /// Fitted decay rate `−d ln E^p/dT` over the tail, when the tail is positive.
    pub tail_rate: Option<f64>,
    pub tail_fit: Option<LineFit>,
    /// True when the monitored parallel energy strictly decreases over the tail.
    pub tail_decreasing: bool,
}

/// Weights of the first derivative at `x0` through the nodes `xs` (Fornberg's recursion).
fn derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    let mut c = vec![[0.0f64; 2]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Fourth-order derivative of a sampled series, centred where possible and one-sided at the ends.
pub fn time_derivative(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = times.len();
    if n < 2 {
        return vec![0.0; n];
    }
    let w = 5.min(n);
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(w / 2).min(n - w);
            let xs = &times[lo..lo + w];
            derivative_weights(times[i], xs).iter().zip(&values[lo..lo + w]).map(|(a, b)| a * b).sum()
        })
        .collect()
}

/// Least-squares fit of `ln v` against `T` over the tail of the series.
pub fn fit_log_rate(times: &[f64], values: &[f64], tail_fraction: f64) -> Option<LineFit> {
    let n = times.len();
    let start = ((1.0 - tail_fraction.clamp(0.0, 1.0)) * n as f64).floor() as usize;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        times[start..].iter().zip(&values[start..]).filter(|(_, v)| **v > 0.0).map(|(t, v)| (*t, v.ln())).unzip();
    if xs.len() < 3 {
        return None;
    }
    linear_fit(&xs, &ys)
}

fn monitor(
    quantity: &str,
    times: &[f64],
    values: &[f64],
    bounds: &[f64],
    parallel: &[f64],
    c_slack: f64,
    cfg: &MonitorConfig,
) -> DecayMonitor {
    let deriv = time_derivative(times, values);
    let samples: Vec<SlackSample> = (0..times.len())
        .map(|i| SlackSample { t: times[i], derivative: deriv[i], bound: bounds[i], slack: bounds[i] - deriv[i] })
        .collect();
    let frac = |s: &[SlackSample]| {
        if s.is_empty() {
            1.0
        } else {
            s.iter().filter(|x| x.holds()).count() as f64 / s.len() as f64
        }
    };
    let nw = cfg.windows.max(1);
    let windows = (0..nw)
        .filter_map(|w| {
            let a = w * samples.len() / nw;
            let b = (w + 1) * samples.len() / nw;
            (b > a).then(|| WindowVerdict {
                t_start: samples[a].t,
                t_end: samples[b - 1].t,
                fraction: frac(&samples[a..b]),
            })
        })
        .collect();
    let tail_fit = fit_log_rate(times, parallel, cfg.tail_fraction);
    let start = ((1.0 - cfg.tail_fraction.clamp(0.0, 1.0)) * times.len() as f64).floor() as usize;
    let tail = &parallel[start.min(parallel.len())..];
    let tail_decreasing = tail.len() >= 2 && tail.windows(2).all(|p| p[1] < p[0]);
    DecayMonitor {
        quantity: quantity.to_string(),
        c_slack,
        fraction: frac(&samples),
        samples,
        windows,
        tail_rate: tail_fit.map(|f| -f.slope),
        tail_fit,
        tail_decreasing,
    }
}

fn order_series(reports: &[EnergyReport], s: usize, what: &str) -> Result<Vec<f64>> {
    reports
        .iter()
        .map(|r| {
            r.orders
                .get(s)
                .map(|o| if what == "ep" { o.ep } else { o.e })
                .ok_or_else(|| Error::Domain(format!("energy order {s} was not captured")))
        })
        .collect()
}

/// Zero order inequality `∂_TE₀ ≤ (3−K⁻¹+C)E^p₀ + C E^p₁`.
pub fn decay_monitor(reports: &[EnergyReport], eos: &EosParams, cfg: &MonitorConfig) -> Result<DecayMonitor> {
    let c = cfg.c_slack(eos);
    let times: Vec<f64> = reports.iter().map(|r| r.t).collect();
    let e0 = order_series(reports, 0, "e")?;
    let ep0 = order_series(reports, 0, "ep")?;
    let ep1 = order_series(reports, 1, "ep")?;
    let bounds: Vec<f64> = (0..times.len()).map(|i| (3.0 - 1.0 / eos.k() + c) * ep0[i] + c * ep1[i]).collect();
    Ok(monitor("E0", &times, &e0, &bounds, &ep0, c, cfg))
}

/// First order corrected inequality `∂_TẼ₁^gen ≤ (3−K⁻¹+C)E^p₁ + C E^p₃`.
pub fn corrected_monitor(reports: &[EnergyReport], eos: &EosParams, cfg: &MonitorConfig) -> Result<DecayMonitor> {
    let c = cfg.c_slack(eos);
    let times: Vec<f64> = reports.iter().map(|r| r.t).collect();
    let e1: Vec<f64> = reports
        .iter()
        .map(|r| {
            r.generic.map(|g| g.e1).ok_or_else(|| Error::Domain("generic corrected energy was not captured".into()))
        })
        .collect::<Result<_>>()?;
    let ep1 = order_series(reports, 1, "ep")?;
    let ep3 = order_series(reports, 3, "ep")?;
    let bounds: Vec<f64> = (0..times.len()).map(|i| (3.0 - 1.0 / eos.k() + c) * ep1[i] + c * ep3[i]).collect();
    Ok(monitor("E1_gen", &times, &e1, &bounds, &ep1, c, cfg))
}
