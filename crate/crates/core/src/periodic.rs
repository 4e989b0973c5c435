//! τ-periodic initial data and periodicity checks on simulated orbits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::Trajectory;
use crate::model::{check_fitting_condition, fitting_residual, HermiteNode, HistoryShape, HistorySpec, ModelParams, FITTING_TOL};

/// Default relative tolerance of [`verify_periodicity`].
pub const PERIODICITY_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HistoryChoice {
    /// Bump when it fits, Hermite otherwise.
    #[default]
    Auto,
    Bump,
    Hermite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicSetup {
    pub r0: f64,
    /// Required `a(0)`.
    pub a_tau_0: f64,
    /// Required `a(-tau)`, equal to `o0`.
    pub a_tau_minus_tau: f64,
    pub o0: f64,
    /// `√(p4 (p6 r0 - p5) / (p5 + 1 - p6 r0))`, the product at which `r' = 0`.
    pub product: f64,
    pub history: HistorySpec,
    pub fitting_residual: f64,
}

impl PeriodicSetup {
    /// Residuals of `p3 a(0) / A = 1 / (1 + p2 x)` and
    /// `(p5 + 1 - p6 r0) / p4 = 1 / (p4 + x^2)` at the constructed product `x`.
    pub fn closed_form_residuals(&self, params: &ModelParams) -> [f64; 2] {
        let p = params;
        let x = self.product;
        [
            p.p3 * self.a_tau_0 / p.drive - 1.0 / (1.0 + p.p2 * x),
            (p.p5 + 1.0 - p.p6 * self.r0) / p.p4 - 1.0 / (p.p4 + x * x),
        ]
    }
}

/// Initial data with `a(0) = (A/p3) / (1 + p2 x)`, `o0 = a(0) = a(-tau)`
/// for a receptor level `r0` strictly inside `(p5/p6, (p5+1)/p6)`.
///
/// ```
/// use hpa_core::{periodic::{build_periodic_setup, HistoryChoice}, ModelParams};
///
/// let p = ModelParams::new(1.0, 11.0, 1.2, 0.05, 0.11, 2.9, 4.0)?;
/// let r0 = 0.5 * (p.r_lower() + p.r_upper());
/// let setup = build_periodic_setup(&p, r0, HistoryChoice::Auto)?;
/// let want = (1.0 / 1.2) / (1.0 + 11.0 * 0.05f64.sqrt());
/// assert!((setup.a_tau_0 - want).abs() < 1e-12);
/// assert!((setup.history.eval(-4.0) - setup.o0).abs() < 1e-12);
/// # Ok::<(), hpa_core::Error>(())
/// ```
pub fn build_periodic_setup(params: &ModelParams, r0: f64, choice: HistoryChoice) -> Result<PeriodicSetup> {
    params.validate()?;
    let p = params;
    if !(p.p3 > 0.0 && p.p6 > 0.0 && p.p4 > 0.0 && p.drive > 0.0) {
        return Err(Error::UnsupportedCase("periodic setup needs A, p3, p4, p6 > 0".into()));
    }
    if p.tau <= 0.0 {
        return Err(Error::ZeroDelay);
    }
    let s = p.p6 * r0 - p.p5;
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Domain(format!(
            "r0 = {r0} must lie strictly inside ({}, {})",
            p.r_lower(),
            p.r_upper()
        )));
    }
    let product = (p.p4 * s / (1.0 - s)).sqrt();
    let a_tau_0 = p.drive / p.p3 / (1.0 + p.p2 * product);
    let o0 = a_tau_0;
    let finish = |shape: HistoryShape| {
        let history = HistorySpec::new(shape, r0, o0);
        PeriodicSetup {
            r0,
            a_tau_0,
            a_tau_minus_tau: o0,
            o0,
            product,
            fitting_residual: fitting_residual(p, &history),
            history,
        }
    };

    if choice != HistoryChoice::Hermite {
        let lambda = (o0 - a_tau_0) / (p.tau * p.tau * p.tau.exp());
        let setup = finish(HistoryShape::Bump { base: a_tau_0, lambda });
        if check_fitting_condition(p, &setup.history, FITTING_TOL) && setup.history.validate(p.tau).is_ok() {
            return Ok(setup);
        }
        if choice == HistoryChoice::Bump {
            return Err(Error::InfeasibleHistory(format!(
                "bump history misses the fitting condition by {:.3e}",
                setup.fitting_residual
            )));
        }
    }

    let slope0 = p.drive / (1.0 + p.p2 * o0 * r0) - p.p3 * a_tau_0;
    let secant = (a_tau_0 - o0) / p.tau;
    for start_slope in [0.0, secant] {
        let nodes = vec![
            HermiteNode { t: -p.tau, value: o0, slope: start_slope },
            HermiteNode { t: 0.0, value: a_tau_0, slope: slope0 },
        ];
        let setup = finish(HistoryShape::Hermite { nodes });
        if setup.history.validate(p.tau).is_ok() && check_fitting_condition(p, &setup.history, FITTING_TOL) {
            return Ok(setup);
        }
    }
    Err(Error::InfeasibleHistory("no nonnegative cubic history meets both endpoints and the fitting condition".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodicityCheck {
    pub residual: f64,
    /// Largest peak-to-peak range over the channels on `[t_start, t_start + 2 period]`.
    pub amplitude: f64,
    pub periodic: bool,
}

/// Shift residual `max_t |x(t + T) - x(t)|_∞ + max_t |(o r)(t + T) - (o r)(t)|`
/// over `t ∈ [t_start, t_start + T]`, compared with `rel_tol` times the amplitude.
pub fn verify_periodicity(traj: &Trajectory, period: f64, t_start: f64, rel_tol: f64) -> Result<PeriodicityCheck> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::invalid(format!("period = {period} must be positive")));
    }
    if traj.is_empty() || t_start < traj.t_start() || t_start + 2.0 * period > traj.t_end() * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "trajectory does not cover [{t_start}, {}]",
            t_start + 2.0 * period
        )));
    }
    let n = 1024;
    let mut state_res: f64 = 0.0;
    let mut product_res: f64 = 0.0;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let end = (t_start + 2.0 * period).min(traj.t_end());
    for (_, s) in traj.resample(t_start, end, 2 * n) {
        for (k, v) in s.to_array().into_iter().enumerate() {
            lo[k] = lo[k].min(v);
            hi[k] = hi[k].max(v);
        }
    }
    for i in 0..=n {
        let t = t_start + period * i as f64 / n as f64;
        let (Some(x), Some(y)) = (traj.interpolate(t), traj.interpolate((t + period).min(end))) else {
            return Err(Error::Domain(format!("cannot interpolate at t = {t}")));
        };
        state_res = state_res.max(x.distance(&y));
        product_res = product_res.max((y.o * y.r - x.o * x.r).abs());
    }
    let residual = state_res + product_res;
    let amplitude = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    Ok(PeriodicityCheck { residual, amplitude, periodic: residual < rel_tol * amplitude + 1e-12 })
}

/// Dominant period of the ACTH channel after `t_start`: the first peak
/// above 0.5 of the unbiased autocorrelation that follows a sign change,
/// then polished by minimizing the mean squared shift difference.
///
/// ```
/// use hpa_core::{integrate::Trajectory, periodic::estimate_period, State};
///
/// let times: Vec<f64> = (0..=5000).map(|i| i as f64 * 0.01).collect();
/// let traj = Trajectory::from_samples(
///     times.iter().map(|&t| (t, State::new(2.0 + (std::f64::consts::TAU * t / 5.0).sin(), 1.0, 1.0))),
/// );
/// let period = estimate_period(&traj, 0.0).unwrap();
/// assert!((period - 5.0).abs() < 0.05);
/// ```
pub fn estimate_period(traj: &Trajectory, t_start: f64) -> Option<f64> {
    if traj.len() < 8 || t_start >= traj.t_end() {
        return None;
    }
    let t0 = t_start.max(traj.t_start());
    let n = traj.len().clamp(1024, 8192);
    let samples = traj.resample(t0, traj.t_end(), n);
    let dt = (traj.t_end() - t0) / n as f64;
    let mean = samples.iter().map(|(_, s)| s.a).sum::<f64>() / samples.len() as f64;
    let x: Vec<f64> = samples.iter().map(|(_, s)| s.a - mean).collect();
    let energy: f64 = x.iter().map(|v| v * v).sum();
    if !(energy > 1e-300) {
        return None;
    }
    let max_lag = 2 * x.len() / 3;
    let len = x.len() as f64;
    let acf: Vec<f64> = (0..=max_lag)
        .map(|k| x.iter().zip(&x[k..]).map(|(u, v)| u * v).sum::<f64>() / (len - k as f64) * len / energy)
        .collect();
    let first_negative = acf.iter().position(|&c| c < 0.0)?;
    let k = (first_negative + 1..max_lag).find(|&k| acf[k] >= acf[k - 1] && acf[k] >= acf[k + 1] && acf[k] > 0.5)?;
    let (l, c, r) = (acf[k - 1], acf[k], acf[k + 1]);
    let den = l - 2.0 * c + r;
    let shift = if den.abs() > 0.0 { 0.5 * (l - r) / den } else { 0.0 };
    let rough = (k as f64 + shift) * dt;
    Some(polish_period(traj, t0, rough, 2.0 * dt))
}

/// Golden-section minimum of the mean squared ACTH shift difference on
/// `[rough - width, rough + width]`.
fn polish_period(traj: &Trajectory, t0: f64, rough: f64, width: f64) -> f64 {
    let span = traj.t_end() - t0 - rough - width;
    if span <= 0.0 {
        return rough;
    }
    let cost = |period: f64| {
        let n = 1024;
        (0..=n)
            .filter_map(|i| {
                let t = t0 + span * i as f64 / n as f64;
                Some((traj.interpolate(t + period)?.a - traj.interpolate(t)?.a).powi(2))
            })
            .sum::<f64>()
    };
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (rough - width, rough + width);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (cost(x1), cost(x2));
    for _ in 0..60 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = cost(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = cost(x2);
        }
    }
    0.5 * (lo + hi)
}
