//! Lyapunov function `W`, its decay constants and the basin estimate.

use serde::{Deserialize, Serialize};

use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::integrate::integrate_ode;
use crate::model::{ModelParams, State};

/// `W = ½[(a - a*)^2 + (r - r*)^2 + (o - o*)^2 + (o r - o* r*)^2]`.
///
/// ```
/// use hpa_core::{lyapunov::lyapunov_value, Equilibrium, State};
///
/// let eq = Equilibrium { a_star: 0.2, r_star: 0.5, o_star: 0.2, k1: 0.0, k2: 0.0, k3: 0.0, k4: 0.0 };
/// assert_eq!(lyapunov_value(&eq, &State::new(1.2, 0.5, 0.2)), 0.5);
/// ```
pub fn lyapunov_value(eq: &Equilibrium, state: &State) -> f64 {
    let da = state.a - eq.a_star;
    let dr = state.r - eq.r_star;
    let d_o = state.o - eq.o_star;
    let dp = state.o * state.r - eq.o_star * eq.r_star;
    0.5 * (da * da + dr * dr + d_o * d_o + dp * dp)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum P4Branch {
    LargeP4,
    SmallP4,
}

/// Constants of the decay inequality `W' <= -αW + βW^{3/2} + γW^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovReport {
    /// All hypotheses on the rates hold and `α > 0`.
    pub applicable: bool,
    pub p3_above_half: bool,
    /// `p6 > 1 / min{p3 - ½, p6, 1}`, evaluated as written.
    pub p6_condition: bool,
    /// The minimum in the `p6` condition is attained at `p6` itself.
    pub p6_self_referential: bool,
    pub p5_condition: bool,
    /// `0 < r* + (p6 + 1) a* + γ < min{p3 - ½, p6, 1} - A p2`.
    pub equilibrium_condition: bool,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    /// Parameter-only upper bounds on `β` and `γ`.
    pub beta_bound: f64,
    pub gamma_bound: f64,
    /// `W(0)` threshold below which `W` decays to zero.
    #[serde(rename = "basin_radius_W")]
    pub basin_radius_w: f64,
    #[serde(rename = "B")]
    pub b: f64,
    #[serde(rename = "A0")]
    pub a0: f64,
    pub p4_star: f64,
    pub p4_star_branch: P4Branch,
    #[serde(rename = "A_min")]
    pub a_min: Option<f64>,
    #[serde(rename = "A1")]
    pub a1: Option<f64>,
    #[serde(rename = "A2")]
    pub a2: Option<f64>,
    /// The drive lies in the admissible range of the active branch.
    pub drive_admissible: bool,
}

impl LyapunovReport {
    /// Right-hand side of the decay inequality at level `w`.
    pub fn decay_bound(&self, w: f64) -> f64 {
        -self.alpha * w + self.beta * w.powf(1.5) + self.gamma * w * w
    }
}

fn min_rate(p: &ModelParams) -> f64 {
    (p.p3 - 0.5).min(p.p6).min(1.0)
}

/// `2 p2 / (sqrt(1 + 4 p2 p5 A / p6) - 1)`, continuous at `p2 = 0`.
fn inverse_product_floor(p: &ModelParams) -> f64 {
    let y = 4.0 * p.p2 * p.p5 * p.drive / p.p6;
    let top = p.p6 * ((1.0 + y).sqrt() + 1.0);
    let bottom = 2.0 * p.p5 * p.drive;
    if bottom > 0.0 {
        top / bottom
    } else {
        f64::INFINITY
    }
}

/// `F(A) = (p6 + 1 + p2 p3)/p3 · A + 8 p2 / (sqrt(1 + 4 p2 p5 A / p6) - 1)`.
pub fn drive_threshold_fn(p: &ModelParams, drive: f64) -> f64 {
    let q = ModelParams { drive, ..*p };
    (p.p6 + 1.0 + p.p2 * p.p3) / p.p3 * drive + 4.0 * inverse_product_floor(&q)
}

fn golden_min(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let (mut f1, mut f2) = (f(x1), f(x2));
    while hi - lo > 1e-10 * (lo.abs() + hi.abs()).max(1e-300) {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
    }
    0.5 * (lo + hi)
}

/// Root of `f` between `lo` (where `f > 0`) and `hi` (where `f < 0`), or the reverse.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo) > 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == flo {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo).abs() <= 1e-14 * hi.abs().max(lo.abs()) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Evaluates the hypotheses, `α, β, γ` at the fixed point, the drive
/// thresholds and the basin radius. Inapplicability is reported, not raised.
pub fn lyapunov_constants(params: &ModelParams, eq: &Equilibrium) -> LyapunovReport {
    let p = params;
    let m = min_rate(p);
    let x = eq.o_star * eq.r_star;
    let frac = if x == 0.0 { 0.0 } else { x / (p.p4 + x * x) };
    let gamma = 4.0 * frac;
    // the cortisol channel contracts at rate ½ once the ACTH cross term is absorbed
    let alpha = 2.0 * (m.min(0.5) - p.drive * p.p2 - eq.r_star - (p.p6 + 1.0) * eq.a_star - gamma);
    let beta = 2f64.powf(1.5) * (p.p6 + 1.0 + 3.0 * frac);

    let floor = (0.5 / p.p4.sqrt()).min(inverse_product_floor(p));
    let beta_bound = 2f64.powf(1.5) * (p.p6 + 1.0 + 3.0 * floor);
    let gamma_bound = 4.0 * floor;

    let p3_above_half = p.p3 > 0.5;
    let p6_condition = m > 0.0 && p.p6 > 1.0 / m;
    let p6_self_referential = p.p6 <= (p.p3 - 0.5).min(1.0);
    let p5_condition = p.p5 < p.p6 * m - 1.0;
    let load = eq.r_star + (p.p6 + 1.0) * eq.a_star + gamma;
    let equilibrium_condition = load > 0.0 && load < m - p.drive * p.p2;
    let applicable = p3_above_half && p6_condition && p5_condition && equilibrium_condition && alpha > 0.0;

    let basin_radius_w = if alpha <= 0.0 {
        0.0
    } else {
        let root = 2.0 * alpha / ((beta * beta + 4.0 * alpha * gamma).sqrt() + beta);
        root * root
    };

    let b = m - p.r_upper();
    let a0_first = 2.0 * p.p6 * p.p4.sqrt() / p.p5 * (1.0 + 2.0 * p.p2 * p.p4.sqrt());
    let a0_second = p.p3 / (p.p6 + 1.0 + p.p2 * p.p3) * (b - 2.0 / p.p4.sqrt());
    let a0 = a0_first.min(a0_second).max(0.0);
    let p4_star = if b > 0.0 { 4.0 / (b * b) } else { f64::INFINITY };
    let p4_star_branch = if p.p4 > p4_star { P4Branch::LargeP4 } else { P4Branch::SmallP4 };

    let (mut a_min, mut a1, mut a2) = (None, None, None);
    if p.p5 > 0.0 && p.p6 > 0.0 && p.p3 > 0.0 {
        let f = |d: f64| drive_threshold_fn(p, d);
        let grid: Vec<f64> = (-240..=240).map(|i| 10f64.powf(i as f64 / 20.0)).collect();
        let best = (0..grid.len()).min_by(|&i, &j| f(grid[i]).total_cmp(&f(grid[j]))).unwrap_or(0);
        let lo = grid[best.saturating_sub(1)];
        let hi = grid[(best + 1).min(grid.len() - 1)];
        let am = golden_min(f, lo, hi);
        a_min = Some(am);
        if f(am) < b {
            let g = |d: f64| f(d) - b;
            let mut left = am;
            while g(left) < 0.0 && left > 1e-300 {
                left *= 0.5;
            }
            let mut right = am;
            while g(right) < 0.0 && right < 1e300 {
                right *= 2.0;
            }
            a1 = Some(bisect(g, left, am));
            a2 = Some(bisect(g, am, right));
        }
    }
    let drive_admissible = match p4_star_branch {
        P4Branch::LargeP4 => p.drive < a0,
        P4Branch::SmallP4 => matches!((a1, a2), (Some(l), Some(u)) if p.drive > l && p.drive < u),
    };

    LyapunovReport {
        applicable,
        p3_above_half,
        p6_condition,
        p6_self_referential,
        p5_condition,
        equilibrium_condition,
        alpha,
        beta,
        gamma,
        beta_bound,
        gamma_bound,
        basin_radius_w,
        b,
        a0,
        p4_star,
        p4_star_branch,
        a_min,
        a1,
        a2,
        drive_admissible,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayCheck {
    /// `(t, W(t))` at 1001 evenly spaced times.
    pub w_series: Vec<(f64, f64)>,
    pub converged: bool,
}

/// Integrates the non-delayed system from `initial` and samples `W`.
/// `converged` means `W(horizon) <= 1e-6 W(0)` or `W(horizon) <= 1e-28`.
pub fn verify_decay(params: &ModelParams, eq: &Equilibrium, initial: State, horizon: f64) -> Result<DecayCheck> {
    let dt = (horizon / 1000.0).min(0.01);
    let tr = integrate_ode(&params.with_tau(0.0)?, initial, horizon, dt)?;
    if let Some(t) = tr.flags.blow_up_time {
        return Err(Error::NonConvergence(format!("trajectory blew up at t = {t}")));
    }
    let w_series: Vec<(f64, f64)> = tr
        .resample(0.0, horizon, 1000)
        .into_iter()
        .map(|(t, s)| (t, lyapunov_value(eq, &s)))
        .collect();
    let w0 = w_series[0].1;
    let wn = w_series.last().map_or(w0, |x| x.1);
    Ok(DecayCheck { converged: wn <= 1e-6 * w0 || wn <= 1e-28, w_series })
}
