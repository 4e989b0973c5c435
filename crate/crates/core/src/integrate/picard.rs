use serde::{Deserialize, Serialize};

use super::Trajectory;
use crate::error::{Error, Result};
use crate::model::{check_fitting_condition, field, hill, HistorySpec, ModelParams, State, FITTING_TOL};

/// Trapezoid intervals per delay window.
pub const PICARD_NODES_PER_WINDOW: usize = 4096;

/// Picard iterate with the per-window lower and upper envelopes, both
/// aligned with `trajectory.times`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PicardSolution {
    pub trajectory: Trajectory,
    pub lower: Vec<State>,
    pub upper: Vec<State>,
    /// Sweeps used in each window.
    pub sweeps: Vec<usize>,
}

/// Cumulative `x(t_j) = e^{-k(t_j - t_0)} x0 + ∫ e^{-k(t_j - s)} g(s) ds` by the trapezoid rule.
fn relax(x0: f64, k: f64, h: f64, g: &[f64], out: &mut [f64]) {
    let e = (-k * h).exp();
    out[0] = x0;
    for j in 0..g.len() - 1 {
        out[j + 1] = e * out[j] + 0.5 * h * (e * g[j] + g[j + 1]);
    }
}

/// Window-by-window fixed-point iteration of the integral form of the
/// delayed system.
///
/// On window `k` the cortisol channel is explicit in the previous window's
/// ACTH; ACTH and receptor are then iterated to a fixed point (at most
/// `iterations` sweeps). Quadrature is the trapezoid rule on
/// [`PICARD_NODES_PER_WINDOW`] intervals per window.
pub fn picard_oracle(params: &ModelParams, hist: &HistorySpec, windows: usize, iterations: usize) -> Result<PicardSolution> {
    params.validate()?;
    if windows == 0 || iterations == 0 {
        return Err(Error::invalid("windows and iterations must be >= 1"));
    }
    if params.tau == 0.0 {
        return Err(Error::ZeroDelay);
    }
    if !(params.p3 > 0.0 && params.p6 > 0.0) {
        return Err(Error::UnsupportedCase("the Picard envelopes need p3, p6 > 0".into()));
    }
    hist.validate(params.tau)?;
    let p = params;
    let m = PICARD_NODES_PER_WINDOW;
    let h = p.tau / m as f64;
    let total = windows * m + 1;
    let mut a = vec![0.0; total];
    let mut r = vec![0.0; total];
    let mut o = vec![0.0; total];
    let mut ad = vec![0.0; total];
    let mut lower = vec![State::default(); total];
    let mut upper = vec![State::default(); total];
    let mut sweeps = Vec::with_capacity(windows);

    let s0 = hist.initial_state();
    (a[0], r[0], o[0]) = (s0.a, s0.r, s0.o);
    let mut ga = vec![0.0; m + 1];
    let mut gr = vec![0.0; m + 1];
    let mut na = vec![0.0; m + 1];
    let mut nr = vec![0.0; m + 1];

    for k in 0..windows {
        let j0 = k * m;
        let idx = j0..=j0 + m;
        for j in idx.clone() {
            ad[j] = if j < m { hist.eval((j as f64 - m as f64) * h) } else { a[j - m] };
        }
        relax(o[j0], 1.0, h, &ad[idx.clone()], &mut o[idx.clone()]);
        for j in j0 + 1..=j0 + m {
            a[j] = a[j0];
            r[j] = r[j0];
        }

        let mut prev = f64::INFINITY;
        let mut growth = 0;
        let mut used = iterations;
        for sweep in 1..=iterations {
            for i in 0..=m {
                let x = o[j0 + i] * r[j0 + i];
                ga[i] = p.drive / (1.0 + p.p2 * x);
                gr[i] = hill(x, p.p4) + p.p5;
            }
            relax(a[j0], p.p3, h, &ga, &mut na);
            relax(r[j0], p.p6, h, &gr, &mut nr);
            let mut change: f64 = 0.0;
            let mut scale: f64 = 1.0;
            for i in 0..=m {
                change = change.max((na[i] - a[j0 + i]).abs()).max((nr[i] - r[j0 + i]).abs());
                scale = scale.max(na[i].abs()).max(nr[i].abs());
                a[j0 + i] = na[i];
                r[j0 + i] = nr[i];
            }
            if !change.is_finite() {
                return Err(Error::NonConvergence(format!("window {}: non-finite iterate", k + 1)));
            }
            if change <= 1e-14 * scale {
                used = sweep;
                break;
            }
            growth = if change > prev { growth + 1 } else { 0 };
            if growth >= 5 {
                return Err(Error::NonConvergence(format!("window {}: residual grew for 5 sweeps", k + 1)));
            }
            prev = change;
        }
        sweeps.push(used);

        let (lo_a, hi_a) = ad[idx.clone()].iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, u), &v| (l.min(v), u.max(v)));
        let (a0, r0, o0) = (a[j0], r[j0], o[j0]);
        let env = |j: usize, dt: f64| {
            let e1 = (-dt).exp();
            let e3 = (-p.p3 * dt).exp();
            let e6 = (-p.p6 * dt).exp();
            let o_lo = e1 * o0 + (1.0 - e1) * lo_a;
            let o_hi = e1 * o0 + (1.0 - e1) * hi_a;
            let r_lo = e6 * r0 + p.p5 / p.p6 * (1.0 - e6);
            let r_hi = e6 * r0 + (p.p5 + 1.0) / p.p6 * (1.0 - e6);
            let a_hi = e3 * a0 + p.drive / p.p3 * (1.0 - e3);
            (j, o_lo, o_hi, r_lo, r_hi, a_hi, e3)
        };
        let rows: Vec<_> = idx.clone().map(|j| env(j, (j - j0) as f64 * h)).collect();
        let o_max = rows.iter().map(|x| x.2).fold(f64::NEG_INFINITY, f64::max);
        let r_max = rows.iter().map(|x| x.4).fold(f64::NEG_INFINITY, f64::max);
        let a_floor = p.drive / (p.p3 * (1.0 + p.p2 * o_max * r_max));
        for (j, o_lo, o_hi, r_lo, r_hi, a_hi, e3) in rows {
            if j == j0 && k > 0 {
                continue;
            }
            lower[j] = State::new(e3 * a0 + a_floor * (1.0 - e3), r_lo, o_lo);
            upper[j] = State::new(a_hi, r_hi, o_hi);
        }
    }

    let mut tr = Trajectory::with_capacity(total);
    tr.flags.fitting_condition = Some(check_fitting_condition(p, hist, FITTING_TOL));
    for j in 0..total {
        let s = State::new(a[j], r[j], o[j]);
        tr.push(j as f64 * h, s, field(p, s.a, s.r, s.o, ad[j]));
    }
    Ok(PicardSolution { trajectory: tr, lower, upper, sweeps })
}
