//! Trajectories of the non-delayed and delayed systems.
//!
//! Every integrator here is fixed-step. Node states are stored together
//! with their time derivatives, so any trajectory doubles as a piecewise
//! cubic Hermite interpolant.

mod dde;
mod explicit;
mod ode;
mod picard;

use serde::{Deserialize, Serialize};

pub use dde::{integrate_dde, DEFAULT_STEPS_PER_DELAY};
pub use explicit::explicit_case_solution;
pub use ode::integrate_ode;
pub use picard::{picard_oracle, PicardSolution, PICARD_NODES_PER_WINDOW};

pub use crate::equilibria::blow_up_estimate;
use crate::model::{hermite_unit, ModelParams, State, StateBox};

/// Any component above this magnitude counts as blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;
/// Width to which the blow-up time is bracketed.
pub const BLOW_UP_RESOLUTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryFlags {
    /// First node time with a negative component.
    pub nonneg_violation: Option<f64>,
    /// Earliest node time after which every node stays in the asymptotic box.
    pub bounds_entry_time: Option<f64>,
    /// Bracketed time at which the solution left every bounded set.
    pub blow_up_time: Option<f64>,
    /// Whether the initial history met the fitting condition (delayed runs only).
    pub fitting_condition: Option<bool>,
}

/// Time-stamped states with node derivatives for dense output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    /// `(a', r', o')` at each node.
    pub slopes: Vec<[f64; 3]>,
    pub flags: TrajectoryFlags,
}

impl Trajectory {
    pub(crate) fn with_capacity(n: usize) -> Self {
        Trajectory {
            times: Vec::with_capacity(n),
            states: Vec::with_capacity(n),
            slopes: Vec::with_capacity(n),
            flags: TrajectoryFlags::default(),
        }
    }

    pub(crate) fn push(&mut self, t: f64, s: State, d: [f64; 3]) {
        if self.flags.nonneg_violation.is_none() && s.min_component() < 0.0 {
            self.flags.nonneg_violation = Some(t);
        }
        self.times.push(t);
        self.states.push(s);
        self.slopes.push(d);
    }

    /// Builds a trajectory from increasing `(t, state)` samples, with node
    /// slopes from finite differences.
    pub fn from_samples(samples: impl IntoIterator<Item = (f64, State)>) -> Self {
        let (times, states): (Vec<f64>, Vec<State>) = samples.into_iter().unzip();
        let n = times.len();
        let slopes: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                if n < 2 {
                    return [0.0; 3];
                }
                let (l, r) = (i.saturating_sub(1), (i + 1).min(n - 1));
                let (x0, x1) = (states[l].to_array(), states[r].to_array());
                let h = times[r] - times[l];
                [0, 1, 2].map(|c| (x1[c] - x0[c]) / h)
            })
            .collect();
        let mut tr = Trajectory::with_capacity(n);
        for ((t, s), d) in times.into_iter().zip(states).zip(slopes) {
            tr.push(t, s, d);
        }
        tr
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        *self.times.last().expect("empty trajectory")
    }

    pub fn last(&self) -> State {
        *self.states.last().expect("empty trajectory")
    }

    /// Cubic Hermite value at `t`, or `None` outside the covered span.
    pub fn interpolate(&self, t: f64) -> Option<State> {
        if self.is_empty() || !(t >= self.t_start() && t <= self.t_end()) {
            return None;
        }
        let i = self.times.partition_point(|&x| x <= t).saturating_sub(1).min(self.len().saturating_sub(2));
        if self.len() == 1 {
            return Some(self.states[0]);
        }
        let (t0, t1) = (self.times[i], self.times[i + 1]);
        let h = t1 - t0;
        let s = (t - t0) / h;
        let (x0, x1) = (self.states[i].to_array(), self.states[i + 1].to_array());
        let (d0, d1) = (self.slopes[i], self.slopes[i + 1]);
        let mut out = [0.0; 3];
        for c in 0..3 {
            out[c] = hermite_unit(s, x0[c], d0[c] * h, x1[c], d1[c] * h).0;
        }
        Some(State::from_array(out))
    }

    /// Largest sup-norm distance to `other` over this trajectory's nodes
    /// that `other` also covers.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.times
            .iter()
            .zip(&self.states)
            .filter_map(|(&t, s)| other.interpolate(t).map(|o| s.distance(&o)))
            .fold(0.0, f64::max)
    }

    /// `n + 1` evenly spaced `(t, state)` samples over `[t0, t1]`.
    pub fn resample(&self, t0: f64, t1: f64, n: usize) -> Vec<(f64, State)> {
        let n = n.max(1);
        (0..=n)
            .filter_map(|i| {
                let t = if i == n { t1 } else { t0 + (t1 - t0) * i as f64 / n as f64 };
                self.interpolate(t).map(|s| (t, s))
            })
            .collect()
    }

    /// Sets `bounds_entry_time` from the stored nodes.
    pub(crate) fn mark_box_entry(&mut self, params: &ModelParams) {
        if !(params.is_generic()) || self.flags.blow_up_time.is_some() {
            return;
        }
        let b = widen(params.asymptotic_box());
        let tail = self.states.iter().rev().take_while(|s| b.contains(s)).count();
        if tail > 0 {
            self.flags.bounds_entry_time = Some(self.times[self.len() - tail]);
        }
    }
}

fn widen(b: StateBox) -> StateBox {
    let w = |(lo, hi): (f64, f64)| (lo - 1e-9 * lo.abs().max(1.0), hi + 1e-9 * hi.abs().max(1.0));
    StateBox { a: w(b.a), r: w(b.r), o: w(b.o) }
}

pub(crate) fn blown(s: &State) -> bool {
    !s.is_finite() || s.max_abs() > BLOW_UP_THRESHOLD
}

/// Bisects the step size in `(0, h]` for which a single step from the last
/// good node first blows up; `step(hs)` performs that step.
pub(crate) fn bracket_blow_up(t: f64, h: f64, step: impl Fn(f64) -> State) -> f64 {
    let (mut lo, mut hi) = (0.0, h);
    while hi - lo > BLOW_UP_RESOLUTION {
        let mid = 0.5 * (lo + hi);
        if blown(&step(mid)) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    t + hi
}

/// Eight-point Gauss–Legendre abscissae on `[-1, 1]` and weights.
pub(crate) const GAUSS8: [(f64, f64); 8] = [
    (-0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
    (-0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (-0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (-0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.183_434_642_495_649_8, 0.362_683_783_378_362),
    (0.525_532_409_916_329, 0.313_706_645_877_887_3),
    (0.796_666_477_413_626_7, 0.222_381_034_453_374_47),
    (0.960_289_856_497_536_3, 0.101_228_536_290_376_26),
];

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_rule_is_exact_for_degree_fifteen() {
        let q: f64 = GAUSS8.iter().map(|&(x, w)| w * x.powi(14)).sum();
        assert!((q - 2.0 / 15.0).abs() < 1e-14);
        let w: f64 = GAUSS8.iter().map(|p| p.1).sum();
        assert!((w - 2.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_reproduces_cubics() {
        let f = |t: f64| t * t * t - 2.0 * t;
        let df = |t: f64| 3.0 * t * t - 2.0;
        let mut tr = Trajectory::with_capacity(4);
        for i in 0..4 {
            let t = i as f64 * 0.5;
            tr.push(t, State::new(f(t), 1.0, 2.0), [df(t), 0.0, 0.0]);
        }
        for &t in &[0.1, 0.77, 1.49] {
            assert!((tr.interpolate(t).unwrap().a - f(t)).abs() < 1e-13);
        }
        assert!(tr.interpolate(1.6).is_none());
        assert_eq!(tr.resample(0.0, 1.5, 3).len(), 4);
    }
}
