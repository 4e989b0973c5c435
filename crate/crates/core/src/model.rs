//! Parameters, state, initial history and the right-hand sides of the
//! delayed three-hormone system
//!
//! ```text
//! a' = A / (1 + p2 o r) - p3 a
//! r' = (o r)^2 / (p4 + (o r)^2) + p5 - p6 r
//! o' = a(t - tau) - o
//! ```
//!
//! `a` is ACTH, `r` the glucocorticoid-receptor density and `o` cortisol.
//! `A` is the CRH drive.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default absolute tolerance for [`check_fitting_condition`].
pub const FITTING_TOL: f64 = 1e-9;

/// Model constants. All fields are finite and non-negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    /// CRH drive.
    #[serde(rename = "A", default)]
    pub drive: f64,
    #[serde(default)]
    pub p2: f64,
    #[serde(default)]
    pub p3: f64,
    #[serde(default)]
    pub p4: f64,
    #[serde(default)]
    pub p5: f64,
    #[serde(default)]
    pub p6: f64,
    #[serde(default)]
    pub tau: f64,
}

impl ModelParams {
    pub fn new(drive: f64, p2: f64, p3: f64, p4: f64, p5: f64, p6: f64, tau: f64) -> Result<Self> {
        let p = ModelParams { drive, p2, p3, p4, p5, p6, tau };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`ModelParams::new`] with `tau = 0`.
    pub fn without_delay(drive: f64, p2: f64, p3: f64, p4: f64, p5: f64, p6: f64) -> Result<Self> {
        Self::new(drive, p2, p3, p4, p5, p6, 0.0)
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        self.tau = tau;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.named_fields() {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::invalid(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    fn named_fields(&self) -> [(&'static str, f64); 7] {
        [
            ("A", self.drive),
            ("p2", self.p2),
            ("p3", self.p3),
            ("p4", self.p4),
            ("p5", self.p5),
            ("p6", self.p6),
            ("tau", self.tau),
        ]
    }

    /// `A > 0` and every rate constant strictly positive.
    pub fn is_generic(&self) -> bool {
        self.drive > 0.0
            && self.p2 > 0.0
            && self.p3 > 0.0
            && self.p4 > 0.0
            && self.p5 > 0.0
            && self.p6 > 0.0
    }

    /// Lower edge `p5/p6` of the receptor band.
    pub fn r_lower(&self) -> f64 {
        self.p5 / self.p6
    }

    /// Upper edge `(p5+1)/p6` of the receptor band.
    pub fn r_upper(&self) -> f64 {
        (self.p5 + 1.0) / self.p6
    }

    /// Asymptotic box `[a_lo, A/p3] x [p5/p6, (p5+1)/p6] x [a_lo, A/p3]`,
    /// with `a_lo = A p6 / (p3 p6 + A p2 (p5 + 1))`.
    pub fn asymptotic_box(&self) -> StateBox {
        let a_lo = self.drive * self.p6 / (self.p3 * self.p6 + self.drive * self.p2 * (self.p5 + 1.0));
        let a_hi = self.drive / self.p3;
        StateBox { a: (a_lo, a_hi), r: (self.r_lower(), self.r_upper()), o: (a_lo, a_hi) }
    }
}

/// Axis-aligned box in state space, closed on every side.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateBox {
    pub a: (f64, f64),
    pub r: (f64, f64),
    pub o: (f64, f64),
}

impl StateBox {
    pub fn contains(&self, s: &State) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(s.a, self.a) && inside(s.r, self.r) && inside(s.o, self.o)
    }
}

/// Hormone state `(a, r, o)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct State {
    pub a: f64,
    pub r: f64,
    pub o: f64,
}

impl State {
    pub const fn new(a: f64, r: f64, o: f64) -> Self {
        State { a, r, o }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.a, self.r, self.o]
    }

    pub fn from_array(v: [f64; 3]) -> Self {
        State { a: v[0], r: v[1], o: v[2] }
    }

    pub fn is_finite(&self) -> bool {
        self.a.is_finite() && self.r.is_finite() && self.o.is_finite()
    }

    pub fn min_component(&self) -> f64 {
        self.a.min(self.r).min(self.o)
    }

    pub fn max_abs(&self) -> f64 {
        self.a.abs().max(self.r.abs()).max(self.o.abs())
    }

    /// Sup-norm distance.
    pub fn distance(&self, other: &State) -> f64 {
        (self.a - other.a).abs().max((self.r - other.r).abs()).max((self.o - other.o).abs())
    }
}

/// Hill nonlinearity `x^2 / (p4 + x^2)`; the `p4 = 0, x = 0` corner is taken as 0.
#[inline]
pub fn hill(x: f64, p4: f64) -> f64 {
    let x2 = x * x;
    if x2 == 0.0 {
        0.0
    } else {
        x2 / (p4 + x2)
    }
}

/// Unchecked vector field used by the integrators.
#[inline]
pub(crate) fn field(p: &ModelParams, a: f64, r: f64, o: f64, a_delayed: f64) -> [f64; 3] {
    let x = o * r;
    [
        p.drive / (1.0 + p.p2 * x) - p.p3 * a,
        hill(x, p.p4) + p.p5 - p.p6 * r,
        a_delayed - o,
    ]
}

/// Evaluates `(f1, f2, f3)` at `state` with the delayed ACTH value `a_delayed`.
pub fn rhs(params: &ModelParams, state: &State, a_delayed: f64) -> Result<[f64; 3]> {
    if !state.is_finite() || !a_delayed.is_finite() {
        return Err(Error::invalid(format!("non-finite state {state:?} or delayed value {a_delayed}")));
    }
    let denom = 1.0 + params.p2 * state.o * state.r;
    if denom <= 0.0 {
        return Err(Error::invalid(format!("1 + p2*o*r = {denom} must be positive")));
    }
    Ok(field(params, state.a, state.r, state.o, a_delayed))
}

/// Initial ACTH profile on `[-tau, 0]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "snake_case")]
pub enum HistoryShape {
    /// `a(t) = value`.
    Constant { value: f64 },
    /// `a(t) = base + lambda * t^2 * exp(-t)`.
    Bump { base: f64, lambda: f64 },
    /// Piecewise cubic Hermite through `(t, value, slope)` nodes, sorted by `t`.
    Hermite { nodes: Vec<HermiteNode> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HermiteNode {
    pub t: f64,
    pub value: f64,
    pub slope: f64,
}

/// Cubic Hermite basis on the unit interval, returning value and d/ds.
#[inline]
pub(crate) fn hermite_unit(s: f64, y0: f64, m0: f64, y1: f64, m1: f64) -> (f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    let v = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
    let d00 = 6.0 * s2 - 6.0 * s;
    let d10 = 3.0 * s2 - 4.0 * s + 1.0;
    let d01 = -6.0 * s2 + 6.0 * s;
    let d11 = 3.0 * s2 - 2.0 * s;
    (v, d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1)
}

impl HistoryShape {
    pub fn eval(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).0
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.eval_with_derivative(t).1
    }

    pub fn eval_with_derivative(&self, t: f64) -> (f64, f64) {
        match self {
            HistoryShape::Constant { value } => (*value, 0.0),
            HistoryShape::Bump { base, lambda } => {
                let e = (-t).exp();
                (base + lambda * t * t * e, lambda * (2.0 * t - t * t) * e)
            }
            HistoryShape::Hermite { nodes } => {
                let n = nodes.len();
                // clamp to the end pieces
                let i = match nodes.iter().position(|nd| nd.t >= t) {
                    Some(0) => 0,
                    Some(i) => i - 1,
                    None => n.saturating_sub(2),
                };
                let (l, r) = (nodes[i], nodes[(i + 1).min(n - 1)]);
                let h = r.t - l.t;
                if h <= 0.0 {
                    return (l.value, l.slope);
                }
                let s = (t - l.t) / h;
                let (v, dv) = hermite_unit(s, l.value, l.slope * h, r.value, r.slope * h);
                (v, dv / h)
            }
        }
    }
}

/// Initial data: the ACTH profile on `[-tau, 0]` together with `r(0)` and `o(0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistorySpec {
    pub shape: HistoryShape,
    pub r0: f64,
    pub o0: f64,
}

impl HistorySpec {
    pub fn new(shape: HistoryShape, r0: f64, o0: f64) -> Self {
        HistorySpec { shape, r0, o0 }
    }

    /// Constant history equal to `state.a` with `r0 = state.r`, `o0 = state.o`.
    pub fn constant(state: State) -> Self {
        HistorySpec { shape: HistoryShape::Constant { value: state.a }, r0: state.r, o0: state.o }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.shape.eval(t)
    }

    pub fn derivative(&self, t: f64) -> f64 {
        self.shape.derivative(t)
    }

    /// State at `t = 0`.
    pub fn initial_state(&self) -> State {
        State::new(self.shape.eval(0.0), self.r0, self.o0)
    }

    /// Checks finiteness, `r0, o0 > 0`, node coverage of `[-tau, 0]` and
    /// non-negativity on a 1024-point sample of `[-tau, 0]`.
    pub fn validate(&self, tau: f64) -> Result<()> {
        if !(self.r0.is_finite() && self.r0 > 0.0 && self.o0.is_finite() && self.o0 > 0.0) {
            return Err(Error::invalid(format!("r0 = {}, o0 = {} must be positive", self.r0, self.o0)));
        }
        if let HistoryShape::Hermite { nodes } = &self.shape {
            if nodes.len() < 2 {
                return Err(Error::invalid("hermite history needs at least two nodes"));
            }
            if nodes.windows(2).any(|w| w[1].t <= w[0].t) {
                return Err(Error::invalid("hermite nodes must be strictly increasing in t"));
            }
            let (first, last) = (nodes[0].t, nodes[nodes.len() - 1].t);
            if first > -tau + 1e-12 || last < -1e-12 {
                return Err(Error::invalid(format!("hermite nodes span [{first}, {last}], need [-{tau}, 0]")));
            }
        }
        let (lo, _) = self.extrema(tau, 1024);
        if !lo.is_finite() || lo < 0.0 {
            return Err(Error::invalid(format!("history takes negative or non-finite value {lo} on [-tau, 0]")));
        }
        let (v0, d0) = self.shape.eval_with_derivative(0.0);
        if !v0.is_finite() || !d0.is_finite() {
            return Err(Error::invalid("history is not evaluable at 0"));
        }
        Ok(())
    }

    /// Sampled (min, max) of the profile over `[-tau, 0]`, endpoints included.
    pub fn extrema(&self, tau: f64, samples: usize) -> (f64, f64) {
        let n = samples.max(2);
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..=n {
            let t = -tau + tau * i as f64 / n as f64;
            let v = self.eval(t);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if let HistoryShape::Hermite { nodes } = &self.shape {
            for nd in nodes {
                lo = lo.min(nd.value);
                hi = hi.max(nd.value);
            }
        }
        (lo, hi)
    }
}

/// Residual `a'(0) + p3 a(0) - A / (1 + p2 o0 r0)` of the compatibility
/// condition between the history and the ACTH equation at `t = 0`.
pub fn fitting_residual(params: &ModelParams, hist: &HistorySpec) -> f64 {
    let (v, d) = hist.shape.eval_with_derivative(0.0);
    d + params.p3 * v - params.drive / (1.0 + params.p2 * hist.o0 * hist.r0)
}

/// `true` when the history derivative at 0 matches the ACTH equation within `tol`.
pub fn check_fitting_condition(params: &ModelParams, hist: &HistorySpec, tol: f64) -> bool {
    fitting_residual(params, hist).abs() <= tol
}

/// The ACTH level `A / (p3 (1 + p2 o0 r0))` that makes a flat-topped history
/// satisfy the fitting condition.
pub fn fitted_base(params: &ModelParams, r0: f64, o0: f64) -> f64 {
    params.drive / (params.p3 * (1.0 + params.p2 * o0 * r0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ex21() -> ModelParams {
        ModelParams::without_delay(1.0, 15.0, 7.2, 0.05, 0.11, 2.9).unwrap()
    }

    #[test]
    fn rhs_vanishes_at_case_one_fixed_point() {
        let p = ModelParams::without_delay(0.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let d = rhs(&p, &State::new(0.0, 1.0, 0.0), 0.0).unwrap();
        assert_eq!(d, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn rhs_hand_arithmetic() {
        let p = ModelParams::without_delay(1.0, 0.0, 1.0, 1.0, 0.0, 1.0).unwrap();
        // f1 = 1/1 - 1, f2 = 0/(1+0) + 0 - 0, f3 = 1 - 1
        let d = rhs(&p, &State::new(1.0, 0.0, 1.0), 1.0).unwrap();
        assert_eq!(d, [0.0, 0.0, 0.0]);
    }

    #[test]
    fn rhs_small_near_example_equilibrium() {
        // equilibrium of the 2.1 parameter set, rounded to 4 digits
        let d = rhs(&ex21(), &State::new(0.1293, 0.0381, 0.1293), 0.1293).unwrap();
        assert!(d.iter().all(|v| v.abs() < 1e-2), "{d:?}");
    }

    #[test]
    fn rhs_rejects_non_finite() {
        let err = rhs(&ex21(), &State::new(f64::NAN, 0.1, 0.1), 0.0).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        assert!(rhs(&ex21(), &State::new(0.1, 0.1, 0.1), f64::INFINITY).is_err());
    }

    #[test]
    fn hill_corner_is_zero() {
        assert_eq!(hill(0.0, 0.0), 0.0);
        assert_eq!(hill(2.0, 0.0), 1.0);
        assert!((hill(1.0, 1.0) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn params_reject_negative_and_nan() {
        assert!(ModelParams::without_delay(-1.0, 1.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ModelParams::without_delay(1.0, f64::NAN, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(ex21().with_tau(-0.5).is_err());
    }

    #[test]
    fn fitting_condition_catalog() {
        let p = ex21().with_tau(1.0).unwrap();
        let (r0, o0) = (0.2, 0.3);
        let a0 = fitted_base(&p, r0, o0);
        let bump = HistorySpec::new(HistoryShape::Bump { base: a0, lambda: 0.7 }, r0, o0);
        assert!(check_fitting_condition(&p, &bump, FITTING_TOL));
        let flat = HistorySpec::new(HistoryShape::Constant { value: a0 }, r0, o0);
        assert!(check_fitting_condition(&p, &flat, FITTING_TOL));
        let zero = HistorySpec::new(HistoryShape::Constant { value: 0.0 }, r0, o0);
        assert!(!check_fitting_condition(&p, &zero, FITTING_TOL));
    }

    #[test]
    fn bump_derivative_matches_finite_difference() {
        let s = HistoryShape::Bump { base: 0.3, lambda: 1.7 };
        for &t in &[-2.0, -1.0, -0.3, 0.0] {
            let h = 1e-6;
            let fd = (s.eval(t + h) - s.eval(t - h)) / (2.0 * h);
            assert!((fd - s.derivative(t)).abs() < 1e-8);
        }
    }

    #[test]
    fn hermite_interpolates_nodes_and_slopes() {
        let nodes = vec![
            HermiteNode { t: -2.0, value: 1.0, slope: 0.5 },
            HermiteNode { t: -0.5, value: 2.0, slope: -1.0 },
            HermiteNode { t: 0.0, value: 1.5, slope: 0.25 },
        ];
        let s = HistoryShape::Hermite { nodes: nodes.clone() };
        for nd in &nodes {
            let (v, d) = s.eval_with_derivative(nd.t);
            assert!((v - nd.value).abs() < 1e-14);
            assert!((d - nd.slope).abs() < 1e-12);
        }
    }

    #[test]
    fn history_validation() {
        let ok = HistorySpec::new(HistoryShape::Constant { value: 0.2 }, 0.1, 0.1);
        assert!(ok.validate(1.0).is_ok());
        let neg = HistorySpec::new(HistoryShape::Bump { base: 0.1, lambda: -5.0 }, 0.1, 0.1);
        assert!(neg.validate(2.0).is_err());
        let short = HistorySpec::new(
            HistoryShape::Hermite {
                nodes: vec![
                    HermiteNode { t: -0.5, value: 1.0, slope: 0.0 },
                    HermiteNode { t: 0.0, value: 1.0, slope: 0.0 },
                ],
            },
            0.1,
            0.1,
        );
        assert!(short.validate(1.0).is_err());
        assert!(HistorySpec::new(HistoryShape::Constant { value: 0.2 }, 0.0, 0.1).validate(1.0).is_err());
    }

    #[test]
    fn receptor_band_is_forward_invariant() {
        // sample the box and check the sign of f2 on the band edges
        let p = ex21();
        for i in 0..=20 {
            for j in 0..=20 {
                let a = p.drive / p.p3 * i as f64 / 20.0;
                let o = 2.0 * j as f64 / 20.0;
                let up = rhs(&p, &State::new(a, p.r_upper(), o), a).unwrap();
                let lo = rhs(&p, &State::new(a, p.r_lower(), o), a).unwrap();
                assert!(up[1] <= 0.0 && lo[1] >= 0.0);
                let mid = rhs(&p, &State::new(a, 0.5 * (p.r_lower() + p.r_upper()), o), a).unwrap();
                assert!(mid[0] >= -p.p3 * a);
            }
        }
    }
}
