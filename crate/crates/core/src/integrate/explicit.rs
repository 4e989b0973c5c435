use crate::error::{Error, Result};
use crate::model::{ModelParams, State};

/// `∫_0^t e^{k s} ds`, continuous through `k = 0`.
fn exp_integral(k: f64, t: f64) -> f64 {
    if k == 0.0 {
        t
    } else {
        (k * t).exp_m1() / k
    }
}

/// Closed-form state at time `t` when `p2 = p4 = 0`, or when `p5 = p6 = 0`
/// and the receptor starts at zero.
///
/// ```
/// use hpa_core::{integrate::explicit_case_solution, ModelParams, State};
///
/// let p = ModelParams::without_delay(1.0, 0.0, 2.0, 0.0, 0.5, 1.5)?;
/// let s = explicit_case_solution(&p, State::new(0.2, 0.1, 0.3), 60.0)?;
/// assert!((s.a - 0.5).abs() < 1e-12 && (s.r - 1.0).abs() < 1e-12 && (s.o - 0.5).abs() < 1e-12);
/// # Ok::<(), hpa_core::Error>(())
/// ```
pub fn explicit_case_solution(params: &ModelParams, initial: State, t: f64) -> Result<State> {
    params.validate()?;
    if !t.is_finite() || !initial.is_finite() {
        return Err(Error::invalid(format!("non-finite time {t} or state {initial:?}")));
    }
    let p = params;
    let receptor_free = p.p2 == 0.0 && p.p4 == 0.0 && p.p6 > 0.0;
    let receptor_frozen = p.p5 == 0.0 && p.p6 == 0.0 && initial.r == 0.0;
    if p.p3 <= 0.0 || !(receptor_free || receptor_frozen) {
        return Err(Error::UnsupportedCase(
            "closed form needs p3 > 0 and either p2 = p4 = 0, p6 > 0 or p5 = p6 = 0 with r0 = 0".into(),
        ));
    }
    let c = p.drive / p.p3;
    let e = (-t).exp();
    let a = (initial.a - c) * (-p.p3 * t).exp() + c;
    let o = (initial.o - c) * e + (initial.a - c) * e * exp_integral(1.0 - p.p3, t) + c;
    let r = if receptor_free {
        let top = (1.0 + p.p5) / p.p6;
        (initial.r - top) * (-p.p6 * t).exp() + top
    } else {
        0.0
    };
    Ok(State::new(a, r, o))
}
