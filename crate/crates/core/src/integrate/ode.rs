use super::{blown, bracket_blow_up, Trajectory};
use crate::error::{Error, Result};
use crate::model::{field, ModelParams, State};

fn deriv(p: &ModelParams, s: &State) -> [f64; 3] {
    field(p, s.a, s.r, s.o, s.a)
}

fn rk4(p: &ModelParams, s: &State, h: f64) -> State {
    let x = s.to_array();
    let shift = |k: &[f64; 3], c: f64| State::from_array([x[0] + c * k[0], x[1] + c * k[1], x[2] + c * k[2]]);
    let k1 = deriv(p, s);
    let k2 = deriv(p, &shift(&k1, 0.5 * h));
    let k3 = deriv(p, &shift(&k2, 0.5 * h));
    let k4 = deriv(p, &shift(&k3, h));
    let mut out = [0.0; 3];
    for c in 0..3 {
        out[c] = x[c] + h / 6.0 * (k1[c] + 2.0 * k2[c] + 2.0 * k3[c] + k4[c]);
    }
    State::from_array(out)
}

/// Classic fourth-order Runge–Kutta on `[0, t_end]` for the non-delayed
/// system. The step is `t_end / ceil(t_end / dt)`, so the grid ends exactly
/// at `t_end`.
///
/// ```
/// use hpa_core::{integrate::integrate_ode, ModelParams, State};
///
/// let p = ModelParams::without_delay(0.0, 1.0, 1.0, 1.0, 1.0, 1.0)?;
/// let tr = integrate_ode(&p, State::new(0.0, 1.0, 0.0), 5.0, 0.01)?;
/// assert_eq!(tr.last(), State::new(0.0, 1.0, 0.0));
/// # Ok::<(), hpa_core::Error>(())
/// ```
pub fn integrate_ode(params: &ModelParams, initial: State, t_end: f64, dt: f64) -> Result<Trajectory> {
    params.validate()?;
    if !(t_end > 0.0 && t_end.is_finite() && dt > 0.0 && dt <= t_end) {
        return Err(Error::invalid(format!("need 0 < dt <= t_end, got dt = {dt}, t_end = {t_end}")));
    }
    if !initial.is_finite() || initial.min_component() < 0.0 {
        return Err(Error::invalid(format!("initial state {initial:?} must be finite and non-negative")));
    }
    let n = (t_end / dt - 1e-9).ceil().max(1.0) as usize;
    let h = t_end / n as f64;
    let mut tr = Trajectory::with_capacity(n + 1);
    let mut s = initial;
    tr.push(0.0, s, deriv(params, &s));
    for i in 0..n {
        let next = rk4(params, &s, h);
        let t = i as f64 * h;
        if blown(&next) {
            let last = s;
            tr.flags.blow_up_time = Some(bracket_blow_up(t, h, |hs| rk4(params, &last, hs)));
            break;
        }
        s = next;
        let t1 = if i + 1 == n { t_end } else { (i + 1) as f64 * h };
        tr.push(t1, s, deriv(params, &s));
    }
    tr.mark_box_entry(params);
    Ok(tr)
}
