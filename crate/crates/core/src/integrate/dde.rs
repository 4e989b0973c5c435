use super::{blown, bracket_blow_up, Trajectory, GAUSS8};
use crate::error::{Error, Result};
use crate::model::{check_fitting_condition, field, hermite_unit, HistorySpec, ModelParams, State, FITTING_TOL};

pub const DEFAULT_STEPS_PER_DELAY: usize = 200;

struct Stepper<'a> {
    p: &'a ModelParams,
    hist: &'a HistorySpec,
    n_delay: usize,
    h: f64,
}

impl Stepper<'_> {
    /// `a(t - tau)` at offset `u` into step `n`.
    fn delayed(&self, tr: &Trajectory, n: usize, u: f64) -> f64 {
        if n < self.n_delay {
            self.hist.eval((n as f64 - self.n_delay as f64) * self.h + u)
        } else {
            let m = n - self.n_delay;
            let (x0, x1) = (tr.states[m].a, tr.states[m + 1].a);
            let (d0, d1) = (tr.slopes[m][0], tr.slopes[m + 1][0]);
            hermite_unit(u / self.h, x0, d0 * self.h, x1, d1 * self.h).0
        }
    }

    /// `o` at offset `u` into step `n` by variation of constants.
    fn cortisol(&self, tr: &Trajectory, n: usize, o0: f64, u: f64) -> f64 {
        if u == 0.0 {
            return o0;
        }
        let half = 0.5 * u;
        let integral: f64 = GAUSS8
            .iter()
            .map(|&(x, w)| {
                let v = half * (x + 1.0);
                w * (-(u - v)).exp() * self.delayed(tr, n, v)
            })
            .sum();
        o0 * (-u).exp() + half * integral
    }

    fn step(&self, tr: &Trajectory, n: usize, s: &State, hs: f64) -> State {
        let o_mid = self.cortisol(tr, n, s.o, 0.5 * hs);
        let o_end = self.cortisol(tr, n, s.o, hs);
        let f = |a: f64, r: f64, o: f64| {
            let d = field(self.p, a, r, o, 0.0);
            [d[0], d[1]]
        };
        let k1 = f(s.a, s.r, s.o);
        let k2 = f(s.a + 0.5 * hs * k1[0], s.r + 0.5 * hs * k1[1], o_mid);
        let k3 = f(s.a + 0.5 * hs * k2[0], s.r + 0.5 * hs * k2[1], o_mid);
        let k4 = f(s.a + hs * k3[0], s.r + hs * k3[1], o_end);
        State::new(
            s.a + hs / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
            s.r + hs / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
            o_end,
        )
    }

    fn slope(&self, s: &State, a_delayed: f64) -> [f64; 3] {
        field(self.p, s.a, s.r, s.o, a_delayed)
    }
}

/// Method of steps for the delayed system with step `tau / steps_per_delay`.
///
/// Within each step `o` is advanced exactly by variation of constants, with
/// the integral of the known delayed ACTH done by 8-point Gauss–Legendre;
/// `(a, r)` is advanced by RK4 reading `o` at the stage times. The delayed
/// ACTH comes from the history on the first window and from the cubic
/// Hermite interpolant of earlier nodes afterwards.
///
/// ```
/// use hpa_core::{integrate::integrate_dde, solve_equilibrium, HistorySpec, ModelParams};
///
/// let p = ModelParams::new(1.0, 15.0, 7.2, 0.05, 0.11, 2.9, 1.0)?;
/// let eq = solve_equilibrium(&p)?;
/// let tr = integrate_dde(&p, &HistorySpec::constant(eq.state()), 10.0, 64)?;
/// assert!(tr.last().distance(&eq.state()) < 1e-12);
/// # Ok::<(), hpa_core::Error>(())
/// ```
pub fn integrate_dde(params: &ModelParams, hist: &HistorySpec, t_end: f64, steps_per_delay: usize) -> Result<Trajectory> {
    params.validate()?;
    if params.tau == 0.0 {
        return Err(Error::ZeroDelay);
    }
    if steps_per_delay < 16 {
        return Err(Error::invalid(format!("steps_per_delay = {steps_per_delay} must be >= 16")));
    }
    if !(t_end > 0.0 && t_end.is_finite()) {
        return Err(Error::invalid(format!("t_end = {t_end} must be positive")));
    }
    hist.validate(params.tau)?;
    let st = Stepper { p: params, hist, n_delay: steps_per_delay, h: params.tau / steps_per_delay as f64 };
    let n_steps = (t_end / st.h - 1e-9).ceil().max(1.0) as usize;

    let mut tr = Trajectory::with_capacity(n_steps + 1);
    tr.flags.fitting_condition = Some(check_fitting_condition(params, hist, FITTING_TOL));
    let mut s = hist.initial_state();
    tr.push(0.0, s, st.slope(&s, st.delayed(&tr, 0, 0.0)));
    for n in 0..n_steps {
        let next = st.step(&tr, n, &s, st.h);
        let t = n as f64 * st.h;
        if blown(&next) {
            let last = s;
            tr.flags.blow_up_time = Some(bracket_blow_up(t, st.h, |hs| st.step(&tr, n, &last, hs)));
            break;
        }
        s = next;
        let ad = if n + 1 < st.n_delay {
            st.delayed(&tr, n + 1, 0.0)
        } else {
            st.delayed(&tr, n, st.h)
        };
        let d = st.slope(&s, ad);
        tr.push((n + 1) as f64 * st.h, s, d);
    }
    tr.mark_box_entry(params);
    Ok(tr)
}
