use hpa_core::lyapunov::{lyapunov_constants, lyapunov_value, verify_decay, LyapunovReport};
use hpa_core::{solve_equilibrium, Equilibrium, ModelParams, State};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn uniform_log(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

/// Draws until the hypotheses hold.
fn applicable_draw(rng: &mut ChaCha8Rng) -> (ModelParams, Equilibrium, LyapunovReport) {
    loop {
        let p = ModelParams::without_delay(
            uniform_log(rng, 0.005, 0.1),
            uniform_log(rng, 0.05, 1.0),
            uniform_log(rng, 1.0, 5.0),
            uniform_log(rng, 0.2, 5.0),
            uniform_log(rng, 0.005, 0.1),
            uniform_log(rng, 2.0, 6.0),
        )
        .unwrap();
        let eq = solve_equilibrium(&p).unwrap();
        let rep = lyapunov_constants(&p, &eq);
        if rep.applicable {
            return (p, eq, rep);
        }
    }
}

/// A nonnegative state along a random direction with `W = target`.
fn state_at_level(rng: &mut ChaCha8Rng, eq: &Equilibrium, target: f64) -> State {
    let s = eq.state().to_array();
    loop {
        let dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let at = |c: f64| State::new(s[0] + c * dir[0], s[1] + c * dir[1], s[2] + c * dir[2]);
        let (mut lo, mut hi) = (0.0, 1.0);
        while lyapunov_value(eq, &at(hi)) < target {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if lyapunov_value(eq, &at(mid)) < target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let x = at(lo);
        if x.min_component() > 0.0 {
            return x;
        }
    }
}

#[test]
fn decay_inequality_along_trajectories() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let (p, eq, rep) = applicable_draw(&mut rng);
        let level = rng.gen_range(0.1..0.9) * rep.basin_radius_w;
        let init = state_at_level(&mut rng, &eq, level);
        let check = verify_decay(&p, &eq, init, 30.0).unwrap();
        assert!(check.converged, "{p:?}");
        let w = &check.w_series;
        for i in 1..w.len() - 1 {
            let dw = (w[i + 1].1 - w[i - 1].1) / (w[i + 1].0 - w[i - 1].0);
            assert!(dw <= rep.decay_bound(w[i].1) + 1e-6, "{p:?} at t = {}: {dw} vs {}", w[i].0, rep.decay_bound(w[i].1));
        }
        assert!(rep.beta <= rep.beta_bound && rep.gamma <= rep.gamma_bound);
    }
}

#[test]
fn half_basin_boundary_converges() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..5 {
        let (p, eq, rep) = applicable_draw(&mut rng);
        let init = state_at_level(&mut rng, &eq, 0.5 * rep.basin_radius_w);
        assert!(verify_decay(&p, &eq, init, 40.0).unwrap().converged);
    }
}

#[test]
fn reference_set_decays_near_its_fixed_point() {
    let p = ModelParams::without_delay(1.0, 15.0, 7.2, 0.05, 0.11, 2.9).unwrap();
    let eq = solve_equilibrium(&p).unwrap();
    let s = eq.state();
    let check = verify_decay(&p, &eq, State::new(s.a + 0.01, s.r + 0.005, s.o - 0.01), 30.0).unwrap();
    assert!(check.converged);
}

fn eq_at(a: f64, r: f64, o: f64) -> Equilibrium {
    Equilibrium { a_star: a, r_star: r, o_star: o, k1: 0.0, k2: 0.0, k3: 0.0, k4: 0.0 }
}

proptest! {
    #[test]
    fn value_matches_term_by_term(
        a in 0.0f64..5.0, r in 0.0f64..5.0, o in 0.0f64..5.0,
        ea in 0.0f64..5.0, er in 0.0f64..5.0, eo in 0.0f64..5.0,
    ) {
        let eq = eq_at(ea, er, eo);
        let terms = [a - ea, r - er, o - eo, o * r - eo * er];
        let want: f64 = terms.iter().map(|d| d * d).sum::<f64>() / 2.0;
        let got = lyapunov_value(&eq, &State::new(a, r, o));
        prop_assert!(got >= 0.0);
        prop_assert!((got - want).abs() <= 1e-12 * want.max(1.0));
        prop_assert_eq!(got == 0.0, a == ea && r == er && o == eo);
    }
}

/// `dW/dt` from the gradient of `W` and the vector field.
fn exact_rate(p: &ModelParams, eq: &Equilibrium, s: &State) -> f64 {
    let f = hpa_core::model::rhs(p, s, s.a).unwrap();
    let dp = s.o * s.r - eq.o_star * eq.r_star;
    let grad = [s.a - eq.a_star, s.r - eq.r_star + dp * s.o, s.o - eq.o_star + dp * s.r];
    grad.iter().zip(f).map(|(g, v)| g * v).sum()
}

#[test]
fn cortisol_rate_caps_the_decay_constant() {
    let p = ModelParams::without_delay(
        0.0077141468164285435,
        0.11605322555401705,
        1.3030241448173057,
        1.588043762962137,
        0.01194641214287314,
        3.116119723301474,
    )
    .unwrap();
    let eq = solve_equilibrium(&p).unwrap();
    let rep = lyapunov_constants(&p, &eq);
    assert!(rep.applicable);
    let init = State::new(0.06878847370663584, 0.03579380372418754, 0.005058088666197446);
    let tr = hpa_core::integrate::integrate_ode(&p, init, 5.0, 1e-3).unwrap();
    // α built from min{p3 - ½, p6, 1} instead of ½
    let uncapped = LyapunovReport { alpha: rep.alpha + 2.0 * ((p.p3 - 0.5).min(p.p6).min(1.0) - 0.5), ..rep };
    let margin = |r: &LyapunovReport| {
        tr.states
            .iter()
            .map(|s| {
                let w = lyapunov_value(&eq, s);
                exact_rate(&p, &eq, s) - r.decay_bound(w)
            })
            .fold(f64::NEG_INFINITY, f64::max)
    };
    assert!(margin(&rep) <= 0.0, "{}", margin(&rep));
    let over = margin(&uncapped);
    assert!((over - 2.474e-5).abs() < 1e-7, "{over}");
}
