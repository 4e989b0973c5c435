//! Exit criteria. Prints one `[PASS]`/`[FAIL]` line per criterion and exits
//! non-zero if any fails.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use hpa_cli::{fixture_dir, run, Cli, RunConfig};
use hpa_core::delay::{
    f_cubic, f_function, locate_characteristic_roots, switch_schedule, CrossingDirection, QuasiCharacteristic, Region,
};
use hpa_core::equilibria::{
    blow_up_estimate, linearization_coeffs, r_from_quartic_root, solve_equilibria, solve_equilibrium_quartic, Classification,
};
use hpa_core::integrate::{explicit_case_solution, integrate_dde, integrate_ode, picard_oracle};
use hpa_core::lyapunov::{lyapunov_constants, lyapunov_value, verify_decay};
use hpa_core::model::{fitted_base, rhs};
use hpa_core::periodic::{build_periodic_setup, estimate_period, verify_periodicity, HistoryChoice, PERIODICITY_TOL};
use hpa_core::stability::{char_cubic, routh_hurwitz, CharCubic, StabilityKind};
use hpa_core::{classify_case, poly, solve_equilibrium, Equilibrium, HistoryShape, HistorySpec, ModelParams, State};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Criterion = fn() -> Checks;

/// Named sub-checks of one criterion.
#[derive(Default)]
struct Checks(Vec<(String, bool)>);

impl Checks {
    fn check(&mut self, what: impl Into<String>, ok: bool) {
        self.0.push((what.into(), ok));
    }

    fn within(&mut self, what: &str, got: f64, want: f64, tol: f64) {
        self.check(format!("{what} = {got:.6} (want {want} ± {tol})"), (got - want).abs() <= tol);
    }

    fn passed(&self) -> bool {
        self.0.iter().all(|c| c.1)
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn generic_draw(rng: &mut ChaCha8Rng) -> ModelParams {
    let v: [f64; 6] = std::array::from_fn(|_| log_uniform(rng, 1e-2, 1e2));
    ModelParams::without_delay(v[0], v[1], v[2], v[3], v[4], v[5]).unwrap()
}

fn reference() -> ModelParams {
    ModelParams::without_delay(1.0, 15.0, 7.2, 0.05, 0.11, 2.9).unwrap()
}

fn reference_fixed_point() -> Checks {
    let mut c = Checks::default();
    let p = reference();
    let eq = solve_equilibrium(&p).unwrap();
    c.within("r*", eq.r_star, 0.03, 0.005);
    c.within("a*", eq.a_star, 0.12, 0.005);
    c.check("a* = o*", eq.a_star == eq.o_star);
    let cubic = char_cubic(&p, &eq);
    c.within("alpha1", cubic.alpha1, 11.07, 0.02);
    c.within("alpha2", cubic.alpha2, 30.78, 0.05);
    c.within("alpha3", cubic.alpha3, 20.75, 0.05);
    c.within("delta", cubic.delta, 2509.05, 0.01 * 2509.05);
    let v = routh_hurwitz(&cubic);
    c.check("asymptotically stable", v.kind == StabilityKind::AsymptoticallyStable);
    c.check(
        "three real negative roots",
        cubic.real_root_count() == 3 && cubic.roots.iter().all(|z| z.re < 0.0 && z.im.abs() < 1e-12),
    );
    c
}

fn bistable_fixed_points() -> Checks {
    let mut c = Checks::default();
    let p = ModelParams::without_delay(0.106, 0.0, 0.222, 0.464, 0.094, 0.418).unwrap();
    let rep = classify_case(&p, None).unwrap();
    c.check(format!("{} fixed points (want 3)", rep.fixed_points.len()), rep.fixed_points.len() == 3);
    if rep.fixed_points.len() != 3 {
        return c;
    }
    for (eq, r) in rep.fixed_points.iter().zip([0.39, 0.83, 1.38]) {
        c.within("r*", eq.r_star, r, 0.01);
        c.within("a*", eq.a_star, 0.47, 0.01);
        c.check("a* = o*", eq.a_star == eq.o_star);
    }
    let want = [Classification::StableNode, Classification::Saddle, Classification::StableNode];
    c.check(format!("classes {:?}", rep.point_classes), rep.point_classes == want);
    c.within("middle alpha3", char_cubic(&p, &rep.fixed_points[1]).alpha3, -0.008, 0.003);
    c
}

fn rhp_count(qc: &QuasiCharacteristic, tau: f64) -> usize {
    locate_characteristic_roots(qc, tau, Region::new(-0.6, 1.5, -4.0, 4.0), 48)
        .unwrap()
        .iter()
        .filter(|z| z.re > 0.0)
        .count()
}

fn two_frequency_switches() -> Checks {
    let mut c = Checks::default();
    let qc = QuasiCharacteristic::from_parts(0.41, 0.91, 0.81, 0.41).unwrap();
    let mut roots = qc.zero_delay_roots();
    roots.sort_by(|a, b| a.im.total_cmp(&b.im));
    let want = [Complex64::new(-0.2, -0.8), Complex64::new(-0.9, 0.0), Complex64::new(-0.2, 0.8)];
    for (z, w) in roots.iter().zip(want) {
        c.check(format!("root {z:.4} near {w}"), (z - w).norm() <= 0.1);
    }
    let b = f_cubic(&qc);
    let vs: Vec<f64> =
        poly::real_roots(&[1.0, b[0], b[1], b[2]]).into_iter().filter(|&x| x > 0.0).map(f64::sqrt).collect();
    c.check(format!("{} sign changes of F (want 2)", vs.len()), vs.len() == 2);
    if vs.len() == 2 {
        for (v, (want, tol)) in vs.iter().zip([(0.25, 0.03), (0.7, 0.05)]) {
            let brackets = f_function(&qc, v - 1e-3).signum() != f_function(&qc, v + 1e-3).signum();
            c.check(format!("F changes sign at {v:.5}"), brackets);
            c.within("crossing frequency", *v, want, tol);
        }
    }
    let sched = switch_schedule(&qc, 5);
    let events = sched.events();
    let first_lr = events.iter().find(|e| e.1 == CrossingDirection::LeftToRight).map(|e| e.0);
    let first_rl = events.iter().find(|e| e.1 == CrossingDirection::RightToLeft).map(|e| e.0);
    match (first_lr, first_rl) {
        (Some(lr), Some(rl)) => {
            c.within("first left-to-right delay", lr, 2.0, 0.2);
            c.within("first right-to-left delay", rl, 11.0, 0.5);
            let counts = [rhp_count(&qc, 0.5 * lr), rhp_count(&qc, 0.5 * (lr + rl)), rhp_count(&qc, rl + 0.05)];
            c.check(format!("right half-plane counts {counts:?} (want [0, 2, 0])"), counts == [0, 2, 0]);
        }
        _ => c.check("both switch directions present", false),
    }
    c
}

fn closed_form_error(p: &ModelParams, init: State, dt: f64) -> f64 {
    let tr = integrate_ode(p, init, 10.0, dt).unwrap();
    tr.times
        .iter()
        .zip(&tr.states)
        .map(|(&t, s)| s.distance(&explicit_case_solution(p, init, t).unwrap()))
        .fold(0.0, f64::max)
}

fn closed_form_equivalence() -> Checks {
    let mut c = Checks::default();
    let cases = [
        ("no feedback", ModelParams::without_delay(1.0, 0.0, 2.0, 0.0, 0.5, 1.5).unwrap(), State::new(0.2, 0.1, 0.3)),
        ("frozen receptor", ModelParams::without_delay(1.0, 2.0, 0.7, 1.0, 0.0, 0.0).unwrap(), State::new(0.5, 0.0, 1.2)),
    ];
    for (name, p, init) in cases {
        let err = closed_form_error(&p, init, 1e-3);
        c.check(format!("{name}: max error {err:.3e} < 1e-7"), err < 1e-7);
        // at dt = 1e-3 the error sits at roundoff, so the order is read off coarser steps
        let ratio = closed_form_error(&p, init, 0.2) / closed_form_error(&p, init, 0.1);
        c.check(format!("{name}: halving ratio {ratio:.3} (want 16 ± 20%)"), (ratio - 16.0).abs() <= 3.2);
    }
    c
}

fn oracle_equivalence() -> Checks {
    let mut c = Checks::default();
    let p = reference().with_tau(1.0).unwrap();
    let (r0, o0) = (0.2, 0.15);
    let hist = HistorySpec::new(HistoryShape::Bump { base: fitted_base(&p, r0, o0), lambda: 0.5 }, r0, o0);
    let oracle = picard_oracle(&p, &hist, 2, 200).unwrap();
    let stepper = integrate_dde(&p, &hist, 2.0, 200).unwrap();
    let dev = stepper.max_deviation(&oracle.trajectory);
    c.check(format!("max deviation {dev:.3e} < 1e-4"), dev < 1e-4);
    c
}

fn positive_bounds() -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut negative, mut outside) = (0, 0);
    for _ in 0..50 {
        let v: [f64; 6] = std::array::from_fn(|_| log_uniform(&mut rng, 0.5, 5.0));
        let base = ModelParams::without_delay(v[0], v[1], v[2], v[3], v[4], v[5]).unwrap();
        let shape = HistoryShape::Bump { base: rng.gen_range(0.01..3.0), lambda: rng.gen_range(0.0..2.0) };
        let hist = HistorySpec::new(shape, rng.gen_range(0.01..2.0), rng.gen_range(0.01..3.0));
        for tau in [0.5, 2.0] {
            let p = base.with_tau(tau).unwrap();
            let tr = integrate_dde(&p, &hist, 100.0 * tau, 64).unwrap();
            if tr.flags.nonneg_violation.is_some() {
                negative += 1;
            }
            if tr.flags.bounds_entry_time.is_none() {
                outside += 1;
            }
        }
    }
    c.check(format!("{negative} of 100 runs went negative"), negative == 0);
    c.check(format!("{outside} of 100 runs end outside the box"), outside == 0);
    c
}

fn cycle_params(p2: f64, p5: f64, p6: f64) -> ModelParams {
    ModelParams::new(1.0, p2, 1.2, 0.05, p5, p6, 4.0).unwrap()
}

/// Runs the constructed setup and returns (trajectory, transient end).
fn cycle_run(p: &ModelParams) -> (hpa_core::integrate::Trajectory, f64) {
    let r0 = 0.5 * (p.r_lower() + p.r_upper());
    let setup = build_periodic_setup(p, r0, HistoryChoice::Auto).unwrap();
    let tr = integrate_dde(p, &setup.history, 30.0 * p.tau, 200).unwrap();
    (tr, 10.0 * p.tau)
}

fn periodicity() -> Checks {
    let mut c = Checks::default();
    let pa = cycle_params(11.0, 0.11, 2.9);
    let (tr, t_start) = cycle_run(&pa);
    let at = verify_periodicity(&tr, pa.tau, t_start, PERIODICITY_TOL).unwrap();
    c.check(format!("period tau: residual {:.3e} vs amplitude {:.3e}", at.residual, at.amplitude), at.periodic);
    let off = verify_periodicity(&tr, 1.37 * pa.tau, t_start, PERIODICITY_TOL).unwrap();
    c.check(format!("period 1.37 tau rejected: residual {:.3e}", off.residual), !off.periodic);
    let pb = cycle_params(7.0, 0.51, 3.1);
    let (trb, _) = cycle_run(&pb);
    match (estimate_period(&tr, t_start), estimate_period(&trb, t_start)) {
        (Some(a), Some(b)) => c.check(format!("estimated periods differ: {a:.4} vs {b:.4}"), (a - b).abs() > PERIODICITY_TOL * a),
        other => c.check(format!("both periods estimated: {other:?}"), false),
    }
    c
}

fn lyapunov_draw(rng: &mut ChaCha8Rng) -> (ModelParams, Equilibrium) {
    loop {
        let p = ModelParams::without_delay(
            log_uniform(rng, 0.005, 0.1),
            log_uniform(rng, 0.05, 1.0),
            log_uniform(rng, 1.0, 5.0),
            log_uniform(rng, 0.2, 5.0),
            log_uniform(rng, 0.005, 0.1),
            log_uniform(rng, 2.0, 6.0),
        )
        .unwrap();
        let eq = solve_equilibrium(&p).unwrap();
        if lyapunov_constants(&p, &eq).applicable {
            return (p, eq);
        }
    }
}

fn state_at_level(rng: &mut ChaCha8Rng, eq: &Equilibrium, target: f64) -> State {
    let s = eq.state().to_array();
    loop {
        let dir: [f64; 3] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        let at = |k: f64| State::new(s[0] + k * dir[0], s[1] + k * dir[1], s[2] + k * dir[2]);
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
        if at(lo).min_component() > 0.0 {
            return at(lo);
        }
    }
}

fn run_all_fixtures(out: &Path) -> BTreeMap<String, u8> {
    const COMMANDS: [&str; 10] = [
        "equilibrium",
        "stability",
        "cases",
        "lyapunov",
        "delay-switches",
        "roots",
        "simulate",
        "simulate-dde",
        "periodic",
        "sweep",
    ];
    let mut codes = BTreeMap::new();
    let mut fixtures: Vec<_> = fs::read_dir(fixture_dir()).unwrap().map(|e| e.unwrap().path()).collect();
    fixtures.sort();
    for f in &fixtures {
        let stem = f.file_stem().unwrap().to_string_lossy().into_owned();
        for cmd in COMMANDS {
            let dir = out.join(&stem).join(cmd);
            let args = ["hpa", cmd, "--config", f.to_str().unwrap(), "--output", dir.to_str().unwrap()];
            let code = match RunConfig::from_cli(&Cli::parse_from(args)).and_then(|rc| run(&rc)) {
                Ok(_) => 0,
                Err(e) => e.exit_code(),
            };
            codes.insert(format!("{stem}/{cmd}"), code);
        }
    }
    codes
}

fn collect_files(root: &Path, at: &Path, into: &mut BTreeMap<String, Vec<u8>>) {
    let Ok(entries) = fs::read_dir(at) else { return };
    for e in entries {
        let path = e.unwrap().path();
        if path.is_dir() {
            collect_files(root, &path, into);
        } else if !path.to_string_lossy().ends_with(".timing.json") {
            let key = path.strip_prefix(root).unwrap().to_string_lossy().into_owned();
            into.insert(key, fs::read(&path).unwrap());
        }
    }
}

fn property_suites() -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);

    let mut disagree = 0;
    for _ in 0..1000 {
        let p = generic_draw(&mut rng);
        let eq = solve_equilibrium(&p).unwrap();
        let all = solve_equilibria(&p).unwrap();
        let rs: Vec<f64> = solve_equilibrium_quartic(&p)
            .unwrap()
            .into_iter()
            .map(|z| r_from_quartic_root(&p, z))
            .filter(|&r| r > p.r_lower() && r < p.r_upper())
            .collect();
        let hit = rs.iter().any(|r| (r - eq.r_star).abs() <= 1e-8 * eq.r_star);
        let matched = rs.len() == all.len() && rs.iter().zip(&all).all(|(r, e)| (r - e.r_star).abs() <= 1e-8 * e.r_star);
        if !(hit && matched) {
            disagree += 1;
        }
    }
    c.check(format!("quartic vs bisection: {disagree} of 1000 disagree"), disagree == 0);

    let mut bad = 0;
    for _ in 0..300 {
        let p = generic_draw(&mut rng);
        let eq = solve_equilibrium(&p).unwrap();
        let k = linearization_coeffs(&p, &eq).unwrap();
        let s = eq.state().to_array();
        let fd = |which: usize, comp: usize| {
            let h = 1e-6 * s[which].abs().max(1e-8);
            let (mut up, mut dn) = (s, s);
            up[which] += h;
            dn[which] -= h;
            let fu = rhs(&p, &State::from_array(up), up[0]).unwrap();
            let fdn = rhs(&p, &State::from_array(dn), dn[0]).unwrap();
            (fu[comp] - fdn[comp]) / (2.0 * h)
        };
        let close = |got: f64, want: f64, scale: f64| (got - want).abs() <= 1e-5 * scale.max(want.abs()).max(1e-12);
        let (s1, s2) = (p.p3.max(k.k1).max(k.k3), p.p6.max(k.k2).max(k.k4));
        if !(close(-fd(1, 0), k.k1, s1) && close(-fd(2, 0), k.k3, s1) && close(fd(1, 1) + p.p6, k.k2, s2) && close(fd(2, 1), k.k4, s2)) {
            bad += 1;
        }
    }
    c.check(format!("finite-difference Jacobian: {bad} of 300 off by more than 1e-5"), bad == 0);

    let mut bad = 0;
    for _ in 0..1000 {
        let qc = QuasiCharacteristic::from_parts(
            rng.gen_range(0.01..10.0),
            rng.gen_range(0.01..10.0),
            rng.gen_range(0.0..5.0),
            rng.gen_range(0.0..5.0),
        );
        let Ok(qc) = qc else { continue };
        let y: f64 = rng.gen_range(-10.0..10.0);
        let b = f_cubic(&qc);
        let z = Complex64::new(0.0, y);
        let scale = qc.p(z).norm_sqr() + qc.q(z).norm_sqr();
        if (f_function(&qc, y) - poly::eval(&[1.0, b[0], b[1], b[2]], y * y)).abs() > 1e-9 * scale {
            bad += 1;
        }
    }
    c.check(format!("F by moduli vs cubic: {bad} mismatches"), bad == 0);

    let mut bad = 0;
    for _ in 0..10_000 {
        let cubic = CharCubic::from_coeffs(rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0), rng.gen_range(-5.0..5.0));
        let m = cubic.max_real_part();
        if m.abs() < 1e-6 {
            continue;
        }
        let want = if m < 0.0 { StabilityKind::AsymptoticallyStable } else { StabilityKind::Unstable };
        if routh_hurwitz(&cubic).kind != want {
            bad += 1;
        }
    }
    c.check(format!("Routh-Hurwitz vs eigenvalues: {bad} of 10000 disagree"), bad == 0);

    let mut bad = 0;
    for _ in 0..20 {
        let (p, eq) = lyapunov_draw(&mut rng);
        let rep = lyapunov_constants(&p, &eq);
        let level = rng.gen_range(0.1..0.9) * rep.basin_radius_w;
        let init = state_at_level(&mut rng, &eq, level);
        let w = verify_decay(&p, &eq, init, 30.0).unwrap().w_series;
        let holds = (1..w.len() - 1).all(|i| {
            let dw = (w[i + 1].1 - w[i - 1].1) / (w[i + 1].0 - w[i - 1].0);
            dw <= rep.decay_bound(w[i].1) + 1e-6
        });
        if !holds {
            bad += 1;
        }
    }
    c.check(format!("Lyapunov decay inequality: {bad} of 20 trajectories violate it"), bad == 0);

    let (first, second) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let codes = [run_all_fixtures(first.path()), run_all_fixtures(second.path())];
    let succeeded = codes[0].values().filter(|&&code| code == 0).count();
    let mut files = [BTreeMap::new(), BTreeMap::new()];
    collect_files(first.path(), first.path(), &mut files[0]);
    collect_files(second.path(), second.path(), &mut files[1]);
    let differing = files[0].iter().filter(|(k, v)| files[1].get(*k) != Some(*v)).count();
    c.check(
        format!("fixture outputs: {} files from {succeeded} runs, {differing} differ", files[0].len()),
        codes[0] == codes[1] && files[0].len() == files[1].len() && differing == 0 && succeeded > 0,
    );
    c
}

fn blow_up() -> Checks {
    let mut c = Checks::default();
    let p = ModelParams::without_delay(1.0, 1.0, 1.0, 1.0, 0.0, 0.0).unwrap();
    let r0 = 0.5;
    let t_star = blow_up_estimate(&p, r0).unwrap();
    c.within("T*", t_star, 2.0, 1e-12);
    let tr = integrate_ode(&p, State::new(1.0, r0, 1.0), 4.0 * t_star, 1e-3).unwrap();
    match tr.flags.blow_up_time {
        Some(t) => c.check(format!("blow-up at {t:.4} within [T*/2, 2T*]"), t >= 0.5 * t_star && t <= 2.0 * t_star),
        None => c.check(format!("no blow-up flagged through t = {} (r reached {:.3})", 4.0 * t_star, tr.last().r), false),
    }
    c
}

fn main() -> ExitCode {
    let criteria: [(&str, Criterion); 9] = [
        ("reference fixed point and cubic", reference_fixed_point),
        ("three fixed points without receptor feedback", bistable_fixed_points),
        ("stability switches of a two-frequency quasi-polynomial", two_frequency_switches),
        ("closed-form solutions", closed_form_equivalence),
        ("Picard oracle vs method of steps", oracle_equivalence),
        ("nonnegativity and asymptotic box", positive_bounds),
        ("periodicity at the delay", periodicity),
        ("property suites and byte-reproducible fixtures", property_suites),
        ("finite-time receptor blow-up", blow_up),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let checks = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if checks.passed() { "PASS" } else { "FAIL" };
        println!("[{tag}] criterion {}: {name} ({secs:.1} s)", i + 1);
        for (what, ok) in &checks.0 {
            if !ok {
                println!("       failed: {what}");
            }
        }
        failed += usize::from(!checks.passed());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
