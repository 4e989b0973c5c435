use std::fs;
use std::path::{Path, PathBuf};

use hpa_core::delay::{
    build_quasi_characteristic, contour_field, f_function, locate_characteristic_roots, switch_schedule,
    CrossingDirection, QuasiCharacteristic, SwitchSchedule,
};
use hpa_core::equilibria::{classify_point, solve_equilibria, Classification};
use hpa_core::integrate::{integrate_dde, integrate_ode, Trajectory, TrajectoryFlags};
use hpa_core::lyapunov::{lyapunov_constants, lyapunov_value, verify_decay, LyapunovReport};
use hpa_core::periodic::{
    build_periodic_setup, estimate_period, verify_periodicity, HistoryChoice, PeriodicSetup, PeriodicityCheck,
    PERIODICITY_TOL,
};
use hpa_core::stability::{char_cubic, routh_hurwitz, verify_rh_always_stable, CharCubic, RhChains, StabilityVerdict};
use hpa_core::{classify_case, solve_equilibrium, CaseReport, Equilibrium, ModelConfig, ModelParams, State};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::output::{float, to_json, write_file, Table};
use crate::{CliError, Command, RunConfig};

pub(crate) fn dispatch(rc: &RunConfig, written: &mut Vec<PathBuf>) -> Result<Value, CliError> {
    let mut out = Out { dir: &rc.output_dir, prefix: rc.command.name(), written };
    let v = match rc.command {
        Command::Equilibrium => to_value(equilibrium(&rc.model.params)?),
        Command::Stability => to_value(stability(&rc.model.params)?),
        Command::Cases => to_value(cases(rc)?),
        Command::Lyapunov => lyapunov(rc, &mut out)?,
        Command::DelaySwitches => delay_switches(rc, &mut out)?,
        Command::Roots => roots(rc, &mut out)?,
        Command::Simulate => simulate(rc, &mut out)?,
        Command::SimulateDde => simulate_dde(rc, &mut out)?,
        Command::Periodic => periodic(rc, &mut out)?,
        Command::Sweep => sweep(rc, &mut out)?,
    };
    Ok(v)
}

fn to_value(x: impl Serialize) -> Value {
    serde_json::to_value(x).unwrap_or(Value::Null)
}

struct Out<'a> {
    dir: &'a Path,
    prefix: &'static str,
    written: &'a mut Vec<PathBuf>,
}

impl Out<'_> {
    fn csv(&mut self, channel: &str, table: &Table) -> Result<(), CliError> {
        let path = write_file(self.dir, &format!("{}.{channel}.csv", self.prefix), &table.render())?;
        self.written.push(path);
        Ok(())
    }
}

#[derive(Debug, Serialize)]
struct PointReport {
    equilibrium: Equilibrium,
    classification: Classification,
    alpha: [f64; 3],
    discriminant: f64,
    verdict: StabilityVerdict,
}

fn point_report(p: &ModelParams, eq: &Equilibrium) -> PointReport {
    let cubic = char_cubic(p, eq);
    PointReport {
        equilibrium: *eq,
        classification: classify_point(p, eq),
        alpha: [cubic.alpha1, cubic.alpha2, cubic.alpha3],
        discriminant: cubic.delta,
        verdict: routh_hurwitz(&cubic),
    }
}

fn fixed_points(p: &ModelParams) -> Result<Vec<Equilibrium>, CliError> {
    if p.is_generic() {
        Ok(solve_equilibria(p)?)
    } else {
        Ok(classify_case(p, None)?.fixed_points)
    }
}

#[derive(Debug, Serialize)]
struct EquilibriumResult {
    generic: bool,
    points: Vec<PointReport>,
}

fn equilibrium(p: &ModelParams) -> Result<EquilibriumResult, CliError> {
    let points = fixed_points(p)?.iter().map(|eq| point_report(p, eq)).collect();
    Ok(EquilibriumResult { generic: p.is_generic(), points })
}

#[derive(Debug, Serialize)]
struct StabilityPoint {
    equilibrium: Equilibrium,
    cubic: CharCubic,
    verdict: StabilityVerdict,
    real_root_count: usize,
    /// Inequality chains; generic parameters only.
    chains: Option<RhChains>,
}

fn stability(p: &ModelParams) -> Result<Vec<StabilityPoint>, CliError> {
    fixed_points(p)?
        .into_iter()
        .map(|eq| {
            let cubic = char_cubic(p, &eq);
            Ok(StabilityPoint {
                equilibrium: eq,
                verdict: routh_hurwitz(&cubic),
                real_root_count: cubic.real_root_count(),
                chains: if p.is_generic() { Some(verify_rh_always_stable(p, &eq)?) } else { None },
                cubic,
            })
        })
        .collect()
}

#[derive(Debug, Serialize)]
struct CasesResult {
    report: CaseReport,
    points: Vec<PointReport>,
}

fn cases(rc: &RunConfig) -> Result<CasesResult, CliError> {
    let p = &rc.model.params;
    let report = classify_case(p, rc.options.r0)?;
    let points = report.fixed_points.iter().map(|eq| point_report(p, eq)).collect();
    Ok(CasesResult { report, points })
}

/// State along `(1, 1, 1)` from the fixed point at which `W = level`.
fn state_at_level(eq: &Equilibrium, level: f64) -> State {
    let s = eq.state();
    let at = |c: f64| State::new(s.a + c, s.r + c, s.o + c);
    let (mut lo, mut hi) = (0.0, 1.0);
    while lyapunov_value(eq, &at(hi)) < level {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if lyapunov_value(eq, &at(mid)) < level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    at(lo)
}

#[derive(Debug, Serialize)]
struct DecaySummary {
    initial: State,
    horizon: f64,
    converged: bool,
    /// Largest sampled `dW/dt` minus the decay bound.
    worst_margin: f64,
}

fn lyapunov(rc: &RunConfig, out: &mut Out) -> Result<Value, CliError> {
    let p = rc.model.params.with_tau(0.0)?;
    let eq = solve_equilibrium(&p)?;
    let rep: LyapunovReport = lyapunov_constants(&p, &eq);
    let mut decay = None;
    if rep.applicable && rep.basin_radius_w > 0.0 {
        let initial = state_at_level(&eq, 0.5 * rep.basin_radius_w);
        let horizon = rc.options.t_end.unwrap_or(50.0);
        let check = verify_decay(&p, &eq, initial, horizon)?;
        let w = &check.w_series;
        let mut table = Table::new(&["t", "W", "dW_dt", "bound"]);
        let mut worst = f64::NEG_INFINITY;
        for i in 0..w.len() {
            let (l, r) = (i.saturating_sub(1), (i + 1).min(w.len() - 1));
            let dw = (w[r].1 - w[l].1) / (w[r].0 - w[l].0);
            let bound = rep.decay_bound(w[i].1);
            if i > 0 && i + 1 < w.len() {
                worst = worst.max(dw - bound);
            }
            table.push(vec![w[i].0, w[i].1, dw, bound]);
        }
        out.csv("w", &table)?;
        decay = Some(DecaySummary { initial, horizon, converged: check.converged, worst_margin: worst });
    }
    Ok(json!({ "equilibrium": eq, "constants": rep, "decay": decay }))
}

/// Quasi-characteristic from `K2`/`K3` keys when present, else from the fixed point.
fn quasi_characteristic(rc: &RunConfig) -> Result<(QuasiCharacteristic, Option<Equilibrium>), CliError> {
    let p = &rc.model.params;
    let coupling = rc.options.coupling;
    match (rc.model.extra_f64("K2"), rc.model.extra_f64("K3")) {
        (Some(k2), Some(k3)) => Ok((QuasiCharacteristic::with_coupling(coupling, p.p3, p.p6, k2, k3)?, None)),
        (None, None) => {
            let eq = solve_equilibrium(p)?;
            Ok((build_quasi_characteristic(p, &eq, coupling)?, Some(eq)))
        }
        _ => Err(CliError::Config("K2 and K3 must be given together".into())),
    }
}

fn direction_name(d: CrossingDirection) -> &'static str {
    match d {
        CrossingDirection::LeftToRight => "left_to_right",
        CrossingDirection::RightToLeft => "right_to_left",
    }
}

fn delay_switches(rc: &RunConfig, out: &mut Out) -> Result<Value, CliError> {
    let (qc, eq) = quasi_characteristic(rc)?;
    let sched: SwitchSchedule = switch_schedule(&qc, rc.options.n_max);
    let within: Vec<(f64, CrossingDirection)> =
        sched.events().into_iter().filter(|e| e.0 <= sched.horizon).collect();
    let events: Vec<Value> = within
        .iter()
        .map(|&(tau, d)| json!({ "tau": tau, "direction": direction_name(d), "rhp_count_after": sched.rhp_count_after(tau) }))
        .collect();

    let y_max = sched.crossings.iter().map(|c| c.v).fold(1.0, f64::max) * 1.5;
    let mut f = Table::new(&["y", "F"]);
    for i in 0..=1000 {
        let y = y_max * i as f64 / 1000.0;
        f.push(vec![y, f_function(&qc, y)]);
    }
    out.csv("f", &f)?;
    let mut ev = Table::new(&["tau", "v", "direction", "rhp_count_after"]);
    ev.comment("direction", "+1 left_to_right, -1 right_to_left");
    ev.comment("horizon", float(sched.horizon));
    for c in &sched.crossings {
        for &tau in c.taus.iter().filter(|&&t| t <= sched.horizon) {
            let d = if c.direction == CrossingDirection::LeftToRight { 1.0 } else { -1.0 };
            ev.push(vec![tau, c.v, d, sched.rhp_count_after(tau) as f64]);
        }
    }
    ev.rows.sort_by(|a, b| a[0].total_cmp(&b[0]));
    out.csv("events", &ev)?;
    Ok(json!({
        "equilibrium": eq,
        "quasi_characteristic": qc,
        "zero_delay_roots": qc.zero_delay_roots(),
        "schedule": sched,
        "events": events,
    }))
}

fn roots(rc: &RunConfig, out: &mut Out) -> Result<Value, CliError> {
    let (qc, eq) = quasi_characteristic(rc)?;
    let tau = rc.model.params.tau;
    let region = rc.options.region();
    let res = rc.options.resolution;
    let mut found = locate_characteristic_roots(&qc, tau, region, res)?;
    found.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
    let mut table = Table::new(&["re", "im", "modulus_residual"]);
    for z in &found {
        table.push(vec![z.re, z.im, qc.eval(*z, tau).norm()]);
    }
    out.csv("roots", &table)?;
    let mut contour = Table::new(&["re", "im", "re_c", "im_c"]);
    for pt in contour_field(&qc, tau, region, res)? {
        contour.push(vec![pt.re, pt.im, pt.re_c, pt.im_c]);
    }
    out.csv("contour", &contour)?;
    let rhp = found.iter().filter(|z| z.re > 0.0).count();
    Ok(json!({
        "equilibrium": eq,
        "tau": tau,
        "region": region,
        "roots": found,
        "right_half_plane_count": rhp,
        "rightmost": found.first().copied().unwrap_or(Complex64::new(f64::NAN, f64::NAN)),
    }))
}

pub(crate) fn initial_from_keys(cfg: &ModelConfig) -> Option<State> {
    Some(State::new(cfg.extra_f64("a0")?, cfg.r0?, cfg.o0?))
}

fn trajectory_table(tr: &Trajectory) -> Table {
    let mut t = Table::new(&["t", "a", "r", "o"]);
    flag_comments(&mut t, &tr.flags);
    for (time, s) in tr.times.iter().zip(&tr.states) {
        t.push(vec![*time, s.a, s.r, s.o]);
    }
    t
}

fn flag_comments(t: &mut Table, f: &TrajectoryFlags) {
    let show = |x: Option<f64>| x.map_or("none".to_string(), crate::output::float);
    t.comment("nonneg_violation", show(f.nonneg_violation));
    t.comment("bounds_entry_time", show(f.bounds_entry_time));
    t.comment("blow_up_time", show(f.blow_up_time));
    t.comment("fitting_condition", f.fitting_condition.map_or("none".to_string(), |b| b.to_string()));
}

fn trajectory_summary(tr: &Trajectory, p: &ModelParams) -> Value {
    json!({
        "flags": tr.flags,
        "nodes": tr.len(),
        "t_final": tr.t_end(),
        "final_state": tr.last(),
        "asymptotic_box": if p.is_generic() { Some(p.asymptotic_box()) } else { None },
    })
}

fn simulate(rc: &RunConfig, out: &mut Out) -> Result<Value, CliError> {
    let p = rc.model.params.with_tau(0.0)?;
    let initial = match rc.model.history()? {
        Some(h) => h.initial_state(),
        None => initial_from_keys(&rc.model).ok_or_else(|| CliError::Config("simulate needs a0, r0, o0".into()))?,
    };
    let t_end = rc.options.t_end.unwrap_or(50.0);
    let tr = integrate_ode(&p, initial, t_end, rc.options.dt.min(t_end))?;
    out.csv("trajectory", &trajectory_table(&tr))?;
    Ok(json!({ "initial": initial, "t_end": t_end, "trajectory": trajectory_summary(&tr, &p) }))
}

fn simulate_dde(rc: &RunConfig, out: &mut Out) -> Result<Value, CliError> {
    let p = rc.model.params;
    let hist = rc.model.history()?.ok_or_else(|| CliError::Config("simulate-dde needs a history".into()))?;
    let t_end = rc.options.t_end.unwrap_or(50.0 * p.tau);
    let tr = integrate_dde(&p, &hist, t_end, rc.options.steps_per_delay)?;
    out.csv("trajectory", &trajectory_table(&tr))?;
    Ok(json!({ "history": hist, "t_end": t_end, "trajectory": trajectory_summary(&tr, &p) }))
}

#[derive(Debug, Serialize)]
struct PeriodicResult {
    setup: PeriodicSetup,
    t_end: f64,
    t_start: f64,
    at_delay: PeriodicityCheck,
    off_period: PeriodicityCheck,
    estimated_period: Option<f64>,
    at_estimate: Option<PeriodicityCheck>,
    trajectory: Value,
}

fn periodic(rc: &RunConfig, out: &mut Out) -> Result<Value, CliError> {
    let p = rc.model.params;
    let r0 = rc.options.r0.unwrap_or(0.5 * (p.r_lower() + p.r_upper()));
    let setup = build_periodic_setup(&p, r0, HistoryChoice::Auto)?;
    let t_end = rc.options.t_end.unwrap_or(20.0 * p.tau);
    let steps = rc.options.steps_per_delay.max(16);
    let tr = integrate_dde(&p, &setup.history, t_end, steps)?;
    let t_start = (0.5 * t_end).min(t_end - 2.74 * p.tau).max(0.0);
    let at_delay = verify_periodicity(&tr, p.tau, t_start, PERIODICITY_TOL)?;
    let off_period = verify_periodicity(&tr, 1.37 * p.tau, t_start, PERIODICITY_TOL)?;
    let estimated_period = estimate_period(&tr, t_start);
    let at_estimate = match estimated_period {
        Some(period) if t_start + 2.0 * period <= t_end => Some(verify_periodicity(&tr, period, t_start, PERIODICITY_TOL)?),
        _ => None,
    };
    out.csv("trajectory", &trajectory_table(&tr))?;

    let mut lag = Table::new(&["t", "a", "r", "o", "a_lag", "r_lag", "o_lag", "da", "dr", "do"]);
    for ((t, s), d) in tr.times.iter().zip(&tr.states).zip(&tr.slopes) {
        if let Some(back) = (*t >= p.tau).then(|| tr.interpolate(t - p.tau)).flatten() {
            lag.push(vec![*t, s.a, s.r, s.o, back.a, back.r, back.o, d[0], d[1], d[2]]);
        }
    }
    out.csv("lag", &lag)?;
    Ok(to_value(PeriodicResult {
        trajectory: trajectory_summary(&tr, &p),
        setup,
        t_end,
        t_start,
        at_delay,
        off_period,
        estimated_period,
        at_estimate,
    }))
}

#[derive(Debug, Serialize)]
struct SweepRun {
    index: usize,
    params: ModelParams,
    fixed_points: usize,
    stable: Option<bool>,
    max_real_part: Option<f64>,
    first_switch: Option<f64>,
    tau_critical: Option<f64>,
    error: Option<String>,
}

fn perturb(base: &ModelParams, seed: u64, spread: f64) -> ModelParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w = (1.0 + spread).ln();
    let mut factor = || if w > 0.0 { rng.gen_range(-w..w).exp() } else { 1.0 };
    ModelParams {
        drive: base.drive * factor(),
        p2: base.p2 * factor(),
        p3: base.p3 * factor(),
        p4: base.p4 * factor(),
        p5: base.p5 * factor(),
        p6: base.p6 * factor(),
        tau: base.tau,
    }
}

fn sweep_one(rc: &RunConfig, index: usize) -> SweepRun {
    let params = perturb(&rc.model.params, rc.options.seed.wrapping_add(index as u64), rc.options.spread);
    let mut run = SweepRun {
        index,
        params,
        fixed_points: 0,
        stable: None,
        max_real_part: None,
        first_switch: None,
        tau_critical: None,
        error: None,
    };
    let mut body = || -> Result<(), CliError> {
        let points = fixed_points(&params)?;
        run.fixed_points = points.len();
        let Some(eq) = points.first() else { return Ok(()) };
        let v = routh_hurwitz(&char_cubic(&params, eq));
        run.max_real_part = Some(v.max_real_part);
        run.stable = Some(v.max_real_part < 0.0);
        if params.is_generic() {
            let eq = solve_equilibrium(&params)?;
            let sched = switch_schedule(&build_quasi_characteristic(&params, &eq, rc.options.coupling)?, rc.options.n_max);
            run.first_switch = sched.first_switch;
            run.tau_critical = sched.tau_critical;
        }
        Ok(())
    };
    if let Err(e) = body() {
        run.error = Some(e.to_string());
    }
    run
}

fn sweep(rc: &RunConfig, out: &mut Out) -> Result<Value, CliError> {
    let width = rc.options.runs.saturating_sub(1).to_string().len().max(4);
    let results: Vec<Result<(SweepRun, PathBuf), CliError>> = (0..rc.options.runs)
        .into_par_iter()
        .map(|i| {
            let run = sweep_one(rc, i);
            let dir = out.dir.join(format!("run-{i:0width$}"));
            fs::create_dir_all(&dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
            let path = write_file(&dir, "sweep.json", &to_json(&run)?)?;
            Ok((run, path))
        })
        .collect();
    let mut runs = Vec::with_capacity(results.len());
    for r in results {
        let (run, path) = r?;
        out.written.push(path);
        runs.push(run);
    }
    let mut table = Table::new(&[
        "index",
        "A",
        "p2",
        "p3",
        "p4",
        "p5",
        "p6",
        "fixed_points",
        "max_real_part",
        "first_switch",
        "tau_critical",
    ]);
    table.comment("seed", rc.options.seed);
    table.comment("spread", rc.options.spread);
    for r in &runs {
        let p = &r.params;
        let opt = |x: Option<f64>| x.unwrap_or(f64::NAN);
        table.push(vec![
            r.index as f64,
            p.drive,
            p.p2,
            p.p3,
            p.p4,
            p.p5,
            p.p6,
            r.fixed_points as f64,
            opt(r.max_real_part),
            opt(r.first_switch),
            opt(r.tau_critical),
        ]);
    }
    out.csv("summary", &table)?;
    let stable = runs.iter().filter(|r| r.stable == Some(true)).count();
    let failed = runs.iter().filter(|r| r.error.is_some()).count();
    Ok(json!({ "runs": runs.len(), "stable": stable, "failed": failed, "results": runs }))
}
