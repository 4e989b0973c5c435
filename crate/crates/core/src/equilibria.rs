//! Fixed points of the non-delayed system, their linearization and the
//! degenerate-parameter taxonomy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{field, hill, ModelParams, State};
use crate::poly;

/// Fixed point `(a*, r*, o*)` with the Jacobian magnitudes `K1..K4`.
///
/// At the fixed point the Jacobian of the non-delayed system is
///
/// ```text
/// [ -p3   -K1       -K3 ]
/// [  0    -p6 + K2   K4 ]
/// [  1     0        -1  ]
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub a_star: f64,
    pub r_star: f64,
    pub o_star: f64,
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "K3")]
    pub k3: f64,
    #[serde(rename = "K4")]
    pub k4: f64,
}

impl Equilibrium {
    /// Fixed point at `state` with `K1..K4` taken from the exact Jacobian.
    pub fn at(params: &ModelParams, state: State) -> Self {
        let k = jacobian_magnitudes(params, &state);
        Equilibrium {
            a_star: state.a,
            r_star: state.r,
            o_star: state.o,
            k1: k.k1,
            k2: k.k2,
            k3: k.k3,
            k4: k.k4,
        }
    }

    pub fn state(&self) -> State {
        State::new(self.a_star, self.r_star, self.o_star)
    }

    pub fn coeffs(&self) -> LinearCoeffs {
        LinearCoeffs { k1: self.k1, k2: self.k2, k3: self.k3, k4: self.k4 }
    }

    /// Right-hand side of the non-delayed system at the fixed point.
    pub fn residual(&self, params: &ModelParams) -> [f64; 3] {
        field(params, self.a_star, self.r_star, self.o_star, self.a_star)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoeffs {
    #[serde(rename = "K1")]
    pub k1: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "K3")]
    pub k3: f64,
    #[serde(rename = "K4")]
    pub k4: f64,
}

/// Jacobian magnitudes from the partial derivatives at `state`:
/// `K1 = -df1/dr`, `K3 = -df1/do`, `K2 = df2/dr + p6`, `K4 = df2/do`.
pub fn jacobian_magnitudes(params: &ModelParams, state: &State) -> LinearCoeffs {
    let (r, o) = (state.r, state.o);
    let x = o * r;
    let d1 = 1.0 + params.p2 * x;
    let drive = params.drive * params.p2 / (d1 * d1);
    let (k2, k4) = if params.p4 == 0.0 {
        (0.0, 0.0)
    } else {
        let d2 = params.p4 + x * x;
        let w = 2.0 * params.p4 / (d2 * d2);
        (w * r * o * o, w * o * r * r)
    };
    LinearCoeffs { k1: drive * o, k2, k3: drive * r, k4 }
}

/// ACTH level on the ACTH nullcline, `A / (1 + p2 a r) = p3 a`, at receptor density `r`.
fn acth_nullcline(p: &ModelParams, r: f64) -> f64 {
    if p.p2 == 0.0 || r == 0.0 {
        return p.drive / p.p3;
    }
    let x = 4.0 * p.p2 * p.drive * r / p.p3;
    2.0 * p.drive / (p.p3 * ((1.0 + x).sqrt() + 1.0))
}

/// A fixed point in the generic case, found by bisection.
///
/// The fixed point is usually unique; when it is not, this returns one of
/// them and [`solve_equilibria`] returns all.
///
/// Works in the shifted variable `s = p6 r - p5` on `(0, 1)`, where the
/// receptor nullcline gives `(a r)^2 = p4 s / (1 - s)`.
///
/// ```
/// use hpa_core::{equilibria::solve_equilibrium, ModelParams};
///
/// let p = ModelParams::without_delay(1.5, 1.8, 0.2, 5.0, 0.11, 0.9)?;
/// let eq = solve_equilibrium(&p)?;
/// assert!(eq.r_star > p.r_lower() && eq.r_star < p.r_upper());
/// assert!(eq.residual(&p).iter().all(|v| v.abs() < 1e-9));
/// # Ok::<(), hpa_core::Error>(())
/// ```
pub fn solve_equilibrium(params: &ModelParams) -> Result<Equilibrium> {
    params.validate()?;
    if !params.is_generic() {
        return Err(Error::NotGeneric(format!("{params:?}")));
    }
    let p = *params;
    let r_of = |s: f64| (s + p.p5) / p.p6;
    let g = |s: f64| {
        let r = r_of(s);
        let u = acth_nullcline(&p, r) * r;
        u * u - p.p4 * s / (1.0 - s)
    };
    let dg = |s: f64| {
        let r = r_of(s);
        let x = 4.0 * p.p2 * p.drive * r / p.p3;
        let u = acth_nullcline(&p, r) * r;
        let du = p.drive / (p.p3 * (1.0 + x).sqrt());
        2.0 * u * du / p.p6 - p.p4 / ((1.0 - s) * (1.0 - s))
    };

    let mut lo = 0.0_f64;
    let mut hi = [1.0 - 1e-12, 1.0 - 1e-15]
        .into_iter()
        .find(|&h| g(h) < 0.0)
        .ok_or_else(|| Error::Internal("equilibrium bracket has no sign change".into()))?;
    if g(lo) <= 0.0 {
        return finish(&p, r_of(lo), lo);
    }
    for _ in 0..2000 {
        if hi - lo <= 1e-13 * hi || hi - lo < f64::MIN_POSITIVE {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut s = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = dg(s);
        if d == 0.0 || !d.is_finite() {
            break;
        }
        let next = s - g(s) / d;
        if next > 0.0 && next < 1.0 && g(next).abs() <= g(s).abs() {
            s = next;
        }
    }
    finish(&p, r_of(s), s)
}

/// Every fixed point in the generic case, ascending in `r`.
///
/// Roots of the equilibrium quartic seed Newton on the receptor balance in
/// `s = p6 r - p5`; the bisection root of [`solve_equilibrium`] is always
/// included. More than one point occurs, e.g. for small `p2` close to the
/// three-point `p2 = 0` regime.
pub fn solve_equilibria(params: &ModelParams) -> Result<Vec<Equilibrium>> {
    let first = solve_equilibrium(params)?;
    let p = *params;
    let g = |s: f64| {
        let r = (s + p.p5) / p.p6;
        let u = acth_nullcline(&p, r) * r;
        u * u - p.p4 * s / (1.0 - s)
    };
    let mut points = vec![first];
    for z in solve_equilibrium_quartic(&p)? {
        let mut s = p.p6 * r_from_quartic_root(&p, z) - p.p5;
        if !(s > 0.0 && s < 1.0) {
            continue;
        }
        for _ in 0..50 {
            let h = 1e-7 * s.min(1.0 - s);
            let d = (g(s + h) - g(s - h)) / (2.0 * h);
            if d == 0.0 || !d.is_finite() {
                break;
            }
            let next = s - g(s) / d;
            if !(next > 0.0 && next < 1.0) || (next - s).abs() <= 1e-15 * s {
                break;
            }
            s = next;
        }
        let r = (s + p.p5) / p.p6;
        if points.iter().any(|e| (e.r_star - r).abs() <= 1e-8 * r) {
            continue;
        }
        if let Ok(eq) = finish(&p, r, s) {
            if eq.residual(&p).iter().all(|v| v.abs() < 1e-10) {
                points.push(eq);
            }
        }
    }
    points.sort_by(|a, b| a.r_star.total_cmp(&b.r_star));
    Ok(points)
}

fn finish(p: &ModelParams, r: f64, s: f64) -> Result<Equilibrium> {
    let a1 = acth_nullcline(p, r);
    let a2 = if s == 0.0 { 0.0 } else { (p.p4 * s / (1.0 - s)).sqrt() / r };
    // resolution of s near 0 or 1 limits the second route
    let tol = 1e-9 + 8.0 * f64::EPSILON / (s * (1.0 - s));
    if (a1 - a2).abs() > tol * a1.abs().max(a2.abs()) + f64::MIN_POSITIVE {
        return Err(Error::Consistency(format!("nullcline routes give a* = {a1} and {a2}")));
    }
    let eq = Equilibrium::at(p, State::new(a1, r, a1));
    linearization_coeffs(p, &eq)?;
    Ok(eq)
}

/// Coefficients `[1, 2, C1, C2, -C3]` of the equilibrium quartic in
/// `z = 2 p2 a* r*`.
pub fn quartic_coeffs(params: &ModelParams) -> [f64; 5] {
    let ModelParams { drive: a, p2, p3, p4, p5, p6, .. } = *params;
    let c1 = 4.0 * p2 * (p2 * p3 * p4 * p6 - a * (p5 + 1.0)) / (p3 * p6);
    let c2 = 8.0 * p2 * p2 * p4;
    let c3 = 16.0 * a * p2.powi(3) * p4 * p5 / (p3 * p6);
    [1.0, 2.0, c1, c2, -c3]
}

/// Real non-negative roots of the equilibrium quartic, ascending.
pub fn solve_equilibrium_quartic(params: &ModelParams) -> Result<Vec<f64>> {
    params.validate()?;
    if !params.is_generic() {
        return Err(Error::NotGeneric(format!("{params:?}")));
    }
    let c = quartic_coeffs(params);
    let scale = c.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let mut z: Vec<f64> = poly::real_roots(&c)
        .into_iter()
        .filter(|&z| z >= -1e-12 * scale)
        .map(|z| z.max(0.0))
        .collect();
    z.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * scale);
    Ok(z)
}

/// Receptor density `p3 z (z + 2) / (4 p2 A)` belonging to a quartic root.
pub fn r_from_quartic_root(params: &ModelParams, z: f64) -> f64 {
    params.p3 * z * (z + 2.0) / (4.0 * params.p2 * params.drive)
}

/// `K1..K4` at a fixed point.
///
/// In the generic case each magnitude is computed twice, from the exact
/// Jacobian and from the closed forms in `s = (a r)^2 / (p4 + (a r)^2)`,
/// and the two must agree to `1e-8` relative. The bounds
/// `K2 <= 2 p6 (sqrt(1 + p5) - sqrt(p5))^2` and `K3 <= p3` are checked too.
pub fn linearization_coeffs(params: &ModelParams, eq: &Equilibrium) -> Result<LinearCoeffs> {
    let res = eq.residual(params);
    if res.iter().any(|v| !(v.abs() < 1e-8)) {
        return Err(Error::Domain(format!("not a fixed point, residual {res:?}")));
    }
    let direct = jacobian_magnitudes(params, &eq.state());
    if !params.is_generic() {
        return Ok(direct);
    }
    let ModelParams { p2, p3, p4, p5, p6, .. } = *params;
    let r = eq.r_star;
    let x = eq.a_star * r;
    let s = hill(x, p4);
    let q = p4 / (p4 + x * x);
    let sq = q.sqrt();
    let w = p2 * (p4 * s).sqrt();
    let closed = LinearCoeffs {
        k1: p2 * p3 * p4 * s / (r * r * sq * (sq + w)),
        k2: 2.0 / r * s * q,
        k3: p3 * w / (sq + w),
        k4: 2.0 * r / p4.sqrt() * q * sq * s.sqrt(),
    };
    let pairs = [
        ("K1", direct.k1, closed.k1),
        ("K2", direct.k2, closed.k2),
        ("K3", direct.k3, closed.k3),
        ("K4", direct.k4, closed.k4),
    ];
    for (name, u, v) in pairs {
        if (u - v).abs() > 1e-8 * u.abs().max(v.abs()) + f64::MIN_POSITIVE {
            return Err(Error::Consistency(format!("{name}: Jacobian {u} vs closed form {v}")));
        }
    }
    let k2_max = 2.0 * p6 * ((1.0 + p5).sqrt() - p5.sqrt()).powi(2);
    if direct.k2 > k2_max * (1.0 + 1e-9) || direct.k3 > p3 * (1.0 + 1e-12) {
        return Err(Error::Consistency(format!(
            "K2 = {} (max {k2_max}) or K3 = {} (max {p3}) out of bounds",
            direct.k2, direct.k3
        )));
    }
    Ok(direct)
}

/// Which degenerate-parameter case applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Generic,
    #[serde(rename = "A_zero")]
    AZero,
    P2Zero,
    P3Zero,
    P4Zero,
    P2P4Zero,
    P5Zero,
    P6P5Zero,
    P6Zero,
}

impl CaseId {
    /// Picks the case by a fixed priority, most degenerate first:
    /// `p6 = p5 = 0`, `p6 = 0`, `p2 = p4 = 0`, `p3 = 0`, `A = 0`, `p2 = 0`,
    /// `p4 = 0`, `p5 = 0`, generic.
    pub fn of(p: &ModelParams) -> Self {
        if p.p6 == 0.0 && p.p5 == 0.0 {
            CaseId::P6P5Zero
        } else if p.p6 == 0.0 {
            CaseId::P6Zero
        } else if p.p2 == 0.0 && p.p4 == 0.0 {
            CaseId::P2P4Zero
        } else if p.p3 == 0.0 {
            CaseId::P3Zero
        } else if p.drive == 0.0 {
            CaseId::AZero
        } else if p.p2 == 0.0 {
            CaseId::P2Zero
        } else if p.p4 == 0.0 {
            CaseId::P4Zero
        } else if p.p5 == 0.0 {
            CaseId::P5Zero
        } else {
            CaseId::Generic
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    StableNode,
    Saddle,
    NonHyperbolic,
    BlowUp,
    ExplicitSolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case_id: CaseId,
    pub fixed_points: Vec<Equilibrium>,
    /// Classification of each entry of `fixed_points`.
    pub point_classes: Vec<Classification>,
    pub root_count: usize,
    pub classification: Classification,
    /// Root count predicted by the closed-form conditions (Cases 2 and 6).
    pub predicted_root_count: Option<usize>,
    /// `r` coordinate of a fixed point whose `a` and `o` are infinite.
    pub unbounded_r: Option<f64>,
    /// Leading-order blow-up time `(p4 / r0) (p3 / A)^2`.
    pub blow_up_time_estimate: Option<f64>,
}

impl CaseReport {
    fn finite(case_id: CaseId, points: Vec<(Equilibrium, Classification)>) -> Self {
        let classification = points.first().map_or(Classification::NonHyperbolic, |p| p.1);
        let (fixed_points, point_classes): (Vec<_>, Vec<_>) = points.into_iter().unzip();
        CaseReport {
            case_id,
            root_count: fixed_points.len(),
            fixed_points,
            point_classes,
            classification,
            predicted_root_count: None,
            unbounded_r: None,
            blow_up_time_estimate: None,
        }
    }
}

/// Sign classification from the eigenvalues of the non-delayed linearization.
pub fn classify_point(params: &ModelParams, eq: &Equilibrium) -> Classification {
    let cubic = crate::stability::char_cubic(params, eq);
    let m = cubic.max_real_part();
    if m.abs() <= 1e-10 {
        Classification::NonHyperbolic
    } else if m < 0.0 {
        Classification::StableNode
    } else {
        Classification::Saddle
    }
}

/// Case analysis for any admissible parameter set. `r0` is only used for
/// the blow-up estimate when `p6 = 0`.
///
/// ```
/// use hpa_core::equilibria::{classify_case, CaseId, Classification};
/// use hpa_core::ModelParams;
///
/// let p = ModelParams::without_delay(0.0, 1.0, 1.0, 1.0, 0.5, 2.0)?;
/// let rep = classify_case(&p, None)?;
/// assert_eq!(rep.case_id, CaseId::AZero);
/// assert_eq!(rep.fixed_points[0].r_star, 0.25);
/// assert_eq!(rep.classification, Classification::StableNode);
/// # Ok::<(), hpa_core::Error>(())
/// ```
pub fn classify_case(params: &ModelParams, r0: Option<f64>) -> Result<CaseReport> {
    params.validate()?;
    let p = *params;
    let id = CaseId::of(&p);
    let base = p.drive / p.p3;
    let report = match id {
        CaseId::Generic => {
            let points = solve_equilibria(&p)?.into_iter().map(|eq| (eq, classify_point(&p, &eq))).collect();
            CaseReport::finite(id, points)
        }
        CaseId::AZero => {
            let eq = Equilibrium::at(&p, State::new(0.0, p.r_lower(), 0.0));
            CaseReport::finite(id, vec![(eq, classify_point(&p, &eq))])
        }
        CaseId::P2Zero => {
            let points = case2_receptor_roots(&p)
                .into_iter()
                .map(|r| {
                    let eq = Equilibrium::at(&p, State::new(base, r, base));
                    let class = if (eq.k2 - p.p6).abs() <= 1e-10 {
                        Classification::NonHyperbolic
                    } else if eq.k2 < p.p6 {
                        Classification::StableNode
                    } else {
                        Classification::Saddle
                    };
                    (eq, class)
                })
                .collect();
            let mut rep = CaseReport::finite(id, points);
            rep.predicted_root_count = Some(case2_predicted_root_count(&p));
            rep
        }
        CaseId::P3Zero => CaseReport {
            case_id: id,
            fixed_points: Vec::new(),
            point_classes: Vec::new(),
            root_count: 1,
            classification: Classification::NonHyperbolic,
            predicted_root_count: None,
            unbounded_r: Some(p.r_upper()),
            blow_up_time_estimate: None,
        },
        CaseId::P4Zero => {
            let a = acth_nullcline(&p, p.r_upper());
            let eq = Equilibrium::at(&p, State::new(a, p.r_upper(), a));
            CaseReport::finite(id, vec![(eq, classify_point(&p, &eq))])
        }
        CaseId::P2P4Zero => {
            let eq = Equilibrium::at(&p, State::new(base, p.r_upper(), base));
            let mut rep = CaseReport::finite(id, vec![(eq, classify_point(&p, &eq))]);
            rep.classification = Classification::ExplicitSolution;
            rep
        }
        CaseId::P5Zero => {
            let origin = Equilibrium::at(&p, State::new(base, 0.0, base));
            let mut points = vec![(origin, classify_point(&p, &origin))];
            for a in case6_extra_acth_roots(&p) {
                let r = (base - a) / (p.p2 * a * a);
                let eq = Equilibrium::at(&p, State::new(a, r, a));
                points.push((eq, classify_point(&p, &eq)));
            }
            let mut rep = CaseReport::finite(id, points);
            rep.predicted_root_count = Some(1 + case6_predicted_extra_roots(&p));
            rep
        }
        CaseId::P6P5Zero | CaseId::P6Zero => {
            let points = if id == CaseId::P6P5Zero && p.p3 > 0.0 {
                let eq = Equilibrium::at(&p, State::new(base, 0.0, base));
                vec![(eq, Classification::NonHyperbolic)]
            } else {
                Vec::new()
            };
            let mut rep = CaseReport::finite(id, points);
            rep.classification = if id == CaseId::P6P5Zero && r0 == Some(0.0) {
                Classification::ExplicitSolution
            } else {
                Classification::BlowUp
            };
            rep.blow_up_time_estimate = r0.and_then(|r0| blow_up_estimate(&p, r0).ok());
            rep
        }
    };
    Ok(report)
}

/// Leading-order blow-up time `(p4 / r0) (p3 / A)^2` of the receptor channel
/// when `p6 = 0`.
pub fn blow_up_estimate(params: &ModelParams, r0: f64) -> Result<f64> {
    if params.p6 != 0.0 || !(r0 > 0.0) || !(params.drive > 0.0) || !(params.p4 > 0.0) {
        return Err(Error::UnsupportedCase(format!(
            "blow-up estimate needs p6 = 0 and r0, A, p4 > 0 (got p6 = {}, r0 = {r0}, A = {}, p4 = {})",
            params.p6, params.drive, params.p4
        )));
    }
    let ratio = params.p3 / params.drive;
    Ok(params.p4 / r0 * ratio * ratio)
}

/// Receptor levels of the `p2 = 0` fixed points: roots of
/// `-p6 c^2 r^3 + (1 + p5) c^2 r^2 - p4 p6 r + p4 p5` with `c = A / p3`,
/// inside `[p5/p6, (p5+1)/p6]`.
pub fn case2_receptor_roots(params: &ModelParams) -> Vec<f64> {
    let p = params;
    let c = p.drive / p.p3;
    let c2 = c * c;
    let coeffs = [-p.p6 * c2, (1.0 + p.p5) * c2, -p.p4 * p.p6, p.p4 * p.p5];
    let (lo, hi) = (p.r_lower(), p.r_upper());
    let slack = 1e-12 * hi.max(1.0);
    let mut roots: Vec<f64> = poly::real_roots(&coeffs)
        .into_iter()
        .filter(|&r| r >= lo - slack && r <= hi + slack)
        .map(|r| r.clamp(lo, hi))
        .collect();
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * hi);
    roots
}

/// Root count predicted from the local extrema of `h(r) = r (r - r1)(r - r2)`
/// against the level `p4 p5 / (p6 c^2)`.
pub fn case2_predicted_root_count(params: &ModelParams) -> usize {
    let p = params;
    let c = p.drive / p.p3;
    let sum = (1.0 + p.p5) / p.p6;
    let prod = p.p4 / (c * c);
    let level = p.p4 * p.p5 / (p.p6 * c * c);
    let k2 = sum * sum - 3.0 * prod;
    if k2 <= 0.0 {
        return 1;
    }
    let k = k2.sqrt();
    let h = |r: f64| r * (r * r - sum * r + prod);
    let (r_max, r_min) = ((sum - k) / 3.0, (sum + k) / 3.0);
    let (h_max, h_min) = (h(r_max), h(r_min));
    let tol = 1e-12 * level.abs().max(h_max.abs()).max(f64::MIN_POSITIVE);
    if (level - h_max).abs() <= tol || (level - h_min).abs() <= tol {
        2
    } else if level > h_min && level < h_max {
        3
    } else {
        1
    }
}

fn case6_cubic(p: &ModelParams) -> [f64; 4] {
    let c = p.drive / p.p3;
    [
        1.0,
        p.p6 * (1.0 + p.p2 * p.p2 * p.p4) / p.p2 - c,
        -2.0 * p.p6 * c / p.p2,
        p.p6 * c * c / p.p2,
    ]
}

/// ACTH levels `0 < a < A/p3` of the `p5 = 0` fixed points with `r > 0`.
pub fn case6_extra_acth_roots(params: &ModelParams) -> Vec<f64> {
    let c = params.drive / params.p3;
    let mut roots: Vec<f64> = poly::real_roots(&case6_cubic(params))
        .into_iter()
        .filter(|&a| a > 0.0 && a < c)
        .collect();
    roots.dedup_by(|a, b| (*a - *b).abs() <= 1e-9 * c);
    roots
}

/// Positive root `a2` of `a (a - a1)(a - a2)` in the `p5 = 0` analysis.
pub fn case6_a2(params: &ModelParams) -> f64 {
    let [_, b, m, _] = case6_cubic(params);
    0.5 * (-b + (b * b - 4.0 * m).sqrt())
}

/// Extra-root count in `(0, A/p3)` from `f_min` at the positive critical
/// point `a_m` of `f(a) = a (a - a1)(a - a2)`.
///
/// `f(A/p3)` exceeds the level by `p6 p2 p4 (A/p3)^2`, so roots come in
/// pairs: two when `a_m < A/p3` and `f_min` is below the level, one at
/// tangency, none otherwise. With `p2^2 p4 >= 1` the condition `a_m < A/p3`
/// holds automatically.
pub fn case6_predicted_extra_roots(params: &ModelParams) -> usize {
    let [_, b, m, t] = case6_cubic(params);
    let c = params.drive / params.p3;
    let a_m = (-b + (b * b - 3.0 * m).sqrt()) / 3.0;
    let f_min = a_m * (a_m * a_m + b * a_m + m);
    let level = -t;
    let tol = 1e-12 * level.abs();
    if a_m >= c || f_min > level + tol {
        0
    } else if f_min >= level - tol {
        1
    } else {
        2
    }
}
