//! Delay-induced stability switches of the linearization
//!
//! ```text
//! C(λ) = P(λ) + Q(λ) e^{-λτ},  Q(λ) = K3(λ+p6)
//! ```
//!
//! With [`ActhCoupling::InstantAndDelayed`] (the default)
//! `P(λ) = (λ+1)(λ+p3)(λ+p6-K2) + K3(λ+p6)`; with
//! [`ActhCoupling::DelayedOnly`] the `K3` term is absent from `P`, which is
//! the exact linearization of `o' = a(t - τ) - o`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::poly;

/// Delay-switch hypotheses as evaluated for this `P`, `Q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SwitchConditions {
    pub no_common_imaginary_zeros: bool,
    pub conjugate_symmetric: bool,
    pub nonzero_at_origin: bool,
    pub finite_roots_at_zero_delay: bool,
    pub finitely_many_f_zeros: bool,
}

/// How ACTH enters the cortisol equation in the linearization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActhCoupling {
    /// `a(t) + a(t - τ)`; at `τ = 0` the cubic carries `2 K3`.
    #[default]
    InstantAndDelayed,
    /// `a(t - τ)` only; at `τ = 0` this is the non-delayed characteristic cubic.
    DelayedOnly,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuasiCharacteristic {
    pub coupling: ActhCoupling,
    /// `[1, c2, c1, c0]`, highest degree first.
    pub p_coeffs: [f64; 4],
    /// `[K3, K3 p6]`.
    pub q_coeffs: [f64; 2],
    pub p3: f64,
    pub p6: f64,
    #[serde(rename = "K2")]
    pub k2: f64,
    #[serde(rename = "K3")]
    pub k3: f64,
    /// `P(0) + Q(0)`.
    pub p0_plus_q0: f64,
    pub conditions: SwitchConditions,
}

impl QuasiCharacteristic {
    /// Builds `P` and `Q` from the four numbers they depend on.
    ///
    /// ```
    /// use hpa_core::delay::QuasiCharacteristic;
    ///
    /// let qc = QuasiCharacteristic::from_parts(0.41, 0.91, 0.81, 0.41)?;
    /// assert!((qc.p0_plus_q0 - 0.7872).abs() < 1e-12);
    /// # Ok::<(), hpa_core::Error>(())
    /// ```
    pub fn from_parts(p3: f64, p6: f64, k2: f64, k3: f64) -> Result<Self> {
        Self::with_coupling(ActhCoupling::default(), p3, p6, k2, k3)
    }

    pub fn with_coupling(coupling: ActhCoupling, p3: f64, p6: f64, k2: f64, k3: f64) -> Result<Self> {
        if ![p3, p6, k2, k3].iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("non-finite quasi-characteristic input"));
        }
        let d = p6 - k2;
        let feedback = match coupling {
            ActhCoupling::InstantAndDelayed => k3,
            ActhCoupling::DelayedOnly => 0.0,
        };
        let p_coeffs = [1.0, 1.0 + p3 + d, p3 + (1.0 + p3) * d + feedback, p3 * d + feedback * p6];
        let q_coeffs = [k3, k3 * p6];
        let p0_plus_q0 = p_coeffs[3] + q_coeffs[1];
        if p0_plus_q0.abs() <= 1e-12 {
            return Err(Error::GuardViolation(format!("P(0) + Q(0) = {p0_plus_q0}")));
        }
        let p_imag_zero = poly::roots(&p_coeffs).iter().any(|z| z.re.abs() <= 1e-12);
        let no_common_imaginary_zeros = if k3 == 0.0 { !p_imag_zero } else { !(p6 == 0.0 && p_coeffs[3] == 0.0) };
        let conditions = SwitchConditions {
            no_common_imaginary_zeros,
            conjugate_symmetric: true,
            nonzero_at_origin: true,
            finite_roots_at_zero_delay: true,
            finitely_many_f_zeros: true,
        };
        Ok(QuasiCharacteristic { coupling, p_coeffs, q_coeffs, p3, p6, k2, k3, p0_plus_q0, conditions })
    }

    pub fn p(&self, z: Complex64) -> Complex64 {
        poly::eval_complex(&self.p_coeffs, z)
    }

    pub fn q(&self, z: Complex64) -> Complex64 {
        poly::eval_complex(&self.q_coeffs, z)
    }

    /// `C(λ)` at delay `tau`.
    pub fn eval(&self, z: Complex64, tau: f64) -> Complex64 {
        self.p(z) + self.q(z) * (-z * tau).exp()
    }

    fn eval_with_derivative(&self, z: Complex64, tau: f64) -> (Complex64, Complex64) {
        let e = (-z * tau).exp();
        let dp = poly::eval_complex(&poly::derivative(&self.p_coeffs), z);
        let q = self.q(z);
        (self.p(z) + q * e, dp + (self.q_coeffs[0] - tau * q) * e)
    }

    /// Coefficients of `P + Q`, the `τ = 0` characteristic cubic.
    pub fn zero_delay_cubic(&self) -> [f64; 4] {
        let mut c = self.p_coeffs;
        c[2] += self.q_coeffs[0];
        c[3] += self.q_coeffs[1];
        c
    }

    /// Roots of the `τ = 0` cubic.
    pub fn zero_delay_roots(&self) -> Vec<Complex64> {
        poly::roots(&self.zero_delay_cubic())
    }
}

/// `P` and `Q` at a fixed point.
pub fn build_quasi_characteristic(params: &ModelParams, eq: &Equilibrium, coupling: ActhCoupling) -> Result<QuasiCharacteristic> {
    QuasiCharacteristic::with_coupling(coupling, params.p3, params.p6, eq.k2, eq.k3)
}

/// `F(y) = |P(iy)|^2 - |Q(iy)|^2` from the complex moduli.
pub fn f_function(qc: &QuasiCharacteristic, y: f64) -> f64 {
    let z = Complex64::new(0.0, y);
    qc.p(z).norm_sqr() - qc.q(z).norm_sqr()
}

/// `(b1, b2, b3)` with `F = x^3 + b1 x^2 + b2 x + b3` in `x = y^2`.
///
/// With `P(iy) = (c0 - c2 y^2) + i y (c1 - y^2)` the moduli expand to
/// `|P|^2 = (c0 - c2 x)^2 + x (c1 - x)^2` and `|Q|^2 = K3^2 (x + p6^2)`.
pub fn f_cubic(qc: &QuasiCharacteristic) -> [f64; 3] {
    let [_, c2, c1, c0] = qc.p_coeffs;
    let k3 = qc.k3;
    [c2 * c2 - 2.0 * c1, c1 * c1 - 2.0 * c0 * c2 - k3 * k3, c0 * c0 - k3 * k3 * qc.p6 * qc.p6]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CrossingDirection {
    LeftToRight,
    RightToLeft,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SwitchVerdict {
    StableAllTau,
    UnstableAllTau,
    Switches,
    UnstableAllTauBeyondTc,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CubicRoot {
    pub x: f64,
    pub multiplicity: usize,
}

/// One crossing frequency with its delay sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub x: f64,
    pub v: f64,
    /// `dF/dx` at `x`.
    pub slope: f64,
    pub direction: CrossingDirection,
    /// `θ ∈ [0, 2π)` with `sin θ`, `cos θ` from the real and imaginary parts of `C(iv) = 0`.
    pub theta: f64,
    /// `τ_n = (θ + 2πn) / v`, `n = 0..=n_max`.
    pub taus: Vec<f64>,
    /// Largest `|C(iv; τ_n)|` over the sequence.
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchSchedule {
    pub f_cubic: [f64; 3],
    pub delta0: f64,
    /// Critical points of `F(x)` when `Δ0 > 0`.
    pub critical_points: Option<(f64, f64)>,
    pub positive_roots_x: Vec<CubicRoot>,
    pub crossings: Vec<Crossing>,
    /// Roots whose sin/cos system was not solvable.
    pub skipped_frequencies: Vec<f64>,
    pub has_multiple_root: bool,
    pub rhp_count_at_zero: usize,
    /// Smallest delay at which the linearization loses stability.
    pub first_switch: Option<f64>,
    /// Smallest left-to-right delay beyond which the right half-plane is never empty again.
    pub tau_critical: Option<f64>,
    /// Largest delay up to which every crossing sequence is complete.
    pub horizon: f64,
    pub verdict: SwitchVerdict,
}

impl SwitchSchedule {
    /// All crossing delays in increasing order, with their directions.
    pub fn events(&self) -> Vec<(f64, CrossingDirection)> {
        let mut ev: Vec<(f64, CrossingDirection)> =
            self.crossings.iter().flat_map(|c| c.taus.iter().map(move |&t| (t, c.direction))).collect();
        ev.sort_by(|a, b| a.0.total_cmp(&b.0));
        ev
    }

    /// Right half-plane root count just above `tau`, from the crossing
    /// bookkeeping; meaningful for `tau <= horizon`.
    pub fn rhp_count_after(&self, tau: f64) -> usize {
        self.events().into_iter().take_while(|e| e.0 <= tau).fold(self.rhp_count_at_zero, |n, (_, d)| match d {
            CrossingDirection::LeftToRight => n + 2,
            CrossingDirection::RightToLeft => n.saturating_sub(2),
        })
    }
}

/// Coefficients `A1..A4` of `C(iv) = A1 - A2 cos - A3 sin + i(A4 - A3 cos + A2 sin)`.
pub fn crossing_coeffs(qc: &QuasiCharacteristic, v: f64) -> [f64; 4] {
    let [_, c2, c1, c0] = qc.p_coeffs;
    [c0 - v * v * c2, -qc.k3 * qc.p6, -qc.k3 * v, v * c1 - v * v * v]
}

/// Positive roots of the `F` cubic, crossing delays and the stability verdict.
///
/// ```
/// use hpa_core::delay::{switch_schedule, QuasiCharacteristic, SwitchVerdict};
///
/// let qc = QuasiCharacteristic::from_parts(0.41, 0.91, 0.81, 0.41)?;
/// let s = switch_schedule(&qc, 3);
/// assert_eq!(s.verdict, SwitchVerdict::Switches);
/// assert!((s.first_switch.unwrap() - 2.0).abs() < 0.2);
/// # Ok::<(), hpa_core::Error>(())
/// ```
pub fn switch_schedule(qc: &QuasiCharacteristic, n_max: usize) -> SwitchSchedule {
    let b = f_cubic(qc);
    let coeffs = [1.0, b[0], b[1], b[2]];
    let delta0 = b[0] * b[0] - 3.0 * b[1];
    let critical_points = (delta0 > 0.0).then(|| ((-b[0] + delta0.sqrt()) / 3.0, (-b[0] - delta0.sqrt()) / 3.0));

    let mut reals = poly::real_roots(&coeffs);
    reals.retain(|&x| x > 0.0);
    let mut positive_roots_x: Vec<CubicRoot> = Vec::new();
    for x in reals {
        match positive_roots_x.last_mut() {
            Some(last) if (x - last.x).abs() <= 1e-6 * (1.0 + x.abs()) => last.multiplicity += 1,
            _ => positive_roots_x.push(CubicRoot { x, multiplicity: 1 }),
        }
    }
    // a double root can come back as a close complex pair
    let dcoeffs = poly::derivative(&coeffs);
    for root in &mut positive_roots_x {
        let scale = 1.0 + root.x * root.x * (1.0 + b[0].abs());
        if root.multiplicity == 1 && poly::eval(&dcoeffs, root.x).abs() <= 1e-9 * scale {
            root.multiplicity = 2;
        }
    }
    let has_multiple_root = positive_roots_x.iter().any(|r| r.multiplicity > 1);

    let mut crossings = Vec::new();
    let mut skipped_frequencies = Vec::new();
    for root in positive_roots_x.iter().filter(|r| r.multiplicity == 1) {
        let v = root.x.sqrt();
        let [a1, a2, a3, a4] = crossing_coeffs(qc, v);
        let den = a2 * a2 + a3 * a3;
        let sin = (a1 * a3 - a2 * a4) / den;
        let cos = (a1 * a2 + a3 * a4) / den;
        if !(den > 0.0) || sin.abs().max(cos.abs()) > 1.0 + 1e-9 {
            skipped_frequencies.push(v);
            continue;
        }
        let theta = sin.atan2(cos).rem_euclid(TAU);
        let taus: Vec<f64> = (0..=n_max).map(|n| (theta + TAU * n as f64) / v).collect();
        let iv = Complex64::new(0.0, v);
        let max_residual = taus.iter().map(|&t| qc.eval(iv, t).norm()).fold(0.0, f64::max);
        let slope = poly::eval(&dcoeffs, root.x);
        let direction = if slope > 0.0 { CrossingDirection::LeftToRight } else { CrossingDirection::RightToLeft };
        crossings.push(Crossing { x: root.x, v, slope, direction, theta, taus, max_residual });
    }

    let rhp_count_at_zero = qc.zero_delay_roots().iter().filter(|z| z.re > 0.0).count();
    let mut sched = SwitchSchedule {
        f_cubic: b,
        delta0,
        critical_points,
        positive_roots_x,
        crossings,
        skipped_frequencies,
        has_multiple_root,
        rhp_count_at_zero,
        first_switch: None,
        tau_critical: None,
        horizon: f64::INFINITY,
        verdict: SwitchVerdict::StableAllTau,
    };

    sched.horizon = sched.crossings.iter().filter_map(|c| c.taus.last().copied()).fold(f64::INFINITY, f64::min);
    let mut count = rhp_count_at_zero;
    let mut changes = 0;
    for (t, d) in sched.events().into_iter().take_while(|e| e.0 <= sched.horizon) {
        let before = count;
        count = match d {
            CrossingDirection::LeftToRight => count + 2,
            CrossingDirection::RightToLeft => count.saturating_sub(2),
        };
        if before == 0 && count > 0 {
            changes += 1;
            sched.first_switch.get_or_insert(t);
            sched.tau_critical = Some(t);
        } else if before > 0 && count == 0 {
            changes += 1;
            sched.tau_critical = None;
        }
    }
    sched.verdict = if sched.crossings.is_empty() {
        if rhp_count_at_zero == 0 {
            SwitchVerdict::StableAllTau
        } else {
            SwitchVerdict::UnstableAllTau
        }
    } else if rhp_count_at_zero > 0 && changes == 0 {
        SwitchVerdict::UnstableAllTau
    } else if changes <= 1 {
        SwitchVerdict::UnstableAllTauBeyondTc
    } else {
        SwitchVerdict::Switches
    };
    sched
}

/// Axis-aligned rectangle `[re0, re1] x [im0, im1]` in the complex plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Region {
    pub fn new(re0: f64, re1: f64, im0: f64, im1: f64) -> Self {
        Region { re: (re0, re1), im: (im0, im1) }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }

    fn point(&self, i: usize, j: usize, n: usize) -> Complex64 {
        let f = |lo: f64, hi: f64, k: usize| lo + (hi - lo) * k as f64 / (n - 1) as f64;
        Complex64::new(f(self.re.0, self.re.1, i), f(self.im.0, self.im.1, j))
    }
}

fn newton(qc: &QuasiCharacteristic, tau: f64, z0: Complex64) -> Option<Complex64> {
    let mut z = z0;
    let (mut c, mut dc) = qc.eval_with_derivative(z, tau);
    for _ in 0..100 {
        if c.norm() < 1e-14 {
            break;
        }
        if dc.norm() == 0.0 || !dc.is_finite() {
            return None;
        }
        let step = c / dc;
        let mut lambda = 1.0;
        let mut accepted = false;
        for _ in 0..40 {
            let cand = z - step * lambda;
            let (cc, dcc) = qc.eval_with_derivative(cand, tau);
            if cc.norm() < c.norm() {
                z = cand;
                c = cc;
                dc = dcc;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (c.norm() < 1e-10).then_some(z)
}

/// Roots of `C(λ)` in `region`, from damped Newton started on a
/// `grid x grid` lattice of seeds.
///
/// ```
/// use hpa_core::delay::{locate_characteristic_roots, QuasiCharacteristic, Region};
///
/// let qc = QuasiCharacteristic::from_parts(0.41, 0.91, 0.81, 0.41)?;
/// let roots = locate_characteristic_roots(&qc, 0.0, Region::new(-2.0, 1.0, -2.0, 2.0), 16)?;
/// assert_eq!(roots.len(), 3);
/// # Ok::<(), hpa_core::Error>(())
/// ```
pub fn locate_characteristic_roots(qc: &QuasiCharacteristic, tau: f64, region: Region, grid: usize) -> Result<Vec<Complex64>> {
    if grid < 16 {
        return Err(Error::invalid(format!("grid = {grid} must be >= 16")));
    }
    if !(tau >= 0.0 && tau.is_finite()) {
        return Err(Error::invalid(format!("tau = {tau} must be finite and >= 0")));
    }
    let mut found: Vec<Complex64> = Vec::new();
    for i in 0..grid {
        for j in 0..grid {
            let Some(z) = newton(qc, tau, region.point(i, j, grid)) else { continue };
            if region.contains(z) && !found.iter().any(|w| (w - z).norm() < 1e-6) {
                found.push(z);
            }
        }
    }
    found.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(found)
}

/// Real and imaginary parts of `C` at one lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourPoint {
    pub re: f64,
    pub im: f64,
    pub re_c: f64,
    pub im_c: f64,
}

/// `C(λ)` on a `resolution x resolution` lattice over `region`, real part
/// varying fastest.
pub fn contour_field(qc: &QuasiCharacteristic, tau: f64, region: Region, resolution: usize) -> Result<Vec<ContourPoint>> {
    if resolution < 2 {
        return Err(Error::invalid(format!("resolution = {resolution} must be >= 2")));
    }
    let mut out = Vec::with_capacity(resolution * resolution);
    for j in 0..resolution {
        for i in 0..resolution {
            let z = region.point(i, j, resolution);
            let c = qc.eval(z, tau);
            out.push(ContourPoint { re: z.re, im: z.im, re_c: c.re, im_c: c.im });
        }
    }
    Ok(out)
}
