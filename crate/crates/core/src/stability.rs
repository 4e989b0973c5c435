//! Characteristic cubic of the non-delayed linearization and Routh–Hurwitz
//! classification.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibria::Equilibrium;
use crate::error::{Error, Result};
use crate::model::ModelParams;
use crate::poly;

/// Band around zero inside which a Routh–Hurwitz quantity counts as equality.
pub const RH_MARGIN: f64 = 1e-10;

/// `λ^3 + α1 λ^2 + α2 λ + α3` with its discriminant and roots.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CharCubic {
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub delta: f64,
    pub roots: Vec<Complex64>,
}

impl CharCubic {
    pub fn from_coeffs(alpha1: f64, alpha2: f64, alpha3: f64) -> Self {
        let (a1, a2, a3) = (alpha1, alpha2, alpha3);
        let delta = 18.0 * a1 * a2 * a3 - 4.0 * a1.powi(3) * a3 + a1 * a1 * a2 * a2
            - 4.0 * a2.powi(3)
            - 27.0 * a3 * a3;
        let mut roots = poly::roots(&[1.0, a1, a2, a3]);
        roots.sort_by(|x, y| x.re.total_cmp(&y.re).then(x.im.total_cmp(&y.im)));
        CharCubic { alpha1, alpha2, alpha3, delta, roots }
    }

    pub fn max_real_part(&self) -> f64 {
        self.roots.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn real_root_count(&self) -> usize {
        self.roots.iter().filter(|z| poly::is_real(**z)).count()
    }
}

/// Characteristic cubic `(λ+1)(λ+p3)(λ+p6-K2) + K3(λ+p6)` at `eq`.
pub fn char_cubic(params: &ModelParams, eq: &Equilibrium) -> CharCubic {
    let (p3, p6, k2, k3) = (params.p3, params.p6, eq.k2, eq.k3);
    CharCubic::from_coeffs(
        p3 + p6 - k2 + 1.0,
        p3 + p6 - k2 + p3 * (p6 - k2) + k3,
        p3 * (p6 - k2) + p6 * k3,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityKind {
    AsymptoticallyStable,
    Unstable,
    InconclusiveNonHyperbolic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhChecks {
    pub alpha1_positive: bool,
    pub alpha3_positive: bool,
    pub alpha1_alpha2_exceeds_alpha3: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict {
    pub kind: StabilityKind,
    pub rh_checks: RhChecks,
    pub max_real_part: f64,
}

/// Routh–Hurwitz verdict for a cubic, with the eigenvalue real part attached.
///
/// ```
/// use hpa_core::stability::{routh_hurwitz, CharCubic, StabilityKind};
///
/// let v = routh_hurwitz(&CharCubic::from_coeffs(6.0, 11.0, 6.0));
/// assert_eq!(v.kind, StabilityKind::AsymptoticallyStable);
/// assert!((v.max_real_part + 1.0).abs() < 1e-12);
/// ```
pub fn routh_hurwitz(cubic: &CharCubic) -> StabilityVerdict {
    let c = [cubic.alpha1, cubic.alpha3, cubic.alpha1 * cubic.alpha2 - cubic.alpha3];
    let rh_checks = RhChecks {
        alpha1_positive: c[0] > RH_MARGIN,
        alpha3_positive: c[1] > RH_MARGIN,
        alpha1_alpha2_exceeds_alpha3: c[2] > RH_MARGIN,
    };
    let kind = if c.iter().all(|&v| v > RH_MARGIN) {
        StabilityKind::AsymptoticallyStable
    } else if c.iter().any(|&v| v < -RH_MARGIN) {
        StabilityKind::Unstable
    } else {
        StabilityKind::InconclusiveNonHyperbolic
    };
    StabilityVerdict { kind, rh_checks, max_real_part: cubic.max_real_part() }
}

/// The three inequality chains in `x = r*` that restate the Routh–Hurwitz
/// conditions for the generic case, each evaluated as written.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RhChains {
    /// `2 p6^2 x^2 + (p3 + 1 - p6 (1 + 4 p5)) x + 2 p5 (p5 + 1) > 0`
    pub alpha1_chain: bool,
    /// `(x - x1)(x - x2) < x/(2 p6) [1 + p2 sqrt(p4 (x - x1)) / (sqrt(x2 - x) + p2 sqrt(p4 (x - x1)))]`
    pub alpha3_chain: bool,
    /// `K2` below the square-root threshold, or a non-positive radicand.
    pub product_chain: bool,
    /// All three chains hold and the eigenvalues are in the left half-plane,
    /// or neither.
    pub agrees_with_eigenvalues: bool,
}

pub fn verify_rh_always_stable(params: &ModelParams, eq: &Equilibrium) -> Result<RhChains> {
    if !params.is_generic() {
        return Err(Error::NotGeneric(format!("{params:?}")));
    }
    let ModelParams { p2, p3, p4, p5, p6, .. } = *params;
    let x = eq.r_star;
    let (x1, x2) = (params.r_lower(), params.r_upper());

    let alpha1_chain = 2.0 * p6 * p6 * x * x + (p3 + 1.0 - p6 * (1.0 + 4.0 * p5)) * x + 2.0 * p5 * (p5 + 1.0) > 0.0;

    let w = p2 * (p4 * (x - x1).max(0.0)).sqrt();
    let alpha3_chain = (x - x1) * (x - x2) < x / (2.0 * p6) * (1.0 + w / ((x2 - x).max(0.0).sqrt() + w));

    let k = eq.k3 / (1.0 + p3);
    let radicand = k * k - 2.0 * (1.0 - 2.0 * p6 / (1.0 + p3)) * eq.k3 + (p3 - 1.0).powi(2);
    let product_chain = radicand <= 0.0 || eq.k2 < p6 + 0.5 * (p3 + 1.0 + k - radicand.sqrt());

    let all = alpha1_chain && alpha3_chain && product_chain;
    let stable = char_cubic(params, eq).max_real_part() < 0.0;
    Ok(RhChains { alpha1_chain, alpha3_chain, product_chain, agrees_with_eigenvalues: all == stable })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibria::{classify_case, solve_equilibrium};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn factored_cubics() {
        let v = routh_hurwitz(&CharCubic::from_coeffs(6.0, 11.0, 6.0));
        assert_eq!(v.kind, StabilityKind::AsymptoticallyStable);
        let c = CharCubic::from_coeffs(4.0, 1.0, -6.0);
        let v = routh_hurwitz(&c);
        assert_eq!(v.kind, StabilityKind::Unstable);
        assert!(!v.rh_checks.alpha3_positive);
        assert!(close(v.max_real_part, 1.0, 1e-12));
        assert!(c.delta > 0.0 && c.real_root_count() == 3);
    }

    #[test]
    fn marginal_cubic_is_inconclusive() {
        // (λ + 1)(λ^2 + 1)
        let v = routh_hurwitz(&CharCubic::from_coeffs(1.0, 1.0, 1.0));
        assert_eq!(v.kind, StabilityKind::InconclusiveNonHyperbolic);
    }

    #[test]
    fn reference_set_cubic() {
        let p = ModelParams::without_delay(1.0, 15.0, 7.2, 0.05, 0.11, 2.9).unwrap();
        let eq = solve_equilibrium(&p).unwrap();
        let c = char_cubic(&p, &eq);
        // α1 = 11.1 - K2 with K2 small
        assert!(close(c.alpha1, 11.07, 0.02));
        assert!(c.delta > 0.0);
        assert_eq!(c.real_root_count(), 3);
        assert_eq!(routh_hurwitz(&c).kind, StabilityKind::AsymptoticallyStable);
        let chains = verify_rh_always_stable(&p, &eq).unwrap();
        assert!(chains.alpha1_chain && chains.alpha3_chain && chains.product_chain);
    }

    #[test]
    fn receptor_free_roots() {
        let eq = Equilibrium { a_star: 1.0, r_star: 1.0, o_star: 1.0, k1: 0.0, k2: 0.0, k3: 0.0, k4: 0.0 };
        let p = ModelParams::without_delay(1.0, 1.0, 2.5, 0.0, 1.0, 0.4).unwrap();
        let c = char_cubic(&p, &eq);
        let want = [-2.5, -1.0, -0.4];
        for (z, w) in c.roots.iter().zip(want) {
            assert!(close(z.re, w, 1e-10) && z.im.abs() < 1e-10);
        }
    }

    #[test]
    fn bistable_saddle() {
        let p = ModelParams::without_delay(0.106, 0.0, 0.222, 0.464, 0.094, 0.418).unwrap();
        let rep = classify_case(&p, None).unwrap();
        let mid = rep.fixed_points[1];
        let c = char_cubic(&p, &mid);
        assert!(close(c.alpha3, -0.008, 0.003), "{}", c.alpha3);
        assert_eq!(routh_hurwitz(&c).kind, StabilityKind::Unstable);
        assert!(matches!(verify_rh_always_stable(&p, &mid), Err(Error::NotGeneric(_))));
    }

    #[test]
    fn coefficients_from_roots() {
        let c = CharCubic::from_coeffs(3.2, 4.1, 1.7);
        let back = poly::from_roots(&c.roots);
        assert!(close(back[1], 3.2, 1e-12) && close(back[2], 4.1, 1e-12) && close(back[3], 1.7, 1e-12));
        assert!(c.delta < 0.0 && c.real_root_count() == 1);
    }
}
