//! Real-coefficient polynomial helpers. Coefficients are stored highest
//! degree first.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Horner evaluation at a real point.
pub fn eval(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().fold(0.0, |acc, &c| acc * x + c)
}

/// Horner evaluation at a complex point.
pub fn eval_complex(coeffs: &[f64], z: Complex64) -> Complex64 {
    coeffs.iter().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Coefficients of the derivative.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n <= 1 {
        return vec![0.0];
    }
    coeffs[..n - 1].iter().enumerate().map(|(i, &c)| c * (n - 1 - i) as f64).collect()
}

/// Monic polynomial with the given roots (real coefficients assumed, so the
/// imaginary parts of the product are dropped).
pub fn from_roots(roots: &[Complex64]) -> Vec<f64> {
    let mut c = vec![Complex64::new(1.0, 0.0)];
    for &r in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); c.len() + 1];
        for (i, &ci) in c.iter().enumerate() {
            next[i] += ci;
            next[i + 1] -= ci * r;
        }
        c = next;
    }
    c.into_iter().map(|z| z.re).collect()
}

/// All complex roots, via eigenvalues of the companion matrix followed by
/// a few Newton steps on the original polynomial.
///
/// Leading zero coefficients are stripped; a constant polynomial has no roots.
pub fn roots(coeffs: &[f64]) -> Vec<Complex64> {
    let start = coeffs.iter().position(|&c| c != 0.0).unwrap_or(coeffs.len());
    let c = &coeffs[start..];
    if c.len() <= 1 {
        return Vec::new();
    }
    let n = c.len() - 1;
    let lead = c[0];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        m[(0, j)] = -c[j + 1] / lead;
    }
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    let dc = derivative(c);
    m.complex_eigenvalues()
        .iter()
        .map(|&z0| polish(c, &dc, z0))
        .collect()
}

fn polish(c: &[f64], dc: &[f64], z0: Complex64) -> Complex64 {
    let mut z = z0;
    let mut fz = eval_complex(c, z).norm();
    for _ in 0..4 {
        let d = eval_complex(dc, z);
        if d.norm() == 0.0 {
            break;
        }
        let cand = z - eval_complex(c, z) / d;
        let fc = eval_complex(c, cand).norm();
        if !(fc < fz) {
            break;
        }
        z = cand;
        fz = fc;
    }
    z
}

/// Imaginary-part threshold below which a root is treated as real.
pub fn is_real(z: Complex64) -> bool {
    z.im.abs() <= 1e-9 * (1.0 + z.norm())
}

/// Real roots in ascending order.
pub fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let mut r: Vec<f64> = roots(coeffs).into_iter().filter(|&z| is_real(z)).map(|z| z.re).collect();
    r.sort_by(|a, b| a.total_cmp(b));
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factored_cubic() {
        let r = real_roots(&[1.0, 6.0, 11.0, 6.0]);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-3.0, -2.0, -1.0]) {
            assert!((got - want).abs() < 1e-13);
        }
    }

    #[test]
    fn complex_pair() {
        // (x^2 + 1)(x - 2)
        let z = roots(&[1.0, -2.0, 1.0, -2.0]);
        assert_eq!(z.iter().filter(|z| is_real(**z)).count(), 1);
        assert!(z.iter().any(|z| (z - Complex64::new(0.0, 1.0)).norm() < 1e-13));
    }

    #[test]
    fn leading_zeros_and_constants() {
        assert!(roots(&[0.0, 0.0, 3.0]).is_empty());
        let r = real_roots(&[0.0, 2.0, -4.0]);
        assert_eq!(r, vec![2.0]);
    }

    #[test]
    fn expand_and_derivative() {
        let c = from_roots(&[Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0), Complex64::new(-3.0, 0.0)]);
        assert_eq!(c, vec![1.0, 4.0, 1.0, -6.0]);
        assert_eq!(derivative(&c), vec![3.0, 8.0, 1.0]);
        assert_eq!(eval(&c, 1.0), 0.0);
    }
}
