//! Associated Laguerre polynomials `L¹_k`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported degree.
pub const MAX_DEGREE: usize = 64;

/// `L¹_k(x)` for complex `x` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k + 2 - x) L_k - (k + 1) L_{k-1}`.
pub fn laguerre_assoc1_complex(degree: usize, x: Complex64) -> Result<Complex64> {
    if degree > MAX_DEGREE {
        return Err(Error::Config(format!(
            "Laguerre degree {degree} out of range 0..={MAX_DEGREE}"
        )));
    }
    let mut prev = Complex64::new(1.0, 0.0);
    if degree == 0 {
        return Ok(prev);
    }
    let mut cur = 2.0 - x;
    for k in 1..degree {
        let kf = k as f64;
        let next = ((2.0 * kf + 2.0 - x) * cur - (kf + 1.0) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    Ok(cur)
}

/// `L¹_k(x)`; `L¹_k(0) = k + 1`.
pub fn laguerre_assoc1(degree: usize, x: f64) -> Result<f64> {
    laguerre_assoc1_complex(degree, Complex64::new(x, 0.0)).map(|v| v.re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::DoubleDouble;

    fn binom(n: usize, k: usize) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    /// `Σ_i (-1)^i C(k+1, k-i) x^i / i!`, summed in double-double so the
    /// alternating cancellation does not pollute the reference value.
    fn series(k: usize, x: f64) -> f64 {
        let x = DoubleDouble::new(x);
        let mut term = DoubleDouble::ONE;
        let mut sum = DoubleDouble::ZERO;
        for i in 0..=k {
            if i > 0 {
                term = term * x / DoubleDouble::new(i as f64);
            }
            let c = term * DoubleDouble::new(binom(k + 1, k - i));
            sum = if i % 2 == 0 { sum + c } else { sum - c };
        }
        sum.to_f64()
    }

    #[test]
    fn examples() {
        assert!((laguerre_assoc1(1, 0.7).unwrap() - 1.3).abs() < 1e-15);
        assert_eq!(laguerre_assoc1(0, 12.0).unwrap(), 1.0);
        assert!((laguerre_assoc1(2, 1.0).unwrap() - 0.5).abs() < 1e-15);
        for k in 0..=MAX_DEGREE {
            assert!((laguerre_assoc1(k, 0.0).unwrap() - (k + 1) as f64).abs() < 1e-12);
        }
        assert!(laguerre_assoc1(65, 1.0).is_err());
    }

    #[test]
    fn recurrence_matches_series() {
        let mut worst: f64 = 0.0;
        for k in 0..=10 {
            for i in 0..=200 {
                let x = 0.1 * i as f64;
                worst = worst.max((laguerre_assoc1(k, x).unwrap() - series(k, x)).abs());
            }
        }
        assert!(worst < 1e-12, "{worst}");
    }

    #[test]
    fn zeros_of_degree_two() {
        // L¹_2(x) = (x² - 6x + 6)/2 vanishes at 3 ∓ √3.
        for x in [3.0 - 3f64.sqrt(), 3.0 + 3f64.sqrt()] {
            assert!(laguerre_assoc1(2, x).unwrap().abs() < 1e-14);
        }
    }
}
