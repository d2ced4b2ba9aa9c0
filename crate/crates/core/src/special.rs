//! Sine and cosine integrals.
//!
//! Small arguments use the power series; larger ones the continued fraction
//! of `E1(ix) = -Ci(x) + i (Si(x) - π/2)` evaluated with modified Lentz.

use num_complex::Complex;

use crate::error::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
const SERIES_LIMIT: f64 = 4.0;
const MAX_TERMS: usize = 500;

/// `Si(x) = ∫_0^x sin t / t dt`. Odd in `x`.
pub fn sine_integral(x: f64) -> f64 {
    if x < 0.0 {
        return -sine_integral(-x);
    }
    if x == 0.0 {
        return 0.0;
    }
    if x <= SERIES_LIMIT {
        si_series(x)
    } else {
        let e1 = expint_imaginary(x);
        std::f64::consts::FRAC_PI_2 + e1.im
    }
}

/// `Ci(x) = -∫_x^∞ cos t / t dt`, defined for `x > 0`.
pub fn cosine_integral(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!(
            "cosine integral needs a finite positive argument, got {x}"
        )));
    }
    if x <= SERIES_LIMIT {
        Ok(EULER_GAMMA + x.ln() + ci_series_tail(x))
    } else {
        Ok(-expint_imaginary(x).re)
    }
}

fn si_series(x: f64) -> f64 {
    // sum_k (-1)^k x^(2k+1) / ((2k+1) (2k+1)!)
    let x2 = x * x;
    let mut power_over_fact = x; // x^(2k+1)/(2k+1)!
    let mut sum = x;
    for k in 1..MAX_TERMS {
        let n = (2 * k) as f64;
        power_over_fact *= -x2 / (n * (n + 1.0));
        let term = power_over_fact / (n + 1.0);
        sum += term;
        if term.abs() < f64::EPSILON * sum.abs() {
            break;
        }
    }
    sum
}

fn ci_series_tail(x: f64) -> f64 {
    // sum_{k>=1} (-1)^k x^(2k) / ((2k) (2k)!)
    let x2 = x * x;
    let mut power_over_fact = 1.0; // x^(2k)/(2k)!
    let mut sum = 0.0;
    for k in 1..MAX_TERMS {
        let n = (2 * k) as f64;
        power_over_fact *= -x2 / ((n - 1.0) * n);
        let term = power_over_fact / n;
        sum += term;
        if term.abs() < f64::EPSILON * sum.abs().max(f64::MIN_POSITIVE) {
            break;
        }
    }
    sum
}

/// `E1(ix)` for `x > 0` via its continued fraction.
fn expint_imaginary(x: f64) -> Complex<f64> {
    let tiny = 1e-300;
    let mut b = Complex::new(1.0, x);
    let mut c = Complex::new(1.0 / tiny, 0.0);
    let mut d = Complex::new(1.0, 0.0) / b;
    let mut h = d;
    for i in 1..MAX_TERMS {
        let a = -((i * i) as f64);
        b += 2.0;
        d = Complex::new(1.0, 0.0) / (d * a + b);
        c = b + Complex::new(a, 0.0) / c;
        let delta = c * d;
        h *= delta;
        if (delta - 1.0).norm() < f64::EPSILON {
            break;
        }
    }
    h * Complex::new(x.cos(), -x.sin())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn si_at_zero() {
        assert_eq!(sine_integral(0.0), 0.0);
    }

    #[test]
    fn ci_at_zero_is_domain_error() {
        assert!(matches!(cosine_integral(0.0), Err(Error::Domain(_))));
        assert!(cosine_integral(-1.0).is_err());
    }

    #[test]
    fn known_values() {
        // Abramowitz & Stegun table 5.1
        assert!((sine_integral(1.0) - 0.946_083_070_367_183).abs() < 1e-14);
        assert!((cosine_integral(1.0).unwrap() - 0.337_403_922_900_968_1).abs() < 1e-14);
        assert!((sine_integral(10.0) - 1.658_347_594_218_874).abs() < 1e-13);
        assert!((cosine_integral(10.0).unwrap() + 0.045_456_433_004_455_37).abs() < 1e-13);
    }

    #[test]
    fn si_approaches_half_pi() {
        assert!((sine_integral(50.0) - std::f64::consts::FRAC_PI_2).abs() < 0.02);
    }

    #[test]
    fn branches_agree_at_switch() {
        let below = SERIES_LIMIT * (1.0 - 1e-12);
        let above = SERIES_LIMIT * (1.0 + 1e-12);
        assert!((sine_integral(below) - sine_integral(above)).abs() < 1e-11);
        assert!(
            (cosine_integral(below).unwrap() - cosine_integral(above).unwrap()).abs() < 1e-11
        );
    }
}
