use std::f64::consts::FRAC_PI_2;

use super::ClosedFormError;

/// Complete elliptic integral of the second kind in the parameter convention,
/// `E(m) = ∫₀^{π/2} √(1 − m sin²θ) dθ`, for `m ≤ 1`.
///
/// Uses the arithmetic-geometric mean for `0 ≤ m < 1` and the imaginary-modulus
/// transformation `E(m) = √(1−m)·E(−m/(1−m))` for negative `m`.
pub fn ellint_e(m: f64) -> Result<f64, ClosedFormError> {
    if m.is_nan() || m > 1.0 {
        return Err(ClosedFormError::EllipticParameter(m));
    }
    if m == 1.0 {
        return Ok(1.0);
    }
    if m < 0.0 {
        let s = 1.0 - m;
        return Ok(s.sqrt() * agm_e(-m / s));
    }
    Ok(agm_e(m))
}

fn agm_e(m: f64) -> f64 {
    let mut a = 1.0f64;
    let mut b = (1.0 - m).sqrt();
    let mut sum = 0.5 * m;
    let mut weight = 0.5;
    for _ in 0..64 {
        let c = 0.5 * (a - b);
        let next = 0.5 * (a + b);
        b = (a * b).sqrt();
        a = next;
        weight *= 2.0;
        sum += weight * c * c;
        if c.abs() <= f64::EPSILON * a {
            break;
        }
    }
    FRAC_PI_2 / a * (1.0 - sum)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_values() {
        assert!((ellint_e(0.0).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(ellint_e(1.0).unwrap(), 1.0);
        assert!((ellint_e(0.5).unwrap() - 1.350_643_881_047_675_5).abs() < 1e-14);
        assert!((ellint_e(-1.0).unwrap() - 1.910_098_894_513_856).abs() < 1e-13);
    }

    #[test]
    fn rejects_parameter_above_one() {
        assert!(ellint_e(1.0 + 1e-12).is_err());
        assert!(ellint_e(f64::NAN).is_err());
    }

    #[test]
    fn continuous_at_zero() {
        let left = ellint_e(-1e-12).unwrap();
        let right = ellint_e(1e-12).unwrap();
        assert!((left - right).abs() < 1e-12);
    }
}
