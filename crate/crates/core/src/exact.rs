//! Exact arithmetic helpers.
//!
//! Tolerances such as `η` or `ε` arrive as `f64`. Every finite `f64` is a
//! dyadic rational, so comparisons against integer statistics can be done
//! exactly after converting the tolerance with [`ratio_from_f64`].

use num_rational::Ratio;
use num_traits::float::FloatCore;

pub type Rational = Ratio<i128>;

/// Exact value of a finite, non-negative `f64` as a reduced rational.
///
/// Panics on NaN, infinities, or values whose exact denominator does not fit
/// in an `i128` (below roughly `2^-120`, which never occurs for tolerances).
pub fn ratio_from_f64(x: f64) -> Rational {
    assert!(x.is_finite(), "tolerance must be finite, got {x}");
    if x == 0.0 {
        return Rational::from_integer(0);
    }
    let (mantissa, exponent, sign) = FloatCore::integer_decode(x);
    let mut value = if exponent >= 0 {
        let shift = u32::try_from(exponent).expect("exponent");
        assert!(shift < 64, "tolerance {x} too large for exact comparison");
        Rational::from_integer((mantissa as i128) << shift)
    } else {
        let shift = u32::try_from(-exponent).expect("exponent");
        // Strip common factors of two before building the denominator.
        let tz = mantissa.trailing_zeros().min(shift);
        let (m, s) = (mantissa >> tz, shift - tz);
        assert!(s < 126, "tolerance {x} too small for exact comparison");
        Rational::new(m as i128, 1i128 << s)
    };
    if sign < 0 {
        value = -value;
    }
    value
}

/// `lhs <= ratio * rhs` for integers, exactly.
pub fn le_scaled(lhs: i128, ratio: Rational, rhs: i128) -> bool {
    // ratio = num / den with den > 0.
    let num = *ratio.numer();
    let den = *ratio.denom();
    let left = lhs.checked_mul(den).expect("overflow in exact comparison");
    let right = num.checked_mul(rhs).expect("overflow in exact comparison");
    left <= right
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_values_are_exact() {
        assert_eq!(ratio_from_f64(0.5), Rational::new(1, 2));
        assert_eq!(ratio_from_f64(1.0 / 16.0), Rational::new(1, 16));
        assert_eq!(ratio_from_f64(3.0), Rational::from_integer(3));
        assert_eq!(ratio_from_f64(-0.25), Rational::new(-1, 4));
    }

    #[test]
    fn decimal_values_round_trip_through_f64() {
        let r = ratio_from_f64(0.1);
        let back = *r.numer() as f64 / *r.denom() as f64;
        assert_eq!(back, 0.1);
    }

    #[test]
    fn scaled_comparison() {
        assert!(le_scaled(4, Rational::from_integer(1), 4));
        assert!(!le_scaled(5, Rational::from_integer(1), 4));
        assert!(le_scaled(1, Rational::new(1, 4), 4));
        assert!(!le_scaled(2, Rational::new(1, 4), 4));
    }
}
