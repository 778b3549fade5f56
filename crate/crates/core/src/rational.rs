//! Exact rational scalars.
//!
//! Every value, threshold and MMS quantity in this crate is a
//! [`Rational`]: an arbitrary-precision fraction kept in canonical form
//! (positive denominator, gcd-reduced). There is no floating-point fast
//! path anywhere in the library.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Arbitrary-precision rational number in canonical form.
pub type Rational = num_rational::BigRational;

/// Builds a rational from an integer.
pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Builds the rational `num / den`. Panics if `den == 0`.
pub fn ratio(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

/// Parses `"p/q"`, `"p"`, or a plain integer string into a rational.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let mk_err = || Error::BadRational(s.to_string());
    match s.split_once('/') {
        Some((num, den)) => {
            let num: BigInt = num.trim().parse().map_err(|_| mk_err())?;
            let den: BigInt = den.trim().parse().map_err(|_| mk_err())?;
            if den.is_zero() {
                return Err(mk_err());
            }
            Ok(Rational::new(num, den))
        }
        None => {
            let num: BigInt = s.parse().map_err(|_| mk_err())?;
            Ok(Rational::from_integer(num))
        }
    }
}

/// Renders a rational as `"p/q"`, or `"p"` when it is an integer.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Decimal approximation for human-readable reports. Only used for display;
/// all comparisons in the library are exact.
pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let digits = 18u32;
        let scale = BigInt::from(10u64.pow(digits));
        let scaled = (r * Rational::from_integer(scale)).round();
        scaled.numer().to_f64().unwrap_or(f64::NAN) / 10f64.powi(digits as i32)
    })
}

/// Least common multiple of the denominators of `values`; `1` when empty.
pub fn denominator_lcm<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    let mut lcm = BigInt::one();
    for v in values {
        lcm = num_integer::lcm(lcm, v.denom().abs());
    }
    lcm
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parse_and_format_round_trip() {
        assert_eq!(parse_rational("3/5").unwrap(), ratio(3, 5));
        assert_eq!(parse_rational("-3/5").unwrap(), ratio(-3, 5));
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert_eq!(parse_rational("6/-4").unwrap(), ratio(-3, 2));
        assert_eq!(format_rational(&ratio(4, 2)), "2");
        assert_eq!(format_rational(&ratio(-1, 3)), "-1/3");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn canonical_representation() {
        let r = ratio(6, -4);
        assert_eq!(r.numer(), &BigInt::from(-3));
        assert_eq!(r.denom(), &BigInt::from(2));
    }

    #[test]
    fn lcm_of_denominators() {
        let vals = [ratio(1, 4), ratio(1, 6), rat(2)];
        assert_eq!(denominator_lcm(vals.iter()), BigInt::from(12));
    }

    fn arb_rational() -> impl Strategy<Value = Rational> {
        (-50i64..=50, 1i64..=20).prop_map(|(n, d)| ratio(n, d))
    }

    proptest! {
        #[test]
        fn field_axioms(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            prop_assert_eq!(&a + &b, &b + &a);
            prop_assert_eq!((&a + &b) + &c, &a + (&b + &c));
            prop_assert_eq!((&a * &b) * &c, &a * (&b * &c));
            prop_assert_eq!(&a * (&b + &c), &a * &b + &a * &c);
            prop_assert_eq!(&a + Rational::zero(), a.clone());
            prop_assert_eq!(&a * Rational::one(), a.clone());
            if !a.is_zero() {
                prop_assert_eq!(&a * (Rational::one() / &a), Rational::one());
            }
        }

        #[test]
        fn order_is_total_and_compatible(a in arb_rational(), b in arb_rational(), c in arb_rational()) {
            if a < b {
                prop_assert!(&a + &c < &b + &c);
            }
            prop_assert!(a < b || a == b || a > b);
        }
    }
}
