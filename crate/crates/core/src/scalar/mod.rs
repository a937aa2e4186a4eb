//! Exact ordered fields used by every computation: ℚ and ℚ(√2).

mod quad;
mod rat;

use std::cmp::Ordering;
use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use quad::QuadRat;
pub use rat::{raw_size, Rat};

/// Which field a machine or constraint is defined over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldKind {
    #[serde(rename = "Q")]
    Rational,
    #[serde(rename = "Qsqrt2")]
    Sqrt2,
}

impl std::fmt::Display for FieldKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FieldKind::Rational => write!(f, "Q"),
            FieldKind::Sqrt2 => write!(f, "Qsqrt2"),
        }
    }
}

/// An exact ordered field element.
pub trait Scalar:
    Clone
    + Debug
    + Display
    + Eq
    + Ord
    + Hash
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
{
    const FIELD: FieldKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(r: Rat) -> Self;
    /// `Some` iff the value is rational.
    fn to_rat(&self) -> Option<Rat>;
    fn is_zero(&self) -> bool;
    fn is_one(&self) -> bool;
    fn signum(&self) -> Ordering;
    fn checked_div(&self, other: &Self) -> Result<Self>;
    fn parse_scalar(s: &str) -> Result<Self>;
    /// Descriptional size: rational bit size, 1 for irrationals.
    fn size(&self) -> u64;
    fn to_f64(&self) -> f64;

    fn from_i64(n: i64) -> Self {
        Self::from_rat(Rat::from(n))
    }

    fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }
}

impl Scalar for Rat {
    const FIELD: FieldKind = FieldKind::Rational;

    fn zero() -> Self {
        Rat::zero()
    }
    fn one() -> Self {
        Rat::one()
    }
    fn from_rat(r: Rat) -> Self {
        r
    }
    fn to_rat(&self) -> Option<Rat> {
        Some(self.clone())
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn is_one(&self) -> bool {
        Rat::is_one(self)
    }
    fn signum(&self) -> Ordering {
        Rat::signum(self)
    }
    fn checked_div(&self, other: &Self) -> Result<Self> {
        Rat::checked_div(self, other)
    }
    fn parse_scalar(s: &str) -> Result<Self> {
        match s.parse::<Rat>() {
            Ok(r) => Ok(r),
            Err(e) => match s.parse::<QuadRat>() {
                Ok(q) if !q.is_rational() => Err(Error::NotRational(s.to_string())),
                Ok(q) => Ok(q.rational_part().clone()),
                Err(_) => Err(e),
            },
        }
    }
    fn size(&self) -> u64 {
        Rat::size(self)
    }
    fn to_f64(&self) -> f64 {
        Rat::to_f64(self)
    }
}

impl Scalar for QuadRat {
    const FIELD: FieldKind = FieldKind::Sqrt2;

    fn zero() -> Self {
        QuadRat::default()
    }
    fn one() -> Self {
        QuadRat::from_rat(Rat::one())
    }
    fn from_rat(r: Rat) -> Self {
        QuadRat::from_rat(r)
    }
    fn to_rat(&self) -> Option<Rat> {
        QuadRat::to_rat(self)
    }
    fn is_zero(&self) -> bool {
        QuadRat::is_zero(self)
    }
    fn is_one(&self) -> bool {
        self.is_rational() && self.rational_part().is_one()
    }
    fn signum(&self) -> Ordering {
        QuadRat::signum(self)
    }
    fn checked_div(&self, other: &Self) -> Result<Self> {
        QuadRat::checked_div(self, other)
    }
    fn parse_scalar(s: &str) -> Result<Self> {
        s.parse()
    }
    fn size(&self) -> u64 {
        QuadRat::size(self)
    }
    fn to_f64(&self) -> f64 {
        QuadRat::to_f64(self)
    }
}

/// Lift a rational-valued object into ℚ(√2).
pub fn lift(r: &Rat) -> QuadRat {
    QuadRat::from_rat(r.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn small_rat() -> impl Strategy<Value = Rat> {
        (-40i64..40, 1i64..20).prop_map(|(p, q)| Rat::new(p, q).unwrap())
    }

    fn small_quad() -> impl Strategy<Value = QuadRat> {
        (small_rat(), small_rat()).prop_map(|(a, b)| QuadRat::new(a, b))
    }

    proptest! {
        #[test]
        fn rational_field_axioms(a in small_rat(), b in small_rat(), c in small_rat()) {
            prop_assert_eq!((a.clone() + &b) + &c, a.clone() + &(b.clone() + &c));
            prop_assert_eq!((a.clone() * &b) * &c, a.clone() * &(b.clone() * &c));
            prop_assert_eq!(a.clone() * &(b.clone() + &c), a.clone() * &b + a.clone() * &c);
            prop_assert_eq!((a.clone() + &b) - &b, a.clone());
            if !a.is_zero() {
                prop_assert_eq!(a.clone() * &Rat::one().checked_div(&a).unwrap(), Rat::one());
            }
        }

        #[test]
        fn quadratic_field_axioms(a in small_quad(), b in small_quad(), c in small_quad()) {
            prop_assert_eq!((a.clone() + &b) + &c, a.clone() + &(b.clone() + &c));
            prop_assert_eq!((a.clone() * &b) * &c, a.clone() * &(b.clone() * &c));
            prop_assert_eq!(a.clone() * &(b.clone() + &c), a.clone() * &b + a.clone() * &c);
            prop_assert_eq!((a.clone() + &b) - &b, a.clone());
            if !a.is_zero() {
                let inv = QuadRat::one().checked_div(&a).unwrap();
                prop_assert_eq!(a.clone() * &inv, QuadRat::one());
            }
        }

        #[test]
        fn quad_sign_agrees_with_float_estimate(q in small_quad()) {
            let est = q.to_f64();
            if est.abs() > 1e-6 {
                let expected = if est > 0.0 { Ordering::Greater } else { Ordering::Less };
                prop_assert_eq!(q.signum(), expected);
            }
        }

        #[test]
        fn quad_order_is_consistent(a in small_quad(), b in small_quad()) {
            prop_assert_eq!(a.cmp(&b), (a.clone() - &b).signum());
            prop_assert_eq!(a.cmp(&b), b.cmp(&a).reverse());
        }

        #[test]
        fn quad_display_roundtrips(q in small_quad()) {
            prop_assert_eq!(q.to_string().parse::<QuadRat>().unwrap(), q);
        }

        #[test]
        fn embedding_of_rationals(a in small_rat(), b in small_rat()) {
            let (qa, qb) = (lift(&a), lift(&b));
            prop_assert_eq!((qa.clone() * &qb).to_rat(), Some(a.clone() * &b));
            prop_assert_eq!(qa.cmp(&qb), a.cmp(&b));
        }

        #[test]
        fn canonical_size_is_minimal(p in -200i64..200, q in 1i64..60, k in 1i64..9) {
            let canonical = Rat::new(p, q).unwrap();
            let scaled = raw_size(&(p * k).into(), &(q * k).into());
            prop_assert!(canonical.size() <= scaled);
        }
    }

    #[test]
    fn rational_parse_refuses_irrationals() {
        assert!(matches!(Rat::parse_scalar("sqrt2"), Err(Error::NotRational(_))));
        assert_eq!(Rat::parse_scalar("3/6").unwrap(), Rat::new(1, 2).unwrap());
        assert_eq!(Rat::parse_scalar("2+0*sqrt2").unwrap(), Rat::from(2));
    }
}
