use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use crate::error::{Error, Result};

use super::Rat;

/// Element `a + b·√2` of the quadratic field ℚ(√2).
///
/// Both components are canonical rationals, so structural equality is field
/// equality. Ordering is the exact real order.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct QuadRat {
    a: Rat,
    b: Rat,
}

impl QuadRat {
    pub fn new(a: Rat, b: Rat) -> Self {
        QuadRat { a, b }
    }

    pub fn from_rat(a: Rat) -> Self {
        QuadRat { a, b: Rat::zero() }
    }

    pub fn sqrt2() -> Self {
        QuadRat {
            a: Rat::zero(),
            b: Rat::one(),
        }
    }

    /// Rational part.
    pub fn rational_part(&self) -> &Rat {
        &self.a
    }

    /// Coefficient of √2.
    pub fn sqrt2_part(&self) -> &Rat {
        &self.b
    }

    pub fn is_rational(&self) -> bool {
        self.b.is_zero()
    }

    pub fn to_rat(&self) -> Option<Rat> {
        self.is_rational().then(|| self.a.clone())
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// Exact sign of `a + b√2`.
    ///
    /// Same-sign components decide directly; otherwise the component with
    /// the larger magnitude wins, comparing `a²` against `2b²`.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.signum();
        let sb = self.b.signum();
        if sb == Ordering::Equal {
            return sa;
        }
        if sa == Ordering::Equal || sa == sb {
            return sb;
        }
        let a2 = &self.a * &self.a;
        let b2 = &self.b * &self.b;
        let two_b2 = &b2 + &b2;
        // a² = 2b² has no solution with b ≠ 0
        if a2 > two_b2 {
            sa
        } else {
            sb
        }
    }

    /// Galois conjugate `a − b√2`.
    pub fn conjugate(&self) -> QuadRat {
        QuadRat {
            a: self.a.clone(),
            b: -&self.b,
        }
    }

    /// Field norm `a² − 2b²`.
    pub fn norm(&self) -> Rat {
        let b2 = &self.b * &self.b;
        &self.a * &self.a - (&b2 + &b2)
    }

    pub fn checked_div(&self, other: &QuadRat) -> Result<QuadRat> {
        if other.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if other.is_rational() {
            return Ok(QuadRat {
                a: self.a.checked_div(&other.a)?,
                b: self.b.checked_div(&other.a)?,
            });
        }
        let norm = other.norm();
        let num = self.clone() * other.conjugate();
        Ok(QuadRat {
            a: num.a.checked_div(&norm)?,
            b: num.b.checked_div(&norm)?,
        })
    }

    pub fn to_f64(&self) -> f64 {
        self.a.to_f64() + self.b.to_f64() * std::f64::consts::SQRT_2
    }

    /// 1 for irrational values, the rational size otherwise.
    pub fn size(&self) -> u64 {
        if self.is_rational() {
            self.a.size()
        } else {
            1
        }
    }
}

impl From<Rat> for QuadRat {
    fn from(a: Rat) -> Self {
        QuadRat::from_rat(a)
    }
}

impl From<i64> for QuadRat {
    fn from(n: i64) -> Self {
        QuadRat::from_rat(Rat::from(n))
    }
}

impl Hash for QuadRat {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.a.hash(state);
        self.b.hash(state);
    }
}

impl PartialOrd for QuadRat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for QuadRat {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.b == other.b {
            return self.a.cmp(&other.a);
        }
        (self.clone() - other).signum()
    }
}

impl fmt::Display for QuadRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.b.is_zero() {
            return write!(f, "{}", self.a);
        }
        let coef = |f: &mut fmt::Formatter<'_>, b: &Rat| -> fmt::Result {
            if b.is_one() {
                write!(f, "sqrt2")
            } else {
                write!(f, "{b}*sqrt2")
            }
        };
        if self.a.is_zero() {
            if self.b == -Rat::one() {
                return write!(f, "-sqrt2");
            }
            return coef(f, &self.b);
        }
        write!(f, "{}", self.a)?;
        if self.b.signum() == Ordering::Less {
            write!(f, "-")?;
            coef(f, &self.b.abs())
        } else {
            write!(f, "+")?;
            coef(f, &self.b)
        }
    }
}

impl fmt::Debug for QuadRat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for QuadRat {
    type Err = Error;

    /// Accepts `p`, `p/q`, and `p/q+r/s*sqrt2` with every part optional
    /// (`sqrt2`, `-sqrt2`, `3*sqrt2`, `1-sqrt2`, ...).
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidScalar(s.to_string());
        let Some(prefix) = compact.strip_suffix("sqrt2") else {
            return compact.parse::<Rat>().map(QuadRat::from_rat);
        };
        let prefix = prefix.strip_suffix('*').unwrap_or(prefix);
        let split = prefix
            .char_indices()
            .skip(1)
            .filter(|&(_, c)| c == '+' || c == '-')
            .map(|(i, _)| i)
            .last();
        let (rat_part, coef_part) = match split {
            Some(k) => (&prefix[..k], &prefix[k..]),
            None => ("", prefix),
        };
        let a = if rat_part.is_empty() {
            Rat::zero()
        } else {
            rat_part.parse::<Rat>().map_err(|_| bad())?
        };
        let b = match coef_part {
            "" | "+" => Rat::one(),
            "-" => -Rat::one(),
            c => c.parse::<Rat>().map_err(|_| bad())?,
        };
        Ok(QuadRat { a, b })
    }
}

impl Add for QuadRat {
    type Output = QuadRat;
    fn add(self, rhs: QuadRat) -> QuadRat {
        QuadRat {
            a: self.a + rhs.a,
            b: self.b + rhs.b,
        }
    }
}

impl<'a> Add<&'a QuadRat> for QuadRat {
    type Output = QuadRat;
    fn add(self, rhs: &'a QuadRat) -> QuadRat {
        QuadRat {
            a: self.a + &rhs.a,
            b: if rhs.b.is_zero() { self.b } else { self.b + &rhs.b },
        }
    }
}

impl Sub for QuadRat {
    type Output = QuadRat;
    fn sub(self, rhs: QuadRat) -> QuadRat {
        QuadRat {
            a: self.a - rhs.a,
            b: self.b - rhs.b,
        }
    }
}

impl<'a> Sub<&'a QuadRat> for QuadRat {
    type Output = QuadRat;
    fn sub(self, rhs: &'a QuadRat) -> QuadRat {
        QuadRat {
            a: self.a - &rhs.a,
            b: if rhs.b.is_zero() { self.b } else { self.b - &rhs.b },
        }
    }
}

impl<'a> Mul<&'a QuadRat> for QuadRat {
    type Output = QuadRat;
    fn mul(self, rhs: &'a QuadRat) -> QuadRat {
        if self.b.is_zero() && rhs.b.is_zero() {
            return QuadRat::from_rat(self.a * &rhs.a);
        }
        // (a1 + b1√2)(a2 + b2√2) = (a1a2 + 2b1b2) + (a1b2 + a2b1)√2
        let bb = &self.b * &rhs.b;
        QuadRat {
            a: &self.a * &rhs.a + (&bb + &bb),
            b: &self.a * &rhs.b + &self.b * &rhs.a,
        }
    }
}

impl Mul for QuadRat {
    type Output = QuadRat;
    fn mul(self, rhs: QuadRat) -> QuadRat {
        self * &rhs
    }
}

impl Neg for QuadRat {
    type Output = QuadRat;
    fn neg(self) -> QuadRat {
        QuadRat { a: -self.a, b: -self.b }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(s: &str) -> QuadRat {
        s.parse().unwrap()
    }

    #[test]
    fn sqrt2_squared_is_two() {
        assert_eq!(QuadRat::sqrt2() * QuadRat::sqrt2(), QuadRat::from(2));
    }

    #[test]
    fn compare_against_twelve_fifths() {
        // -12/5 + 1 + √2 = -7/5 + √2; 2·25 = 50 > 49 so √2 > 7/5
        assert_eq!(q("1+sqrt2").cmp(&q("12/5")), Ordering::Greater);
        assert_eq!(q("-7/5+sqrt2").signum(), Ordering::Greater);
        assert_eq!(q("7/5-sqrt2").signum(), Ordering::Less);
        assert_eq!(q("3/2-sqrt2").signum(), Ordering::Greater);
    }

    #[test]
    fn parse_forms() {
        assert_eq!(q("sqrt2"), QuadRat::sqrt2());
        assert_eq!(q("-sqrt2"), -QuadRat::sqrt2());
        assert_eq!(q("2*sqrt2"), QuadRat::new(Rat::zero(), Rat::from(2)));
        assert_eq!(q("1/2-3/4*sqrt2"), QuadRat::new(q("1/2").a, "-3/4".parse().unwrap()));
        assert_eq!(q("-1-sqrt2"), QuadRat::new(Rat::from(-1), Rat::from(-1)));
        assert_eq!(q("+3/4*sqrt2"), QuadRat::new(Rat::zero(), "3/4".parse().unwrap()));
        assert_eq!(q("5"), QuadRat::from(5));
        assert!("sqrt3".parse::<QuadRat>().is_err());
        assert!("1+x*sqrt2".parse::<QuadRat>().is_err());
    }

    #[test]
    fn display_roundtrip_examples() {
        for s in [
            "0",
            "-3/2",
            "sqrt2",
            "-sqrt2",
            "2*sqrt2",
            "1+sqrt2",
            "1/2-3/4*sqrt2",
            "-1-sqrt2",
        ] {
            assert_eq!(q(s).to_string(), s);
        }
    }

    #[test]
    fn inverse() {
        let x = q("1+sqrt2");
        let inv = QuadRat::from(1).checked_div(&x).unwrap();
        assert_eq!(inv, q("-1+sqrt2"));
        assert!(x.checked_div(&QuadRat::default()).is_err());
    }

    #[test]
    fn irrational_size_is_one() {
        assert_eq!(QuadRat::sqrt2().size(), 1);
        assert_eq!(q("0").size(), 2);
    }
}
