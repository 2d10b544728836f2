//! Univariate polynomials in `ĵ` with exact rational coefficients.
//!
//! Serialized as a JSON array of `[numerator, denominator]` pairs, lowest
//! power first. Integers that fit in `i64` are written as JSON numbers,
//! larger ones as decimal strings; both forms are accepted on input.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct JPoly {
    // No trailing zeros; the zero polynomial is empty.
    coeffs: Vec<BigRational>,
}

pub fn rational(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl JPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(BigRational::one())
    }

    /// The symbol `ĵ`.
    pub fn j() -> Self {
        Self::from_coeffs(vec![BigRational::zero(), BigRational::one()])
    }

    pub fn constant(c: BigRational) -> Self {
        Self::from_coeffs(vec![c])
    }

    pub fn int(c: i64) -> Self {
        Self::constant(rational(c, 1))
    }

    pub fn from_coeffs(mut coeffs: Vec<BigRational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_ints(coeffs: &[i64]) -> Self {
        Self::from_coeffs(coeffs.iter().map(|&c| rational(c, 1)).collect())
    }

    /// `θ(θ + 2ĵ + 1)`, the right function shifting `j` by `θ`.
    pub fn shift_function(theta: i64) -> Self {
        Self::from_ints(&[theta * (theta + 1), 2 * theta])
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn coeff(&self, power: usize) -> BigRational {
        self.coeffs.get(power).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn leading(&self) -> Option<&BigRational> {
        self.coeffs.last()
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|a| a * c).collect())
    }

    /// Exact division by a nonzero rational.
    pub fn div_scalar(&self, c: &BigRational) -> Self {
        assert!(!c.is_zero(), "division by zero");
        Self::from_coeffs(self.coeffs.iter().map(|a| a / c).collect())
    }

    /// Exact value at an integer `j`.
    pub fn eval_exact(&self, j: i64) -> BigRational {
        let x = rational(j, 1);
        self.coeffs
            .iter()
            .rev()
            .fold(BigRational::zero(), |acc, c| acc * &x + c)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
    }

    fn combine(&self, other: &Self, sign: bool) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::from_coeffs(
            (0..n)
                .map(|k| {
                    let a = self.coeff(k);
                    let b = other.coeff(k);
                    if sign {
                        a + b
                    } else {
                        a - b
                    }
                })
                .collect(),
        )
    }

    fn product(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (k, b) in other.coeffs.iter().enumerate() {
                out[i + k] += a * b;
            }
        }
        Self::from_coeffs(out)
    }
}

impl Add for &JPoly {
    type Output = JPoly;
    fn add(self, rhs: &JPoly) -> JPoly {
        self.combine(rhs, true)
    }
}

impl Sub for &JPoly {
    type Output = JPoly;
    fn sub(self, rhs: &JPoly) -> JPoly {
        self.combine(rhs, false)
    }
}

impl Mul for &JPoly {
    type Output = JPoly;
    fn mul(self, rhs: &JPoly) -> JPoly {
        self.product(rhs)
    }
}

impl Neg for &JPoly {
    type Output = JPoly;
    fn neg(self) -> JPoly {
        JPoly::from_coeffs(self.coeffs.iter().map(|c| -c).collect())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for JPoly {
            type Output = JPoly;
            fn $m(self, rhs: JPoly) -> JPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&JPoly> for JPoly {
            type Output = JPoly;
            fn $m(self, rhs: &JPoly) -> JPoly {
                (&self).$m(rhs)
            }
        }
        impl $tr<JPoly> for &JPoly {
            type Output = JPoly;
            fn $m(self, rhs: JPoly) -> JPoly {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for JPoly {
    type Output = JPoly;
    fn neg(self) -> JPoly {
        -&self
    }
}

impl fmt::Display for JPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate().rev() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let unit = mag.is_one();
            if !unit || k == 0 {
                write!(f, "{mag}")?;
            }
            match k {
                0 => {}
                1 if unit => write!(f, "j")?,
                1 => write!(f, "*j")?,
                _ if unit => write!(f, "j^{k}")?,
                _ => write!(f, "*j^{k}")?,
            }
        }
        Ok(())
    }
}

fn int_to_json(x: &BigInt) -> serde_json::Value {
    match x.to_i64() {
        Some(v) => serde_json::Value::from(v),
        None => serde_json::Value::from(x.to_string()),
    }
}

fn int_from_json(v: &serde_json::Value) -> Result<BigInt> {
    match v {
        serde_json::Value::Number(n) => n
            .as_i64()
            .map(BigInt::from)
            .or_else(|| n.as_u64().map(BigInt::from))
            .ok_or_else(|| Error::Parse(format!("coefficient {n} is not an integer"))),
        serde_json::Value::String(s) => s
            .parse::<BigInt>()
            .map_err(|_| Error::Parse(format!("coefficient {s:?} is not an integer"))),
        other => Err(Error::Parse(format!("expected integer, found {other}"))),
    }
}

impl JPoly {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.coeffs
                .iter()
                .map(|c| serde_json::Value::Array(vec![int_to_json(c.numer()), int_to_json(c.denom())]))
                .collect(),
        )
    }

    pub fn from_json_value(v: &serde_json::Value) -> Result<Self> {
        let items = v
            .as_array()
            .ok_or_else(|| Error::Parse("polynomial must be a JSON array".into()))?;
        let coeffs = items
            .iter()
            .map(|pair| {
                let pair = pair
                    .as_array()
                    .filter(|p| p.len() == 2)
                    .ok_or_else(|| Error::Parse("coefficient must be a [numerator, denominator] pair".into()))?;
                let num = int_from_json(&pair[0])?;
                let den = int_from_json(&pair[1])?;
                if den.is_zero() {
                    return Err(Error::Parse("zero denominator".into()));
                }
                Ok(BigRational::new(num, den))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_coeffs(coeffs))
    }

    /// Parses the JSON pair-array form.
    pub fn parse_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text)?;
        Self::from_json_value(&v)
    }
}

impl Serialize for JPoly {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.coeffs.len()))?;
        for c in &self.coeffs {
            seq.serialize_element(&[int_to_json(c.numer()), int_to_json(c.denom())])?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for JPoly {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(deserializer)?;
        Self::from_json_value(&v).map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn q(n: i64, d: i64) -> BigRational {
        rational(n, d)
    }

    #[test]
    fn canonical_form_drops_trailing_zeros() {
        let p = JPoly::from_ints(&[1, 2, 0, 0]);
        assert_eq!(p.degree(), Some(1));
        assert!(JPoly::from_ints(&[0, 0]).is_zero());
        assert_eq!(JPoly::zero().degree(), None);
    }

    #[test]
    fn shift_function_examples() {
        assert_eq!(JPoly::shift_function(1), JPoly::from_ints(&[2, 2]));
        assert_eq!(JPoly::shift_function(-1), JPoly::from_ints(&[0, -2]));
        assert!(JPoly::shift_function(0).is_zero());
    }

    #[test]
    fn arithmetic() {
        let j = JPoly::j();
        let one = JPoly::one();
        let p = &(&j + &one) * &j; // j² + j
        assert_eq!(p, JPoly::from_ints(&[0, 1, 1]));
        assert_eq!(p.eval_exact(3), q(12, 1));
        assert!((&p - &p).is_zero());
        assert_eq!(p.div_scalar(&q(2, 1)).coeff(2), q(1, 2));
    }

    #[test]
    fn display() {
        let p = JPoly::from_coeffs(vec![q(1, 2), q(1, 2)]);
        assert_eq!(p.to_string(), "1/2*j + 1/2");
        assert_eq!(JPoly::from_ints(&[0, -2]).to_string(), "-2*j");
        assert_eq!(JPoly::from_ints(&[-3, 0, 1]).to_string(), "j^2 - 3");
    }

    #[test]
    fn json_format() {
        let p = JPoly::from_coeffs(vec![q(1, 2), q(-1, 2)]);
        assert_eq!(serde_json::to_string(&p).unwrap(), "[[1,2],[-1,2]]");
        assert_eq!(JPoly::parse_json("[[2,4],[0,1],[0,3]]").unwrap(), JPoly::constant(q(1, 2)));
        assert!(JPoly::parse_json("[[1,0]]").is_err());
        assert!(JPoly::parse_json("[[1]]").is_err());
        assert!(JPoly::parse_json("{}").is_err());
        assert!(JPoly::parse_json("[[1.5,2]]").is_err());
    }

    #[test]
    fn big_coefficients_round_trip_as_strings() {
        let big: BigInt = "123456789012345678901234567890".parse().unwrap();
        let p = JPoly::constant(BigRational::new(big, BigInt::from(1)));
        let text = serde_json::to_string(&p).unwrap();
        assert!(text.contains("\"123456789012345678901234567890\""));
        assert_eq!(JPoly::parse_json(&text).unwrap(), p);
    }

    fn arb_poly() -> impl Strategy<Value = JPoly> {
        prop::collection::vec((-1000i64..1000, 1i64..50), 0..6).prop_map(|cs| {
            JPoly::from_coeffs(cs.into_iter().map(|(n, d)| rational(n, d)).collect())
        })
    }

    proptest! {
        #[test]
        fn serialization_round_trip(p in arb_poly()) {
            let text = serde_json::to_string(&p).unwrap();
            prop_assert_eq!(JPoly::parse_json(&text).unwrap(), p);
        }

        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert_eq!(&(&a + &b) - &b, a.clone());
        }

        #[test]
        fn evaluation_is_a_homomorphism(a in arb_poly(), b in arb_poly(), x in -20i64..20) {
            prop_assert_eq!((&a * &b).eval_exact(x), a.eval_exact(x) * b.eval_exact(x));
        }
    }
}
