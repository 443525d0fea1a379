//! Rational helpers: exponent/coefficient aliases, `p/q` parsing and the scalar backend trait.

use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

use num::bigint::BigInt;
use num::rational::{BigRational, Rational64};
use num::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

/// Exact coefficient type.
pub type Q = BigRational;
/// Exponent type for x_n powers, gamma and sigma.
pub type Exp = Rational64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cannot parse {input:?} as a rational (expected \"p/q\" or an integer)")]
pub struct ParseRationalError {
    pub input: String,
}

fn split_ratio(s: &str) -> Result<(BigInt, BigInt), ParseRationalError> {
    let err = || ParseRationalError { input: s.to_string() };
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: BigInt = n.parse().map_err(|_| err())?;
    let d: BigInt = d.parse().map_err(|_| err())?;
    if d.is_zero() {
        return Err(err());
    }
    Ok((n, d))
}

pub fn parse_q(s: &str) -> Result<Q, ParseRationalError> {
    let (n, d) = split_ratio(s)?;
    Ok(Q::new(n, d))
}

pub fn parse_exp(s: &str) -> Result<Exp, ParseRationalError> {
    let (n, d) = split_ratio(s)?;
    let err = || ParseRationalError { input: s.to_string() };
    let n = n.to_i64().ok_or_else(err)?;
    let d = d.to_i64().ok_or_else(err)?;
    Ok(Exp::new(n, d))
}

pub fn fmt_q(q: &Q) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn fmt_exp(e: &Exp) -> String {
    if e.is_integer() {
        e.numer().to_string()
    } else {
        format!("{}/{}", e.numer(), e.denom())
    }
}

pub fn q_from_exp(e: Exp) -> Q {
    Q::new(BigInt::from(*e.numer()), BigInt::from(*e.denom()))
}

pub fn q_int(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn exp_to_f64(e: Exp) -> f64 {
    *e.numer() as f64 / *e.denom() as f64
}

pub fn q_to_f64(q: &Q) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// Exact `base^e` for rational `base ≥ 0` when the root is exact; `None` otherwise.
pub fn exact_pow(base: &Q, e: Exp) -> Option<Q> {
    if base.is_negative() {
        return None;
    }
    if base.is_zero() {
        return if *e.numer() > 0 {
            Some(Q::zero())
        } else if e.is_zero() {
            Some(Q::one())
        } else {
            None
        };
    }
    let root = u32::try_from(*e.denom()).ok()?;
    let nth = |n: &BigInt| -> Option<BigInt> {
        let r = n.nth_root(root);
        (num::pow::pow(r.clone(), root as usize) == *n).then_some(r)
    };
    let b = Q::new(nth(base.numer())?, nth(base.denom())?);
    let p = *e.numer();
    let mag = usize::try_from(p.unsigned_abs()).ok()?;
    let v = num::pow::pow(b, mag);
    Some(if p < 0 { v.recip() } else { v })
}

/// Coefficient backend shared by the exact and floating SPoly flavours.
pub trait Scalar:
    Clone
    + Debug
    + PartialEq
    + Zero
    + One
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Send
    + Sync
    + 'static
{
    fn from_q(q: &Q) -> Self;
    fn as_f64(&self) -> f64;
}

impl Scalar for Q {
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn as_f64(&self) -> f64 {
        q_to_f64(self)
    }
}

impl Scalar for f64 {
    fn from_q(q: &Q) -> Self {
        q_to_f64(q)
    }
    fn as_f64(&self) -> f64 {
        *self
    }
}

/// Serde adapter writing a [`Q`] as a `"p/q"` string.
pub mod serde_q {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(q: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter writing an [`Exp`] as a `"p/q"` string.
pub mod serde_exp {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(e: &Exp, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_exp(e))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Exp, D::Error> {
        let s = String::deserialize(d)?;
        parse_exp(&s).map_err(serde::de::Error::custom)
    }
}
