//! Sparse s-polynomials.
//!
//! A term is `c · x'^β · x_n^e · (log x_n)^m · t^l` with a single rational exponent `e`.
//! Keying the normal variable by `e` alone (instead of a pair `(i, j)` with
//! `e = j + iσ`) keeps keys canonical when σ is rational.

mod json;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::metric::Point;
use crate::rational::{exact_pow, exp_to_f64, fmt_exp, fmt_q, parse_exp, q_from_exp, q_int, Exp, ParseRationalError, Scalar, Q};

pub use json::TermJson;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SPolyError {
    #[error("gamma must satisfy gamma <= 1, got {0}")]
    InvalidGamma(String),
    #[error("log powers belong to the basis only when gamma = 1 (gamma = {0})")]
    InvalidBasis(String),
    #[error("operands differ in gamma, center or dimension")]
    Incompatible,
    #[error("multi-index has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("tangential direction {index} out of range for spatial dimension {dim}")]
    BadDirection { index: usize, dim: usize },
    #[error("x_n = 0 hits a singular or logarithmic term (e = {e}, log power {logpow})")]
    Domain { e: String, logpow: u32 },
    #[error("operation needs a center with y_n = 0 (fractional basis at a shifted center)")]
    ShiftedCenter,
    #[error("exact evaluation impossible: {0}")]
    NotExact(String),
    #[error(transparent)]
    Parse(#[from] ParseRationalError),
    #[error("malformed SPoly JSON: {0}")]
    Json(String),
}

/// The weight exponent γ ≤ 1 together with σ = (2 − γ)/2.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Gamma {
    value: Exp,
}

impl Gamma {
    pub fn new(value: Exp) -> Result<Self, SPolyError> {
        if value > Exp::one() {
            return Err(SPolyError::InvalidGamma(fmt_exp(&value)));
        }
        Ok(Self { value })
    }

    pub fn from_ratio(n: i64, d: i64) -> Result<Self, SPolyError> {
        Self::new(Exp::new(n, d))
    }

    pub fn value(self) -> Exp {
        self.value
    }

    pub fn sigma(self) -> Exp {
        (Exp::from_integer(2) - self.value) / 2
    }

    /// γ/2 = 1 − σ, the exponent of the mixed and first-order normal weights.
    pub fn half(self) -> Exp {
        self.value / 2
    }

    pub fn is_log_case(self) -> bool {
        self.value == Exp::one()
    }

    pub fn to_f64(self) -> f64 {
        exp_to_f64(self.value)
    }

    pub fn sigma_f64(self) -> f64 {
        exp_to_f64(self.sigma())
    }
}

impl fmt::Display for Gamma {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_exp(&self.value))
    }
}

impl FromStr for Gamma {
    type Err = SPolyError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::new(parse_exp(s)?)
    }
}

impl Serialize for Gamma {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Gamma {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Monomial `x'^β x_n^e (log x_n)^logpow t^l`. Ordered by `e` first.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MonomialKey {
    pub e: Exp,
    pub logpow: u32,
    pub beta: Vec<u32>,
    pub l: u32,
}

impl MonomialKey {
    pub fn new(beta: Vec<u32>, e: Exp, logpow: u32, l: u32) -> Self {
        Self { e, logpow, beta, l }
    }

    pub fn unit(dim: usize) -> Self {
        Self::new(vec![0; dim - 1], Exp::zero(), 0, 0)
    }

    pub fn beta_order(&self) -> u32 {
        self.beta.iter().sum()
    }

    /// `|β| + e/σ + 2l`.
    pub fn s_degree(&self, gamma: Gamma) -> Exp {
        Exp::from_integer(i64::from(self.beta_order()) + 2 * i64::from(self.l)) + self.e / gamma.sigma()
    }

    pub fn mul(&self, other: &Self) -> Self {
        Self {
            e: self.e + other.e,
            logpow: self.logpow + other.logpow,
            beta: self.beta.iter().zip(&other.beta).map(|(a, b)| a + b).collect(),
            l: self.l + other.l,
        }
    }
}

/// Whether `x_n^e (log x_n)^m` is a basis element of an s-polynomial at a boundary center:
/// `e = j + iσ` with `i, j ≥ 0`, and for γ = 1 at most one log per factor `√x_n`.
pub fn is_admissible_exponent(gamma: Gamma, e: Exp, logpow: u32) -> bool {
    if e.is_negative() {
        return false;
    }
    if gamma.is_log_case() {
        let twice = e * 2;
        return twice.is_integer() && i64::from(logpow) <= *twice.numer();
    }
    if logpow > 0 {
        return false;
    }
    let sigma = gamma.sigma();
    let mut i = Exp::zero();
    while i * sigma <= e {
        if (e - i * sigma).is_integer() {
            return true;
        }
        i += Exp::one();
    }
    false
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction {
    Tangential(usize),
    Normal,
    Time,
}

/// s-degree of an SPoly; the empty polynomial has degree `NegInfinity`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Degree {
    NegInfinity,
    Finite(Exp),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SPoly<C: Scalar = Q> {
    dim: usize,
    gamma: Gamma,
    center: Point,
    terms: BTreeMap<MonomialKey, C>,
}

/// Single-term constructor; the dimension is `beta.len() + 1`.
pub fn make_monomial(beta: Vec<u32>, e: Exp, logpow: u32, l: u32, coeff: Q, gamma: Gamma) -> Result<SPoly, SPolyError> {
    let dim = beta.len() + 1;
    SPoly::monomial(dim, gamma, MonomialKey::new(beta, e, logpow, l), coeff)
}

impl<C: Scalar> SPoly<C> {
    pub fn zero(dim: usize, gamma: Gamma) -> Self {
        assert!(dim >= 1, "spatial dimension must be at least 1");
        Self { dim, gamma, center: Point::origin(dim), terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, gamma: Gamma, c: C) -> Self {
        let mut p = Self::zero(dim, gamma);
        p.add_term(MonomialKey::unit(dim), c);
        p
    }

    pub fn monomial(dim: usize, gamma: Gamma, key: MonomialKey, c: C) -> Result<Self, SPolyError> {
        let mut p = Self::zero(dim, gamma);
        p.check_key(&key)?;
        p.add_term(key, c);
        Ok(p)
    }

    pub fn from_terms(dim: usize, gamma: Gamma, terms: impl IntoIterator<Item = (MonomialKey, C)>) -> Result<Self, SPolyError> {
        let mut p = Self::zero(dim, gamma);
        for (k, c) in terms {
            p.check_key(&k)?;
            p.add_term(k, c);
        }
        Ok(p)
    }

    /// Re-anchors the polynomial at `center` (terms are read in shifted variables).
    pub fn with_center(mut self, center: Point) -> Result<Self, SPolyError> {
        if center.dim() != self.dim {
            return Err(SPolyError::DimensionMismatch { expected: self.dim - 1, got: center.xprime.len() });
        }
        self.center = center;
        Ok(self)
    }

    fn check_key(&self, key: &MonomialKey) -> Result<(), SPolyError> {
        if key.beta.len() != self.dim - 1 {
            return Err(SPolyError::DimensionMismatch { expected: self.dim - 1, got: key.beta.len() });
        }
        if key.logpow > 0 && !self.gamma.is_log_case() {
            return Err(SPolyError::InvalidBasis(self.gamma.to_string()));
        }
        Ok(())
    }

    pub(crate) fn add_term(&mut self, key: MonomialKey, c: C) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    pub fn center(&self) -> &Point {
        &self.center
    }

    pub fn terms(&self) -> &BTreeMap<MonomialKey, C> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, key: &MonomialKey) -> Option<&C> {
        self.terms.get(key)
    }

    fn compatible(&self, other: &Self) -> Result<(), SPolyError> {
        if self.dim != other.dim || self.gamma != other.gamma || self.center != other.center {
            return Err(SPolyError::Incompatible);
        }
        Ok(())
    }

    fn require_boundary_center(&self) -> Result<(), SPolyError> {
        if self.center.xn != 0.0 {
            return Err(SPolyError::ShiftedCenter);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, SPolyError> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SPolyError> {
        self.compatible(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        self.scale(&-C::one())
    }

    pub fn scale(&self, c: &C) -> Self {
        let mut out = Self { terms: BTreeMap::new(), ..self.clone_shell() };
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v.clone() * c.clone());
        }
        out
    }

    fn clone_shell(&self) -> Self {
        Self { dim: self.dim, gamma: self.gamma, center: self.center.clone(), terms: BTreeMap::new() }
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SPolyError> {
        self.compatible(other)?;
        self.require_boundary_center()?;
        let mut out = self.clone_shell();
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                out.add_term(ka.mul(kb), ca.clone() * cb.clone());
            }
        }
        Ok(out)
    }

    /// Multiplies by `x_n^e`.
    pub fn shift_xn(&self, e: Exp) -> Self {
        let mut out = self.clone_shell();
        for (k, c) in &self.terms {
            let mut k = k.clone();
            k.e += e;
            out.terms.insert(k, c.clone());
        }
        out
    }

    pub fn differentiate(&self, direction: Direction) -> Result<Self, SPolyError> {
        self.require_boundary_center()?;
        let mut out = self.clone_shell();
        match direction {
            Direction::Tangential(i) => {
                if i + 1 >= self.dim {
                    return Err(SPolyError::BadDirection { index: i, dim: self.dim });
                }
                for (k, c) in &self.terms {
                    if k.beta[i] > 0 {
                        let mut nk = k.clone();
                        nk.beta[i] -= 1;
                        out.add_term(nk, c.clone() * C::from_q(&q_int(i64::from(k.beta[i]))));
                    }
                }
            }
            Direction::Time => {
                for (k, c) in &self.terms {
                    if k.l > 0 {
                        let mut nk = k.clone();
                        nk.l -= 1;
                        out.add_term(nk, c.clone() * C::from_q(&q_int(i64::from(k.l))));
                    }
                }
            }
            Direction::Normal => {
                for (k, c) in &self.terms {
                    let mut nk = k.clone();
                    nk.e -= Exp::one();
                    if k.logpow > 0 {
                        let mut lk = nk.clone();
                        lk.logpow -= 1;
                        out.add_term(lk, c.clone() * C::from_q(&q_int(i64::from(k.logpow))));
                    }
                    if !k.e.is_zero() {
                        out.add_term(nk, c.clone() * C::from_q(&q_from_exp(k.e)));
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn s_degree(&self) -> Degree {
        self.terms
            .keys()
            .map(|k| Degree::Finite(k.s_degree(self.gamma)))
            .max()
            .unwrap_or(Degree::NegInfinity)
    }

    pub fn min_exponent(&self) -> Option<Exp> {
        self.terms.keys().map(|k| k.e).min()
    }

    /// Keeps the admissible terms of s-degree `< kappa`.
    pub fn truncate(&self, kappa: Exp) -> Self {
        let mut out = self.clone_shell();
        for (k, c) in &self.terms {
            if k.s_degree(self.gamma) < kappa && is_admissible_exponent(self.gamma, k.e, k.logpow) {
                out.terms.insert(k.clone(), c.clone());
            }
        }
        out
    }

    /// The value if the polynomial is a constant (the empty polynomial is the constant 0).
    pub fn constant_value(&self) -> Option<C> {
        match self.terms.len() {
            0 => Some(C::zero()),
            1 => {
                let (k, c) = self.terms.iter().next()?;
                (*k == MonomialKey::unit(self.dim)).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        self.terms.keys().all(|k| k.l == 0)
    }

    pub fn map_coeffs<D: Scalar>(&self, f: impl Fn(&C) -> D) -> SPoly<D> {
        let mut out = SPoly::<D> {
            dim: self.dim,
            gamma: self.gamma,
            center: self.center.clone(),
            terms: BTreeMap::new(),
        };
        for (k, c) in &self.terms {
            out.add_term(k.clone(), f(c));
        }
        out
    }

    pub fn evaluate(&self, x: &Point) -> Result<f64, SPolyError> {
        if x.xprime.len() != self.dim - 1 {
            return Err(SPolyError::DimensionMismatch { expected: self.dim - 1, got: x.xprime.len() });
        }
        let c = &self.center;
        let shifted = c.xn != 0.0;
        let dxn = x.xn - c.xn;
        let log_xn = x.xn.ln();
        let dt = x.t - c.t;
        let mut sum = 0.0;
        for (k, coef) in &self.terms {
            let mut v = coef.as_f64();
            for ((&b, a), y) in k.beta.iter().zip(&x.xprime).zip(&c.xprime) {
                if b > 0 {
                    v *= (a - y).powi(b as i32);
                }
            }
            if shifted {
                if k.logpow > 0 || !k.e.is_integer() || k.e.is_negative() {
                    return Err(SPolyError::ShiftedCenter);
                }
                v *= dxn.powi(*k.e.numer() as i32);
            } else if x.xn == 0.0 {
                if k.e.is_negative() || k.logpow > 0 {
                    return Err(SPolyError::Domain { e: fmt_exp(&k.e), logpow: k.logpow });
                }
                if !k.e.is_zero() {
                    v = 0.0;
                }
            } else {
                if !k.e.is_zero() {
                    v *= if k.e.is_integer() { x.xn.powi(*k.e.numer() as i32) } else { x.xn.powf(exp_to_f64(k.e)) };
                }
                if k.logpow > 0 {
                    v *= log_xn.powi(k.logpow as i32);
                }
            }
            if k.l > 0 {
                v *= dt.powi(k.l as i32);
            }
            sum += v;
        }
        Ok(sum)
    }
}

impl SPoly<Q> {
    pub fn to_float(&self) -> SPoly<f64> {
        self.map_coeffs(|c| c.as_f64())
    }

    /// Exact value at a rational point; fails on log terms and inexact roots.
    pub fn evaluate_exact(&self, xprime: &[Q], xn: &Q, t: &Q) -> Result<Q, SPolyError> {
        if xprime.len() != self.dim - 1 {
            return Err(SPolyError::DimensionMismatch { expected: self.dim - 1, got: xprime.len() });
        }
        let exact = |v: f64| Q::from_float(v).ok_or_else(|| SPolyError::NotExact("non-finite center".into()));
        let cx: Vec<Q> = self.center.xprime.iter().map(|&v| exact(v)).collect::<Result<_, _>>()?;
        let cn = exact(self.center.xn)?;
        let ct = exact(self.center.t)?;
        let shifted = !cn.is_zero();
        let mut sum = Q::zero();
        for (k, c) in &self.terms {
            if k.logpow > 0 {
                return Err(SPolyError::NotExact("log term".into()));
            }
            let mut v = c.clone();
            for ((&b, a), y) in k.beta.iter().zip(xprime).zip(&cx) {
                v *= num::pow::pow(a - y, b as usize);
            }
            if shifted {
                if !k.e.is_integer() || k.e.is_negative() {
                    return Err(SPolyError::ShiftedCenter);
                }
                v *= num::pow::pow(xn - &cn, *k.e.numer() as usize);
            } else {
                if xn.is_zero() && k.e.is_negative() {
                    return Err(SPolyError::Domain { e: fmt_exp(&k.e), logpow: 0 });
                }
                v *= exact_pow(xn, k.e).ok_or_else(|| SPolyError::NotExact(format!("x_n^({})", fmt_exp(&k.e))))?;
            }
            v *= num::pow::pow(t - &ct, k.l as usize);
            sum += v;
        }
        Ok(sum)
    }

    /// Human-readable form, e.g. `1/2·t^2·x_n - 4/3·x_n^(3/2)`.
    pub fn pretty(&self) -> String {
        if self.is_empty() {
            return "0".into();
        }
        let mut parts = Vec::new();
        for (k, c) in &self.terms {
            let mut factors = Vec::new();
            for (i, &b) in k.beta.iter().enumerate() {
                match b {
                    0 => {}
                    1 => factors.push(format!("x{}", i + 1)),
                    _ => factors.push(format!("x{}^{}", i + 1, b)),
                }
            }
            if !k.e.is_zero() {
                if k.e.is_one() {
                    factors.push("x_n".into());
                } else if k.e.is_integer() && k.e.is_positive() {
                    factors.push(format!("x_n^{}", k.e));
                } else {
                    factors.push(format!("x_n^({})", fmt_exp(&k.e)));
                }
            }
            match k.logpow {
                0 => {}
                1 => factors.push("log(x_n)".into()),
                m => factors.push(format!("log(x_n)^{m}")),
            }
            match k.l {
                0 => {}
                1 => factors.push("t".into()),
                l => factors.push(format!("t^{l}")),
            }
            let coef = fmt_q(c);
            parts.push(if factors.is_empty() { coef } else { format!("{}·{}", coef, factors.join("·")) });
        }
        parts.join(" + ").replace("+ -", "- ")
    }
}

#[cfg(test)]
mod tests;
