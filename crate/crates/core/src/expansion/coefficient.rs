//! Polynomials in `(x', t)` with exact coefficients, graded by the parabolic weight `|β| + 2l`.

use std::collections::BTreeMap;

use num::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{q_int, q_to_f64, serde_q, Exp, Q};
use crate::spoly::{Gamma, MonomialKey, SPoly};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TKey {
    pub beta: Vec<u32>,
    pub l: u32,
}

impl TKey {
    pub fn weight(&self) -> u32 {
        self.beta.iter().sum::<u32>() + 2 * self.l
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientFunction {
    nvars: usize,
    terms: BTreeMap<TKey, Q>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientTermJson {
    pub beta: Vec<u32>,
    #[serde(default)]
    pub t: u32,
    #[serde(with = "serde_q")]
    pub coeff: Q,
}

impl CoefficientFunction {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Q) -> Self {
        let mut p = Self::zero(nvars);
        p.add_term(TKey { beta: vec![0; nvars], l: 0 }, c);
        p
    }

    /// Panics if `beta.len() != nvars`.
    pub fn monomial(nvars: usize, beta: Vec<u32>, l: u32, c: Q) -> Self {
        assert_eq!(beta.len(), nvars, "multi-index length");
        let mut p = Self::zero(nvars);
        p.add_term(TKey { beta, l }, c);
        p
    }

    pub fn from_json_terms(nvars: usize, terms: &[CoefficientTermJson]) -> Option<Self> {
        let mut p = Self::zero(nvars);
        for t in terms {
            if t.beta.len() != nvars {
                return None;
            }
            p.add_term(TKey { beta: t.beta.clone(), l: t.t }, t.coeff.clone());
        }
        Some(p)
    }

    pub fn to_json_terms(&self) -> Vec<CoefficientTermJson> {
        self.terms.iter().map(|(k, c)| CoefficientTermJson { beta: k.beta.clone(), t: k.l, coeff: c.clone() }).collect()
    }

    pub(crate) fn add_term(&mut self, key: TKey, c: Q) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(key.clone()).or_insert_with(Q::zero);
        *slot += c;
        if slot.is_zero() {
            self.terms.remove(&key);
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn terms(&self) -> &BTreeMap<TKey, Q> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn constant_term(&self) -> Q {
        self.terms.get(&TKey { beta: vec![0; self.nvars], l: 0 }).cloned().unwrap_or_else(Q::zero)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|k| k.weight() == 0)
    }

    pub fn max_weight(&self) -> Option<u32> {
        self.terms.keys().map(TKey::weight).max()
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(k, v)| (k.clone(), v * c)).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let beta = ka.beta.iter().zip(&kb.beta).map(|(a, b)| a + b).collect();
                out.add_term(TKey { beta, l: ka.l + kb.l }, ca * cb);
            }
        }
        out
    }

    /// Product with every term of weight `≥ bound` dropped.
    pub fn mul_truncated(&self, other: &Self, bound: Exp) -> Self {
        self.mul(other).truncate_weight(bound)
    }

    pub fn d_tangential(&self, i: usize) -> Self {
        let mut out = Self::zero(self.nvars);
        for (k, c) in &self.terms {
            if k.beta[i] > 0 {
                let mut nk = k.clone();
                nk.beta[i] -= 1;
                out.add_term(nk, c * q_int(i64::from(k.beta[i])));
            }
        }
        out
    }

    pub fn d_time(&self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (k, c) in &self.terms {
            if k.l > 0 {
                out.add_term(TKey { beta: k.beta.clone(), l: k.l - 1 }, c * q_int(i64::from(k.l)));
            }
        }
        out
    }

    /// Keeps the terms of weight `< bound`.
    pub fn truncate_weight(&self, bound: Exp) -> Self {
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().filter(|(k, _)| Exp::from_integer(i64::from(k.weight())) < bound).map(|(k, c)| (k.clone(), c.clone())).collect(),
        }
    }

    /// `1/self` modulo terms of weight `≥ bound`, as a geometric series about the constant
    /// term. `None` when the constant term vanishes.
    pub fn reciprocal_truncated(&self, bound: Exp) -> Option<Self> {
        let c0 = self.constant_term();
        if c0.is_zero() {
            return None;
        }
        let inv0 = c0.recip();
        let tail = self.sub(&Self::constant(self.nvars, c0)).scale(&-inv0.clone());
        let one = Self::constant(self.nvars, q_int(1));
        let mut sum = one.truncate_weight(bound);
        let mut power = one;
        // every factor of `tail` raises the weight by at least one
        loop {
            power = power.mul_truncated(&tail, bound);
            if power.is_zero() {
                break;
            }
            sum = sum.add(&power);
        }
        Some(sum.scale(&inv0))
    }

    pub fn evaluate(&self, xprime: &[f64], t: f64) -> f64 {
        self.terms
            .iter()
            .map(|(k, c)| {
                let mut v = q_to_f64(c);
                for (&b, x) in k.beta.iter().zip(xprime) {
                    v *= x.powi(b as i32);
                }
                v * t.powi(k.l as i32)
            })
            .sum()
    }

    /// `self · x_n^e (log x_n)^logpow` as an SPoly.
    pub fn to_spoly(&self, gamma: Gamma, e: Exp, logpow: u32) -> SPoly {
        let mut out = SPoly::zero(self.nvars + 1, gamma);
        for (k, c) in &self.terms {
            out.add_term(MonomialKey::new(k.beta.clone(), e, logpow, k.l), c.clone());
        }
        out
    }
}

/// Vector space over the rationals, used by the exact tridiagonal solver.
pub trait QVector: Clone {
    fn zero_like(&self) -> Self;
    fn plus(&self, other: &Self) -> Self;
    fn times(&self, q: &Q) -> Self;
    fn is_null(&self) -> bool;
}

impl QVector for Q {
    fn zero_like(&self) -> Self {
        Q::zero()
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn times(&self, q: &Q) -> Self {
        self * q
    }
    fn is_null(&self) -> bool {
        self.is_zero()
    }
}

impl QVector for CoefficientFunction {
    fn zero_like(&self) -> Self {
        Self::zero(self.nvars)
    }
    fn plus(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn times(&self, q: &Q) -> Self {
        self.scale(q)
    }
    fn is_null(&self) -> bool {
        self.is_zero()
    }
}
