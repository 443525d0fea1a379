//! Action of the weighted normal derivatives on single monomials.
//!
//! With `x_n^γ = x_n^{2−2σ}` and `x_n^{γ/2} = x_n^{1−σ}`:
//! `x_n^γ D_nn` sends `x^e L^m` to `x^{e−2σ}[e(e−1)L^m + m(2e−1)L^{m−1} + m(m−1)L^{m−2}]`,
//! `x_n^{γ/2} D_n` sends it to `x^{e−σ}[e L^m + m L^{m−1}]` (`L = log x_n`).

use num::Zero;

use crate::rational::{q_from_exp, q_int, Exp, Q};
use crate::spoly::{Gamma, MonomialKey, SPoly};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct WeightedDerivativeTable {
    gamma: Gamma,
}

fn push(out: &mut Vec<(MonomialKey, Q)>, key: &MonomialKey, e: Exp, logpow: u32, c: Q) {
    if !c.is_zero() {
        let mut k = key.clone();
        k.e = e;
        k.logpow = logpow;
        out.push((k, c));
    }
}

impl WeightedDerivativeTable {
    pub fn new(gamma: Gamma) -> Self {
        Self { gamma }
    }

    /// `x_n^γ D_nn` on one key.
    pub fn normal_second(&self, key: &MonomialKey) -> Vec<(MonomialKey, Q)> {
        let e = key.e;
        let m = i64::from(key.logpow);
        let eq = q_from_exp(e);
        let target = e - self.gamma.sigma() * 2;
        let mut out = Vec::with_capacity(3);
        push(&mut out, key, target, key.logpow, &eq * (&eq - q_int(1)));
        if m >= 1 {
            push(&mut out, key, target, key.logpow - 1, q_int(m) * (q_int(2) * &eq - q_int(1)));
        }
        if m >= 2 {
            push(&mut out, key, target, key.logpow - 2, q_int(m * (m - 1)));
        }
        out
    }

    /// `x_n^{γ/2} D_n` on one key.
    pub fn normal_first(&self, key: &MonomialKey) -> Vec<(MonomialKey, Q)> {
        let target = key.e - self.gamma.sigma();
        let mut out = Vec::with_capacity(2);
        push(&mut out, key, target, key.logpow, q_from_exp(key.e));
        if key.logpow >= 1 {
            push(&mut out, key, target, key.logpow - 1, q_int(i64::from(key.logpow)));
        }
        out
    }

    /// `x_n^{γ/2} D_{i'n}` on one key.
    pub fn mixed(&self, key: &MonomialKey, i: usize) -> Vec<(MonomialKey, Q)> {
        let b = key.beta[i];
        if b == 0 {
            return Vec::new();
        }
        let mut lowered = key.clone();
        lowered.beta[i] -= 1;
        self.normal_first(&lowered)
            .into_iter()
            .map(|(k, c)| (k, c * q_int(i64::from(b))))
            .collect()
    }

    fn apply_rule(&self, u: &SPoly, rule: impl Fn(&MonomialKey) -> Vec<(MonomialKey, Q)>) -> SPoly {
        let mut out = SPoly::zero(u.dim(), u.gamma());
        for (k, c) in u.terms() {
            for (nk, f) in rule(k) {
                out.add_term(nk, f * c);
            }
        }
        out
    }

    pub fn apply_normal_second(&self, u: &SPoly) -> SPoly {
        self.apply_rule(u, |k| self.normal_second(k))
    }

    pub fn apply_normal_first(&self, u: &SPoly) -> SPoly {
        self.apply_rule(u, |k| self.normal_first(k))
    }

    pub fn apply_mixed(&self, u: &SPoly, i: usize) -> SPoly {
        self.apply_rule(u, |k| self.mixed(k, i))
    }
}
