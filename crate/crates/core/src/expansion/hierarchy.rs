//! Constant-coefficient hierarchy `v^N = Σ_{l ≤ N} U^l(x', t) x_n^{1+σl}`.
//!
//! Matching the coefficient of `x_n^{1+σ(l−2)}` in `v_t − L_0 v` to zero gives
//! `σl(1+σl) A^{nn} U^l = (∂_t − A^{i'j'}D_{i'j'} − B^{i'}D_{i'} − C) U^{l−2}
//! − (1+σ(l−1)) (2A^{i'n}D_{i'} + B^n) U^{l−1}`, with `U^{−1} = 0`.

use num::Zero;

use super::coefficient::CoefficientFunction;
use super::{Expansion, ExpansionEntry, ExpansionError};
use crate::operator::DegenerateOperator;
use crate::rational::{q_from_exp, q_int, Exp, Q};
use crate::spoly::SPolyError;

pub fn homogeneous_hierarchy(op: &DegenerateOperator, u0: &CoefficientFunction, n_max: u32) -> Result<Expansion, ExpansionError> {
    let gamma = op.gamma();
    if gamma.is_log_case() {
        return Err(ExpansionError::UnsupportedGamma("the homogeneous hierarchy is defined for gamma < 1".into()));
    }
    let (a, b, c) = op.constant_values().ok_or_else(|| ExpansionError::InvalidOperator("the hierarchy needs constant coefficients".into()))?;
    let n = op.dim() - 1;
    if u0.nvars() != n {
        return Err(SPolyError::Incompatible.into());
    }
    if a[n][n] <= Q::zero() {
        return Err(ExpansionError::InvalidOperator("A^nn must be positive".into()));
    }
    let sigma = q_from_exp(gamma.sigma());

    let drift = |u: &CoefficientFunction| {
        let mut out = u.scale(&b[n]);
        for i in 0..n {
            out = out.add(&u.d_tangential(i).scale(&(q_int(2) * &a[i][n])));
        }
        out
    };
    let parabolic = |u: &CoefficientFunction| {
        let mut out = u.d_time().sub(&u.scale(&c));
        for i in 0..n {
            let di = u.d_tangential(i);
            out = out.sub(&di.scale(&b[i]));
            for j in 0..n {
                out = out.sub(&di.d_tangential(j).scale(&a[i][j]));
            }
        }
        out
    };

    let mut us = vec![u0.clone()];
    for l in 1..=n_max as i64 {
        let lq = q_int(l);
        let prev = &us[l as usize - 1];
        let mut rhs = drift(prev).scale(&-(q_int(1) + &sigma * q_int(l - 1)));
        if l >= 2 {
            rhs = rhs.add(&parabolic(&us[l as usize - 2]));
        }
        let denom = &sigma * &lq * (q_int(1) + &sigma * &lq) * &a[n][n];
        us.push(rhs.scale(&denom.recip()));
    }
    let entries = us.into_iter().enumerate().map(|(l, coef)| ExpansionEntry { coef, e: Exp::from_integer(1) + gamma.sigma() * (l as i64), logpow: 0 });
    Expansion::from_entries(gamma, n, entries)
}
