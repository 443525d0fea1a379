//! Level-by-level cancellation of the residual `h_t − L h − f`.
//!
//! At the lowest targeted exponent `μ` the residual is `Σ_k ρ_k(x',t) x_n^μ (log x_n)^k`.
//! Only the `x_n^0` part `P0` of `a^{nn}` acting through `x_n^γ D_nn` reaches `x_n^μ` from
//! `x_n^{μ+2σ}`, so the correction `Δh = Σ_k a_k x_n^{μ+2σ} (log x_n)^k` solves
//! `P0 · (E a_k + (k+1)B a_{k+1} + (k+2)(k+1) a_{k+2}) = ρ_k` with `e = μ + 2σ`,
//! `E = e(e−1)`, `B = 2e − 1`. Everything else `Δh` produces lands strictly above `μ`.

use std::collections::{BTreeMap, BTreeSet};

use num::{One, Signed, Zero};
use serde::Serialize;

use super::coefficient::{CoefficientFunction, TKey};
use super::tridiag::tridiagonal_t;
use super::{Expansion, ExpansionError};
use crate::operator::DegenerateOperator;
use crate::rational::{q_from_exp, q_int, Exp, Q};
use crate::spoly::{Gamma, MonomialKey, SPoly};

/// Order in which residual levels are cancelled.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Schedule {
    /// Always the lowest remaining targeted level.
    #[default]
    Ascending,
    /// The listed levels first, in order, then an ascending clean-up pass.
    Explicit(Vec<Exp>),
}

impl Schedule {
    /// Row-then-column order over the cells `(l, m)` with level `l + σm < threshold`.
    pub fn row_then_column(gamma: Gamma, threshold: Exp) -> Self {
        let sigma = gamma.sigma();
        let mut levels = Vec::new();
        let mut l = Exp::zero();
        while l < threshold {
            let mut m = Exp::zero();
            while l + sigma * m < threshold {
                levels.push(l + sigma * m);
                m += Exp::one();
            }
            l += Exp::one();
        }
        Schedule::Explicit(levels)
    }
}

/// How the level equations are solved for γ = 1 away from resonance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SolveRoute {
    /// Bordered `T^m` solve where it applies, back-substitution elsewhere.
    #[default]
    Auto,
    BackSubstitution,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EngineOptions {
    pub schedule: Schedule,
    pub route: SolveRoute,
    pub max_level_solves: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        Self { schedule: Schedule::Ascending, route: SolveRoute::Auto, max_level_solves: 100_000 }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EngineStats {
    pub level_solves: usize,
    pub revisits: usize,
    pub tridiagonal_solves: usize,
    pub back_substitutions: usize,
    pub resonant_solves: usize,
}

#[derive(Clone, Debug)]
pub struct EngineOutput {
    pub expansion: Expansion,
    /// `h_t − L h − f` for the returned `h`.
    pub residual: SPoly,
    pub threshold: Exp,
    pub stats: EngineStats,
}

struct Engine {
    gamma: Gamma,
    nvars: usize,
    threshold: Exp,
    /// `1/P0` when `P0` is constant.
    p0_inv: Option<Q>,
    p0: CoefficientFunction,
    route: SolveRoute,
    stats: EngineStats,
    solved: BTreeSet<Exp>,
}

pub(super) fn run(op: &DegenerateOperator, h0: SPoly, f: &SPoly, threshold: Exp, options: &EngineOptions) -> Result<EngineOutput, ExpansionError> {
    let p0 = normal_trace(op)?;
    let c0 = p0.constant_term();
    if c0.is_zero() {
        return Err(ExpansionError::DivisionImpossible("P^nn(0,0,0) = 0".into()));
    }
    let mut engine = Engine {
        gamma: op.gamma(),
        nvars: op.dim() - 1,
        threshold,
        p0_inv: p0.is_constant().then(|| c0.recip()),
        p0,
        route: options.route,
        stats: EngineStats::default(),
        solved: BTreeSet::new(),
    };
    let mut h = h0;
    let mut residual = op.residual(&h, f)?;
    if let Schedule::Explicit(levels) = &options.schedule {
        for &mu in levels {
            engine.budget(options.max_level_solves)?;
            if let Some(dh) = engine.solve_level(&residual, mu)? {
                residual = residual.add(&op.residual(&dh, &SPoly::zero(op.dim(), op.gamma()))?)?;
                h = h.add(&dh)?;
            }
        }
    }
    while let Some(mu) = engine.lowest_targeted(&residual) {
        engine.budget(options.max_level_solves)?;
        let dh = engine.solve_level(&residual, mu)?.expect("targeted level has terms");
        residual = residual.add(&op.residual(&dh, &SPoly::zero(op.dim(), op.gamma()))?)?;
        h = h.add(&dh)?;
    }
    Ok(EngineOutput { expansion: Expansion::from_spoly(&h)?, residual, threshold, stats: engine.stats })
}

/// `P^{nn}(x', 0, t)`, after checking that every coefficient is an s-polynomial in
/// nonnegative powers of `x_n`.
fn normal_trace(op: &DegenerateOperator) -> Result<CoefficientFunction, ExpansionError> {
    let n = op.dim() - 1;
    let mut coefs = vec![op.c()];
    for i in 0..=n {
        coefs.push(op.b(i));
        for j in i..=n {
            coefs.push(op.a(i, j));
        }
    }
    for c in coefs {
        let p = c.as_poly().ok_or_else(|| ExpansionError::InvalidOperator("coefficients must be s-polynomials".into()))?;
        if !p.center().is_origin() {
            return Err(ExpansionError::InvalidOperator("coefficients must be centered at the origin".into()));
        }
        if p.min_exponent().is_some_and(|e| e.is_negative()) {
            return Err(ExpansionError::InvalidOperator("coefficients must not contain negative powers of x_n".into()));
        }
    }
    let ann = op.a(n, n).as_poly().expect("checked");
    let mut p0 = CoefficientFunction::zero(n);
    for (k, c) in ann.terms() {
        if k.e.is_zero() {
            if k.logpow > 0 {
                return Err(ExpansionError::DivisionImpossible("P^nn has a log x_n term at x_n^0".into()));
            }
            p0.add_term(TKey { beta: k.beta.clone(), l: k.l }, c.clone());
        }
    }
    Ok(p0)
}

impl Engine {
    fn budget(&self, max: usize) -> Result<(), ExpansionError> {
        if self.stats.level_solves >= max {
            return Err(ExpansionError::NoTermination(max));
        }
        Ok(())
    }

    fn is_targeted(&self, k: &MonomialKey) -> bool {
        k.e < self.threshold && (self.p0_inv.is_some() || k.s_degree(self.gamma) < self.threshold / self.gamma.sigma())
    }

    fn lowest_targeted(&self, residual: &SPoly) -> Option<Exp> {
        residual.terms().keys().find(|k| self.is_targeted(k)).map(|k| k.e)
    }

    /// The correction cancelling the targeted terms at `x_n^mu`, if any.
    fn solve_level(&mut self, residual: &SPoly, mu: Exp) -> Result<Option<SPoly>, ExpansionError> {
        let mut rho: BTreeMap<u32, CoefficientFunction> = BTreeMap::new();
        for (k, c) in residual.terms() {
            if k.e == mu && self.is_targeted(k) {
                rho.entry(k.logpow).or_insert_with(|| CoefficientFunction::zero(self.nvars)).add_term(TKey { beta: k.beta.clone(), l: k.l }, c.clone());
            }
        }
        let Some(&top) = rho.keys().next_back() else { return Ok(None) };
        let rho: Vec<CoefficientFunction> = (0..=top).map(|k| rho.remove(&k).unwrap_or_else(|| CoefficientFunction::zero(self.nvars))).collect();

        self.stats.level_solves += 1;
        if !self.solved.insert(mu) {
            self.stats.revisits += 1;
        }
        let e = mu + self.gamma.sigma() * 2;
        let a = self.solve_log_system(&rho, e, mu)?;
        let mut dh = SPoly::zero(self.nvars + 1, self.gamma);
        for (k, ak) in a.iter().enumerate() {
            let ak = match &self.p0_inv {
                Some(inv) => ak.scale(inv),
                None => {
                    let bound = (self.threshold - mu) / self.gamma.sigma();
                    let inv = self.p0.reciprocal_truncated(bound).expect("nonzero constant term");
                    ak.mul_truncated(&inv, bound)
                }
            };
            dh = dh.add(&ak.to_spoly(self.gamma, e, k as u32))?;
        }
        Ok(Some(dh))
    }

    /// Solves `E a_k + (k+1)B a_{k+1} + (k+2)(k+1) a_{k+2} = ρ_k` for `k = 0..=K`.
    fn solve_log_system(&mut self, rho: &[CoefficientFunction], e: Exp, mu: Exp) -> Result<Vec<CoefficientFunction>, ExpansionError> {
        let eq = q_from_exp(e);
        let big_e = &eq * (&eq - q_int(1));
        let b = q_int(2) * &eq - q_int(1);
        if big_e.is_zero() {
            self.stats.resonant_solves += 1;
            return Ok(resonant_solve(rho, &b));
        }
        if self.route == SolveRoute::Auto && self.gamma.is_log_case() {
            let twice = mu * 2;
            if twice.is_integer() && *twice.numer() >= 1 && rho.len() <= (*twice.numer() as usize) + 2 {
                if let Some(a) = bordered_solve(*twice.numer() as usize, rho, &big_e)? {
                    self.stats.tridiagonal_solves += 1;
                    return Ok(a);
                }
            }
        }
        self.stats.back_substitutions += 1;
        Ok(back_substitute(rho, &big_e, &b))
    }
}

fn zero_like(rho: &[CoefficientFunction]) -> CoefficientFunction {
    CoefficientFunction::zero(rho[0].nvars())
}

/// Top-down elimination for `E ≠ 0`; the solution has as many log powers as `ρ`.
pub(super) fn back_substitute(rho: &[CoefficientFunction], big_e: &Q, b: &Q) -> Vec<CoefficientFunction> {
    let len = rho.len();
    let mut a = vec![zero_like(rho); len + 2];
    let inv = big_e.recip();
    for k in (0..len).rev() {
        let ki = k as i64;
        let rhs = rho[k].sub(&a[k + 1].scale(&(q_int(ki + 1) * b))).sub(&a[k + 2].scale(&q_int((ki + 2) * (ki + 1))));
        a[k] = rhs.scale(&inv);
    }
    a.truncate(len);
    a
}

/// `E = 0`: the equations fix `a_1, …, a_{K+1}` from the top and `a_0` is set to zero.
fn resonant_solve(rho: &[CoefficientFunction], b: &Q) -> Vec<CoefficientFunction> {
    let len = rho.len();
    let mut a = vec![zero_like(rho); len + 2];
    for k in (0..len).rev() {
        let ki = k as i64;
        let rhs = rho[k].sub(&a[k + 2].scale(&q_int((ki + 2) * (ki + 1))));
        a[k + 1] = rhs.scale(&(q_int(ki + 1) * b).recip());
    }
    a.truncate(len + 1);
    a
}

/// γ = 1 at level `m/2`: rows `0..=m` of the system in the unknowns `a_1..a_{m+1}` form
/// `T^m`, row `m+1` reads `E a_{m+1} = ρ_{m+1}`, and `a_0` enters row 0 only. With
/// `y = (T^m)^{-1} ρ_{0..m}` and `z = (T^m)^{-1} e_0`, `(a_1..a_{m+1}) = y − E a_0 z`, and
/// `a_0` is fixed by matching the last component with `ρ_{m+1}/E`.
/// `None` when `z_m` vanishes and the border cannot be eliminated.
fn bordered_solve(m: usize, rho: &[CoefficientFunction], big_e: &Q) -> Result<Option<Vec<CoefficientFunction>>, ExpansionError> {
    let t = tridiagonal_t(m)?;
    let zero = zero_like(rho);
    let r: Vec<CoefficientFunction> = (0..m + 2).map(|k| rho.get(k).cloned().unwrap_or_else(|| zero.clone())).collect();
    let y = t.solve(&r[..=m])?;
    let mut unit = vec![Q::zero(); m + 1];
    unit[0] = Q::one();
    let z = t.solve(&unit)?;
    if z[m].is_zero() {
        return Ok(None);
    }
    let top = r[m + 1].scale(&big_e.recip());
    let a0 = y[m].sub(&top).scale(&(big_e * &z[m]).recip());
    let mut a = Vec::with_capacity(m + 2);
    a.push(a0.clone());
    let e_a0 = a0.scale(big_e);
    for (yk, zk) in y.iter().zip(&z) {
        a.push(yk.sub(&e_a0.scale(zk)));
    }
    while a.len() > 1 && a.last().is_some_and(CoefficientFunction::is_zero) {
        a.pop();
    }
    Ok(Some(a))
}
