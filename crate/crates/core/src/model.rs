//! Built-in problems: the model equation `u_t = x^γ u_xx + 1`, its closed-form solution,
//! the CEV pricing operator, and the catalog of named fixtures.

use num::{One, Zero};
use serde::Serialize;

use crate::operator::{Coefficient, DegenerateOperator, OperatorError};
use crate::rational::{q_from_exp, q_int, q_ratio, q_to_f64, Exp, Q};
use crate::spoly::{Gamma, MonomialKey, SPoly, SPolyError};

fn term(e: Exp, l: u32, c: Q) -> (MonomialKey, Q) {
    (MonomialKey::new(vec![], e, 0, l), c)
}

/// Exact solution of `u_t = x^γ u_xx + 1` (`n = 1`, γ < 1):
/// `t²x/2 − x^{2−γ}/((2−γ)(1−γ)) + t x^{3−γ}/((3−γ)(2−γ)) + x^{5−2γ}/((5−2γ)(4−2γ)(3−γ)(2−γ))`.
pub fn model_solution(gamma: Gamma) -> Result<SPoly, SPolyError> {
    Ok(SPoly::from_terms(1, gamma, model_terms(gamma)?)?)
}

/// The first three terms of [`model_solution`]; the omitted remainder is `O(x^{5−2γ})`.
pub fn model_candidate(gamma: Gamma) -> Result<SPoly, SPolyError> {
    Ok(SPoly::from_terms(1, gamma, model_terms(gamma)?.into_iter().take(3))?)
}

fn model_terms(gamma: Gamma) -> Result<Vec<(MonomialKey, Q)>, SPolyError> {
    if gamma.is_log_case() {
        return Err(SPolyError::InvalidGamma("the closed-form model solution needs gamma < 1".into()));
    }
    let g = gamma.value();
    let gq = q_from_exp(g);
    let two = q_int(2) - &gq;
    let one = q_int(1) - &gq;
    let three = q_int(3) - &gq;
    let five = q_int(5) - q_int(2) * &gq;
    let four = q_int(4) - q_int(2) * &gq;
    Ok(vec![
        term(Exp::one(), 2, q_ratio(1, 2)),
        term(Exp::from_integer(2) - g, 0, -(&two * &one).recip()),
        term(Exp::from_integer(3) - g, 1, (&three * &two).recip()),
        term(Exp::from_integer(5) - g * 2, 0, (five * four * three * two).recip()),
    ])
}

/// Forcing of the model equation.
pub fn model_forcing(gamma: Gamma) -> SPoly {
    SPoly::constant(1, gamma, q_int(1))
}

/// Float evaluation of [`model_solution`] without building the SPoly.
pub fn model_solution_value(gamma: Gamma, xn: f64, t: f64) -> f64 {
    let g = gamma.to_f64();
    t * t * xn / 2.0 - xn.powf(2.0 - g) / ((2.0 - g) * (1.0 - g)) + t * xn.powf(3.0 - g) / ((3.0 - g) * (2.0 - g))
        + xn.powf(5.0 - 2.0 * g) / ((5.0 - 2.0 * g) * (4.0 - 2.0 * g) * (3.0 - g) * (2.0 - g))
}

/// Forward-in-time-to-maturity CEV operator `½ v² x^γ D_xx + r x D_x − r`.
/// The drift `r x` is `x^{γ/2}·(r x^σ)`, so `b^n = r x^σ`.
pub fn cev_operator(gamma: Gamma, volatility: &Q, rate: &Q) -> Result<DegenerateOperator, OperatorError> {
    if volatility.is_zero() || *rate < Q::zero() {
        return Err(OperatorError::Shape("cev needs volatility != 0 and rate >= 0".into()));
    }
    let a = volatility * volatility / q_int(2);
    let b = SPoly::monomial(1, gamma, MonomialKey::new(vec![], gamma.sigma(), 0, 0), rate.clone())?;
    let lambda = q_to_f64(&a);
    let big_lambda = lambda.max(2.0 * q_to_f64(rate));
    DegenerateOperator::new(
        gamma,
        vec![vec![Coefficient::constant(1, gamma, a)]],
        vec![Coefficient::poly(b)],
        Coefficient::constant(1, gamma, -rate.clone()),
        lambda,
        big_lambda,
    )
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct BuiltinEntry {
    pub name: &'static str,
    pub kind: &'static str,
    pub description: &'static str,
}

pub fn catalog() -> Vec<BuiltinEntry> {
    vec![
        BuiltinEntry { name: "model_1d", kind: "operator", description: "u_t = x^gamma u_xx + f on (0,1); with f = 1 it has the closed-form solution model_oracle" },
        BuiltinEntry { name: "model", kind: "operator", description: "x_n^gamma D_nn plus the tangential Laplacian, any dimension" },
        BuiltinEntry { name: "cev", kind: "operator", description: "constant-elasticity-of-variance pricing operator 1/2 v^2 x^gamma u_xx + r x u_x - r u in time to maturity (params: volatility, rate)" },
        BuiltinEntry { name: "constant", kind: "operator", description: "explicit a, b, c given as rational strings" },
        BuiltinEntry { name: "model_oracle", kind: "data", description: "closed-form solution of u_t = x^gamma u_xx + 1 (gamma < 1), usable as initial and boundary data" },
        BuiltinEntry { name: "zero", kind: "data", description: "identically zero" },
        BuiltinEntry { name: "lip_phi", kind: "barrier", description: "boundary Lipschitz barrier phi(x_n; gamma, delta)" },
        BuiltinEntry { name: "existence_w", kind: "barrier", description: "local barrier w near a boundary point (gamma, r)" },
        BuiltinEntry { name: "holder_power", kind: "barrier", description: "Hoelder comparison function x_n^(sigma alpha)" },
    ]
}
