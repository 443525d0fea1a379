//! The operator in the chart `y = x_n^σ`.
//!
//! With `x_n = y^{1/σ}`: `x_n^{γ/2} D_n = σ D_y` and
//! `x_n^γ D_nn = σ² D_yy + σ(σ−1) y^{−1} D_y`, so the equation is uniformly parabolic in
//! `(x', y)` up to a first-order term singular like `1/y`.

use crate::metric::Point;
use crate::operator::{DegenerateOperator, OperatorError};
use crate::rational::Exp;
use crate::spoly::Gamma;

/// Coefficients of `a_tt u_11 + 2 a_ty u_1y + a_yy u_yy + b_t u_1 + b_y u_y + c u`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChartCoefficients {
    pub a_tt: f64,
    pub a_ty: f64,
    pub a_yy: f64,
    pub b_t: f64,
    pub b_y: f64,
    pub c: f64,
}

#[derive(Clone, Copy)]
pub struct ChartOperator<'a> {
    op: &'a DegenerateOperator,
    sigma: f64,
}

/// `(σ², σ(σ−1))`, exactly.
pub fn chart_constants(gamma: Gamma) -> (Exp, Exp) {
    let s = gamma.sigma();
    (s * s, s * (s - Exp::from_integer(1)))
}

pub fn transform_operator(op: &DegenerateOperator) -> ChartOperator<'_> {
    ChartOperator { op, sigma: op.gamma().sigma_f64() }
}

impl ChartOperator<'_> {
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn xn(&self, y: f64) -> f64 {
        y.powf(1.0 / self.sigma)
    }

    /// Panics if `y ≤ 0`; the chart drift is singular at the boundary.
    pub fn eval(&self, xprime: &[f64], y: f64, t: f64) -> Result<ChartCoefficients, OperatorError> {
        assert!(y > 0.0, "chart coefficients are evaluated at interior nodes only");
        let s = self.sigma;
        let raw = self.op.raw_coefficients(&Point::new(xprime.to_vec(), self.xn(y), t))?;
        let n = self.op.dim() - 1;
        let ann = raw.a[n][n];
        let (a_tt, a_ty, b_t) = if n >= 1 { (raw.a[0][0], s * raw.a[0][n], raw.b[0]) } else { (0.0, 0.0, 0.0) };
        Ok(ChartCoefficients { a_tt, a_ty, a_yy: s * s * ann, b_t, b_y: s * raw.b[n] + s * (s - 1.0) * ann / y, c: raw.c })
    }
}
