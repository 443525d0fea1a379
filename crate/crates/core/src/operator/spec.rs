//! File form of an operator (JSON or TOML through serde).
//!
//! Either `builtin = "model_1d" | "model" | "cev"` or explicit `a`, `b`, `c`
//! (`builtin = "constant"` is the explicit form restricted to rational constants).
//! Each coefficient is a `"p/q"` string or an SPoly term list.

use serde::{Deserialize, Serialize};

use super::{Coefficient, DegenerateOperator, OperatorError};
use crate::model;
use crate::rational::{parse_q, q_to_f64, Q};
use crate::spoly::{Gamma, SPoly, TermJson};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CoefficientSpec {
    Constant(String),
    Terms(Vec<TermJson>),
}

impl CoefficientSpec {
    fn build(&self, dim: usize, gamma: Gamma) -> Result<SPoly, OperatorError> {
        match self {
            CoefficientSpec::Constant(s) => Ok(SPoly::constant(dim, gamma, parse(s)?)),
            CoefficientSpec::Terms(t) => Ok(SPoly::from_json_terms(t, gamma, Some(dim))?),
        }
    }
}

fn parse(s: &str) -> Result<Q, OperatorError> {
    parse_q(s).map_err(|e| OperatorError::Shape(e.to_string()))
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<Gamma>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<Vec<Vec<CoefficientSpec>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<Vec<CoefficientSpec>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<CoefficientSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<String>,
    #[serde(default, rename = "Lambda", skip_serializing_if = "Option::is_none")]
    pub big_lambda: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volatility: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
}

impl OperatorSpec {
    pub fn builtin(name: &str) -> Self {
        Self { builtin: Some(name.into()), ..Self::default() }
    }

    /// `gamma` overrides the file's own γ.
    pub fn build(&self, gamma: Option<Gamma>) -> Result<DegenerateOperator, OperatorError> {
        let gamma = gamma.or(self.gamma).ok_or_else(|| OperatorError::Shape("gamma is not set".into()))?;
        match self.builtin.as_deref() {
            Some("model_1d") => Ok(DegenerateOperator::model(gamma, 1)),
            Some("model") => Ok(DegenerateOperator::model(gamma, self.dim.unwrap_or(1))),
            Some("cev") => {
                let vol = parse(self.volatility.as_deref().unwrap_or("1"))?;
                let rate = parse(self.rate.as_deref().unwrap_or("0"))?;
                model::cev_operator(gamma, &vol, &rate)
            }
            Some("constant") | None => self.build_explicit(gamma, self.builtin.is_some()),
            Some(other) => Err(OperatorError::Shape(format!("unknown builtin operator {other:?}"))),
        }
    }

    fn build_explicit(&self, gamma: Gamma, constants_only: bool) -> Result<DegenerateOperator, OperatorError> {
        let a = self.a.as_ref().ok_or_else(|| OperatorError::Shape("explicit operator needs `a`".into()))?;
        let dim = a.len();
        if self.dim.is_some_and(|d| d != dim) {
            return Err(OperatorError::Shape("`dim` disagrees with the size of `a`".into()));
        }
        let all = a.iter().flatten().chain(self.b.iter().flatten()).chain(self.c.iter());
        if constants_only && all.clone().any(|c| matches!(c, CoefficientSpec::Terms(_))) {
            return Err(OperatorError::Shape("builtin \"constant\" takes rational strings only".into()));
        }
        let co = |c: &CoefficientSpec| c.build(dim, gamma).map(Coefficient::poly);
        let a = a.iter().map(|row| row.iter().map(co).collect::<Result<Vec<_>, _>>()).collect::<Result<Vec<_>, _>>()?;
        let b = match &self.b {
            Some(b) => b.iter().map(co).collect::<Result<Vec<_>, _>>()?,
            None => vec![Coefficient::zero(dim, gamma); dim],
        };
        let c = match &self.c {
            Some(c) => co(c)?,
            None => Coefficient::zero(dim, gamma),
        };
        let bound = |s: &Option<String>, name: &str| -> Result<f64, OperatorError> {
            let s = s.as_deref().ok_or_else(|| OperatorError::Shape(format!("explicit operator needs `{name}`")))?;
            Ok(q_to_f64(&parse(s)?))
        };
        DegenerateOperator::new(gamma, a, b, c, bound(&self.lambda, "lambda")?, bound(&self.big_lambda, "Lambda")?)
    }
}
