//! JSON form: a list of `{beta, e, log, t, coeff}` records with rationals as `"p/q"`.

use serde::{Deserialize, Serialize};

use super::{Gamma, MonomialKey, SPoly, SPolyError};
use crate::rational::{serde_exp, serde_q, Exp, Q};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub beta: Vec<u32>,
    #[serde(with = "serde_exp")]
    pub e: Exp,
    #[serde(default)]
    pub log: u32,
    #[serde(default)]
    pub t: u32,
    #[serde(with = "serde_q")]
    pub coeff: Q,
}

impl SPoly<Q> {
    pub fn to_json_terms(&self) -> Vec<TermJson> {
        self.terms()
            .iter()
            .map(|(k, c)| TermJson { beta: k.beta.clone(), e: k.e, log: k.logpow, t: k.l, coeff: c.clone() })
            .collect()
    }

    /// `dim` is needed only when `terms` is empty; otherwise it is read off `beta`.
    pub fn from_json_terms(terms: &[TermJson], gamma: Gamma, dim: Option<usize>) -> Result<Self, SPolyError> {
        let dim = match (dim, terms.first()) {
            (Some(d), _) => d,
            (None, Some(t)) => t.beta.len() + 1,
            (None, None) => 1,
        };
        Self::from_terms(
            dim,
            gamma,
            terms.iter().map(|t| (MonomialKey::new(t.beta.clone(), t.e, t.log, t.t), t.coeff.clone())),
        )
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string(&self.to_json_terms()).expect("SPoly terms serialize")
    }

    pub fn from_json_str(s: &str, gamma: Gamma, dim: Option<usize>) -> Result<Self, SPolyError> {
        let terms: Vec<TermJson> = serde_json::from_str(s).map_err(|e| SPolyError::Json(e.to_string()))?;
        Self::from_json_terms(&terms, gamma, dim)
    }
}
