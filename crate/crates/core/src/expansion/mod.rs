//! Constructive expansion engines: the constant-coefficient hierarchy, the particular
//! solution for s-polynomial coefficients (with the γ = 1 tridiagonal systems), the interior
//! expansion, and truncation to an s-polynomial.

mod coefficient;
mod engine;
mod hierarchy;
mod tridiag;

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use coefficient::{CoefficientFunction, CoefficientTermJson, QVector, TKey};
pub use engine::{EngineOptions, EngineOutput, EngineStats, Schedule, SolveRoute};
pub use hierarchy::homogeneous_hierarchy;
pub use tridiag::{solve_t, tridiagonal_t, TridiagonalMatrix, TridiagonalSystem};

use crate::operator::{DegenerateOperator, OperatorError};
use crate::rational::{fmt_exp, serde_exp, Exp};
use crate::spoly::{is_admissible_exponent, Gamma, SPoly, SPolyError};

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("unsupported gamma: {0}")]
    UnsupportedGamma(String),
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("cannot divide by P^nn(x',0,t): {0}")]
    DivisionImpossible(String),
    #[error("invalid kappa {kappa}: {reason}")]
    Kappa { kappa: String, reason: String },
    #[error("forcing term x_n^{e} (log x_n)^{logpow} is not of the admissible form")]
    Inadmissible { e: String, logpow: u32 },
    #[error("invalid orders: {0}")]
    Orders(String),
    #[error("shape: {0}")]
    Shape(String),
    #[error("singular tridiagonal system of size {size}")]
    Singular { size: usize },
    #[error("cancellation did not terminate after {0} level solves")]
    NoTermination(usize),
    #[error(transparent)]
    Operator(#[from] OperatorError),
    #[error(transparent)]
    SPoly(#[from] SPolyError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExpansionEntry {
    pub coef: CoefficientFunction,
    pub e: Exp,
    pub logpow: u32,
}

/// `Σ coef(x', t) · x_n^e (log x_n)^logpow`, entries sorted by `(e, logpow)` and merged.
#[derive(Clone, Debug, PartialEq)]
pub struct Expansion {
    gamma: Gamma,
    nvars: usize,
    entries: Vec<ExpansionEntry>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntryJson {
    #[serde(with = "serde_exp")]
    e: Exp,
    #[serde(default)]
    log: u32,
    coeff: Vec<CoefficientTermJson>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExpansionJson {
    gamma: Gamma,
    nvars: usize,
    entries: Vec<EntryJson>,
}

impl Expansion {
    pub fn zero(gamma: Gamma, nvars: usize) -> Self {
        Self { gamma, nvars, entries: Vec::new() }
    }

    pub fn from_entries(gamma: Gamma, nvars: usize, entries: impl IntoIterator<Item = ExpansionEntry>) -> Result<Self, ExpansionError> {
        let mut out = Self::zero(gamma, nvars);
        for entry in entries {
            if entry.coef.nvars() != nvars {
                return Err(ExpansionError::Shape(format!("coefficient has {} variables, expected {nvars}", entry.coef.nvars())));
            }
            out.push(entry);
        }
        Ok(out)
    }

    /// `c · x_n^e (log x_n)^logpow`.
    pub fn single(gamma: Gamma, coef: CoefficientFunction, e: Exp, logpow: u32) -> Self {
        let nvars = coef.nvars();
        let mut out = Self::zero(gamma, nvars);
        out.push(ExpansionEntry { coef, e, logpow });
        out
    }

    fn push(&mut self, entry: ExpansionEntry) {
        let pos = self.entries.binary_search_by(|x| (x.e, x.logpow).cmp(&(entry.e, entry.logpow)));
        match pos {
            Ok(i) => {
                let merged = self.entries[i].coef.add(&entry.coef);
                if merged.is_zero() {
                    self.entries.remove(i);
                } else {
                    self.entries[i].coef = merged;
                }
            }
            Err(i) if !entry.coef.is_zero() => self.entries.insert(i, entry),
            Err(_) => {}
        }
    }

    /// Groups the terms of an SPoly centered at the origin by `(e, logpow)`.
    pub fn from_spoly(p: &SPoly) -> Result<Self, ExpansionError> {
        if !p.center().is_origin() {
            return Err(SPolyError::ShiftedCenter.into());
        }
        let nvars = p.dim() - 1;
        let mut out = Self::zero(p.gamma(), nvars);
        for (k, c) in p.terms() {
            out.push(ExpansionEntry { coef: CoefficientFunction::monomial(nvars, k.beta.clone(), k.l, c.clone()), e: k.e, logpow: k.logpow });
        }
        Ok(out)
    }

    pub fn to_spoly(&self) -> SPoly {
        let mut out = SPoly::zero(self.nvars + 1, self.gamma);
        for entry in &self.entries {
            out = out.add(&entry.coef.to_spoly(self.gamma, entry.e, entry.logpow)).expect("same shape");
        }
        out
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn entries(&self) -> &[ExpansionEntry] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn add(&self, other: &Self) -> Result<Self, ExpansionError> {
        if self.gamma != other.gamma || self.nvars != other.nvars {
            return Err(SPolyError::Incompatible.into());
        }
        let mut out = self.clone();
        for entry in &other.entries {
            out.push(entry.clone());
        }
        Ok(out)
    }

    pub fn to_json_string(&self) -> String {
        let doc = ExpansionJson {
            gamma: self.gamma,
            nvars: self.nvars,
            entries: self.entries.iter().map(|x| EntryJson { e: x.e, log: x.logpow, coeff: x.coef.to_json_terms() }).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self, ExpansionError> {
        let doc: ExpansionJson = serde_json::from_str(s).map_err(|e| SPolyError::Json(e.to_string()))?;
        let mut entries = Vec::with_capacity(doc.entries.len());
        for x in doc.entries {
            let coef = CoefficientFunction::from_json_terms(doc.nvars, &x.coeff)
                .ok_or_else(|| ExpansionError::Shape(format!("multi-index length must be {}", doc.nvars)))?;
            entries.push(ExpansionEntry { coef, e: x.e, logpow: x.log });
        }
        Self::from_entries(doc.gamma, doc.nvars, entries)
    }

    /// One line per entry, for reports.
    pub fn summary(&self) -> Vec<String> {
        self.entries
            .iter()
            .map(|x| {
                let coef = x.coef.to_spoly(self.gamma, Exp::zero(), 0).pretty();
                let log = if x.logpow == 0 { String::new() } else { format!(" (log x_n)^{}", x.logpow) };
                format!("[{coef}] x_n^({}){log}", fmt_exp(&x.e))
            })
            .collect()
    }
}

/// Flattens `E` and keeps the s-polynomial terms of s-degree `< kappa`.
pub fn to_s_polynomial(e: &Expansion, kappa: Exp) -> SPoly {
    e.to_spoly().truncate(kappa)
}

/// Whether `kappa` lies in the degree set `{i + j/σ : i, j ≥ 0}`.
pub fn in_degree_set(gamma: Gamma, kappa: Exp) -> bool {
    let inv = gamma.sigma().recip();
    let mut j = Exp::zero();
    while j * inv <= kappa {
        if (kappa - j * inv).is_integer() {
            return true;
        }
        j += Exp::from_integer(1);
    }
    false
}

/// Rejects `kappa` values at which degrees collide: `κ − 2` must be positive and
/// non-integer, `κ` outside the degree set, and `κ − 1 − 1/σ ∉ ℕ₀`.
pub fn validate_kappa(gamma: Gamma, kappa: Exp) -> Result<(), ExpansionError> {
    let bad = |reason: &str| Err(ExpansionError::Kappa { kappa: fmt_exp(&kappa), reason: reason.into() });
    let two = Exp::from_integer(2);
    if kappa <= two {
        return bad("kappa - 2 must be positive");
    }
    if kappa.is_integer() {
        return bad("kappa - 2 must not be an integer");
    }
    if in_degree_set(gamma, kappa) {
        return bad("kappa lies in the degree set");
    }
    let shifted = kappa - Exp::from_integer(1) - gamma.sigma().recip();
    if shifted.is_integer() && !shifted.is_negative() {
        return bad("kappa - 1 - 1/sigma is a nonnegative integer");
    }
    Ok(())
}

/// `h` with `h_t − L_p h − f` free of every term below `x_n^{σ(κ−2)}`.
pub fn particular_solution(op: &DegenerateOperator, f: &Expansion, kappa: Exp) -> Result<Expansion, ExpansionError> {
    Ok(particular_solution_with(op, f, kappa, &EngineOptions::default())?.expansion)
}

pub fn particular_solution_with(op: &DegenerateOperator, f: &Expansion, kappa: Exp, options: &EngineOptions) -> Result<EngineOutput, ExpansionError> {
    if f.gamma() != op.gamma() || f.nvars() + 1 != op.dim() {
        return Err(SPolyError::Incompatible.into());
    }
    validate_kappa(op.gamma(), kappa)?;
    for x in f.entries() {
        if !is_admissible_exponent(op.gamma(), x.e, x.logpow) {
            return Err(ExpansionError::Inadmissible { e: fmt_exp(&x.e), logpow: x.logpow });
        }
    }
    let threshold = op.gamma().sigma() * (kappa - Exp::from_integer(2));
    let h0 = SPoly::zero(op.dim(), op.gamma());
    engine::run(op, h0, &f.to_spoly(), threshold, options)
}

/// `v = U0·x_n + Σ ṽ x_n^{i+σj}` with residual free of every term below `x_n^{M+σ(N−2)}`.
pub fn interior_expansion(op: &DegenerateOperator, u0: &CoefficientFunction, m: u32, n: u32) -> Result<Expansion, ExpansionError> {
    Ok(interior_expansion_with(op, u0, m, n, &EngineOptions::default())?.expansion)
}

pub fn interior_expansion_with(op: &DegenerateOperator, u0: &CoefficientFunction, m: u32, n: u32, options: &EngineOptions) -> Result<EngineOutput, ExpansionError> {
    if op.gamma().is_log_case() {
        return Err(ExpansionError::UnsupportedGamma("the interior expansion needs gamma < 1".into()));
    }
    if m == 0 {
        return Err(ExpansionError::Orders("M must be at least 1".into()));
    }
    if u0.nvars() + 1 != op.dim() {
        return Err(SPolyError::Incompatible.into());
    }
    let threshold = interior_threshold(op.gamma(), m, n);
    let h0 = u0.to_spoly(op.gamma(), Exp::from_integer(1), 0);
    engine::run(op, h0, &SPoly::zero(op.dim(), op.gamma()), threshold, options)
}

/// `M + σ(N − 2)`.
pub fn interior_threshold(gamma: Gamma, m: u32, n: u32) -> Exp {
    Exp::from_integer(i64::from(m)) + gamma.sigma() * (Exp::from_integer(i64::from(n)) - Exp::from_integer(2))
}

/// Smallest `x_n`-exponent in `u_t − Lu − f`; `None` if the residual vanishes.
pub fn residual_min_exponent(op: &DegenerateOperator, u: &Expansion, f: &Expansion) -> Result<Option<Exp>, ExpansionError> {
    Ok(op.residual(&u.to_spoly(), &f.to_spoly())?.min_exponent())
}
