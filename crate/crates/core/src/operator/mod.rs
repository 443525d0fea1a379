//! The operator
//! `L = a^{i'j'}D_{i'j'} + 2x_n^{γ/2}a^{i'n}D_{i'n} + x_n^γ a^{nn}D_nn + b^{i'}D_{i'} + x_n^{γ/2}b^n D_n + c`
//! with coefficients given as SPolys (symbolic mode) or opaque fields (numeric mode).
//!
//! A positive reaction term is rejected rather than rewritten: with `v = e^{−(Λ+1)t}u`
//! the equation for `v` has reaction `c − Λ − 1 < 0`, and callers who need that should
//! apply it to their data explicitly.

mod spec;
mod table;

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::metric::Point;
use crate::rational::{q_int, Q};
use crate::spoly::{Direction, Gamma, SPoly, SPolyError};

pub use spec::{CoefficientSpec, OperatorSpec};
pub use table::WeightedDerivativeTable;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OperatorError {
    #[error("symbolic application needs SPoly coefficients; this operator has field coefficients")]
    UnsupportedMode,
    #[error("malformed operator: {0}")]
    Shape(String),
    #[error("ellipticity fails at {point:?}: quadratic form {value} outside [{lambda}, {big_lambda}]")]
    Ellipticity { point: Point, value: f64, lambda: f64, big_lambda: f64 },
    #[error("reaction coefficient c = {value} > 0 at {point:?}")]
    PositiveReaction { point: Point, value: f64 },
    #[error("sum |b| + |c| = {value} exceeds Lambda = {big_lambda} at {point:?}")]
    LowerOrderBound { point: Point, value: f64, big_lambda: f64 },
    #[error("coefficient field failed at {point:?}: {message}")]
    Field { point: Point, message: String },
    #[error(transparent)]
    SPoly(#[from] SPolyError),
}

/// Opaque coefficient field; must tolerate concurrent calls.
pub type FieldFn = Arc<dyn Fn(&Point) -> Result<f64, String> + Send + Sync>;

#[derive(Clone)]
pub enum Coefficient {
    Poly { exact: SPoly, float: SPoly<f64> },
    Field { f: FieldFn, time_independent: bool },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Poly { exact, .. } => write!(f, "Poly({})", exact.pretty()),
            Coefficient::Field { time_independent, .. } => write!(f, "Field(time_independent: {time_independent})"),
        }
    }
}

impl Coefficient {
    pub fn poly(p: SPoly) -> Self {
        let float = p.to_float();
        Coefficient::Poly { exact: p, float }
    }

    pub fn constant(dim: usize, gamma: Gamma, c: Q) -> Self {
        Self::poly(SPoly::constant(dim, gamma, c))
    }

    pub fn zero(dim: usize, gamma: Gamma) -> Self {
        Self::poly(SPoly::zero(dim, gamma))
    }

    pub fn field(f: impl Fn(&Point) -> Result<f64, String> + Send + Sync + 'static, time_independent: bool) -> Self {
        Coefficient::Field { f: Arc::new(f), time_independent }
    }

    pub fn as_poly(&self) -> Option<&SPoly> {
        match self {
            Coefficient::Poly { exact, .. } => Some(exact),
            Coefficient::Field { .. } => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coefficient::Poly { exact, .. } if exact.is_empty())
    }

    pub fn is_time_independent(&self) -> bool {
        match self {
            Coefficient::Poly { exact, .. } => exact.is_time_independent(),
            Coefficient::Field { time_independent, .. } => *time_independent,
        }
    }

    pub fn eval(&self, x: &Point) -> Result<f64, OperatorError> {
        match self {
            Coefficient::Poly { float, .. } => Ok(float.evaluate(x)?),
            Coefficient::Field { f, .. } => f(x).map_err(|message| OperatorError::Field { point: x.clone(), message }),
        }
    }
}

/// Unweighted coefficient values at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct RawCoefficients {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: f64,
}

/// Coefficient values with the `x_n^{γ/2}`, `x_n^γ` weights multiplied in, arranged so that
/// `Lu = Σ_{ij} second[i][j] u_ij + Σ_i first[i] u_i + zeroth·u`.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientSet {
    pub second: Vec<Vec<f64>>,
    pub first: Vec<f64>,
    pub zeroth: f64,
    /// Set when a weight blows up (`x_n = 0`, γ < 0); the weighted entries are then NaN.
    pub singular: bool,
}

#[derive(Clone, Debug)]
pub struct DegenerateOperator {
    gamma: Gamma,
    dim: usize,
    a: Vec<Vec<Coefficient>>,
    b: Vec<Coefficient>,
    c: Coefficient,
    lambda: f64,
    big_lambda: f64,
}

impl DegenerateOperator {
    /// `a` must be a full symmetric `dim × dim` array; for field entries only the upper
    /// triangle is read.
    pub fn new(gamma: Gamma, a: Vec<Vec<Coefficient>>, b: Vec<Coefficient>, c: Coefficient, lambda: f64, big_lambda: f64) -> Result<Self, OperatorError> {
        let dim = b.len();
        if dim == 0 || a.len() != dim || a.iter().any(|row| row.len() != dim) {
            return Err(OperatorError::Shape(format!("a must be {dim}x{dim} to match b")));
        }
        if !(lambda > 0.0 && big_lambda >= lambda) {
            return Err(OperatorError::Shape(format!("need 0 < lambda <= Lambda, got {lambda}, {big_lambda}")));
        }
        let check = |co: &Coefficient| -> Result<(), OperatorError> {
            if let Some(p) = co.as_poly() {
                if p.dim() != dim || p.gamma() != gamma || !p.center().is_origin() {
                    return Err(OperatorError::Shape("SPoly coefficient differs in dimension, gamma or center".into()));
                }
            }
            Ok(())
        };
        for co in a.iter().flatten().chain(&b).chain(std::iter::once(&c)) {
            check(co)?;
        }
        let mut a = a;
        for i in 0..dim {
            for j in 0..i {
                match (a[i][j].as_poly(), a[j][i].as_poly()) {
                    (Some(p), Some(q)) if p != q => return Err(OperatorError::Shape(format!("a is not symmetric at ({i}, {j})"))),
                    _ => a[i][j] = a[j][i].clone(),
                }
            }
        }
        Ok(Self { gamma, dim, a, b, c, lambda, big_lambda })
    }

    /// Constant coefficients.
    pub fn constant(gamma: Gamma, a: &[Vec<Q>], b: &[Q], c: &Q, lambda: f64, big_lambda: f64) -> Result<Self, OperatorError> {
        let dim = b.len();
        let k = |q: &Q| Coefficient::constant(dim, gamma, q.clone());
        Self::new(gamma, a.iter().map(|row| row.iter().map(k).collect()).collect(), b.iter().map(k).collect(), k(c), lambda, big_lambda)
    }

    /// `x_n^γ D_nn` plus the tangential Laplacian.
    pub fn model(gamma: Gamma, dim: usize) -> Self {
        let a: Vec<Vec<Q>> = (0..dim).map(|i| (0..dim).map(|j| q_int(i64::from(i == j))).collect()).collect();
        Self::constant(gamma, &a, &vec![q_int(0); dim], &q_int(0), 1.0, 1.0).expect("model operator is well formed")
    }

    pub fn gamma(&self) -> Gamma {
        self.gamma
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn big_lambda(&self) -> f64 {
        self.big_lambda
    }

    pub fn a(&self, i: usize, j: usize) -> &Coefficient {
        &self.a[i][j]
    }

    pub fn b(&self, i: usize) -> &Coefficient {
        &self.b[i]
    }

    pub fn c(&self) -> &Coefficient {
        &self.c
    }

    fn coefficients(&self) -> impl Iterator<Item = &Coefficient> {
        self.a.iter().flatten().chain(&self.b).chain(std::iter::once(&self.c))
    }

    pub fn is_symbolic(&self) -> bool {
        self.coefficients().all(|c| c.as_poly().is_some())
    }

    pub fn is_time_independent(&self) -> bool {
        self.coefficients().all(Coefficient::is_time_independent)
    }

    /// Exact constant values `(a, b, c)` when every coefficient is a constant SPoly.
    pub fn constant_values(&self) -> Option<(Vec<Vec<Q>>, Vec<Q>, Q)> {
        let k = |c: &Coefficient| c.as_poly()?.constant_value();
        let a = self.a.iter().map(|row| row.iter().map(k).collect::<Option<Vec<_>>>()).collect::<Option<Vec<_>>>()?;
        let b = self.b.iter().map(k).collect::<Option<Vec<_>>>()?;
        Some((a, b, k(&self.c)?))
    }

    fn poly(&self, c: &Coefficient) -> Result<SPoly, OperatorError> {
        c.as_poly().cloned().ok_or(OperatorError::UnsupportedMode)
    }

    /// `Lu`, exactly.
    pub fn apply(&self, u: &SPoly) -> Result<SPoly, OperatorError> {
        if u.dim() != self.dim || u.gamma() != self.gamma {
            return Err(SPolyError::Incompatible.into());
        }
        if !u.center().is_origin() {
            return Err(SPolyError::ShiftedCenter.into());
        }
        if !self.is_symbolic() {
            return Err(OperatorError::UnsupportedMode);
        }
        let n = self.dim - 1;
        let table = WeightedDerivativeTable::new(self.gamma);
        let mut out = SPoly::zero(self.dim, self.gamma);
        let mut acc = |coef: &Coefficient, image: SPoly, factor: i64| -> Result<(), OperatorError> {
            if coef.is_zero() || image.is_empty() {
                return Ok(());
            }
            let term = self.poly(coef)?.mul(&image)?;
            out = out.add(&if factor == 1 { term } else { term.scale(&q_int(factor)) })?;
            Ok(())
        };
        for i in 0..n {
            if self.a[i].iter().take(n).all(Coefficient::is_zero) && self.a[i][n].is_zero() && self.b[i].is_zero() {
                continue;
            }
            let di = u.differentiate(Direction::Tangential(i))?;
            for j in 0..n {
                acc(&self.a[i][j], di.differentiate(Direction::Tangential(j))?, 1)?;
            }
            acc(&self.a[i][n], table.apply_mixed(u, i), 2)?;
            acc(&self.b[i], di, 1)?;
        }
        acc(&self.a[n][n], table.apply_normal_second(u), 1)?;
        acc(&self.b[n], table.apply_normal_first(u), 1)?;
        acc(&self.c, u.clone(), 1)?;
        Ok(out)
    }

    /// `u_t − Lu − f`.
    pub fn residual(&self, u: &SPoly, f: &SPoly) -> Result<SPoly, OperatorError> {
        Ok(u.differentiate(Direction::Time)?.sub(&self.apply(u)?)?.sub(f)?)
    }

    pub fn raw_coefficients(&self, x: &Point) -> Result<RawCoefficients, OperatorError> {
        let n = self.dim;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let v = self.a[i][j].eval(x)?;
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let b = self.b.iter().map(|c| c.eval(x)).collect::<Result<Vec<_>, _>>()?;
        Ok(RawCoefficients { a, b, c: self.c.eval(x)? })
    }

    pub fn eval_coefficients(&self, x: &Point) -> Result<CoefficientSet, OperatorError> {
        let RawCoefficients { mut a, mut b, c } = self.raw_coefficients(x)?;
        let n = self.dim - 1;
        let g = self.gamma.to_f64();
        let singular = x.xn == 0.0 && g < 0.0;
        let (w_half, w_full) = if singular { (f64::NAN, f64::NAN) } else { (x.xn.powf(g / 2.0), x.xn.powf(g)) };
        for i in 0..n {
            a[i][n] *= w_half;
            a[n][i] *= w_half;
        }
        a[n][n] *= w_full;
        b[n] *= w_half;
        Ok(CoefficientSet { second: a, first: b, zeroth: c, singular })
    }

    /// Spot-checks ellipticity, `c ≤ 0` and `Σ|b| + |c| ≤ Λ` on a grid of the closed unit
    /// half cube (`t ∈ [−1, 1]`, `x_n > 0`) plus `samples` random points and directions.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<(), OperatorError> {
        const TOL: f64 = 1e-12;
        let n = self.dim;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut points = Vec::new();
        let ticks = [-1.0, 0.0, 1.0];
        let normal = [1e-3, 0.5, 1.0];
        let grid_prime: Vec<Vec<f64>> = (0..3usize.pow((n - 1) as u32))
            .map(|mut idx| {
                (0..n - 1)
                    .map(|_| {
                        let v = ticks[idx % 3];
                        idx /= 3;
                        v
                    })
                    .collect()
            })
            .collect();
        for xp in &grid_prime {
            for &xn in &normal {
                for &t in &ticks {
                    points.push(Point::new(xp.clone(), xn, t));
                }
            }
        }
        for _ in 0..samples {
            let xp = (0..n - 1).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            points.push(Point::new(xp, rng.gen_range(1e-6..=1.0), rng.gen_range(-1.0..=1.0)));
        }
        for x in &points {
            let raw = self.raw_coefficients(x)?;
            let mut dirs: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect()).collect();
            for _ in 0..4 {
                dirs.push((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect());
            }
            for xi in dirs {
                let norm2: f64 = xi.iter().map(|v| v * v).sum();
                if norm2 < 1e-12 {
                    continue;
                }
                let mut q = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        q += raw.a[i][j] * xi[i] * xi[j];
                    }
                }
                let value = q / norm2;
                if value < self.lambda - TOL || value > self.big_lambda + TOL {
                    return Err(OperatorError::Ellipticity { point: x.clone(), value, lambda: self.lambda, big_lambda: self.big_lambda });
                }
            }
            if raw.c > TOL {
                return Err(OperatorError::PositiveReaction { point: x.clone(), value: raw.c });
            }
            let lower = raw.b.iter().map(|v| v.abs()).sum::<f64>() + raw.c.abs();
            if lower > self.big_lambda + TOL {
                return Err(OperatorError::LowerOrderBound { point: x.clone(), value: lower, big_lambda: self.big_lambda });
            }
        }
        Ok(())
    }
}

/// Exact `(λ, Λ)` test for a constant symmetric 2×2 matrix: `A − λI` and `ΛI − A` are
/// positive semidefinite.
pub fn constant_2x2_within_bounds(a: &[Vec<Q>], lambda: &Q, big_lambda: &Q) -> bool {
    let psd = |p: &Q, q: &Q, r: &Q| *p >= q_int(0) && *r >= q_int(0) && p * r - q * q >= q_int(0);
    psd(&(&a[0][0] - lambda), &a[0][1], &(&a[1][1] - lambda)) && psd(&(big_lambda - &a[0][0]), &-a[0][1].clone(), &(big_lambda - &a[1][1]))
}

#[cfg(test)]
mod tests;
