//! The matrices `T^m` of the γ = 1 log hierarchy and an exact Thomas solver.
//!
//! Row `l` (0-based, `0 ≤ l ≤ m`) of `T^m` reads
//! `m(m+2)/4 · h_{l−1} + (l+1)(m+1) · h_l + (l+1)(l+2) · h_{l+1}`: the coefficient of
//! `(log x_n)^l x_n^{m/2}` in `x_n D_nn` applied to `Σ_i h_i (log x_n)^{i+1} x_n^{(m+2)/2}`.

use num::Zero;

use super::coefficient::QVector;
use super::ExpansionError;
use crate::rational::{q_int, q_ratio, Q};

#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalMatrix {
    /// `sub[i] = T[i+1][i]`
    pub sub: Vec<Q>,
    pub diag: Vec<Q>,
    /// `sup[i] = T[i][i+1]`
    pub sup: Vec<Q>,
}

/// `T^m` together with a right-hand side.
#[derive(Clone, Debug, PartialEq)]
pub struct TridiagonalSystem<V> {
    pub m: usize,
    pub matrix: TridiagonalMatrix,
    pub rhs: Vec<V>,
}

impl<V: QVector> TridiagonalSystem<V> {
    pub fn new(m: usize, rhs: Vec<V>) -> Result<Self, ExpansionError> {
        let matrix = tridiagonal_t(m)?;
        if rhs.len() != m + 1 {
            return Err(ExpansionError::Shape(format!("T^{m} needs a right-hand side of length {}", m + 1)));
        }
        Ok(Self { m, matrix, rhs })
    }

    pub fn solve(&self) -> Result<Vec<V>, ExpansionError> {
        self.matrix.solve(&self.rhs)
    }
}

impl TridiagonalMatrix {
    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn to_dense(&self) -> Vec<Vec<Q>> {
        let n = self.size();
        let mut d = vec![vec![Q::zero(); n]; n];
        for i in 0..n {
            d[i][i] = self.diag[i].clone();
            if i + 1 < n {
                d[i][i + 1] = self.sup[i].clone();
                d[i + 1][i] = self.sub[i].clone();
            }
        }
        d
    }

    /// Continuant recurrence `f_{k+1} = d_k f_k − s_{k−1} u_{k−1} f_{k−1}`.
    pub fn determinant(&self) -> Q {
        let mut prev = q_int(1);
        let mut cur = self.diag[0].clone();
        for k in 1..self.size() {
            let next = &self.diag[k] * &cur - &self.sub[k - 1] * &self.sup[k - 1] * &prev;
            prev = cur;
            cur = next;
        }
        cur
    }

    pub fn mul_vec<V: QVector>(&self, x: &[V]) -> Vec<V> {
        let n = self.size();
        (0..n)
            .map(|i| {
                let mut acc = x[i].times(&self.diag[i]);
                if i > 0 {
                    acc = acc.plus(&x[i - 1].times(&self.sub[i - 1]));
                }
                if i + 1 < n {
                    acc = acc.plus(&x[i + 1].times(&self.sup[i]));
                }
                acc
            })
            .collect()
    }

    /// Thomas elimination; a vanishing pivot is reported as singular.
    pub fn solve<V: QVector>(&self, rhs: &[V]) -> Result<Vec<V>, ExpansionError> {
        let n = self.size();
        if rhs.len() != n {
            return Err(ExpansionError::Shape(format!("right-hand side has length {}, expected {n}", rhs.len())));
        }
        let mut c = Vec::with_capacity(n);
        let mut d: Vec<V> = Vec::with_capacity(n);
        for i in 0..n {
            let mut pivot = self.diag[i].clone();
            let mut r = rhs[i].clone();
            if i > 0 {
                pivot -= &self.sub[i - 1] * &c[i - 1];
                r = r.plus(&d[i - 1].times(&-self.sub[i - 1].clone()));
            }
            if pivot.is_zero() {
                return Err(ExpansionError::Singular { size: n });
            }
            let inv = pivot.recip();
            c.push(if i + 1 < n { &self.sup[i] * &inv } else { Q::zero() });
            d.push(r.times(&inv));
        }
        let mut x = d;
        for i in (0..n.saturating_sub(1)).rev() {
            let next = x[i + 1].times(&-c[i].clone());
            x[i] = x[i].plus(&next);
        }
        Ok(x)
    }
}

pub fn tridiagonal_t(m: usize) -> Result<TridiagonalMatrix, ExpansionError> {
    if m == 0 {
        return Err(ExpansionError::Shape("T^m is defined for m >= 1".into()));
    }
    let mi = m as i64;
    let e = q_ratio(mi * (mi + 2), 4);
    let diag = (0..=mi).map(|l| q_int((l + 1) * (mi + 1))).collect();
    let sup = (0..mi).map(|l| q_int((l + 1) * (l + 2))).collect();
    Ok(TridiagonalMatrix { sub: vec![e; m], diag, sup })
}

pub fn solve_t<V: QVector>(m: usize, rhs: &[V]) -> Result<Vec<V>, ExpansionError> {
    TridiagonalSystem::new(m, rhs.to_vec())?.solve()
}
