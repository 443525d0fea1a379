//! Intrinsic geometry of the half space: the gauges `s` and `d`, intrinsic cubes and
//! the anisotropic dilation `rX = (r x', r^{1/σ} x_n, r² t)`.

use num::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::rational::{exp_to_f64, Q};
use crate::spoly::Gamma;

/// Space-time point `(x', x_n, t)` with `x_n ≥ 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub xprime: Vec<f64>,
    pub xn: f64,
    pub t: f64,
}

impl Point {
    /// Panics if `xn` is negative or NaN.
    pub fn new(xprime: Vec<f64>, xn: f64, t: f64) -> Self {
        Self::try_new(xprime, xn, t).expect("x_n must be a nonnegative number")
    }

    pub fn try_new(xprime: Vec<f64>, xn: f64, t: f64) -> Option<Self> {
        (xn >= 0.0).then_some(Self { xprime, xn, t })
    }

    pub fn origin(dim: usize) -> Self {
        Self { xprime: vec![0.0; dim.saturating_sub(1)], xn: 0.0, t: 0.0 }
    }

    /// Spatial dimension `n`.
    pub fn dim(&self) -> usize {
        self.xprime.len() + 1
    }

    pub fn is_origin(&self) -> bool {
        self.xn == 0.0 && self.t == 0.0 && self.xprime.iter().all(|&v| v == 0.0)
    }
}

pub fn intrinsic_distance(x: &Point, y: &Point, gamma: Gamma) -> f64 {
    let sigma = exp_to_f64(gamma.sigma());
    let tangential = x
        .xprime
        .iter()
        .zip(&y.xprime)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    let normal = (x.xn.powf(sigma) - y.xn.powf(sigma)).abs();
    tangential.max(normal).max((x.t - y.t).abs().sqrt())
}

pub fn parabolic_distance(x: &Point, y: &Point) -> f64 {
    let tangential = x
        .xprime
        .iter()
        .zip(&y.xprime)
        .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
    tangential.max((x.xn - y.xn).abs()).max((x.t - y.t).abs().sqrt())
}

/// Dilation about the origin.
pub fn intrinsic_scale(x: &Point, r: f64, gamma: Gamma) -> Point {
    let inv_sigma = 1.0 / exp_to_f64(gamma.sigma());
    Point {
        xprime: x.xprime.iter().map(|v| r * v).collect(),
        xn: r.powf(inv_sigma) * x.xn,
        t: r * r * x.t,
    }
}

/// `Q_r^+(Y)`: `|x_i − y_i| < r`, `|x_n^σ − y_n^σ| < r`, `t ∈ (τ − r², τ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntrinsicCube {
    pub center: Point,
    pub r: f64,
    pub gamma: Gamma,
}

impl IntrinsicCube {
    pub fn new(center: Point, r: f64, gamma: Gamma) -> Self {
        Self { center, r, gamma }
    }

    pub fn contains(&self, x: &Point) -> bool {
        in_intrinsic_cube(x, self)
    }
}

pub fn in_intrinsic_cube(x: &Point, cube: &IntrinsicCube) -> bool {
    let c = &cube.center;
    let r = cube.r;
    let sigma = exp_to_f64(cube.gamma.sigma());
    x.xprime.iter().zip(&c.xprime).all(|(a, b)| (a - b).abs() < r)
        && (x.xn.powf(sigma) - c.xn.powf(sigma)).abs() < r
        && x.t > c.t - r * r
        && x.t <= c.t
}

/// A point written in intrinsic coordinates `(x', η = x_n^σ, t)` with rational entries.
///
/// In these coordinates the dilation is linear, `(r x', r η, r² t)`, and `s²` is a
/// rational function of the inputs, so homogeneity can be checked without rounding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ChartPoint {
    pub xprime: Vec<Q>,
    pub eta: Q,
    pub t: Q,
}

impl ChartPoint {
    pub fn scale(&self, r: &Q) -> Self {
        Self {
            xprime: self.xprime.iter().map(|v| r * v).collect(),
            eta: r * &self.eta,
            t: r * r * &self.t,
        }
    }

    /// `s[X, Y]²`, exact.
    pub fn distance_sq(&self, other: &Self) -> Q {
        let mut m = Q::zero();
        for (a, b) in self.xprime.iter().zip(&other.xprime) {
            let d = a - b;
            m = m.max(&d * &d);
        }
        let d = &self.eta - &other.eta;
        m = m.max(&d * &d);
        m.max((&self.t - &other.t).abs())
    }

    pub fn to_point(&self, gamma: Gamma) -> Point {
        use crate::rational::q_to_f64;
        let inv_sigma = 1.0 / exp_to_f64(gamma.sigma());
        Point {
            xprime: self.xprime.iter().map(q_to_f64).collect(),
            xn: q_to_f64(&self.eta).powf(inv_sigma),
            t: q_to_f64(&self.t),
        }
    }
}
