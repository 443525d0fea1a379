//! Barrier functions of the boundary estimates, as functions of `x_n` alone, with their
//! second derivatives for the sign check against `∂_t − x_n^γ D_nn`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::FdError;
use crate::spoly::Gamma;

const GAMMA_DELTA_EQ_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BarrierKind {
    /// `φ(x_n)` of the boundary Lipschitz estimate; requires `δ > 0`, `γ + δ ≤ 1`.
    LipPhi { gamma: Gamma, delta: f64 },
    /// Local barrier near a boundary point, scaled by `r ∈ (0, 1]`.
    ExistenceW { gamma: Gamma, r: f64 },
    /// `x_n^{σα}` with `0 < σα < 1`.
    HolderPower { gamma: Gamma, alpha: f64 },
}

/// Which sign `(∂_t − x_n^γ D_nn) b` must have in the interior.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ExpectedSign {
    Negative,
    Positive,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Shape {
    /// `Σ c_i x^{p_i}`
    Powers([(f64, f64); 3]),
    /// `c·x log x + d·x`
    XLog { c: f64, d: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Barrier {
    pub kind: BarrierKind,
    gamma: f64,
    /// The argument is `x_n / scale`.
    scale: f64,
    shape: Shape,
}

impl Barrier {
    pub fn new(kind: BarrierKind) -> Result<Self, FdError> {
        match kind {
            BarrierKind::LipPhi { gamma, delta } => Self::lip_phi(gamma, delta),
            BarrierKind::ExistenceW { gamma, r } => Self::existence_w(gamma, r),
            BarrierKind::HolderPower { gamma, alpha } => Self::holder_power(gamma, alpha),
        }
    }

    pub fn lip_phi(gamma: Gamma, delta: f64) -> Result<Self, FdError> {
        let g = gamma.to_f64();
        let kind = BarrierKind::LipPhi { gamma, delta };
        if !(delta > 0.0) {
            return Err(FdError::Domain(format!("lip_phi needs delta > 0, got {delta}")));
        }
        let s = g + delta;
        let shape = if (s - 1.0).abs() <= GAMMA_DELTA_EQ_TOL {
            Shape::XLog { c: 1.0, d: -1.0 }
        } else if s > 1.0 {
            return Err(FdError::Domain(format!("lip_phi needs gamma + delta <= 1, got {s}")));
        } else if s >= 0.0 {
            Shape::Powers([(1.0, 2.0 - s), (-2.0, 1.0), (0.0, 0.0)])
        } else {
            Shape::Powers([(1.0, 2.0 - s), (1.0, 2.0 - g / 2.0), (-3.0, 1.0)])
        };
        Ok(Self { kind, gamma: g, scale: 1.0, shape })
    }

    pub fn existence_w(gamma: Gamma, r: f64) -> Result<Self, FdError> {
        let g = gamma.to_f64();
        if !(r > 0.0 && r <= 1.0) {
            return Err(FdError::Domain(format!("existence_w needs 0 < r <= 1, got {r}")));
        }
        let shape = if gamma.is_log_case() {
            Shape::XLog { c: -1.0, d: 0.0 }
        } else if g >= 0.0 {
            Shape::Powers([(1.0, 1.0), (-1.0, 2.0 - g), (0.0, 0.0)])
        } else {
            Shape::Powers([(2.0, 1.0), (-1.0, 2.0 - g / 2.0), (-1.0, 2.0 - g)])
        };
        Ok(Self { kind: BarrierKind::ExistenceW { gamma, r }, gamma: g, scale: r, shape })
    }

    pub fn holder_power(gamma: Gamma, alpha: f64) -> Result<Self, FdError> {
        let g = gamma.to_f64();
        let p = gamma.sigma_f64() * alpha;
        if !(alpha > 0.0 && p < 1.0) {
            return Err(FdError::Domain(format!("holder_power needs alpha > 0 and sigma*alpha < 1, got alpha = {alpha}")));
        }
        Ok(Self { kind: BarrierKind::HolderPower { gamma, alpha }, gamma: g, scale: 1.0, shape: Shape::Powers([(1.0, p), (0.0, 0.0), (0.0, 0.0)]) })
    }

    pub fn expected_sign(&self) -> ExpectedSign {
        match self.kind {
            BarrierKind::LipPhi { .. } => ExpectedSign::Negative,
            _ => ExpectedSign::Positive,
        }
    }

    /// Sample range for the sign check.
    pub fn domain(&self) -> (f64, f64) {
        (0.0, self.scale.min(1.0))
    }

    pub fn value(&self, xn: f64) -> f64 {
        let x = xn / self.scale;
        match self.shape {
            Shape::Powers(terms) => terms.iter().filter(|(c, _)| *c != 0.0).map(|(c, p)| c * x.powf(*p)).sum(),
            Shape::XLog { c, d } => {
                // the log is of x_n itself; the scale only enters the linear factor
                if xn == 0.0 {
                    0.0
                } else {
                    c * x * xn.ln() + d * x
                }
            }
        }
    }

    /// Second derivative in `x_n`.
    pub fn second_derivative(&self, xn: f64) -> f64 {
        let x = xn / self.scale;
        let s2 = self.scale * self.scale;
        match self.shape {
            Shape::Powers(terms) => terms.iter().filter(|(c, _)| *c != 0.0).map(|(c, p)| c * p * (p - 1.0) * x.powf(p - 2.0) / s2).sum(),
            Shape::XLog { c, .. } => c / (self.scale * xn),
        }
    }

    /// `(∂_t − x_n^γ D_nn) b` at `x_n > 0`.
    pub fn model_image(&self, xn: f64) -> f64 {
        -xn.powf(self.gamma) * self.second_derivative(xn)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BarrierReport {
    pub kind: BarrierKind,
    pub expected: ExpectedSign,
    pub samples: usize,
    pub min_image: f64,
    pub max_image: f64,
    pub holds: bool,
}

/// Evaluates `(∂_t − x_n^γ D_nn) b` on a uniform grid of the open domain plus `samples`
/// random points and checks the sign.
pub fn check_barrier_sign(b: &Barrier, samples: usize, seed: u64) -> BarrierReport {
    let (lo, hi) = b.domain();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = 64;
    let mut xs: Vec<f64> = (1..grid).map(|i| lo + (hi - lo) * i as f64 / grid as f64).collect();
    xs.push(hi);
    xs.extend((0..samples).map(|_| lo + (hi - lo) * rng.gen_range(1e-6..1.0)));
    let images: Vec<f64> = xs.iter().map(|&x| b.model_image(x)).collect();
    let min_image = images.iter().copied().fold(f64::INFINITY, f64::min);
    let max_image = images.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let holds = match b.expected_sign() {
        ExpectedSign::Negative => max_image < 0.0,
        ExpectedSign::Positive => min_image > 0.0,
    };
    BarrierReport { kind: b.kind, expected: b.expected_sign(), samples: xs.len(), min_image, max_image, holds }
}
