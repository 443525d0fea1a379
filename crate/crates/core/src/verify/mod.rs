//! Numerical regularity checks: sup of `|u − p|` over shrinking cubes, power-law fits of
//! those sups, growth away from the boundary, and an empirical Hölder seminorm in the
//! intrinsic gauge.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fdsolver::DiscreteSolution;
use crate::metric::{intrinsic_distance, IntrinsicCube, Point};
use crate::spoly::{Gamma, SPoly};


pub const DEFAULT_SAMPLES: usize = 4096;

/// `{2^{-2}, …, 2^{-7}}`.
pub fn default_radii() -> Vec<f64> {
    (2..=7).map(|j| 0.5f64.powi(j)).collect()
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("cannot evaluate at {point:?}: {message}")]
    Domain { point: Point, message: String },
    #[error("need at least 2 rows with nonzero deviation, got {usable}")]
    InsufficientData { usable: usize },
    #[error("invalid radius {0}: radii must be distinct and lie in (0, 1/2]")]
    Radius(f64),
    #[error("invalid level {0}: levels must lie in (0, 1/2]")]
    Level(f64),
    #[error("alpha must lie in (0, 1), got {0}")]
    Alpha(f64),
    #[error("{0}")]
    Shape(String),
}

/// A real function of a space-time point.
pub trait Evaluable: Sync {
    fn eval(&self, x: &Point) -> Result<f64, VerifyError>;
}

impl<F: Fn(&Point) -> f64 + Sync> Evaluable for F {
    fn eval(&self, x: &Point) -> Result<f64, VerifyError> {
        Ok(self(x))
    }
}

impl Evaluable for SPoly {
    fn eval(&self, x: &Point) -> Result<f64, VerifyError> {
        self.evaluate(x).map_err(|e| VerifyError::Domain { point: x.clone(), message: e.to_string() })
    }
}

impl Evaluable for DiscreteSolution {
    fn eval(&self, x: &Point) -> Result<f64, VerifyError> {
        self.value_at(x).ok_or_else(|| VerifyError::Domain { point: x.clone(), message: "outside the mesh".into() })
    }
}

/// Shape of the cubes the deviation is measured over.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CubeGeometry {
    /// `Q_r^+`: `|x_n^σ − y_n^σ| < r`.
    #[default]
    Intrinsic,
    /// Euclidean in space: `|x_n − y_n| < r`.
    Parabolic,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleOptions {
    pub samples: usize,
    pub seed: u64,
    pub geometry: CubeGeometry,
}

impl Default for SampleOptions {
    fn default() -> Self {
        Self { samples: DEFAULT_SAMPLES, seed: 0, geometry: CubeGeometry::Intrinsic }
    }
}

/// A point of the unit reference cube: `ξ' ∈ [−1,1]^{n−1}`, `ν ∈ [0,1]` across the normal
/// range, `θ ∈ [0,1]` backwards in time.
#[derive(Clone, Debug, PartialEq)]
struct Reference {
    xi: Vec<f64>,
    nu: f64,
    theta: f64,
}

/// Stratified in `ν`, uniform in the rest, followed by the corners and face midpoints of
/// the closed cube.
fn reference_samples(dim: usize, samples: usize, seed: u64) -> Vec<Reference> {
    let m = dim - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<Reference> = (0..samples)
        .map(|j| Reference {
            xi: (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect(),
            nu: (j as f64 + rng.gen::<f64>()) / samples as f64,
            theta: rng.gen(),
        })
        .collect();
    for bits in 0..1usize << (m + 2) {
        let sign = |b: usize| if bits >> b & 1 == 1 { 1.0 } else { 0.0 };
        out.push(Reference { xi: (0..m).map(|b| 2.0 * sign(b) - 1.0).collect(), nu: sign(m), theta: sign(m + 1) });
    }
    let mid = Reference { xi: vec![0.0; m], nu: 0.5, theta: 0.5 };
    for axis in 0..m + 2 {
        for end in [0.0, 1.0] {
            let mut p = mid.clone();
            match axis {
                a if a < m => p.xi[a] = 2.0 * end - 1.0,
                a if a == m => p.nu = end,
                _ => p.theta = end,
            }
            out.push(p);
        }
    }
    out
}

fn place(s: &Reference, center: &Point, r: f64, gamma: Gamma, geometry: CubeGeometry) -> Point {
    let xprime = center.xprime.iter().zip(&s.xi).map(|(c, xi)| c + r * xi).collect();
    let xn = match geometry {
        CubeGeometry::Intrinsic => {
            let sigma = gamma.sigma_f64();
            let c = center.xn.powf(sigma);
            let lo = (c - r).max(0.0);
            (lo + s.nu * (c + r - lo)).powf(1.0 / sigma)
        }
        CubeGeometry::Parabolic => {
            let lo = (center.xn - r).max(0.0);
            lo + s.nu * (center.xn + r - lo)
        }
    };
    Point { xprime, xn, t: center.t - r * r * s.theta }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeviationRow {
    pub r: f64,
    pub sup_deviation: f64,
    /// Where the sup was attained.
    #[serde(skip)]
    pub argmax: Point,
}

/// `max |u − p|` over sampled points of each closed cube of radius `r` about `center`.
///
/// Rows come back with strictly decreasing radii. The same reference points are mapped
/// into every cube and each sup also covers the points of all smaller cubes, so the
/// result is non-decreasing in `r`.
pub fn sup_deviation(
    u: &(impl Evaluable + ?Sized),
    p: &(impl Evaluable + ?Sized),
    center: &Point,
    radii: &[f64],
    gamma: Gamma,
    options: &SampleOptions,
) -> Result<Vec<DeviationRow>, VerifyError> {
    let mut radii = radii.to_vec();
    if let Some(&bad) = radii.iter().find(|&&r| !(r > 0.0 && r <= 0.5)) {
        return Err(VerifyError::Radius(bad));
    }
    radii.sort_by(|a, b| a.total_cmp(b));
    if let Some(w) = radii.windows(2).find(|w| w[0] == w[1]) {
        return Err(VerifyError::Radius(w[0]));
    }
    let refs = reference_samples(center.dim(), options.samples, options.seed);
    let mut rows: Vec<DeviationRow> = Vec::with_capacity(radii.len());
    for &r in &radii {
        let mut best = match rows.last() {
            Some(prev) => (prev.sup_deviation, prev.argmax.clone()),
            None => (0.0, center.clone()),
        };
        for s in &refs {
            let x = place(s, center, r, gamma, options.geometry);
            let d = (u.eval(&x)? - p.eval(&x)?).abs();
            if d.is_nan() {
                return Err(VerifyError::Domain { point: x, message: "deviation is NaN".into() });
            }
            if d > best.0 {
                best = (d, x);
            }
        }
        rows.push(DeviationRow { r, sup_deviation: best.0, argmax: best.1 });
    }
    rows.reverse();
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitReport {
    pub rows: Vec<DeviationRow>,
    /// Slope of `log sup` against `log r`; absent when every row is zero.
    pub kappa_hat: Option<f64>,
    /// `exp` of the intercept, so that `sup ≈ C_hat · r^kappa_hat`.
    #[serde(rename = "C_hat")]
    pub c_hat: Option<f64>,
    pub r2: Option<f64>,
    /// Every deviation was exactly zero.
    pub exact_fit: bool,
    /// Rows that entered the regression.
    pub used: usize,
}

/// Ordinary least squares in log–log coordinates; rows with zero deviation are dropped.
pub fn fit_exponent(rows: &[DeviationRow]) -> Result<FitReport, VerifyError> {
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.sup_deviation > 0.0).map(|r| (r.r.ln(), r.sup_deviation.ln())).collect();
    let rows = rows.to_vec();
    if pts.is_empty() && !rows.is_empty() {
        return Ok(FitReport { rows, kappa_hat: None, c_hat: None, r2: None, exact_fit: true, used: 0 });
    }
    if pts.len() < 2 {
        return Err(VerifyError::InsufficientData { usable: pts.len() });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(VerifyError::Shape("all radii coincide".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = pts.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(FitReport { rows, kappa_hat: Some(slope), c_hat: Some(intercept.exp()), r2: Some(r2), exact_fit: false, used: pts.len() })
}

/// Where `(x', t)` is sampled for the growth table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthWindow {
    pub xprime: Vec<(f64, f64)>,
    pub t: (f64, f64),
    pub samples: usize,
    pub seed: u64,
}

impl GrowthWindow {
    pub fn one_d(t: (f64, f64), samples: usize) -> Self {
        Self { xprime: vec![], t, samples, seed: 0 }
    }

    /// The corners of the window followed by `samples` random points; time endpoints
    /// are always included.
    fn points(&self) -> Vec<(Vec<f64>, f64)> {
        let m = self.xprime.len();
        let mut out = Vec::new();
        for bits in 0..1usize << (m + 1) {
            let pick = |b: usize, (lo, hi): (f64, f64)| if bits >> b & 1 == 1 { hi } else { lo };
            out.push(((0..m).map(|b| pick(b, self.xprime[b])).collect(), pick(m, self.t)));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        for j in 0..self.samples {
            let xp = self.xprime.iter().map(|&(lo, hi)| if lo < hi { rng.gen_range(lo..=hi) } else { lo }).collect();
            let (lo, hi) = self.t;
            // stratified in time
            let t = lo + (hi - lo) * (j as f64 + rng.gen::<f64>()) / self.samples as f64;
            out.push((xp, t));
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GrowthRow {
    pub xn: f64,
    pub ratio: f64,
}

/// The boundary gauge: `x_n`, or `−x_n log x_n` when `γ = 1`.
pub fn boundary_gauge(gamma: Gamma, xn: f64) -> f64 {
    if gamma.is_log_case() {
        -xn * xn.ln()
    } else {
        xn
    }
}

/// Per level, `max |u| / gauge(x_n)` over the window.
pub fn boundary_growth_ratio(
    u: &(impl Evaluable + ?Sized),
    gamma: Gamma,
    levels: &[f64],
    window: &GrowthWindow,
) -> Result<Vec<GrowthRow>, VerifyError> {
    let pts = window.points();
    levels
        .iter()
        .map(|&xn| {
            if !(xn > 0.0 && xn <= 0.5) {
                return Err(VerifyError::Level(xn));
            }
            let gauge = boundary_gauge(gamma, xn);
            let mut m: f64 = 0.0;
            for (xp, t) in &pts {
                m = m.max(u.eval(&Point { xprime: xp.clone(), xn, t: *t })?.abs() / gauge);
            }
            Ok(GrowthRow { xn, ratio: m })
        })
        .collect()
}

/// Levels `2^{−j/σ}`: the points at intrinsic height `2^{−j}`.
pub fn dyadic_levels(gamma: Gamma, js: impl IntoIterator<Item = i32>) -> Vec<f64> {
    let s = gamma.sigma_f64();
    js.into_iter().map(|j| 0.5f64.powf(j as f64 / s)).collect()
}

/// `max |u(X) − u(Y)| / s[X, Y]^α` over sampled pairs in the closure of `cube`.
///
/// Pairs are drawn at all scales: the second point is the first one displaced by a random
/// fraction `2^{−k}` of the cube, `k ∈ [0, 12)`.
pub fn holder_norm_estimate(
    u: &(impl Evaluable + ?Sized),
    alpha: f64,
    cube: &IntrinsicCube,
    samples: usize,
    seed: u64,
) -> Result<f64, VerifyError> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(VerifyError::Alpha(alpha));
    }
    let m = cube.center.dim() - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let clamp_ref = |mut s: Reference| {
        s.xi.iter_mut().for_each(|v| *v = v.clamp(-1.0, 1.0));
        s.nu = s.nu.clamp(0.0, 1.0);
        s.theta = s.theta.clamp(0.0, 1.0);
        s
    };
    let mut best: f64 = 0.0;
    for _ in 0..samples {
        let a = Reference { xi: (0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect(), nu: rng.gen(), theta: rng.gen() };
        let scale = 0.5f64.powf(rng.gen_range(0.0..12.0));
        let b = clamp_ref(Reference {
            xi: a.xi.iter().map(|v| v + scale * rng.gen_range(-1.0..=1.0)).collect(),
            nu: a.nu + scale * rng.gen_range(-1.0..=1.0),
            theta: a.theta + scale * rng.gen_range(-1.0..=1.0),
        });
        let x = place(&a, &cube.center, cube.r, cube.gamma, CubeGeometry::Intrinsic);
        let y = place(&b, &cube.center, cube.r, cube.gamma, CubeGeometry::Intrinsic);
        let s = intrinsic_distance(&x, &y, cube.gamma);
        if s > 0.0 {
            best = best.max((u.eval(&x)? - u.eval(&y)?).abs() / s.powf(alpha));
        }
    }
    Ok(best)
}
