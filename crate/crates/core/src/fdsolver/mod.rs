//! Implicit finite differences for `u_t = Lu + f` on `[−1,1]^{n−1} × (0,1) × (0,T]` in the
//! chart `y = x_n^σ`, with Dirichlet data on the parabolic boundary.

mod banded;
mod barrier;
mod chart;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use banded::{BandedLu, BandedMatrix};
pub use barrier::{check_barrier_sign, Barrier, BarrierKind, BarrierReport, ExpectedSign};
pub use chart::{chart_constants, transform_operator, ChartCoefficients, ChartOperator};

use crate::metric::Point;
use crate::operator::{DegenerateOperator, OperatorError};
use crate::spoly::{Gamma, SPoly};

/// Tolerance for `g(x', 0, t) = 0`.
pub const BOTTOM_DATA_TOL: f64 = 1e-12;
/// Slack allowed in the M-matrix sign pattern, relative to the diagonal.
pub const M_MATRIX_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FdError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("boundary data must vanish on x_n = 0; got {value} at {point:?}")]
    NonzeroBottomData { value: f64, point: Point },
    #[error("reaction coefficient c must be <= 0; got {value} at {point:?}")]
    PositiveReaction { value: f64, point: Point },
    #[error("non-finite value at step {step}")]
    BlowUp { step: usize },
    #[error("zero pivot in the implicit matrix at step {step}")]
    Singular { step: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error(transparent)]
    Operator(#[from] OperatorError),
}

pub type DataFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// Data given by an s-polynomial, evaluated in floating point.
pub fn spoly_data(p: &SPoly) -> DataFn {
    let p = p.to_float();
    Arc::new(move |x: &Point| p.evaluate(x).unwrap_or(f64::NAN))
}

pub fn constant_data(c: f64) -> DataFn {
    Arc::new(move |_: &Point| c)
}

/// Space-time mesh: `y_k = k/K` (`x_n = y_k^{1/σ}`), tangential nodes uniform on `[−1,1]`,
/// uniform time steps on `[0,T]`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Grid {
    pub dims: usize,
    pub k: usize,
    pub k_tangential: usize,
    pub steps: usize,
    pub horizon: f64,
    pub gamma: Gamma,
}

impl Grid {
    pub fn new(dims: usize, k: usize, k_tangential: usize, steps: usize, horizon: f64, gamma: Gamma) -> Result<Self, FdError> {
        if !(dims == 1 || dims == 2) {
            return Err(FdError::Grid(format!("dims must be 1 or 2, got {dims}")));
        }
        if k < 2 || steps == 0 || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(FdError::Grid("need K >= 2, steps >= 1 and T > 0".into()));
        }
        if dims == 2 && k_tangential < 2 {
            return Err(FdError::Grid("need at least 2 tangential intervals".into()));
        }
        Ok(Self { dims, k, k_tangential: if dims == 1 { 0 } else { k_tangential }, steps, horizon, gamma })
    }

    pub fn one_d(k: usize, steps: usize, horizon: f64, gamma: Gamma) -> Result<Self, FdError> {
        Self::new(1, k, 0, steps, horizon, gamma)
    }

    pub fn h(&self) -> f64 {
        1.0 / self.k as f64
    }

    pub fn h_tangential(&self) -> f64 {
        2.0 / self.k_tangential as f64
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn y(&self, k: usize) -> f64 {
        k as f64 / self.k as f64
    }

    pub fn xn(&self, k: usize) -> f64 {
        self.y(k).powf(1.0 / self.gamma.sigma_f64())
    }

    pub fn x1(&self, i: usize) -> f64 {
        -1.0 + 2.0 * i as f64 / self.k_tangential as f64
    }

    pub fn t(&self, step: usize) -> f64 {
        self.horizon * step as f64 / self.steps as f64
    }

    /// Nodes per tangential line (1 when `dims = 1`).
    pub fn nx(&self) -> usize {
        self.k_tangential + 1
    }

    pub fn node_count(&self) -> usize {
        self.nx() * (self.k + 1)
    }

    pub fn node(&self, k: usize, i: usize) -> usize {
        k * self.nx() + i
    }

    pub fn xprime(&self, i: usize) -> Vec<f64> {
        if self.dims == 1 {
            vec![]
        } else {
            vec![self.x1(i)]
        }
    }

    pub fn point(&self, k: usize, i: usize, t: f64) -> Point {
        Point::new(self.xprime(i), self.xn(k), t)
    }

    pub fn is_boundary(&self, k: usize, i: usize) -> bool {
        k == 0 || k == self.k || (self.dims == 2 && (i == 0 || i == self.k_tangential))
    }
}

/// `u_t = Lu + f` in the interior, `u = g` on the lateral and bottom boundary, `u = g0` at
/// `t = 0`.
#[derive(Clone)]
pub struct Ibvp {
    pub operator: DegenerateOperator,
    pub forcing: DataFn,
    pub initial: DataFn,
    pub boundary: DataFn,
    pub horizon: f64,
}

impl fmt::Debug for Ibvp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Ibvp").field("operator", &self.operator).field("horizon", &self.horizon).finish_non_exhaustive()
    }
}

impl Ibvp {
    /// Zero forcing and data.
    pub fn new(operator: DegenerateOperator, horizon: f64) -> Self {
        Self { operator, forcing: constant_data(0.0), initial: constant_data(0.0), boundary: constant_data(0.0), horizon }
    }

    pub fn with_forcing(mut self, f: DataFn) -> Self {
        self.forcing = f;
        self
    }

    pub fn with_initial(mut self, g0: DataFn) -> Self {
        self.initial = g0;
        self
    }

    pub fn with_boundary(mut self, g: DataFn) -> Self {
        self.boundary = g;
        self
    }

    /// Initial and boundary data both taken from `g`.
    pub fn with_data(self, g: DataFn) -> Self {
        self.with_initial(g.clone()).with_boundary(g)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    ImplicitEuler,
    CrankNicolson,
}

impl Scheme {
    fn theta(self) -> f64 {
        match self {
            Scheme::ImplicitEuler => 1.0,
            Scheme::CrankNicolson => 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub scheme: Scheme,
    /// Store every `keep_every`-th time level; the first and last are always stored.
    pub keep_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { scheme: Scheme::ImplicitEuler, keep_every: 1 }
    }
}

/// Outcome of the sign check on the implicit matrices.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct MMatrixReport {
    /// Time steps whose implicit matrix was checked (a reused factorization counts every step).
    pub steps_checked: usize,
    pub assemblies: usize,
    pub violations: usize,
    pub first_violation: Option<String>,
}

impl MMatrixReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.steps_checked > 0
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DiscreteSolution {
    pub grid: Grid,
    pub scheme: Scheme,
    /// Stored time levels.
    pub times: Vec<f64>,
    /// `values[s][grid.node(k, i)]`.
    pub values: Vec<Vec<f64>>,
    pub m_matrix: MMatrixReport,
}

impl DiscreteSolution {
    pub fn level(&self, s: usize) -> &[f64] {
        &self.values[s]
    }

    pub fn final_level(&self) -> &[f64] {
        self.values.last().expect("at least the initial level")
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().flatten().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().flatten().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest `|u − exact|` over all stored nodes.
    pub fn max_error(&self, exact: impl Fn(&Point) -> f64) -> f64 {
        let g = &self.grid;
        let mut err: f64 = 0.0;
        for (s, &t) in self.times.iter().enumerate() {
            for k in 0..=g.k {
                for i in 0..g.nx() {
                    err = err.max((self.values[s][g.node(k, i)] - exact(&g.point(k, i, t))).abs());
                }
            }
        }
        err
    }

    /// Multilinear interpolation in `(y, x_1, t)`; `None` outside the mesh.
    pub fn value_at(&self, x: &Point) -> Option<f64> {
        let g = &self.grid;
        if x.xprime.len() != g.dims - 1 {
            return None;
        }
        let y = x.xn.powf(g.gamma.sigma_f64());
        let (k0, wy) = bracket(y * g.k as f64, g.k)?;
        let (i0, wx) = if g.dims == 2 { bracket((x.xprime[0] + 1.0) / g.h_tangential(), g.k_tangential)? } else { (0, 0.0) };
        let s0 = match self.times.binary_search_by(|t| t.total_cmp(&x.t)) {
            Ok(s) => s.min(self.times.len().saturating_sub(2)),
            Err(0) => return None,
            Err(s) if s == self.times.len() => return None,
            Err(s) => s - 1,
        };
        let (s1, wt) = if self.times.len() == 1 { (s0, 0.0) } else { (s0 + 1, (x.t - self.times[s0]) / (self.times[s0 + 1] - self.times[s0])) };
        let spatial = |s: usize| {
            let v = |k: usize, i: usize| self.values[s][g.node(k, i)];
            let i1 = if g.dims == 2 { i0 + 1 } else { 0 };
            let lo = v(k0, i0) * (1.0 - wx) + v(k0, i1) * wx;
            let hi = v(k0 + 1, i0) * (1.0 - wx) + v(k0 + 1, i1) * wx;
            lo * (1.0 - wy) + hi * wy
        };
        Some(spatial(s0) * (1.0 - wt) + spatial(s1) * wt)
    }
}

/// Cell index and weight for a coordinate measured in mesh units on `[0, n]`.
fn bracket(u: f64, n: usize) -> Option<(usize, f64)> {
    const EDGE: f64 = 1e-12;
    if !(u >= -EDGE && u <= n as f64 + EDGE) {
        return None;
    }
    let u = u.clamp(0.0, n as f64);
    let c = (u.floor() as usize).min(n - 1);
    Some((c, u - c as f64))
}

/// Spatial stencil rows for the interior nodes at time `t`.
struct Assembly {
    /// Interior unknown → node index.
    unknowns: Vec<usize>,
    /// Node index → unknown index.
    slot: Vec<Option<usize>>,
    /// Per unknown: `(node, weight)` of the discrete `L`.
    rows: Vec<Vec<(usize, f64)>>,
}

fn interior_layout(g: &Grid) -> (Vec<usize>, Vec<Option<usize>>) {
    let mut unknowns = Vec::new();
    let mut slot = vec![None; g.node_count()];
    for k in 0..=g.k {
        for i in 0..g.nx() {
            if !g.is_boundary(k, i) {
                slot[g.node(k, i)] = Some(unknowns.len());
                unknowns.push(g.node(k, i));
            }
        }
    }
    (unknowns, slot)
}

fn assemble(g: &Grid, chart: &ChartOperator<'_>, t: f64) -> Result<Assembly, FdError> {
    let (unknowns, slot) = interior_layout(g);
    let h = g.h();
    let nx = g.nx();
    let mut rows = Vec::with_capacity(unknowns.len());
    for &node in &unknowns {
        let (k, i) = (node / nx, node % nx);
        let y = g.y(k);
        let xp = g.xprime(i);
        let co = chart.eval(&xp, y, t)?;
        if co.c > 0.0 {
            return Err(FdError::PositiveReaction { value: co.c, point: g.point(k, i, t) });
        }
        let mut w: Vec<(usize, f64)> = Vec::with_capacity(9);
        let mut add = |kk: usize, ii: usize, v: f64| {
            if v != 0.0 {
                w.push((g.node(kk, ii), v));
            }
        };
        add(k - 1, i, co.a_yy / (h * h));
        add(k + 1, i, co.a_yy / (h * h));
        add(k, i, -2.0 * co.a_yy / (h * h) + co.c);
        if co.b_y > 0.0 {
            add(k + 1, i, co.b_y / h);
            add(k, i, -co.b_y / h);
        } else if co.b_y < 0.0 {
            add(k, i, co.b_y / h);
            add(k - 1, i, -co.b_y / h);
        }
        if g.dims == 2 {
            let h1 = g.h_tangential();
            add(k, i - 1, co.a_tt / (h1 * h1) - co.b_t / (2.0 * h1));
            add(k, i + 1, co.a_tt / (h1 * h1) + co.b_t / (2.0 * h1));
            add(k, i, -2.0 * co.a_tt / (h1 * h1));
            // 2 a_ty u_{1y}: seven-point stencil whose diagonal pair follows the sign
            let m = 2.0 * co.a_ty;
            if m != 0.0 {
                let q = m.abs() / (2.0 * h1 * h);
                add(k, i, 2.0 * q);
                add(k, i - 1, -q);
                add(k, i + 1, -q);
                add(k - 1, i, -q);
                add(k + 1, i, -q);
                if m > 0.0 {
                    add(k + 1, i + 1, q);
                    add(k - 1, i - 1, q);
                } else {
                    add(k - 1, i + 1, q);
                    add(k + 1, i - 1, q);
                }
            }
        }
        w.sort_by_key(|&(n, _)| n);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(w.len());
        for (n, v) in w {
            match merged.last_mut() {
                Some(last) if last.0 == n => last.1 += v,
                _ => merged.push((n, v)),
            }
        }
        rows.push(merged);
    }
    Ok(Assembly { unknowns, slot, rows })
}

impl Assembly {
    /// `I − θ dt L_h` on the unknowns.
    fn implicit_matrix(&self, g: &Grid, theta_dt: f64) -> BandedMatrix {
        let bw = if g.dims == 1 { 1 } else { g.nx() - 2 + 1 };
        let mut m = BandedMatrix::zeros(self.unknowns.len(), bw);
        for (r, row) in self.rows.iter().enumerate() {
            m.add(r, r, 1.0);
            for &(node, v) in row {
                if let Some(c) = self.slot[node] {
                    m.add(r, c, -theta_dt * v);
                }
            }
        }
        m
    }

    /// `L_h u` at the unknowns, using all nodes of `u`.
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().map(|&(n, v)| v * u[n]).sum()).collect()
    }

    /// Contribution of the boundary nodes of `u` to `L_h u`.
    fn boundary_part(&self, u: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|row| row.iter().filter(|(n, _)| self.slot[*n].is_none()).map(|&(n, v)| v * u[n]).sum()).collect()
    }
}

/// Diagonal positive, off-diagonals nonpositive, rows weakly diagonally dominant.
fn m_matrix_violation(m: &BandedMatrix) -> Option<String> {
    for i in 0..m.size() {
        let d = m.get(i, i);
        if !(d > 0.0) {
            return Some(format!("row {i}: diagonal {d} is not positive"));
        }
        let mut off = 0.0;
        for (j, v) in m.row(i) {
            if j != i {
                if v > M_MATRIX_TOL * d {
                    return Some(format!("row {i}: off-diagonal ({i}, {j}) = {v} is positive"));
                }
                off += v.abs();
            }
        }
        if off > d * (1.0 + M_MATRIX_TOL) {
            return Some(format!("row {i}: not diagonally dominant ({off} > {d})"));
        }
    }
    None
}

fn fill_boundary(p: &Ibvp, g: &Grid, u: &mut [f64], t: f64) -> Result<(), FdError> {
    for k in 0..=g.k {
        for i in 0..g.nx() {
            if g.is_boundary(k, i) {
                let x = g.point(k, i, t);
                let v = (p.boundary)(&x);
                if k == 0 && v.abs() > BOTTOM_DATA_TOL {
                    return Err(FdError::NonzeroBottomData { value: v, point: x });
                }
                u[g.node(k, i)] = v;
            }
        }
    }
    Ok(())
}

fn forcing_at(p: &Ibvp, g: &Grid, unknowns: &[usize], t: f64) -> Vec<f64> {
    let nx = g.nx();
    unknowns.iter().map(|&n| (p.forcing)(&g.point(n / nx, n % nx, t))).collect()
}

/// Marches from `t = 0` to `T` with one banded solve per step. Time-independent
/// coefficients are assembled and factored once.
pub fn solve_ibvp(p: &Ibvp, g: &Grid, options: &SolveOptions) -> Result<DiscreteSolution, FdError> {
    if g.gamma != p.operator.gamma() {
        return Err(FdError::Grid("grid and operator disagree on gamma".into()));
    }
    if g.dims != p.operator.dim() {
        return Err(FdError::Grid(format!("grid has {} dimensions, operator {}", g.dims, p.operator.dim())));
    }
    if (g.horizon - p.horizon).abs() > 1e-15 * p.horizon.max(1.0) {
        return Err(FdError::Grid("grid horizon differs from the problem horizon".into()));
    }
    let keep = options.keep_every.max(1);
    let theta = options.scheme.theta();
    let dt = g.dt();
    let chart = transform_operator(&p.operator);
    let frozen = p.operator.is_time_independent();

    let mut u = vec![0.0; g.node_count()];
    for k in 0..=g.k {
        for i in 0..g.nx() {
            let x = g.point(k, i, 0.0);
            u[g.node(k, i)] = if g.is_boundary(k, i) { (p.boundary)(&x) } else { (p.initial)(&x) };
            if k == 0 && u[g.node(k, i)].abs() > BOTTOM_DATA_TOL {
                return Err(FdError::NonzeroBottomData { value: u[g.node(k, i)], point: x });
            }
        }
    }
    let mut times = vec![0.0];
    let mut values = vec![u.clone()];
    let mut report = MMatrixReport::default();

    let mut current = assemble(g, &chart, 0.0)?;
    let mut factored: Option<BandedLu> = None;
    let mut violation: Option<String> = None;
    let mut f_now = forcing_at(p, g, &current.unknowns, 0.0);

    for step in 1..=g.steps {
        let t_new = g.t(step);
        let next = if frozen { None } else { Some(assemble(g, &chart, t_new)?) };
        let implicit = next.as_ref().unwrap_or(&current);
        if factored.is_none() || !frozen {
            let m = implicit.implicit_matrix(g, theta * dt);
            report.assemblies += 1;
            violation = m_matrix_violation(&m).map(|v| format!("step {step}: {v}"));
            if report.first_violation.is_none() {
                report.first_violation.clone_from(&violation);
            }
            factored = Some(m.factor().ok_or(FdError::Singular { step })?);
        }
        if violation.is_some() {
            report.violations += 1;
        }
        report.steps_checked += 1;

        let f_new = forcing_at(p, g, &implicit.unknowns, t_new);
        let mut u_new = vec![0.0; g.node_count()];
        fill_boundary(p, g, &mut u_new, t_new)?;
        let explicit_part = if theta < 1.0 { current.apply(&u) } else { vec![0.0; implicit.unknowns.len()] };
        let bnd = implicit.boundary_part(&u_new);
        let mut rhs: Vec<f64> = (0..implicit.unknowns.len())
            .map(|r| {
                u[implicit.unknowns[r]] + dt * ((1.0 - theta) * (explicit_part[r] + f_now[r]) + theta * (f_new[r] + bnd[r]))
            })
            .collect();
        factored.as_ref().expect("factored").solve(&mut rhs);
        for (r, &n) in implicit.unknowns.iter().enumerate() {
            u_new[n] = rhs[r];
        }
        if u_new.iter().any(|v| !v.is_finite()) {
            return Err(FdError::BlowUp { step });
        }
        u = u_new;
        f_now = f_new;
        if let Some(n) = next {
            current = n;
        }
        if step % keep == 0 || step == g.steps {
            times.push(t_new);
            values.push(u.clone());
        }
    }
    Ok(DiscreteSolution { grid: g.clone(), scheme: options.scheme, times, values, m_matrix: report })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaxPrincipleReport {
    pub max_abs: f64,
    pub max_value: f64,
    pub forcing_norm: f64,
    pub data_norm: f64,
    /// `e · (‖f‖_∞ + ‖g‖_∞)`
    pub bound: f64,
    pub holds: bool,
}

/// Compares `max |u|` with `e(‖f‖_∞ + ‖g‖_∞)`, the norms taken over the mesh nodes (interior
/// nodes for `f`, initial and boundary nodes for `g`).
pub fn check_discrete_max_principle(sol: &DiscreteSolution, p: &Ibvp) -> MaxPrincipleReport {
    let g = &sol.grid;
    let mut f_norm: f64 = 0.0;
    let mut g_norm: f64 = 0.0;
    for step in 0..=g.steps {
        let t = g.t(step);
        for k in 0..=g.k {
            for i in 0..g.nx() {
                let x = g.point(k, i, t);
                if g.is_boundary(k, i) {
                    g_norm = g_norm.max((p.boundary)(&x).abs());
                } else {
                    f_norm = f_norm.max((p.forcing)(&x).abs());
                    if step == 0 {
                        g_norm = g_norm.max((p.initial)(&x).abs());
                    }
                }
            }
        }
    }
    let bound = std::f64::consts::E * (f_norm + g_norm);
    let max_abs = sol.max_abs();
    MaxPrincipleReport { max_abs, max_value: sol.max_value(), forcing_norm: f_norm, data_norm: g_norm, bound, holds: max_abs <= bound }
}
