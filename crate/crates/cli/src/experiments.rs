//! Experiments are built in two phases: [`prepare`] parses and validates everything
//! (errors there are config errors, exit 2), then [`Prepared::run`] computes.

use std::fmt::Write as _;
use std::sync::Arc;

use anyhow::Result;
use serde::Serialize;
use serde_json::{json, Value};

use schauder_core::expansion::{
    homogeneous_hierarchy, interior_expansion_with, interior_threshold, particular_solution_with, validate_kappa, CoefficientFunction,
    EngineOptions, EngineOutput, Expansion,
};
use schauder_core::fdsolver::{
    check_barrier_sign, check_discrete_max_principle, constant_data, solve_ibvp, Barrier, DataFn, DiscreteSolution, Grid, Ibvp,
    SolveOptions,
};
use schauder_core::metric::Point;
use schauder_core::model::{model_candidate, model_forcing, model_solution, model_solution_value};
use schauder_core::operator::DegenerateOperator;
use schauder_core::rational::{fmt_exp, parse_exp, parse_q, q_to_f64, Exp};
use schauder_core::spoly::{Gamma, SPoly};
use schauder_core::verify::{
    boundary_growth_ratio, dyadic_levels, fit_exponent, sup_deviation, DeviationRow, Evaluable, FitReport, GrowthRow, GrowthWindow,
    SampleOptions, VerifyError,
};

use crate::config::{config_error, Assertions, DataSpec, ExperimentConfig, ExpansionMode, FitSource, Kind};
use crate::svg::{line_plot, Axis, Series};

/// Largest `u` still counted as nonpositive.
const NONPOSITIVE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub message: String,
}

fn failure(check: &str, message: impl Into<String>) -> Failure {
    Failure { check: check.into(), message: message.into() }
}

#[derive(Clone, Debug)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug)]
pub struct Outcome {
    pub results: Value,
    pub failures: Vec<Failure>,
    pub artifacts: Vec<Artifact>,
}

impl Outcome {
    fn error(check: &str, e: impl std::fmt::Display) -> Self {
        Self { results: Value::Null, failures: vec![failure(check, e.to_string())], artifacts: vec![] }
    }
}

/// An IBVP ready to solve, in mesh time `s ∈ [0, T]` with physical time `t0 + s`.
pub struct Problem {
    ibvp: Ibvp,
    grid: Grid,
    options: SolveOptions,
    t0: f64,
    exact: Option<DataFn>,
    data_fns: [DataFn; 3],
}

impl Problem {
    fn solve(&self) -> Result<DiscreteSolution, schauder_core::fdsolver::FdError> {
        solve_ibvp(&self.ibvp, &self.grid, &self.options)
    }

    fn shifted<'a>(&self, sol: &'a DiscreteSolution) -> Shifted<'a> {
        Shifted { sol, t0: self.t0 }
    }
}

/// A discrete solution addressed in physical time.
struct Shifted<'a> {
    sol: &'a DiscreteSolution,
    t0: f64,
}

impl Evaluable for Shifted<'_> {
    fn eval(&self, x: &Point) -> Result<f64, VerifyError> {
        self.sol.eval(&Point { xprime: x.xprime.clone(), xn: x.xn, t: x.t - self.t0 })
    }
}

pub enum Prepared {
    OracleCheck { gamma: Gamma, solution: SPoly, assertions: Assertions },
    Expand { op: DegenerateOperator, job: ExpandJob, assertions: Assertions },
    Solve { problem: Problem, assertions: Assertions },
    Fit { fit: FitJob, assertions: Assertions },
    Maxprin { problem: Problem, barriers: Vec<Barrier>, barrier_samples: usize, seed: u64, assertions: Assertions },
    Growth { problem: Problem, levels: Vec<f64>, window: GrowthWindow, assertions: Assertions },
}

pub enum ExpandJob {
    Particular { f: Expansion, kappa: Exp },
    Interior { u0: CoefficientFunction, m: u32, n: u32 },
    Hierarchy { u0: CoefficientFunction, n: u32 },
}

pub struct FitJob {
    gamma: Gamma,
    source: FitSubject,
    candidate: SPoly,
    center: Point,
    radii: Vec<f64>,
    options: SampleOptions,
}

enum FitSubject {
    Rows(Vec<DeviationRow>),
    Exact(SPoly),
    Fd(Box<Problem>),
}

fn rational(s: &str, what: &str) -> Result<f64> {
    parse_q(s).map(|q| q_to_f64(&q)).map_err(|e| config_error(format!("{what}: {e}")))
}

fn data_fn(spec: &DataSpec, gamma: Gamma, dim: usize, t0: f64, what: &str) -> Result<DataFn> {
    let f: DataFn = match spec {
        DataSpec::Named(s) if s == "zero" => constant_data(0.0),
        DataSpec::Named(s) if s == "model_oracle" => {
            if gamma.is_log_case() {
                return Err(config_error(format!("{what}: model_oracle needs gamma < 1")));
            }
            Arc::new(move |x: &Point| model_solution_value(gamma, x.xn, t0 + x.t))
        }
        DataSpec::Named(s) => constant_data(rational(s, what)?),
        DataSpec::Terms(t) => {
            let p = SPoly::from_json_terms(t, gamma, Some(dim)).map_err(|e| config_error(format!("{what}: {e}")))?.to_float();
            Arc::new(move |x: &Point| p.evaluate(&Point { xprime: x.xprime.clone(), xn: x.xn, t: t0 + x.t }).unwrap_or(f64::NAN))
        }
    };
    Ok(f)
}

fn spoly_spec(spec: &DataSpec, gamma: Gamma, dim: usize, what: &str) -> Result<SPoly> {
    match spec {
        DataSpec::Named(s) if s == "model_candidate" || s == "model_oracle" => {
            if dim != 1 {
                return Err(config_error(format!("{what}: {s} is one-dimensional")));
            }
            let p = if s == "model_candidate" { model_candidate(gamma) } else { model_solution(gamma) };
            p.map_err(|e| config_error(format!("{what}: {e}")))
        }
        DataSpec::Named(s) if s == "zero" => Ok(SPoly::zero(dim, gamma)),
        DataSpec::Named(s) => parse_q(s).map(|q| SPoly::constant(dim, gamma, q)).map_err(|e| config_error(format!("{what}: {e}"))),
        DataSpec::Terms(t) => SPoly::from_json_terms(t, gamma, Some(dim)).map_err(|e| config_error(format!("{what}: {e}"))),
    }
}

fn problem(cfg: &ExperimentConfig, gamma: Gamma) -> Result<Problem> {
    let op = cfg.operator.as_ref().expect("resolved").build(Some(gamma)).map_err(|e| config_error(format!("operator: {e}")))?;
    let g = cfg.grid.as_ref().expect("resolved");
    let d = cfg.data.as_ref().expect("resolved");
    let horizon = rational(&g.horizon, "grid.horizon")?;
    if g.dims != op.dim() {
        return Err(config_error(format!("grid.dims = {} but the operator has dimension {}", g.dims, op.dim())));
    }
    let grid = Grid::new(g.dims, g.k, g.k_tangential, g.steps, horizon, gamma).map_err(|e| config_error(format!("grid: {e}")))?;
    if g.keep_every == 0 {
        return Err(config_error("grid.keep_every must be positive"));
    }
    let t0 = rational(&d.time_origin, "data.time_origin")?;
    let dim = op.dim();
    let forcing = data_fn(&d.forcing, gamma, dim, t0, "data.forcing")?;
    let initial = data_fn(&d.initial, gamma, dim, t0, "data.initial")?;
    let boundary = data_fn(&d.boundary, gamma, dim, t0, "data.boundary")?;
    // the exact solution is addressed in physical time
    let exact = d.exact.as_ref().map(|e| data_fn(e, gamma, dim, 0.0, "data.exact")).transpose()?;
    let ibvp = Ibvp::new(op, horizon).with_forcing(forcing.clone()).with_initial(initial.clone()).with_boundary(boundary.clone());
    Ok(Problem { ibvp, grid, options: SolveOptions { scheme: g.scheme, keep_every: g.keep_every }, t0, exact, data_fns: [forcing, initial, boundary] })
}

fn coefficient_function(cfg: &crate::config::ExpansionConfig, nvars: usize) -> Result<CoefficientFunction> {
    CoefficientFunction::from_json_terms(nvars, &cfg.u0).ok_or_else(|| config_error(format!("expansion.u0: each beta needs {nvars} entries")))
}

pub fn prepare(cfg: &ExperimentConfig) -> Result<Prepared> {
    let gamma = cfg.gamma.expect("resolved");
    let assertions = cfg.assertions.clone().unwrap_or_default();
    Ok(match cfg.kind.expect("resolved") {
        Kind::OracleCheck => {
            let solution = model_solution(gamma).map_err(|e| config_error(e.to_string()))?;
            Prepared::OracleCheck { gamma, solution, assertions }
        }
        Kind::Expand => {
            let op = cfg.operator.as_ref().expect("resolved").build(Some(gamma)).map_err(|e| config_error(format!("operator: {e}")))?;
            if !op.is_symbolic() {
                return Err(config_error("expansions need polynomial coefficients"));
            }
            let e = cfg.expansion.as_ref().expect("resolved");
            let job = match e.mode {
                ExpansionMode::Particular => {
                    let kappa = parse_exp(&e.kappa).map_err(|err| config_error(format!("expansion.kappa: {err}")))?;
                    validate_kappa(gamma, kappa).map_err(|err| config_error(err.to_string()))?;
                    let f = SPoly::from_json_terms(&e.forcing, gamma, Some(op.dim())).map_err(|err| config_error(format!("expansion.forcing: {err}")))?;
                    let f = Expansion::from_spoly(&f).map_err(|err| config_error(format!("expansion.forcing: {err}")))?;
                    ExpandJob::Particular { f, kappa }
                }
                ExpansionMode::Interior | ExpansionMode::Hierarchy => {
                    if gamma.is_log_case() {
                        return Err(config_error("interior expansions need gamma < 1"));
                    }
                    let u0 = coefficient_function(e, op.dim() - 1)?;
                    if e.mode == ExpansionMode::Interior {
                        if e.m == 0 {
                            return Err(config_error("expansion.m must be at least 1"));
                        }
                        ExpandJob::Interior { u0, m: e.m, n: e.n }
                    } else {
                        ExpandJob::Hierarchy { u0, n: e.n }
                    }
                }
            };
            Prepared::Expand { op, job, assertions }
        }
        Kind::Solve => {
            let problem = problem(cfg, gamma)?;
            if assertions.max_error.is_some() && problem.exact.is_none() {
                return Err(config_error("assertions.max_error needs data.exact"));
            }
            Prepared::Solve { problem, assertions }
        }
        Kind::Fit => {
            let f = cfg.fit.as_ref().expect("resolved");
            let dim = match f.source {
                FitSource::Fd => problem(cfg, gamma)?.ibvp.operator.dim(),
                _ => 1,
            };
            let source = match f.source {
                FitSource::Rows => {
                    if f.rows.is_empty() {
                        return Err(config_error("fit.rows is empty"));
                    }
                    FitSubject::Rows(f.rows.iter().map(|&[r, s]| DeviationRow { r, sup_deviation: s, argmax: Point::origin(1) }).collect())
                }
                FitSource::ModelOracle => FitSubject::Exact(model_solution(gamma).map_err(|e| config_error(e.to_string()))?),
                FitSource::Fd => FitSubject::Fd(Box::new(problem(cfg, gamma)?)),
            };
            if f.source != FitSource::Rows {
                if let Some(&r) = f.radii.iter().find(|&&r| !(r > 0.0 && r <= 0.5)) {
                    return Err(config_error(format!("fit.radii: {r} is outside (0, 1/2]")));
                }
                if f.samples == 0 {
                    return Err(config_error("fit.samples must be positive"));
                }
            }
            let [xn, t] = f.center;
            let center = Point::try_new(vec![0.0; dim - 1], xn, t).ok_or_else(|| config_error("fit.center needs x_n >= 0"))?;
            let candidate = spoly_spec(&f.candidate, gamma, dim, "fit.candidate")?;
            let options = SampleOptions { samples: f.samples, seed: cfg.seed.unwrap_or(0), geometry: f.geometry };
            Prepared::Fit { fit: FitJob { gamma, source, candidate, center, radii: f.radii.clone(), options }, assertions }
        }
        Kind::Maxprin => {
            let m = cfg.maxprin.as_ref().expect("resolved");
            let barriers = m.barriers.iter().map(|&k| Barrier::new(k).map_err(|e| config_error(format!("maxprin.barriers: {e}")))).collect::<Result<_>>()?;
            Prepared::Maxprin { problem: problem(cfg, gamma)?, barriers, barrier_samples: m.barrier_samples, seed: cfg.seed.unwrap_or(0), assertions }
        }
        Kind::Growth => {
            let gr = cfg.growth.as_ref().expect("resolved");
            let problem = problem(cfg, gamma)?;
            let levels = dyadic_levels(gamma, gr.levels_j.iter().copied());
            if levels.len() < 2 {
                return Err(config_error("growth.levels_j needs at least two levels"));
            }
            if let Some((j, _)) = gr.levels_j.iter().zip(&levels).find(|(_, &x)| !(x > 0.0 && x <= 0.5)) {
                return Err(config_error(format!("growth.levels_j: j = {j} gives a level outside (0, 1/2]")));
            }
            let window = GrowthWindow {
                xprime: vec![(-1.0, 1.0); problem.grid.dims - 1],
                t: (problem.t0, problem.t0 + problem.grid.horizon),
                samples: gr.samples,
                seed: cfg.seed.unwrap_or(0),
            };
            Prepared::Growth { problem, levels, window, assertions }
        }
    })
}

impl Prepared {
    pub fn run(&self) -> Outcome {
        match self {
            Prepared::OracleCheck { gamma, solution, assertions } => run_oracle(*gamma, solution, assertions),
            Prepared::Expand { op, job, assertions } => run_expand(op, job, assertions),
            Prepared::Solve { problem, assertions } => run_solve(problem, assertions),
            Prepared::Fit { fit, assertions } => run_fit(fit, assertions),
            Prepared::Maxprin { problem, barriers, barrier_samples, seed, assertions } => run_maxprin(problem, barriers, *barrier_samples, *seed, assertions),
            Prepared::Growth { problem, levels, window, assertions } => run_growth(problem, levels, window, assertions),
        }
    }
}

fn run_oracle(gamma: Gamma, u: &SPoly, a: &Assertions) -> Outcome {
    let op = DegenerateOperator::model(gamma, 1);
    let r = match op.residual(u, &model_forcing(gamma)) {
        Ok(r) => r,
        Err(e) => return Outcome::error("residual", e),
    };
    let verdict = if r.is_empty() { "exactly zero".to_string() } else { format!("{} nonzero terms", r.len()) };
    let mut failures = vec![];
    if a.residual_zero == Some(true) && !r.is_empty() {
        failures.push(failure("residual_zero", format!("residual has {} terms: {}", r.len(), r.pretty())));
    }
    Outcome {
        results: json!({
            "residual": verdict,
            "residual_terms": r.to_json_terms(),
            "solution": u.pretty(),
        }),
        failures,
        artifacts: vec![Artifact { name: "oracle.json".into(), contents: u.to_json_string() }],
    }
}

fn run_expand(op: &DegenerateOperator, job: &ExpandJob, a: &Assertions) -> Outcome {
    let gamma = op.gamma();
    let options = EngineOptions::default();
    let (out, f): (Result<EngineOutput, _>, Expansion) = match job {
        ExpandJob::Particular { f, kappa } => (particular_solution_with(op, f, *kappa, &options), f.clone()),
        ExpandJob::Interior { u0, m, n } => (interior_expansion_with(op, u0, *m, *n, &options), Expansion::zero(gamma, op.dim() - 1)),
        ExpandJob::Hierarchy { u0, n } => {
            let threshold = Exp::from_integer(1) + gamma.sigma() * (Exp::from_integer(i64::from(*n)) - Exp::from_integer(1));
            let out = homogeneous_hierarchy(op, u0, *n).and_then(|v| {
                let residual = op.residual(&v.to_spoly(), &SPoly::zero(op.dim(), gamma))?;
                Ok(EngineOutput { expansion: v, residual, threshold, stats: Default::default() })
            });
            (out, Expansion::zero(gamma, op.dim() - 1))
        }
    };
    let out = match out {
        Ok(o) => o,
        Err(e) => return Outcome::error("expansion", e),
    };
    // recomputed from scratch rather than trusting the engine's running residual
    let residual = match op.residual(&out.expansion.to_spoly(), &f.to_spoly()) {
        Ok(r) => r,
        Err(e) => return Outcome::error("residual", e),
    };
    let min = residual.min_exponent();
    let reached = min.is_none_or(|e| e >= out.threshold);
    let mut failures = vec![];
    if a.residual_threshold == Some(true) && !reached {
        failures.push(failure("residual_threshold", format!("residual has x_n^{} below the threshold x_n^{}", fmt_exp(&min.unwrap()), fmt_exp(&out.threshold))));
    }
    if let ExpandJob::Interior { m, n, .. } = job {
        debug_assert_eq!(out.threshold, interior_threshold(gamma, *m, *n));
    }
    Outcome {
        results: json!({
            "threshold": fmt_exp(&out.threshold),
            "residual_min_exponent": min.map(|e| fmt_exp(&e)),
            "threshold_reached": reached,
            "terms": out.expansion.summary(),
            "stats": out.stats,
        }),
        failures,
        artifacts: vec![Artifact { name: "expansion.json".into(), contents: out.expansion.to_json_string() }],
    }
}

fn solution_csv(sol: &DiscreteSolution, t0: f64) -> String {
    let g = &sol.grid;
    let t = t0 + sol.times.last().copied().unwrap_or(0.0);
    let mut s = String::from(if g.dims == 2 { "t,y,xn,x1,u\n" } else { "t,y,xn,u\n" });
    let last = sol.final_level();
    for k in 0..=g.k {
        for i in 0..g.nx() {
            let u = last[g.node(k, i)];
            if g.dims == 2 {
                let _ = writeln!(s, "{t},{},{},{},{u}", g.y(k), g.xn(k), g.x1(i));
            } else {
                let _ = writeln!(s, "{t},{},{},{u}", g.y(k), g.xn(k));
            }
        }
    }
    s
}

fn m_matrix_check(sol: &DiscreteSolution, a: &Assertions, failures: &mut Vec<Failure>) {
    if a.m_matrix == Some(true) && !sol.m_matrix.passed() {
        failures.push(failure("m_matrix", format!("{} violations, first {:?}", sol.m_matrix.violations, sol.m_matrix.first_violation)));
    }
}

fn run_solve(p: &Problem, a: &Assertions) -> Outcome {
    let sol = match p.solve() {
        Ok(s) => s,
        Err(e) => return Outcome::error("solve", e),
    };
    let mut failures = vec![];
    m_matrix_check(&sol, a, &mut failures);
    let max_error = p.exact.as_ref().map(|exact| sol.max_error(|x| exact(&Point { xprime: x.xprime.clone(), xn: x.xn, t: p.t0 + x.t })));
    if let (Some(tol), Some(err)) = (a.max_error, max_error) {
        if !(err <= tol) {
            failures.push(failure("max_error", format!("max error {err:e} exceeds {tol:e}")));
        }
    }
    Outcome {
        results: json!({
            "nodes": sol.grid.node_count(),
            "steps": sol.grid.steps,
            "max_abs": sol.max_abs(),
            "max_value": sol.max_value(),
            "max_error": max_error,
            "m_matrix": sol.m_matrix,
        }),
        failures,
        artifacts: vec![Artifact { name: "solution.csv".into(), contents: solution_csv(&sol, p.t0) }],
    }
}

fn kappa_checks(fit: &FitReport, a: &Assertions, failures: &mut Vec<Failure>) {
    for (bound, name, ok) in [(a.kappa_min, "kappa_min", (|k: f64, b: f64| k >= b) as fn(f64, f64) -> bool), (a.kappa_max, "kappa_max", |k, b| k <= b)] {
        if let Some(b) = bound {
            match fit.kappa_hat {
                Some(k) if ok(k, b) => {}
                Some(k) => failures.push(failure(name, format!("kappa_hat = {k} violates {name} = {b}"))),
                None => failures.push(failure(name, "every deviation is zero; no slope to compare")),
            }
        }
    }
}

fn run_fit(job: &FitJob, a: &Assertions) -> Outcome {
    let rows = match &job.source {
        FitSubject::Rows(rows) => Ok(rows.clone()),
        FitSubject::Exact(u) => sup_deviation(u, &job.candidate, &job.center, &job.radii, job.gamma, &job.options),
        FitSubject::Fd(p) => match p.solve() {
            Ok(sol) => sup_deviation(&p.shifted(&sol), &job.candidate, &job.center, &job.radii, job.gamma, &job.options),
            Err(e) => return Outcome::error("solve", e),
        },
    };
    let fit = match rows.and_then(|r| fit_exponent(&r)) {
        Ok(f) => f,
        Err(e) => return Outcome::error("fit", e),
    };
    let mut failures = vec![];
    kappa_checks(&fit, a, &mut failures);
    let mut csv = String::from("r,sup_deviation\n");
    for r in &fit.rows {
        let _ = writeln!(csv, "{},{}", r.r, r.sup_deviation);
    }
    let measured: Vec<(f64, f64)> = fit.rows.iter().filter(|r| r.sup_deviation > 0.0).map(|r| (r.r, r.sup_deviation)).collect();
    let mut series = vec![Series { label: "sup |u - p|".into(), points: measured.clone(), dashed: false }];
    if let (Some(k), Some(c)) = (fit.kappa_hat, fit.c_hat) {
        series.push(Series { label: format!("C r^{k:.3}"), points: measured.iter().map(|&(r, _)| (r, c * r.powf(k))).collect(), dashed: true });
    }
    let svg = line_plot("sup deviation over shrinking cubes", Axis::log("r"), Axis::log("sup |u - p|"), &series);
    Outcome {
        results: json!({ "fit": fit, "geometry": job.options.geometry, "samples": job.options.samples }),
        failures,
        artifacts: vec![Artifact { name: "deviation.csv".into(), contents: csv }, Artifact { name: "deviation.svg".into(), contents: svg }],
    }
}

/// Whether the data are nonpositive at every node where they are used.
fn data_nonpositive(p: &Problem) -> bool {
    let g = &p.grid;
    let [f, g0, gb] = &p.data_fns;
    (0..=g.steps).all(|step| {
        let t = g.t(step);
        (0..=g.k).all(|k| {
            (0..g.nx()).all(|i| {
                let x = g.point(k, i, t);
                if g.is_boundary(k, i) {
                    gb(&x) <= 0.0
                } else {
                    f(&x) <= 0.0 && (step > 0 || g0(&x) <= 0.0)
                }
            })
        })
    })
}

fn run_maxprin(p: &Problem, barriers: &[Barrier], samples: usize, seed: u64, a: &Assertions) -> Outcome {
    let sol = match p.solve() {
        Ok(s) => s,
        Err(e) => return Outcome::error("solve", e),
    };
    let mut failures = vec![];
    m_matrix_check(&sol, a, &mut failures);
    let report = check_discrete_max_principle(&sol, &p.ibvp);
    if a.max_principle == Some(true) && !report.holds {
        failures.push(failure("max_principle", format!("max |u| = {:e} exceeds e(|f| + |g|) = {:e}", report.max_abs, report.bound)));
    }
    let nonpositive = data_nonpositive(p);
    if a.nonpositive == Some(true) && nonpositive && sol.max_value() > NONPOSITIVE_TOL {
        failures.push(failure("nonpositive", format!("data are nonpositive but max u = {:e}", sol.max_value())));
    }
    let barrier_reports: Vec<_> = barriers.iter().enumerate().map(|(i, b)| check_barrier_sign(b, samples, seed.wrapping_add(i as u64))).collect();
    if a.barriers == Some(true) {
        for r in barrier_reports.iter().filter(|r| !r.holds) {
            failures.push(failure("barriers", format!("{:?}: image in [{:e}, {:e}], expected {:?}", r.kind, r.min_image, r.max_image, r.expected)));
        }
    }
    Outcome {
        results: json!({
            "max_principle": report,
            "data_nonpositive": nonpositive,
            "m_matrix": sol.m_matrix,
            "barriers": barrier_reports,
        }),
        failures,
        artifacts: vec![],
    }
}

fn run_growth(p: &Problem, levels: &[f64], window: &GrowthWindow, a: &Assertions) -> Outcome {
    let sol = match p.solve() {
        Ok(s) => s,
        Err(e) => return Outcome::error("solve", e),
    };
    let gamma = sol.grid.gamma;
    let rows: Vec<GrowthRow> = match boundary_growth_ratio(&p.shifted(&sol), gamma, levels, window) {
        Ok(r) => r,
        Err(e) => return Outcome::error("growth", e),
    };
    let by_level = |cmp: fn(f64, f64) -> bool| rows.iter().fold(&rows[0], |best, r| if cmp(r.xn, best.xn) { r } else { best });
    let (finest, coarsest) = (by_level(|a, b| a < b), by_level(|a, b| a > b));
    // u = 0 near the boundary is no growth at all rather than 0/0.
    let growth = if finest.ratio == 0.0 { 0.0 } else { finest.ratio / coarsest.ratio };
    let mut failures = vec![];
    if let Some(max) = a.max_growth {
        if !(growth <= max) {
            failures.push(failure("max_growth", format!("finest/coarsest ratio {growth} exceeds {max}")));
        }
    }
    let gauge = if gamma.is_log_case() { "-x_n log x_n" } else { "x_n" };
    let mut csv = String::from("xn,ratio\n");
    for r in &rows {
        let _ = writeln!(csv, "{},{}", r.xn, r.ratio);
    }
    let svg = line_plot(
        &format!("max |u| / ({gauge}) near the boundary"),
        Axis::log("x_n"),
        Axis::linear("ratio"),
        &[Series { label: format!("gamma = {gamma}"), points: rows.iter().map(|r| (r.xn, r.ratio)).collect(), dashed: false }],
    );
    Outcome {
        results: json!({ "gauge": gauge, "rows": rows, "finest_over_coarsest": growth, "m_matrix": sol.m_matrix }),
        failures,
        artifacts: vec![Artifact { name: "growth.csv".into(), contents: csv }, Artifact { name: "growth.svg".into(), contents: svg }],
    }
}
