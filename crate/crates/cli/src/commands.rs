//! One handler per subcommand. Handlers build their whole output in memory.

use groupoid_flow::dae::{DaeError, LinearDae, MatrixFn, VectorFn};
use groupoid_flow::dynamics::{
    classify_batch, extract_affine, ChainStatus, ClassifyOptions, DepthResult, ImplicitEquation, Mode,
};
use groupoid_flow::expr::{ExprField, Field};
use groupoid_flow::groupoid::{Arrows, Cotangent, CotangentPairGroupoid, PairGroupoid};
use groupoid_flow::lagrangian::catalog::{FreeParticle, MidpointOscillator, SingularExample};
use groupoid_flow::lagrangian::{
    del_trajectory, flow_lagrangian_set, trajectory_csv, DiscreteLagrangian, HamiltonianSystem, Realization,
};
use groupoid_flow::nonholonomic::{nh_trajectory, nh_trajectory_csv, sleigh_system, SleighParams};
use groupoid_flow::numkernel::{matrix_from_rows, vector_from_slice, AffineSubspace, EvalError, Matrix, Real, TolerancePolicy, Vector};
use groupoid_flow::output::{csv_header, csv_row, num};
use groupoid_flow::par::Exec;

use crate::config::{
    Body, ClassifyConfig, DaeConfig, DelConfig, Entry, EquationDef, ExtractConfig, FlowConfig, LagrangianDef,
    RunConfig, SleighConfig,
};
use crate::CliError;

/// How a run ended once its output exists.
#[derive(Debug)]
pub enum Status {
    Success,
    /// Extraction did not stabilize or a classification was inconclusive. Exit 4.
    Undecided(String),
    /// A numerical failure after partial output was produced. Exit 3.
    Failed(CliError),
}

#[derive(Debug)]
pub struct Outcome {
    pub csv: String,
    /// Human-readable report, when the subcommand has one.
    pub report: Option<String>,
    pub status: Status,
}

impl Outcome {
    fn success(csv: String) -> Self {
        Self { csv, report: None, status: Status::Success }
    }
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn check_len(what: &str, expected: usize, found: usize) -> Result<(), CliError> {
    if expected == found {
        Ok(())
    } else {
        Err(config_err(format!("{what}: expected {expected} values, found {found}")))
    }
}

fn positive(what: &str, v: f64) -> Result<f64, CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(config_err(format!("{what} must be finite and positive, got {v}")))
    }
}

/// A Lagrangian or Hamiltonian chosen at run time.
#[derive(Clone, Debug)]
pub enum AnyField {
    Oscillator(MidpointOscillator),
    Free(FreeParticle),
    Singular(SingularExample),
    Expr(ExprField),
}

impl Field for AnyField {
    fn arity(&self) -> usize {
        match self {
            AnyField::Oscillator(f) => f.arity(),
            AnyField::Free(f) => f.arity(),
            AnyField::Singular(f) => f.arity(),
            AnyField::Expr(f) => f.arity(),
        }
    }

    fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        match self {
            AnyField::Oscillator(f) => f.eval(x),
            AnyField::Free(f) => f.eval(x),
            AnyField::Singular(f) => f.eval(x),
            AnyField::Expr(f) => f.eval(x),
        }
    }
}

fn expr_field(src: &str, vars: &[String], params: &std::collections::BTreeMap<String, f64>) -> Result<ExprField, CliError> {
    let vars: Vec<&str> = vars.iter().map(String::as_str).collect();
    let params: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
    Ok(ExprField::parse(src, &vars, &params)?)
}

pub fn build_lagrangian(def: &LagrangianDef) -> Result<DiscreteLagrangian<AnyField>, CliError> {
    match (&def.catalog, &def.expr) {
        (Some(name), None) => {
            if def.variables.is_some() || !def.params.is_empty() || def.realization.is_some() {
                return Err(config_err("catalog Lagrangians take only `h`"));
            }
            let h = positive("lagrangian.h", def.h.ok_or_else(|| config_err("catalog Lagrangian needs `h`"))?)?;
            let (realization, field) = match name.as_str() {
                "midpoint_oscillator" => (Realization::Pair(1), AnyField::Oscillator(MidpointOscillator { h })),
                "free_particle" => (Realization::Pair(1), AnyField::Free(FreeParticle { h })),
                "singular" => (Realization::Pair(2), AnyField::Singular(SingularExample { h })),
                other => {
                    return Err(config_err(format!(
                        "unknown catalog Lagrangian `{other}` (expected midpoint_oscillator, free_particle or singular)"
                    )))
                }
            };
            Ok(DiscreteLagrangian::new(realization, field)?)
        }
        (None, Some(src)) => {
            if def.h.is_some() {
                return Err(config_err("`h` applies to catalog Lagrangians; pass it through `params`"));
            }
            let vars = def.variables.as_ref().ok_or_else(|| config_err("expression Lagrangian needs `variables`"))?;
            let realization = match def.realization.as_deref().unwrap_or("pair") {
                "pair" if !vars.is_empty() && vars.len() % 2 == 0 => Realization::Pair(vars.len() / 2),
                "pair" => return Err(config_err("pair Lagrangians need an even, nonzero number of variables")),
                "se2" => Realization::Se2,
                other => return Err(config_err(format!("unknown realization `{other}` (expected pair or se2)"))),
            };
            let field = expr_field(src, vars, &def.params)?;
            Ok(DiscreteLagrangian::new(realization, AnyField::Expr(field))?)
        }
        _ => Err(config_err("lagrangian needs exactly one of `catalog` or `expr`")),
    }
}

enum AffineEquation {
    Pair(ImplicitEquation<PairGroupoid>),
    CotangentPair(ImplicitEquation<Cotangent>),
}

fn build_equation(def: &EquationDef, tol: TolerancePolicy) -> Result<AffineEquation, CliError> {
    if def.n == 0 {
        return Err(config_err("equation.n must be positive"));
    }
    let m = matrix_from_rows(&def.constraints)?;
    let c = vector_from_slice(&def.rhs)?;
    check_len("equation.rhs", m.nrows(), c.len())?;
    let build = |dim: usize| -> Result<AffineSubspace, CliError> {
        if m.nrows() > 0 {
            check_len("equation.constraints row", dim, m.ncols())?;
        }
        let m = if m.nrows() == 0 { Matrix::zeros(0, dim) } else { m.clone() };
        Ok(AffineSubspace::from_constraints(&m, &c, tol)?)
    };
    match def.realization.as_deref().unwrap_or("pair") {
        "pair" => Ok(AffineEquation::Pair(ImplicitEquation::affine(PairGroupoid::new(def.n), build(2 * def.n)?)?)),
        "cotangent_pair" => {
            let arrows = Cotangent::Pair(CotangentPairGroupoid::new(def.n));
            Ok(AffineEquation::CotangentPair(ImplicitEquation::affine(arrows, build(4 * def.n)?)?))
        }
        other => Err(config_err(format!("unknown realization `{other}` (expected pair or cotangent_pair)"))),
    }
}

pub fn dispatch(cfg: &RunConfig, seed: u64) -> Result<Outcome, CliError> {
    let tol = cfg.tolerances;
    match &cfg.body {
        Body::Del(c) => del(c, &tol),
        Body::Extract(c) => extract(c, tol),
        Body::Classify(c) => classify(c, tol, seed),
        Body::Dae(c) => dae(c, tol),
        Body::Sleigh(c) => sleigh(c, tol),
        Body::Flow(c) => flow(c),
    }
}

fn del(c: &DelConfig, tol: &TolerancePolicy) -> Result<Outcome, CliError> {
    let lag = build_lagrangian(&c.lagrangian)?;
    check_len("initial", lag.element_dim(), c.initial.len())?;
    vector_from_slice(&c.initial)?;
    let steps = del_trajectory(&lag, &c.initial, c.steps, tol)?;
    Ok(Outcome::success(trajectory_csv("del", &steps)))
}

fn parse_mode(mode: Option<&str>) -> Result<Mode, CliError> {
    match mode.unwrap_or("forward") {
        "forward" => Ok(Mode::Forward),
        "backward" => Ok(Mode::Backward),
        "full" => Ok(Mode::Full),
        other => Err(config_err(format!("unknown mode `{other}` (expected forward, backward or full)"))),
    }
}

fn extract(c: &ExtractConfig, tol: TolerancePolicy) -> Result<Outcome, CliError> {
    let mode = parse_mode(c.mode.as_deref())?;
    let report = match build_equation(&c.equation, tol)? {
        AffineEquation::Pair(eq) => extract_affine(&eq, mode, c.max_iter)?,
        AffineEquation::CotangentPair(eq) => extract_affine(&eq, mode, c.max_iter)?,
    };
    let status = match report.status {
        ChainStatus::Stabilized(_) => Status::Success,
        ChainStatus::NotStabilized(n) => Status::Undecided(format!("chain did not stabilize within {n} iterations")),
    };
    Ok(Outcome { csv: report.to_csv(), report: Some(report.to_text()), status })
}

fn classify_rows<A: Arrows>(
    eq: &ImplicitEquation<A>,
    points: &[Vec<f64>],
    opts: &ClassifyOptions,
) -> Result<Vec<(DepthResult, DepthResult)>, CliError> {
    for p in points {
        check_len("point", eq.arrows.element_dim(), p.len())?;
        vector_from_slice(p)?;
    }
    Ok(classify_batch(eq, points, opts)?.into_iter().map(|c| (c.forward, c.backward)).collect())
}

fn classify(c: &ClassifyConfig, tol: TolerancePolicy, seed: u64) -> Result<Outcome, CliError> {
    let d = ClassifyOptions::default();
    let opts = ClassifyOptions {
        depth: c.depth.unwrap_or(d.depth),
        seeds: c.seeds.unwrap_or(d.seeds),
        half_width: positive("half_width", c.half_width.unwrap_or(d.half_width))?,
        rng_seed: seed,
        exec: Exec::default(),
    };
    if opts.seeds == 0 {
        return Err(config_err("seeds must be at least 1"));
    }
    let rows = match (&c.lagrangian, &c.equation) {
        (Some(def), None) => {
            let lag = build_lagrangian(def)?;
            let mut covectors = Vec::with_capacity(c.points.len());
            for p in &c.points {
                check_len("point", lag.element_dim(), p.len())?;
                covectors.push(lag.differential(p)?);
            }
            classify_rows(&lag.lagrangian_set(tol), &covectors, &opts)?
        }
        (None, Some(def)) => match build_equation(def, tol)? {
            AffineEquation::Pair(eq) => classify_rows(&eq, &c.points, &opts)?,
            AffineEquation::CotangentPair(eq) => classify_rows(&eq, &c.points, &opts)?,
        },
        _ => return Err(config_err("classify needs exactly one of `lagrangian` or `equation`")),
    };
    let mut csv = csv_header("classify");
    csv.push_str(&csv_row(["point", "direction", "depth", "requested", "inconclusive", "failing_residual"]));
    let mut inconclusive = Vec::new();
    for (i, (fwd, bwd)) in rows.iter().enumerate() {
        for (dir, r) in [("forward", fwd), ("backward", bwd)] {
            if r.inconclusive {
                inconclusive.push(format!("point {i} {dir}"));
            }
            csv.push_str(&csv_row([
                i.to_string(),
                dir.to_string(),
                r.depth.to_string(),
                r.requested.to_string(),
                u8::from(r.inconclusive).to_string(),
                r.failing_residual.map(num).unwrap_or_default(),
            ]));
        }
    }
    let status = if inconclusive.is_empty() {
        Status::Success
    } else {
        Status::Undecided(format!("inconclusive: {}", inconclusive.join(", ")))
    };
    Ok(Outcome { csv, report: None, status })
}

/// A coefficient entry evaluated pointwise in `t`.
#[derive(Clone)]
enum Coefficient {
    Const(f64),
    Expr(ExprField),
}

impl Coefficient {
    fn new(e: &Entry) -> Result<Self, CliError> {
        match e {
            Entry::Number(v) if v.is_finite() => Ok(Coefficient::Const(*v)),
            Entry::Number(v) => Err(config_err(format!("non-finite coefficient {v}"))),
            Entry::Expr(src) => Ok(Coefficient::Expr(ExprField::parse(src, &["t"], &[])?)),
        }
    }

    fn at(&self, t: f64) -> Result<f64, EvalError> {
        match self {
            Coefficient::Const(v) => Ok(*v),
            Coefficient::Expr(f) => f.eval(&[t]),
        }
    }
}

fn matrix_fn(name: &str, rows: &[Vec<Entry>], n: usize) -> Result<MatrixFn, CliError> {
    check_len(name, n, rows.len())?;
    let mut coeffs = Vec::with_capacity(n * n);
    for row in rows {
        check_len(&format!("{name} row"), n, row.len())?;
        for e in row {
            coeffs.push(Coefficient::new(e)?);
        }
    }
    Ok(Box::new(move |t| {
        let vals = coeffs.iter().map(|c| c.at(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(Matrix::from_row_slice(n, n, &vals))
    }))
}

fn vector_fn(entries: &[Entry], n: usize) -> Result<VectorFn, CliError> {
    check_len("rhs", n, entries.len())?;
    let coeffs = entries.iter().map(Coefficient::new).collect::<Result<Vec<_>, _>>()?;
    Ok(Box::new(move |t| Ok(Vector::from_vec(coeffs.iter().map(|c| c.at(t)).collect::<Result<Vec<_>, _>>()?))))
}

fn dae(c: &DaeConfig, tol: TolerancePolicy) -> Result<Outcome, CliError> {
    let n = c.a.len();
    if n == 0 {
        return Err(config_err("`a` must be a nonempty square matrix"));
    }
    if c.steps == 0 {
        return Err(config_err("steps must be at least 1"));
    }
    check_len("initial", n, c.initial.len())?;
    let dae = LinearDae::new(n, matrix_fn("a", &c.a, n)?, matrix_fn("b", &c.b, n)?, vector_fn(&c.rhs, n)?, c.t0, c.h, tol)?;
    let traj = dae.integrate(&vector_from_slice(&c.initial)?, c.steps)?;
    let status = match traj.aborted.clone() {
        Some(e @ DaeError::HigherIndex { .. }) => Status::Failed(e.into()),
        Some(e) => return Err(e.into()),
        None => Status::Success,
    };
    Ok(Outcome { csv: traj.to_csv(), report: None, status })
}

fn sleigh(c: &SleighConfig, tol: TolerancePolicy) -> Result<Outcome, CliError> {
    let params = SleighParams { m: c.m, a: c.a, b: c.b, j: c.j };
    params.validate().map_err(CliError::Config)?;
    check_len("initial", 3, c.initial.len())?;
    vector_from_slice(&c.initial)?;
    let sys = sleigh_system(params, tol)?;
    Ok(Outcome::success(nh_trajectory_csv(&nh_trajectory(&sys, &c.initial, c.steps)?)))
}

fn flow(c: &FlowConfig) -> Result<Outcome, CliError> {
    let vars = c.variables.clone().unwrap_or_else(|| vec!["q".into(), "p".into()]);
    if vars.is_empty() || !vars.len().is_multiple_of(2) {
        return Err(config_err("flow needs an even, nonzero number of variables (q…, p…)"));
    }
    if !c.t.is_finite() {
        return Err(config_err("flow time must be finite"));
    }
    let n = vars.len() / 2;
    let hs = HamiltonianSystem::new(expr_field(&c.hamiltonian, &vars, &c.params)?, n)?;
    for p in &c.points {
        check_len("point", 2 * n, p.len())?;
        vector_from_slice(p)?;
    }
    let points = flow_lagrangian_set(&hs, c.t, &c.points, Exec::default())?;
    let mut csv = csv_header("flow");
    let mut head = vec!["point".to_string()];
    for block in ["q0", "q1", "p0", "p1"] {
        head.extend((0..n).map(|i| format!("{block}_{i}")));
    }
    csv.push_str(&csv_row(head));
    for (i, p) in points.iter().enumerate() {
        csv.push_str(&csv_row(std::iter::once(i.to_string()).chain(p.iter().map(|&v| num(v)))));
    }
    Ok(Outcome::success(csv))
}
