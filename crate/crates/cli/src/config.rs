//! TOML run configuration. Every file names its `kind`, which must match the
//! subcommand; `output` and `[tolerances]` are optional and shared, the rest
//! is kind-specific and strictly checked.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::de::DeserializeOwned;
use serde::Deserialize;

use groupoid_flow::numkernel::TolerancePolicy;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Del,
    Extract,
    Classify,
    Dae,
    Sleigh,
    Flow,
}

impl Kind {
    pub fn name(self) -> &'static str {
        match self {
            Kind::Del => "del",
            Kind::Extract => "extract",
            Kind::Classify => "classify",
            Kind::Dae => "dae",
            Kind::Sleigh => "sleigh",
            Kind::Flow => "flow",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ToleranceDef {
    rank_rel_tol: Option<f64>,
    newton_tol: Option<f64>,
    newton_max_iter: Option<usize>,
    set_eq_tol: Option<f64>,
}

/// A scalar given as a number or as an expression in `t`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Entry {
    Number(f64),
    Expr(String),
}

/// A discrete Lagrangian: either a built-in `catalog` entry with step `h`,
/// or an expression `expr` over `variables` with constant `params`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianDef {
    pub catalog: Option<String>,
    pub h: Option<f64>,
    pub expr: Option<String>,
    pub variables: Option<Vec<String>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// `pair` (default) or `se2`.
    pub realization: Option<String>,
}

/// An affine equation `{g : constraints · g = rhs}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationDef {
    /// `pair` (default) or `cotangent_pair`.
    pub realization: Option<String>,
    pub n: usize,
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DelConfig {
    pub lagrangian: LagrangianDef,
    pub initial: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtractConfig {
    /// `forward` (default), `backward` or `full`.
    pub mode: Option<String>,
    pub max_iter: Option<usize>,
    pub equation: EquationDef,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Classify `dL(g)` on the Lagrangian set for each point `g`...
    pub lagrangian: Option<LagrangianDef>,
    /// ...or classify the points themselves on an affine equation.
    pub equation: Option<EquationDef>,
    pub points: Vec<Vec<f64>>,
    pub depth: Option<usize>,
    pub seeds: Option<usize>,
    pub half_width: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DaeConfig {
    pub a: Vec<Vec<Entry>>,
    pub b: Vec<Vec<Entry>>,
    pub rhs: Vec<Entry>,
    #[serde(default)]
    pub t0: f64,
    pub h: f64,
    pub steps: usize,
    pub initial: Vec<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SleighConfig {
    pub m: f64,
    pub a: f64,
    pub b: f64,
    #[serde(alias = "J")]
    pub j: f64,
    /// `(θ, x, y)` on the constraint manifold.
    pub initial: Vec<f64>,
    pub steps: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    /// `H(q, p)` over `variables` (default `["q", "p"]`).
    pub hamiltonian: String,
    pub variables: Option<Vec<String>>,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    /// Flow time.
    pub t: f64,
    /// Initial `(q, p)` points.
    pub points: Vec<Vec<f64>>,
}

#[derive(Debug)]
pub enum Body {
    Del(DelConfig),
    Extract(ExtractConfig),
    Classify(ClassifyConfig),
    Dae(DaeConfig),
    Sleigh(SleighConfig),
    Flow(FlowConfig),
}

#[derive(Debug)]
pub struct RunConfig {
    pub kind: Kind,
    pub output: Option<PathBuf>,
    pub tolerances: TolerancePolicy,
    pub body: Body,
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

/// One-line rendering of a TOML error, with the line number when known.
fn toml_err(e: toml::de::Error, text: Option<&str>) -> CliError {
    let msg = e.message().trim().replace('\n', " ");
    match (e.span(), text) {
        (Some(span), Some(text)) => {
            let line = text[..span.start.min(text.len())].matches('\n').count() + 1;
            config_err(format!("line {line}: {msg}"))
        }
        _ => config_err(msg),
    }
}

fn body<T: DeserializeOwned>(table: toml::Table) -> Result<T, CliError> {
    toml::Value::Table(table).try_into().map_err(|e| toml_err(e, None))
}

/// Parse and validate a configuration for subcommand `expected`.
pub fn parse_config(text: &str, expected: Kind) -> Result<RunConfig, CliError> {
    let mut table: toml::Table = text.parse().map_err(|e| toml_err(e, Some(text)))?;
    let kind = match table.remove("kind") {
        Some(toml::Value::String(s)) => s,
        Some(other) => return Err(config_err(format!("`kind` must be a string, got {other}"))),
        None => return Err(config_err("missing `kind`")),
    };
    if kind != expected.name() {
        return Err(config_err(format!("config kind `{kind}` does not match subcommand `{}`", expected.name())));
    }
    let output = match table.remove("output") {
        Some(toml::Value::String(s)) => Some(PathBuf::from(s)),
        Some(other) => return Err(config_err(format!("`output` must be a string, got {other}"))),
        None => None,
    };
    let def: ToleranceDef = match table.remove("tolerances") {
        Some(toml::Value::Table(t)) => body(t)?,
        Some(other) => return Err(config_err(format!("`tolerances` must be a table, got {other}"))),
        None => ToleranceDef::default(),
    };
    let d = TolerancePolicy::default();
    let tolerances = TolerancePolicy {
        rank_rel_tol: def.rank_rel_tol.unwrap_or(d.rank_rel_tol),
        newton_tol: def.newton_tol.unwrap_or(d.newton_tol),
        newton_max_iter: def.newton_max_iter.unwrap_or(d.newton_max_iter),
        set_eq_tol: def.set_eq_tol.unwrap_or(d.set_eq_tol),
    };
    tolerances.validate()?;
    let body = match expected {
        Kind::Del => Body::Del(body(table)?),
        Kind::Extract => Body::Extract(body(table)?),
        Kind::Classify => Body::Classify(body(table)?),
        Kind::Dae => Body::Dae(body(table)?),
        Kind::Sleigh => Body::Sleigh(body(table)?),
        Kind::Flow => Body::Flow(body(table)?),
    };
    Ok(RunConfig { kind: expected, output, tolerances, body })
}
