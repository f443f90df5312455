use groupoid_flow::dae::DaeError;
use groupoid_flow::dynamics::DynamicsError;
use groupoid_flow::expr::ExprError;
use groupoid_flow::lagrangian::LagrangianError;
use groupoid_flow::nonholonomic::NonholonomicError;
use groupoid_flow::numkernel::{EvalError, KernelError};

/// Every failure the front end reports, grouped by exit code.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad file, schema, value or dimension. Exit 2.
    #[error("config error: {0}")]
    Config(String),
    /// A solver or structural check failed on valid input. Exit 3.
    #[error("numerical failure: {0}")]
    Numerical(String),
    /// Writing results failed. Exit 1.
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }
}

impl From<ExprError> for CliError {
    fn from(e: ExprError) -> Self {
        CliError::Config(format!("expression: {e}"))
    }
}

impl From<KernelError> for CliError {
    fn from(e: KernelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Unbound(_) | EvalError::Arity { .. } => CliError::Config(e.to_string()),
            EvalError::Domain(_) | EvalError::NonFinite => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<LagrangianError> for CliError {
    fn from(e: LagrangianError) -> Self {
        match e {
            LagrangianError::Dimension { .. } | LagrangianError::Groupoid(_) => CliError::Config(e.to_string()),
            LagrangianError::Eval(inner) => inner.into(),
            LagrangianError::Singular { .. } | LagrangianError::Failure(_) => CliError::Numerical(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::Eval(inner) => inner.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<DaeError> for CliError {
    fn from(e: DaeError) -> Self {
        match e {
            DaeError::HigherIndex { .. } | DaeError::Inconsistent => CliError::Numerical(e.to_string()),
            DaeError::Eval(inner) => inner.into(),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<NonholonomicError> for CliError {
    fn from(e: NonholonomicError) -> Self {
        match e {
            NonholonomicError::NotOnMc { .. } | NonholonomicError::RankDeficientBasis => CliError::Config(e.to_string()),
            NonholonomicError::Failure { .. } => CliError::Numerical(e.to_string()),
            NonholonomicError::Lagrangian(inner) => inner.into(),
            NonholonomicError::Eval(inner) => inner.into(),
        }
    }
}
