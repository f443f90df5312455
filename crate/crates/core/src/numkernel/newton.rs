//! Damped Gauss–Newton with pseudo-inverse steps and step halving.

use super::dual::{constants, jacobian, Dual};
use super::linalg::{inf_norm, rank_factor};
use super::{EvalError, Matrix, TolerancePolicy, Vector};

#[derive(Clone, Debug, PartialEq)]
pub struct Root {
    pub x: Vector,
    /// Residual infinity norm at `x`.
    pub residual: f64,
    pub iterations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FailureReason {
    MaxIterations,
    /// No step reduced the residual.
    Stalled,
    Evaluation(EvalError),
}

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("Gauss-Newton failed after {iterations} iterations ({reason:?}); residual {residual:e}")]
pub struct SolveFailure {
    pub residual: f64,
    pub iterations: usize,
    pub reason: FailureReason,
    /// Last iterate.
    pub x: Vector,
}

fn residual_only<F>(f: &F, x: &Vector) -> Result<Vec<f64>, EvalError>
where
    F: Fn(&[Dual]) -> Result<Vec<Dual>, EvalError>,
{
    let out = f(&constants(x.as_slice()))?;
    let r: Vec<f64> = out.iter().map(|d| d.value).collect();
    if r.iter().all(|v| v.is_finite()) {
        Ok(r)
    } else {
        Err(EvalError::NonFinite)
    }
}

fn residual_and_jacobian<F>(f: &F, x: &Vector) -> Result<(Vector, Matrix), EvalError>
where
    F: Fn(&[Dual]) -> Result<Vec<Dual>, EvalError>,
{
    let (vals, rows) = jacobian(f, x.as_slice())?;
    let r = Vector::from_vec(vals);
    let j = Matrix::from_fn(rows.len(), x.len(), |i, k| rows[i][k]);
    if r.iter().chain(j.iter()).all(|v| v.is_finite()) {
        Ok((r, j))
    } else {
        Err(EvalError::NonFinite)
    }
}

/// Find `x` with `‖F(x)‖∞ < newton_tol`. The Jacobian comes from forward-mode
/// AD over [`Dual`]; under- and over-determined systems are both accepted.
pub fn gauss_newton<F>(f: F, x0: &Vector, tol: &TolerancePolicy) -> Result<Root, SolveFailure>
where
    F: Fn(&[Dual]) -> Result<Vec<Dual>, EvalError>,
{
    let mut x = x0.clone();
    let mut last_residual = f64::INFINITY;
    let fail = |x: &Vector, residual, iterations, reason| SolveFailure { residual, iterations, reason, x: x.clone() };

    for it in 0..=tol.newton_max_iter {
        let (r, j) = match residual_and_jacobian(&f, &x) {
            Ok(v) => v,
            Err(e) => return Err(fail(&x, last_residual, it, FailureReason::Evaluation(e))),
        };
        let rn = inf_norm(r.as_slice());
        last_residual = rn;
        if rn < tol.newton_tol {
            return Ok(Root { x, residual: rn, iterations: it });
        }
        if it == tol.newton_max_iter {
            break;
        }
        let step = -(rank_factor(&j, tol).pseudo_inverse() * &r);
        if step.norm() <= 1e-15 * (1.0 + x.norm()) {
            return Err(fail(&x, rn, it, FailureReason::Stalled));
        }
        let r2 = r.norm();
        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let trial = &x + &step * alpha;
            if let Ok(rt) = residual_only(&f, &trial) {
                if Vector::from_vec(rt).norm() < r2 {
                    accepted = Some(trial);
                    break;
                }
            }
            alpha *= 0.5;
        }
        match accepted {
            Some(next) => x = next,
            None => return Err(fail(&x, rn, it, FailureReason::Stalled)),
        }
    }
    Err(fail(&x, last_residual, tol.newton_max_iter, FailureReason::MaxIterations))
}
