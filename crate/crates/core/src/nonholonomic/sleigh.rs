use super::{ConstraintDistribution, ConstraintManifold, NonholonomicError, NonholonomicSystem};
use crate::expr::Field;
use crate::lagrangian::{DiscreteLagrangian, Realization};
use crate::numkernel::{EvalError, Matrix, Real, TolerancePolicy};

/// Chaplygin sleigh parameters: mass `m`, contact offsets `a`, `b`, inertia `J`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SleighParams {
    pub m: f64,
    pub a: f64,
    pub b: f64,
    pub j: f64,
}

impl SleighParams {
    pub fn validate(&self) -> Result<(), String> {
        let finite = [self.m, self.a, self.b, self.j].iter().all(|v| v.is_finite());
        if finite && self.m > 0.0 && self.j > 0.0 {
            Ok(())
        } else {
            Err(format!("sleigh parameters need finite values with m > 0 and J > 0, got {self:?}"))
        }
    }

    /// The inertia matrix 𝕁.
    pub fn inertia(&self) -> Matrix {
        let SleighParams { m, a, b, j } = *self;
        Matrix::from_row_slice(
            3,
            3,
            &[j / 2.0 + m * a * a, m * a * b, m * a, m * a * b, j / 2.0 + m * b * b, m * b, m * a, m * b, m],
        )
    }

    /// `L(A) = ½ Tr(A 𝕁 Aᵀ) − Tr(A 𝕁)` from the homogeneous matrix.
    pub fn trace_form(&self, g: &[f64]) -> f64 {
        let a = crate::groupoid::se2::matrix(g);
        let jm = self.inertia();
        0.5 * (&a * &jm * a.transpose()).trace() - (&a * &jm).trace()
    }
}

/// Coordinate form of the sleigh Lagrangian on `(θ, x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SleighLagrangian(pub SleighParams);

impl Field for SleighLagrangian {
    fn arity(&self) -> usize {
        3
    }

    fn eval<T: Real>(&self, g: &[T]) -> Result<T, EvalError> {
        if g.len() != 3 {
            return Err(EvalError::Arity { expected: 3, found: g.len() });
        }
        let SleighParams { m, a, b, j } = self.0;
        let (th, x, y) = (&g[0], g[1].clone(), g[2].clone());
        let c1 = x.clone() * (m * a) + y.clone() * (m * b) - (m * a * a + m * b * b + j);
        let c2 = y.clone() * (m * a) - x.clone() * (m * b);
        let quad = ((x - a).square() + (y - b).square()) * (m / 2.0);
        Ok(c1 * th.cos() + c2 * th.sin() + quad + 0.5 * (j - m))
    }
}

/// `M_c = {(1 − cos θ) x − y sin θ = 0}` with chart `(θ, u) ↦ (θ, u, u tan(θ/2))`
/// on `θ ∈ (−π, π)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SleighManifold;

impl ConstraintManifold for SleighManifold {
    fn chart_dim(&self) -> usize {
        2
    }

    fn residual<T: Real>(&self, g: &[T]) -> T {
        (T::one() - g[0].cos()) * g[1].clone() - g[2].clone() * g[0].sin()
    }

    fn chart<T: Real>(&self, u: &[T]) -> Vec<T> {
        let t = (u[0].clone() * 0.5).tan();
        vec![u[0].clone(), u[1].clone(), u[1].clone() * t]
    }

    fn chart_inverse(&self, g: &[f64]) -> Vec<f64> {
        let u = super::wrap_chart(&g[..2]);
        if u[0].abs() >= std::f64::consts::PI {
            vec![0.0, u[1]]
        } else {
            u
        }
    }

    fn in_domain(&self, u: &[f64]) -> bool {
        u[0].abs() < std::f64::consts::PI && u.iter().all(|v| v.is_finite())
    }
}

pub fn sleigh_system(
    params: SleighParams,
    tol: TolerancePolicy,
) -> Result<NonholonomicSystem<SleighLagrangian, SleighManifold>, NonholonomicError> {
    params.validate().map_err(|_| NonholonomicError::Eval(EvalError::Domain("invalid sleigh parameters".into())))?;
    let lagrangian = DiscreteLagrangian::new(Realization::Se2, SleighLagrangian(params))?;
    let basis = Matrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let distribution = ConstraintDistribution::new(basis, &tol)?;
    NonholonomicSystem::new(lagrangian, SleighManifold, distribution, tol)
}
