//! Implicit difference equations on groupoids and extraction of their
//! integrable parts.

mod classify;
mod extract;
mod sequence;

pub use classify::{chain_depth, classify_batch, classify_point, ClassifyOptions, Classification, DepthResult, Direction};
pub use extract::{extract_affine, inclusion_test, ChainReport, ChainStatus, Mode};
pub use sequence::{sequence_extract, sequence_extract_with, EquationSequence, SequenceChain};

use std::fmt;
use std::sync::Arc;

use crate::groupoid::Arrows;
use crate::numkernel::dual::constants;
use crate::numkernel::newton::gauss_newton;
use crate::numkernel::{AffineSubspace, Dual, EvalError, KernelError, TolerancePolicy, Vector};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DynamicsError {
    #[error("affine representation requires affine source and target maps")]
    NotAffine,
    #[error("expected dimension {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
    #[error("point is not in the equation set (residual {residual:e})")]
    NotMember { residual: f64 },
    #[error("sequence has no equation at index {0}")]
    MissingIndex(usize),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

type DualFn = dyn Fn(&[Dual]) -> Result<Vec<Dual>, EvalError> + Send + Sync;

/// A smooth map `ℝ^in → ℝ^out` evaluable over dual numbers.
#[derive(Clone)]
pub struct MapFn {
    in_dim: usize,
    out_dim: usize,
    f: Arc<DualFn>,
}

impl fmt::Debug for MapFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MapFn(ℝ^{} → ℝ^{})", self.in_dim, self.out_dim)
    }
}

impl MapFn {
    pub fn new<F>(in_dim: usize, out_dim: usize, f: F) -> Self
    where
        F: Fn(&[Dual]) -> Result<Vec<Dual>, EvalError> + Send + Sync + 'static,
    {
        Self { in_dim, out_dim, f: Arc::new(f) }
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    pub fn out_dim(&self) -> usize {
        self.out_dim
    }

    pub fn eval(&self, x: &[Dual]) -> Result<Vec<Dual>, EvalError> {
        if x.len() != self.in_dim {
            return Err(EvalError::Arity { expected: self.in_dim, found: x.len() });
        }
        let out = (self.f)(x)?;
        if out.len() != self.out_dim {
            return Err(EvalError::Arity { expected: self.out_dim, found: out.len() });
        }
        Ok(out)
    }

    /// Plain values; non-finite output is an error.
    pub fn values(&self, x: &[f64]) -> Result<Vec<f64>, EvalError> {
        let out: Vec<f64> = self.eval(&constants(x))?.into_iter().map(|d| d.value).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

/// How the set `E ⊂ G` is described.
#[derive(Clone, Debug)]
pub enum Representation {
    /// An affine subspace of the element chart.
    Affine(AffineSubspace),
    /// Zero set of `Φ: G → ℝ^m`.
    ConstraintMap(MapFn),
    /// Image of `ψ: ℝ^d → G`, with an optional membership residual on `G`.
    Parametrized { psi: MapFn, membership: Option<MapFn> },
}

/// A submanifold `E` of a groupoid, viewed as an implicit difference equation.
#[derive(Clone, Debug)]
pub struct ImplicitEquation<A> {
    pub arrows: A,
    pub rep: Representation,
    pub tol: TolerancePolicy,
}

impl<A: Arrows> ImplicitEquation<A> {
    pub fn affine(arrows: A, set: AffineSubspace) -> Result<Self, DynamicsError> {
        if !arrows.is_affine() {
            return Err(DynamicsError::NotAffine);
        }
        check_dim(arrows.element_dim(), set.ambient_dim())?;
        let tol = *set.tolerance();
        Ok(Self { arrows, rep: Representation::Affine(set), tol })
    }

    pub fn constraint_map(arrows: A, phi: MapFn, tol: TolerancePolicy) -> Result<Self, DynamicsError> {
        check_dim(arrows.element_dim(), phi.in_dim())?;
        Ok(Self { arrows, rep: Representation::ConstraintMap(phi), tol })
    }

    pub fn parametrized(
        arrows: A,
        psi: MapFn,
        membership: Option<MapFn>,
        tol: TolerancePolicy,
    ) -> Result<Self, DynamicsError> {
        check_dim(arrows.element_dim(), psi.out_dim())?;
        if let Some(m) = &membership {
            check_dim(arrows.element_dim(), m.in_dim())?;
        }
        Ok(Self { arrows, rep: Representation::Parametrized { psi, membership }, tol })
    }

    pub fn as_affine(&self) -> Option<&AffineSubspace> {
        match &self.rep {
            Representation::Affine(s) => Some(s),
            _ => None,
        }
    }

    /// Distance-like residual of `g` from `E`; zero on `E`.
    pub fn membership_residual(&self, g: &[f64]) -> Result<f64, DynamicsError> {
        check_dim(self.arrows.element_dim(), g.len())?;
        Ok(match &self.rep {
            Representation::Affine(s) => s.distance(&Vector::from_column_slice(g)),
            Representation::ConstraintMap(phi) => sup_norm(&phi.values(g)?),
            Representation::Parametrized { membership: Some(m), .. } => sup_norm(&m.values(g)?),
            Representation::Parametrized { psi, membership: None } => {
                let target = g.to_vec();
                let residual = |u: &[Dual]| -> Result<Vec<Dual>, EvalError> {
                    Ok(psi.eval(u)?.into_iter().zip(&target).map(|(a, b)| a - *b).collect())
                };
                match gauss_newton(residual, &Vector::zeros(psi.in_dim()), &self.tol) {
                    Ok(root) => root.residual,
                    Err(fail) => fail.residual,
                }
            }
        })
    }

    pub fn contains(&self, g: &[f64]) -> bool {
        let threshold = match self.rep {
            Representation::Affine(_) => self.tol.set_eq_tol,
            _ => self.tol.newton_tol,
        };
        self.membership_residual(g).is_ok_and(|r| r < threshold)
    }
}

fn check_dim(expected: usize, found: usize) -> Result<(), DynamicsError> {
    if expected == found {
        Ok(())
    } else {
        Err(DynamicsError::Dimension { expected, found })
    }
}

pub(crate) fn sup_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// True when `β(gᵢ) ≈ α(gᵢ₊₁)` for every consecutive pair.
pub fn is_admissible<A: Arrows>(arrows: &A, seq: &[Vec<f64>]) -> bool {
    seq.windows(2).all(|w| arrows.composable(&w[0], &w[1]))
}

/// True when `seq` is admissible and every element lies in `E`.
pub fn is_solution<A: Arrows>(seq: &[Vec<f64>], eq: &ImplicitEquation<A>) -> bool {
    is_admissible(&eq.arrows, seq) && seq.iter().all(|g| eq.contains(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::{PairGroupoid, Se2Group};
    use crate::numkernel::Matrix;

    fn shift_graph() -> ImplicitEquation<PairGroupoid> {
        // E = {(x, x + 1)}
        let m = Matrix::from_row_slice(1, 2, &[-1.0, 1.0]);
        let s = AffineSubspace::from_constraints(&m, &Vector::from_element(1, 1.0), TolerancePolicy::default()).unwrap();
        ImplicitEquation::affine(PairGroupoid::new(1), s).unwrap()
    }

    #[test]
    fn admissibility() {
        let g = PairGroupoid::new(1);
        assert!(is_admissible(&g, &[vec![1.0, 2.0], vec![2.0, 3.0]]));
        assert!(!is_admissible(&g, &[vec![1.0, 2.0], vec![3.0, 4.0]]));
        assert!(is_admissible(&Se2Group, &[vec![0.1, 2.0, 3.0], vec![-1.0, 0.0, 5.0]]));
    }

    #[test]
    fn solutions_of_shift_graph() {
        let eq = shift_graph();
        assert!(is_solution(&[vec![0.0, 1.0], vec![1.0, 2.0]], &eq));
        assert!(!is_solution(&[vec![0.0, 1.0], vec![1.0, 3.0]], &eq));
    }

    #[test]
    fn constant_constraint_map_is_empty() {
        let phi = MapFn::new(2, 1, |_x| Ok(vec![Dual::constant(1.0)]));
        let eq = ImplicitEquation::constraint_map(PairGroupoid::new(1), phi, TolerancePolicy::default()).unwrap();
        assert!(!is_solution(&[vec![0.0, 1.0]], &eq));
    }

    #[test]
    fn parametrized_membership_without_residual() {
        let psi = MapFn::new(1, 2, |u| Ok(vec![u[0].clone(), u[0].clone() * 2.0]));
        let eq = ImplicitEquation::parametrized(PairGroupoid::new(1), psi, None, TolerancePolicy::default()).unwrap();
        assert!(eq.contains(&[1.5, 3.0]));
        assert!(!eq.contains(&[1.5, 2.0]));
    }

    #[test]
    fn affine_requires_affine_arrows() {
        let s = AffineSubspace::full(6, TolerancePolicy::default());
        assert!(matches!(
            ImplicitEquation::affine(crate::groupoid::CotangentSe2, s),
            Err(DynamicsError::NotAffine)
        ));
    }
}
