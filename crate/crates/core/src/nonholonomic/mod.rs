//! Discrete nonholonomic systems `(L, M_c, D_c)` on SE(2): restricted
//! Legendre transforms, the nonholonomic DEL residual and stepper, and the
//! Chaplygin sleigh.

mod sleigh;

pub use sleigh::{sleigh_system, SleighLagrangian, SleighManifold, SleighParams};

use crate::dynamics::{ImplicitEquation, MapFn};
use crate::expr::Field;
use crate::groupoid::{se2, CotangentSe2, Groupoid, RestrictedArrows, Se2Group};
use crate::lagrangian::{DiscreteLagrangian, LagrangianError, Realization, Side};
use crate::numkernel::dual::constants;
use crate::numkernel::newton::gauss_newton;
use crate::numkernel::{Dual, EvalError, Matrix, Real, TolerancePolicy, Vector};
use crate::output::{csv_header, csv_row, num};

/// Membership threshold for `M_c` on inputs.
pub const MC_TOL: f64 = 1e-8;
/// Distinct roots of `nh_evolve` differ by more than this.
pub const ROOT_SEPARATION: f64 = 1e-8;
/// Angle grid size for the fallback sweep in `nh_evolve`.
const FALLBACK_ANGLES: usize = 16;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum NonholonomicError {
    #[error("element is not on the constraint manifold (residual {residual:e})")]
    NotOnMc { residual: f64 },
    #[error("no nonholonomic successor found (best residual {residual:e})")]
    Failure { residual: f64 },
    #[error("distribution basis must have full column rank")]
    RankDeficientBasis,
    #[error(transparent)]
    Lagrangian(#[from] LagrangianError),
    #[error(transparent)]
    Eval(#[from] EvalError),
}

/// `D_c ⊂ se(2)` spanned by the columns of `basis`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintDistribution {
    basis: Matrix,
}

impl ConstraintDistribution {
    pub fn new(basis: Matrix, tol: &TolerancePolicy) -> Result<Self, NonholonomicError> {
        if basis.nrows() != 3 || crate::numkernel::rank_factor(&basis, tol).rank != basis.ncols() {
            return Err(NonholonomicError::RankDeficientBasis);
        }
        Ok(Self { basis })
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `i*_{D_c}`: restrict a covector to `D_c` coordinates.
    pub fn restrict<T: Real>(&self, covector: &[T]) -> Vec<T> {
        (0..self.basis.ncols())
            .map(|j| covector.iter().enumerate().fold(T::zero(), |acc, (i, c)| acc + c.clone() * self.basis[(i, j)]))
            .collect()
    }
}

/// A constraint submanifold `M_c ⊂ SE(2)` with a global chart.
pub trait ConstraintManifold: Clone + Send + Sync + 'static {
    fn chart_dim(&self) -> usize;
    /// Zero exactly on `M_c`.
    fn residual<T: Real>(&self, g: &[T]) -> T;
    fn chart<T: Real>(&self, u: &[T]) -> Vec<T>;
    /// Chart coordinates of a point on (or near) `M_c`.
    fn chart_inverse(&self, g: &[f64]) -> Vec<f64>;
    fn in_domain(&self, u: &[f64]) -> bool;
}

#[derive(Clone, Debug)]
pub struct NonholonomicSystem<F, M> {
    pub lagrangian: DiscreteLagrangian<F>,
    pub manifold: M,
    pub distribution: ConstraintDistribution,
    pub tol: TolerancePolicy,
}

/// Result of one nonholonomic step.
#[derive(Clone, Debug, PartialEq)]
pub struct NhStep {
    /// Root nearest to the seed.
    pub h: Vec<f64>,
    /// Every distinct root found, nearest first.
    pub roots: Vec<Vec<f64>>,
}

impl NhStep {
    pub fn multiple_roots(&self) -> bool {
        self.roots.len() > 1
    }
}

impl<F: Field, M: ConstraintManifold> NonholonomicSystem<F, M> {
    pub fn new(
        lagrangian: DiscreteLagrangian<F>,
        manifold: M,
        distribution: ConstraintDistribution,
        tol: TolerancePolicy,
    ) -> Result<Self, NonholonomicError> {
        if lagrangian.realization != Realization::Se2 {
            return Err(LagrangianError::Dimension { expected: 3, found: lagrangian.element_dim() }.into());
        }
        if manifold.chart_dim() != distribution.dim() {
            return Err(NonholonomicError::RankDeficientBasis);
        }
        Ok(Self { lagrangian, manifold, distribution, tol })
    }

    pub fn mc_residual(&self, g: &[f64]) -> f64 {
        self.manifold.residual(g).abs()
    }

    fn check_on_mc(&self, g: &[f64]) -> Result<(), NonholonomicError> {
        let residual = self.mc_residual(g);
        if residual < MC_TOL {
            Ok(())
        } else {
            Err(NonholonomicError::NotOnMc { residual })
        }
    }

    fn restricted_legendre<T: Real>(&self, g: &[T], side: Side) -> Result<Vec<T>, EvalError> {
        Ok(self.distribution.restrict(&self.lagrangian.legendre_generic(g, side)?))
    }

    /// `i*_{D_c} ∘ 𝔽^±L` at a point of `M_c`.
    pub fn nh_legendre(&self, g: &[f64], side: Side) -> Result<Vec<f64>, NonholonomicError> {
        self.check_on_mc(g)?;
        Ok(self.restricted_legendre(g, side)?)
    }

    /// `𝔽⁺(L, M_c, D_c)(g) − 𝔽⁻(L, M_c, D_c)(h)`.
    pub fn nh_del_residual(&self, g: &[f64], h: &[f64]) -> Result<Vec<f64>, NonholonomicError> {
        let plus = self.nh_legendre(g, Side::Plus)?;
        let minus = self.nh_legendre(h, Side::Minus)?;
        Ok(plus.iter().zip(&minus).map(|(a, b)| a - b).collect())
    }

    /// Solve the nonholonomic DEL equations for `h ∈ M_c` in chart
    /// coordinates. Starts from `seed` (default `g`) and from its mirror
    /// `θ ↦ sign(θ)π − θ`, which reaches the second branch of `sin θ₂ = sin θ₁`.
    /// Only when neither converges is a coarse sweep over `θ` tried.
    pub fn nh_evolve(&self, g: &[f64], seed: Option<&[f64]>) -> Result<NhStep, NonholonomicError> {
        let target = self.nh_legendre(g, Side::Plus)?;
        let seed_elem = seed.unwrap_or(g).to_vec();
        let u0 = self.manifold.chart_inverse(&seed_elem);
        let mut starts = vec![u0.clone()];
        if u0[0] != 0.0 {
            let mut mirrored = u0.clone();
            mirrored[0] = u0[0].signum() * std::f64::consts::PI - u0[0];
            if self.manifold.in_domain(&mirrored) && (mirrored[0] - u0[0]).abs() > ROOT_SEPARATION {
                starts.push(mirrored);
            }
        }
        let residual = |u: &[Dual]| -> Result<Vec<Dual>, EvalError> {
            let h = self.manifold.chart(u);
            let minus = self.restricted_legendre(&h, Side::Minus)?;
            Ok(minus.into_iter().zip(&target).map(|(a, b)| a - *b).collect())
        };
        let mut roots: Vec<Vec<f64>> = Vec::new();
        let mut best = f64::INFINITY;
        self.collect_roots(&residual, &starts, &mut roots, &mut best);
        if roots.is_empty() {
            // Far branches (e.g. the sleigh turning nearly half a revolution)
            // are outside both basins; sweep the angle before giving up.
            let sweep: Vec<Vec<f64>> = (1..FALLBACK_ANGLES)
                .map(|k| {
                    let mut u = u0.clone();
                    u[0] = -std::f64::consts::PI + k as f64 * std::f64::consts::TAU / FALLBACK_ANGLES as f64;
                    u
                })
                .collect();
            self.collect_roots(&residual, &sweep, &mut roots, &mut best);
        }
        if roots.is_empty() {
            return Err(NonholonomicError::Failure { residual: best });
        }
        roots.sort_by(|a, b| {
            Se2Group.element_distance(a, &seed_elem).total_cmp(&Se2Group.element_distance(b, &seed_elem))
        });
        Ok(NhStep { h: roots[0].clone(), roots })
    }

    fn collect_roots<R>(&self, residual: &R, starts: &[Vec<f64>], roots: &mut Vec<Vec<f64>>, best: &mut f64)
    where
        R: Fn(&[Dual]) -> Result<Vec<Dual>, EvalError>,
    {
        for s in starts {
            match gauss_newton(residual, &Vector::from_column_slice(s), &self.tol) {
                Ok(root) if self.manifold.in_domain(root.x.as_slice()) => {
                    let h: Vec<f64> = self.manifold.chart(&constants(root.x.as_slice())).iter().map(|d| d.value).collect();
                    if roots.iter().all(|r| Se2Group.element_distance(r, &h) > ROOT_SEPARATION) {
                        roots.push(h);
                    }
                }
                Ok(root) => *best = best.min(root.residual),
                Err(fail) => *best = best.min(fail.residual),
            }
        }
    }
}

impl<F: Field + Clone + 'static, M: ConstraintManifold> NonholonomicSystem<F, M> {
    /// `S_(L, M_c) = dL(M_c)` with source and target restricted to `D_c*`.
    pub fn constrained_lagrangian_set(&self) -> ImplicitEquation<RestrictedArrows<CotangentSe2>> {
        let arrows = RestrictedArrows::new(CotangentSe2, self.distribution.basis().clone());
        let (lag, mc) = (self.lagrangian.clone(), self.manifold.clone());
        let psi = MapFn::new(mc.chart_dim(), 6, move |u| lag.differential_generic(&mc.chart(u)));
        let (lag, mc) = (self.lagrangian.clone(), self.manifold.clone());
        let membership = MapFn::new(6, 4, move |z| {
            let grad = lag.gradient(&z[..3])?;
            let mut out: Vec<Dual> = z[3..].iter().zip(grad).map(|(p, d)| p.clone() - d).collect();
            out.push(mc.residual(&z[..3]));
            Ok(out)
        });
        ImplicitEquation::parametrized(arrows, psi, Some(membership), self.tol).expect("dimensions agree by construction")
    }
}

/// One row of a nonholonomic trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct NhTrajectoryStep {
    pub element: Vec<f64>,
    pub mc_residual: f64,
    /// `‖nh_del_residual‖∞` against the previous element (0 for the first).
    pub del_residual: f64,
}

/// `steps` nonholonomic steps from `g0`, each seeded with the current element.
pub fn nh_trajectory<F: Field, M: ConstraintManifold>(
    sys: &NonholonomicSystem<F, M>,
    g0: &[f64],
    steps: usize,
) -> Result<Vec<NhTrajectoryStep>, NonholonomicError> {
    sys.check_on_mc(g0)?;
    let mut out = vec![NhTrajectoryStep { element: g0.to_vec(), mc_residual: sys.mc_residual(g0), del_residual: 0.0 }];
    for _ in 0..steps {
        let g = out.last().expect("nonempty").element.clone();
        let step = sys.nh_evolve(&g, None)?;
        let del = crate::dynamics::sup_norm(&sys.nh_del_residual(&g, &step.h)?);
        out.push(NhTrajectoryStep { mc_residual: sys.mc_residual(&step.h), element: step.h, del_residual: del });
    }
    Ok(out)
}

pub fn nh_trajectory_csv(steps: &[NhTrajectoryStep]) -> String {
    let mut out = csv_header("sleigh");
    out.push_str(&csv_row(["step", "theta", "x", "y", "mc_residual", "nhdel_residual"]));
    for (i, s) in steps.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(s.element.iter().map(|&v| num(v)));
        row.push(num(s.mc_residual));
        row.push(num(s.del_residual));
        out.push_str(&csv_row(row));
    }
    out
}

/// Wrap the angle of a chart point.
pub(crate) fn wrap_chart<T: Real>(u: &[T]) -> Vec<T> {
    let mut v = u.to_vec();
    v[0] = se2::wrap_angle(v[0].clone());
    v
}
