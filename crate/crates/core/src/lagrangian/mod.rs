//! Discrete Lagrangian mechanics on the pair groupoid and on SE(2):
//! differentials, Legendre transforms, the discrete Euler–Lagrange operator,
//! evolution maps and the Lagrangian set `S_L = dL(G)`.

pub mod catalog;
mod hamiltonian;

pub use hamiltonian::{flow_lagrangian_set, hamiltonian_flow, HamiltonianSystem};

use crate::dynamics::{ImplicitEquation, MapFn};
use crate::expr::Field;
use crate::groupoid::{Arrows, Cotangent, CotangentPairGroupoid, CotangentSe2, GroupoidError};
use crate::numkernel::dual::{gradient, jacobian};
use crate::numkernel::newton::{gauss_newton, SolveFailure};
use crate::numkernel::{rank_factor, Dual, EvalError, Matrix, Real, TolerancePolicy, Vector};
use crate::output::{csv_header, csv_row, num};

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum LagrangianError {
    #[error("singular Legendre transform at the seed (sigma_min {sigma_min:e}, sigma_max {sigma_max:e})")]
    Singular { sigma_min: f64, sigma_max: f64 },
    #[error(transparent)]
    Failure(#[from] SolveFailure),
    #[error(transparent)]
    Groupoid(#[from] GroupoidError),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error("expected {expected} coordinates, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// The group on which a discrete Lagrangian lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Realization {
    /// Pair groupoid `ℝⁿ × ℝⁿ`, elements `(q0, q1)`.
    Pair(usize),
    /// SE(2), elements `(θ, x, y)`.
    Se2,
}

impl Realization {
    pub fn element_dim(self) -> usize {
        match self {
            Realization::Pair(n) => 2 * n,
            Realization::Se2 => 3,
        }
    }

    /// Dimension of the base point part of a Legendre value.
    pub fn base_dim(self) -> usize {
        match self {
            Realization::Pair(n) => n,
            Realization::Se2 => 0,
        }
    }

    pub fn cotangent(self) -> Cotangent {
        match self {
            Realization::Pair(n) => Cotangent::Pair(CotangentPairGroupoid::new(n)),
            Realization::Se2 => Cotangent::Se2(CotangentSe2),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    /// `𝔽⁻L = α̃ ∘ dL`.
    Minus,
    /// `𝔽⁺L = β̃ ∘ dL`.
    Plus,
}

/// A point of `A*G`: base point and fiber covector.
#[derive(Clone, Debug, PartialEq)]
pub struct LegendreValue {
    pub base: Vec<f64>,
    pub covector: Vec<f64>,
}

impl LegendreValue {
    pub fn from_flat(flat: Vec<f64>, base_dim: usize) -> Self {
        let covector = flat[base_dim..].to_vec();
        let mut base = flat;
        base.truncate(base_dim);
        Self { base, covector }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.base.iter().chain(&self.covector).copied().collect()
    }
}

/// A scalar function on groupoid elements.
#[derive(Clone, Debug)]
pub struct DiscreteLagrangian<F> {
    pub realization: Realization,
    pub field: F,
}

fn check_len(expected: usize, found: usize) -> Result<(), LagrangianError> {
    if expected == found {
        Ok(())
    } else {
        Err(LagrangianError::Dimension { expected, found })
    }
}

fn finite<T: Real>(v: T) -> Result<T, EvalError> {
    if v.value().is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

impl<F: Field> DiscreteLagrangian<F> {
    pub fn new(realization: Realization, field: F) -> Result<Self, LagrangianError> {
        check_len(realization.element_dim(), field.arity())?;
        Ok(Self { realization, field })
    }

    pub fn element_dim(&self) -> usize {
        self.realization.element_dim()
    }

    pub fn eval<T: Real>(&self, g: &[T]) -> Result<T, EvalError> {
        finite(self.field.eval(g)?)
    }

    pub fn value(&self, g: &[f64]) -> Result<f64, LagrangianError> {
        check_len(self.element_dim(), g.len())?;
        Ok(self.eval(g)?)
    }

    /// `∇L(g)` over any scalar type.
    pub fn gradient<T: Real>(&self, g: &[T]) -> Result<Vec<T>, EvalError> {
        let (_, grad) = gradient(|x| self.eval(x), g)?;
        if grad.iter().all(|d| d.value().is_finite()) {
            Ok(grad)
        } else {
            Err(EvalError::NonFinite)
        }
    }

    /// `dL(g)` in the cotangent chart: `g` followed by `∇L(g)`.
    pub fn differential_generic<T: Real>(&self, g: &[T]) -> Result<Vec<T>, EvalError> {
        let grad = self.gradient(g)?;
        Ok(g.iter().cloned().chain(grad).collect())
    }

    pub fn differential(&self, g: &[f64]) -> Result<Vec<f64>, LagrangianError> {
        check_len(self.element_dim(), g.len())?;
        Ok(self.differential_generic(g)?)
    }

    /// Flat Legendre value (base point then covector) over any scalar type.
    pub fn legendre_generic<T: Real>(&self, g: &[T], side: Side) -> Result<Vec<T>, EvalError> {
        let dl = self.differential_generic(g)?;
        let cot = self.realization.cotangent();
        Ok(match side {
            Side::Minus => cot.source(&dl),
            Side::Plus => cot.target(&dl),
        })
    }

    pub fn legendre(&self, g: &[f64], side: Side) -> Result<LegendreValue, LagrangianError> {
        check_len(self.element_dim(), g.len())?;
        Ok(LegendreValue::from_flat(self.legendre_generic(g, side)?, self.realization.base_dim()))
    }

    fn check_composable(&self, g: &[f64], h: &[f64]) -> Result<(), LagrangianError> {
        if let Realization::Pair(n) = self.realization {
            let mismatch = crate::groupoid::sup_distance(&g[n..], &h[..n]);
            let scale = 1.0 + g[n..].iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if mismatch > crate::groupoid::COMPOSE_TOL * scale {
                return Err(GroupoidError::NotComposable { mismatch }.into());
            }
        }
        Ok(())
    }

    /// `𝔽⁺L(g) − 𝔽⁻L(h)` in fiber coordinates; zero iff `(g, h)` solves the
    /// discrete Euler–Lagrange equations.
    pub fn del_residual(&self, g: &[f64], h: &[f64]) -> Result<Vec<f64>, LagrangianError> {
        check_len(self.element_dim(), g.len())?;
        check_len(self.element_dim(), h.len())?;
        self.check_composable(g, h)?;
        let plus = self.legendre(g, Side::Plus)?;
        let minus = self.legendre(h, Side::Minus)?;
        Ok(plus.covector.iter().zip(&minus.covector).map(|(a, b)| a - b).collect())
    }

    /// Element built from unknowns `z`: the free half `(q_fixed, z)` or
    /// `(z, q_fixed)` on the pair groupoid, `z` itself on SE(2).
    fn element_from<T: Real>(&self, fixed: &[f64], z: &[T], fixed_first: bool) -> Vec<T> {
        match self.realization {
            Realization::Pair(_) => {
                let f = fixed.iter().map(|&v| T::from_f64(v));
                if fixed_first {
                    f.chain(z.iter().cloned()).collect()
                } else {
                    z.iter().cloned().chain(f).collect()
                }
            }
            Realization::Se2 => z.to_vec(),
        }
    }

    fn covector_part<T: Real>(&self, flat: Vec<T>) -> Vec<T> {
        flat.into_iter().skip(self.realization.base_dim()).collect()
    }

    /// Solve `𝔽^side L(element(z)) = target` for `z` from `seed`, after a
    /// regularity check of the Jacobian at the seed.
    fn solve_legendre(
        &self,
        fixed: &[f64],
        fixed_first: bool,
        side: Side,
        target: &[f64],
        seed: &[f64],
        tol: &TolerancePolicy,
    ) -> Result<Vec<f64>, LagrangianError> {
        let residual = |z: &[Dual]| -> Result<Vec<Dual>, EvalError> {
            let e = self.element_from(fixed, z, fixed_first);
            let cov = self.covector_part(self.legendre_generic(&e, side)?);
            Ok(cov.into_iter().zip(target).map(|(a, b)| a - *b).collect())
        };
        let (_, rows) = jacobian(residual, seed)?;
        let jac = Matrix::from_fn(rows.len(), seed.len(), |i, j| rows[i][j]);
        let rf = rank_factor(&jac, tol);
        if rf.rank < seed.len().min(rows.len()) || rf.sigma_max() == 0.0 {
            return Err(LagrangianError::Singular { sigma_min: rf.sigma_min(), sigma_max: rf.sigma_max() });
        }
        let root = gauss_newton(residual, &Vector::from_column_slice(seed), tol)?;
        Ok(self.element_from(fixed, root.x.as_slice(), fixed_first))
    }

    /// Constant-velocity guess for the successor of `g`.
    pub fn default_seed(&self, g: &[f64]) -> Vec<f64> {
        match self.realization {
            Realization::Pair(n) => (0..n).map(|i| 2.0 * g[n + i] - g[i]).collect(),
            Realization::Se2 => g.to_vec(),
        }
    }

    /// Discrete Lagrangian evolution `Υ_L`: the `h` composable with `g` that
    /// solves the DEL equations. `seed` holds the unknowns (pair: `q2`;
    /// SE(2): the coordinates of `h`).
    pub fn evolve(&self, g: &[f64], seed: Option<&[f64]>, tol: &TolerancePolicy) -> Result<Vec<f64>, LagrangianError> {
        check_len(self.element_dim(), g.len())?;
        let plus = self.legendre(g, Side::Plus)?;
        let seed = seed.map_or_else(|| self.default_seed(g), <[f64]>::to_vec);
        let fixed = match self.realization {
            Realization::Pair(n) => g[n..].to_vec(),
            Realization::Se2 => Vec::new(),
        };
        self.solve_legendre(&fixed, true, Side::Minus, &plus.covector, &seed, tol)
    }

    /// Discrete Hamiltonian evolution `Υ̃_L = 𝔽⁺L ∘ (𝔽⁻L)⁻¹`. `seed` is an
    /// element guess for `(𝔽⁻L)⁻¹(p)`; returns the image and that element.
    pub fn hamiltonian_evolution(
        &self,
        p: &LegendreValue,
        seed: Option<&[f64]>,
        tol: &TolerancePolicy,
    ) -> Result<(LegendreValue, Vec<f64>), LagrangianError> {
        let (fixed, z0) = match self.realization {
            Realization::Pair(n) => {
                check_len(n, p.base.len())?;
                let z0 = seed.map_or_else(|| p.base.clone(), |s| s[n..].to_vec());
                (p.base.clone(), z0)
            }
            Realization::Se2 => (Vec::new(), seed.map_or_else(|| vec![0.0; 3], <[f64]>::to_vec)),
        };
        let g = self.solve_legendre(&fixed, true, Side::Minus, &p.covector, &z0, tol)?;
        Ok((self.legendre(&g, Side::Plus)?, g))
    }
}

impl<F: Field + Clone + 'static> DiscreteLagrangian<F> {
    /// `S_L = dL(G)` as a parametrized equation on the cotangent groupoid,
    /// with membership residual `p − ∇L(q)`.
    pub fn lagrangian_set(&self, tol: TolerancePolicy) -> ImplicitEquation<Cotangent> {
        let m = self.element_dim();
        let this = self.clone();
        let psi = MapFn::new(m, 2 * m, move |g| this.differential_generic(g));
        let this = self.clone();
        let membership = MapFn::new(2 * m, m, move |z| {
            let grad = this.gradient(&z[..m])?;
            Ok(z[m..].iter().zip(grad).map(|(p, d)| p.clone() - d).collect())
        });
        ImplicitEquation::parametrized(self.realization.cotangent(), psi, Some(membership), tol)
            .expect("dimensions agree by construction")
    }
}

/// One row of a DEL trajectory.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryStep {
    pub element: Vec<f64>,
    /// `𝔽⁺L(element)` covector.
    pub momentum: Vec<f64>,
    /// `‖del_residual‖∞` against the previous element (0 for the first).
    pub residual: f64,
}

/// `steps` applications of [`DiscreteLagrangian::evolve`] from `g0`.
pub fn del_trajectory<F: Field>(
    lag: &DiscreteLagrangian<F>,
    g0: &[f64],
    steps: usize,
    tol: &TolerancePolicy,
) -> Result<Vec<TrajectoryStep>, LagrangianError> {
    let mut out = vec![TrajectoryStep {
        element: g0.to_vec(),
        momentum: lag.legendre(g0, Side::Plus)?.covector,
        residual: 0.0,
    }];
    for _ in 0..steps {
        let g = &out.last().expect("nonempty").element;
        let h = lag.evolve(g, None, tol)?;
        let residual = crate::dynamics::sup_norm(&lag.del_residual(g, &h)?);
        let momentum = lag.legendre(&h, Side::Plus)?.covector;
        out.push(TrajectoryStep { element: h, momentum, residual });
    }
    Ok(out)
}

pub fn trajectory_csv(subcommand: &str, steps: &[TrajectoryStep]) -> String {
    let mut out = csv_header(subcommand);
    let m = steps.first().map_or(0, |s| s.element.len());
    let k = steps.first().map_or(0, |s| s.momentum.len());
    let mut header = vec!["step".to_string()];
    header.extend((0..m).map(|i| format!("g{i}")));
    header.extend((0..k).map(|i| format!("p{i}")));
    header.push("residual".into());
    out.push_str(&csv_row(header));
    for (i, s) in steps.iter().enumerate() {
        let mut row = vec![i.to_string()];
        row.extend(s.element.iter().chain(&s.momentum).map(|&v| num(v)));
        row.push(num(s.residual));
        out.push_str(&csv_row(row));
    }
    out
}
