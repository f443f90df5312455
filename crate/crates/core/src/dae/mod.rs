//! Finite differencing of time-dependent linear DAEs `A(t)ẋ + B(t)x = b(t)`
//! with forward Euler and left-annihilator constraint extraction.

use crate::dynamics::{DynamicsError, EquationSequence};
use crate::groupoid::PairGroupoid;
use crate::numkernel::linalg::{ensure_finite_matrix, ensure_finite_vector, inf_norm};
use crate::numkernel::{rank_factor, AffineSubspace, EvalError, KernelError, Matrix, TolerancePolicy, Vector};
use crate::output::{csv_header, csv_row, num};

/// Residual bound for accepted steps and trajectory points.
pub const STEP_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum DaeError {
    #[error("step {k}: A_k + Q_(k+1) B_(k+1) is singular (rank {rank}, sigma_min {sigma_min:e}, sigma_max {sigma_max:e})")]
    HigherIndex { k: usize, rank: usize, sigma_min: f64, sigma_max: f64 },
    #[error("no consistent initial value: the constraint set at t0 is empty")]
    Inconsistent,
    #[error("coefficient at t = {t} has shape {found:?}, expected {expected:?}")]
    Shape { t: f64, expected: (usize, usize), found: (usize, usize) },
    #[error("invalid DAE: {0}")]
    Invalid(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

pub type MatrixFn = Box<dyn Fn(f64) -> Result<Matrix, EvalError> + Send + Sync>;
pub type VectorFn = Box<dyn Fn(f64) -> Result<Vector, EvalError> + Send + Sync>;

/// `A(t)ẋ + B(t)x = b(t)` sampled on `t_k = t0 + k h`.
pub struct LinearDae {
    n: usize,
    a: MatrixFn,
    b: MatrixFn,
    rhs: VectorFn,
    pub t0: f64,
    pub h: f64,
    pub tol: TolerancePolicy,
}

impl std::fmt::Debug for LinearDae {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LinearDae").field("n", &self.n).field("t0", &self.t0).field("h", &self.h).finish()
    }
}

/// `Q = I − A A⁺`, assembled from an orthonormal left-null basis so that an
/// invertible `A` gives exactly `Q = 0`.
pub fn left_annihilator(a: &Matrix, tol: &TolerancePolicy) -> Matrix {
    let w = rank_factor(a, tol).left_null_space;
    &w * w.transpose()
}

#[derive(Clone, Debug)]
pub struct DaeStepReport {
    pub k: usize,
    pub q: Matrix,
    /// `{x : Q_k B_k x = Q_k b_k}`.
    pub constraint: AffineSubspace,
    pub regular: bool,
    pub x_next: Vector,
    /// `‖P_(im A_k)(A_k(x_{k+1} − x_k)/h + B_k x_k − b_k)‖∞`.
    pub scheme_residual: f64,
    /// Distance of `x_{k+1}` to the constraint set at `k + 1`.
    pub constraint_residual: f64,
}

/// A (possibly aborted) Euler trajectory.
#[derive(Clone, Debug)]
pub struct DaeTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vector>,
    /// Distance of `states[k]` to the constraint set at `k`.
    pub residuals: Vec<f64>,
    /// Regularity of `A_k + Q_(k+1) B_(k+1)`, the matrix of the step leaving `states[k]`.
    pub regular: Vec<bool>,
    pub reports: Vec<DaeStepReport>,
    /// The `HigherIndex` error that stopped integration early, if any.
    pub aborted: Option<DaeError>,
}

impl LinearDae {
    pub fn new(n: usize, a: MatrixFn, b: MatrixFn, rhs: VectorFn, t0: f64, h: f64, tol: TolerancePolicy) -> Result<Self, DaeError> {
        if n == 0 {
            return Err(DaeError::Invalid("dimension must be positive".into()));
        }
        if !(h.is_finite() && h > 0.0) || !t0.is_finite() {
            return Err(DaeError::Invalid(format!("need finite t0 and h > 0, got t0 = {t0}, h = {h}")));
        }
        tol.validate()?;
        Ok(Self { n, a, b, rhs, t0, h, tol })
    }

    /// Constant-coefficient convenience constructor.
    pub fn constant(a: Matrix, b: Matrix, rhs: Vector, t0: f64, h: f64, tol: TolerancePolicy) -> Result<Self, DaeError> {
        let n = a.nrows();
        Self::new(
            n,
            Box::new(move |_| Ok(a.clone())),
            Box::new(move |_| Ok(b.clone())),
            Box::new(move |_| Ok(rhs.clone())),
            t0,
            h,
            tol,
        )
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn time(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.h
    }

    fn check_matrix(&self, t: f64, m: Matrix) -> Result<Matrix, DaeError> {
        if m.shape() != (self.n, self.n) {
            return Err(DaeError::Shape { t, expected: (self.n, self.n), found: m.shape() });
        }
        ensure_finite_matrix(&m)?;
        Ok(m)
    }

    pub fn a_at(&self, k: usize) -> Result<Matrix, DaeError> {
        let t = self.time(k);
        self.check_matrix(t, (self.a)(t)?)
    }

    pub fn b_at(&self, k: usize) -> Result<Matrix, DaeError> {
        let t = self.time(k);
        self.check_matrix(t, (self.b)(t)?)
    }

    pub fn rhs_at(&self, k: usize) -> Result<Vector, DaeError> {
        let t = self.time(k);
        let v = (self.rhs)(t)?;
        if v.len() != self.n {
            return Err(DaeError::Shape { t, expected: (self.n, 1), found: (v.len(), 1) });
        }
        ensure_finite_vector(&v)?;
        Ok(v)
    }

    pub fn annihilator(&self, k: usize) -> Result<Matrix, DaeError> {
        Ok(left_annihilator(&self.a_at(k)?, &self.tol))
    }

    /// `[C_k]^0 = {x : Q_k B_k x = Q_k b_k}`.
    pub fn constraint_set(&self, k: usize) -> Result<AffineSubspace, DaeError> {
        let q = self.annihilator(k)?;
        Ok(AffineSubspace::from_constraints(&(&q * self.b_at(k)?), &(&q * self.rhs_at(k)?), self.tol)?)
    }

    /// Least-squares projection of `guess` onto the constraint set at `t0`.
    pub fn consistent_initialize(&self, guess: &Vector) -> Result<Vector, DaeError> {
        if guess.len() != self.n {
            return Err(DaeError::Shape { t: self.t0, expected: (self.n, 1), found: (guess.len(), 1) });
        }
        ensure_finite_vector(guess)?;
        self.constraint_set(0)?.project(guess).ok_or(DaeError::Inconsistent)
    }

    /// Step matrix `A_k + Q_(k+1) B_(k+1)` and the right-hand side
    /// `(A_k − h B_k) x_k + h b_k + Q_(k+1) b_(k+1)` for a given `Q_(k+1)`.
    fn step_system(&self, k: usize, x: &Vector, q_next: &Matrix) -> Result<(Matrix, Vector), DaeError> {
        let (a, b, r) = (self.a_at(k)?, self.b_at(k)?, self.rhs_at(k)?);
        let m = &a + q_next * self.b_at(k + 1)?;
        let rhs = (&a - &b * self.h) * x + &r * self.h + q_next * self.rhs_at(k + 1)?;
        Ok((m, rhs))
    }

    fn regularity(&self, k: usize, m: &Matrix) -> Result<(), DaeError> {
        let f = rank_factor(m, &self.tol);
        let (smin, smax) = (f.sigma_min(), f.sigma_max());
        if smax == 0.0 || smin < self.tol.rank_rel_tol * smax {
            return Err(DaeError::HigherIndex { k, rank: f.rank, sigma_min: smin, sigma_max: smax });
        }
        Ok(())
    }

    /// Whether the step leaving index `k` is regular.
    pub fn step_is_regular(&self, k: usize) -> Result<bool, DaeError> {
        let m = self.a_at(k)? + self.annihilator(k + 1)? * self.b_at(k + 1)?;
        match self.regularity(k, &m) {
            Ok(()) => Ok(true),
            Err(DaeError::HigherIndex { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    }

    fn solve_step(&self, k: usize, x: &Vector, q_next: &Matrix) -> Result<Vector, DaeError> {
        let (m, rhs) = self.step_system(k, x, q_next)?;
        self.regularity(k, &m)?;
        let sol = m.lu().solve(&rhs).ok_or(DaeError::HigherIndex { k, rank: 0, sigma_min: 0.0, sigma_max: 0.0 })?;
        ensure_finite_vector(&sol)?;
        Ok(sol)
    }

    /// One constrained forward Euler step `x_k ↦ x_{k+1}`.
    pub fn euler_step(&self, k: usize, x: &Vector) -> Result<DaeStepReport, DaeError> {
        if x.len() != self.n {
            return Err(DaeError::Shape { t: self.time(k), expected: (self.n, 1), found: (x.len(), 1) });
        }
        ensure_finite_vector(x)?;
        let x_next = self.solve_step(k, x, &self.annihilator(k + 1)?)?;
        let (a, b, r) = (self.a_at(k)?, self.b_at(k)?, self.rhs_at(k)?);
        let q = left_annihilator(&a, &self.tol);
        let scheme = (Matrix::identity(self.n, self.n) - &q) * (&a * (&x_next - x) / self.h + &b * x - &r);
        Ok(DaeStepReport {
            k,
            constraint: AffineSubspace::from_constraints(&(&q * &b), &(&q * &r), self.tol)?,
            q,
            regular: true,
            scheme_residual: inf_norm(scheme.as_slice()),
            constraint_residual: self.constraint_set(k + 1)?.distance(&x_next),
            x_next,
        })
    }

    /// `consistent_initialize` then `steps` Euler steps. A `HigherIndex`
    /// step ends the trajectory early and is recorded in `aborted`.
    pub fn integrate(&self, guess: &Vector, steps: usize) -> Result<DaeTrajectory, DaeError> {
        if steps == 0 {
            return Err(DaeError::Invalid("need at least one step".into()));
        }
        let x0 = self.consistent_initialize(guess)?;
        let mut traj = DaeTrajectory {
            times: vec![self.t0],
            residuals: vec![self.constraint_set(0)?.distance(&x0)],
            states: vec![x0],
            regular: Vec::new(),
            reports: Vec::new(),
            aborted: None,
        };
        for k in 0..steps {
            let x = traj.states.last().expect("nonempty").clone();
            match self.euler_step(k, &x) {
                Ok(report) => {
                    traj.regular.push(true);
                    traj.times.push(self.time(k + 1));
                    traj.residuals.push(report.constraint_residual);
                    traj.states.push(report.x_next.clone());
                    traj.reports.push(report);
                }
                Err(e @ DaeError::HigherIndex { .. }) => {
                    traj.regular.push(false);
                    traj.aborted = Some(e);
                    return Ok(traj);
                }
                Err(e) => return Err(e),
            }
        }
        traj.regular.push(self.step_is_regular(steps)?);
        Ok(traj)
    }

    /// `E_k = {(x, y) : A_k (y − x)/h + B_k x = b_k}` for `k = 0, …, steps − 1`
    /// on the pair groupoid of `ℝⁿ`.
    pub fn as_sequence(&self, steps: usize) -> Result<EquationSequence<PairGroupoid>, DaeError> {
        let n = self.n;
        let sets = (0..steps)
            .map(|k| {
                let (a, b, r) = (self.a_at(k)?, self.b_at(k)?, self.rhs_at(k)?);
                let mut rows = Matrix::zeros(n, 2 * n);
                rows.view_mut((0, 0), (n, n)).copy_from(&(&b - &a / self.h));
                rows.view_mut((0, n), (n, n)).copy_from(&(&a / self.h));
                Ok(AffineSubspace::from_constraints(&rows, &r, self.tol)?)
            })
            .collect::<Result<Vec<_>, DaeError>>()?;
        Ok(EquationSequence::new(PairGroupoid::new(n), 0, sets, self.tol)?)
    }
}

impl DaeTrajectory {
    pub fn to_csv(&self) -> String {
        let n = self.states.first().map_or(0, |x| x.len());
        let mut out = csv_header("dae");
        let mut head = vec!["k".to_string(), "t".to_string()];
        head.extend((0..n).map(|i| format!("x{i}")));
        head.extend(["constraint_residual".to_string(), "regular".to_string()]);
        out.push_str(&csv_row(head));
        for (k, x) in self.states.iter().enumerate() {
            let mut row = vec![k.to_string(), num(self.times[k])];
            row.extend(x.iter().map(|&v| num(v)));
            row.push(num(self.residuals[k]));
            row.push(if self.regular.get(k).copied().unwrap_or(true) { "1" } else { "0" }.to_string());
            out.push_str(&csv_row(row));
        }
        out
    }
}
