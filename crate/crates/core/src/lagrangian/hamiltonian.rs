use crate::expr::Field;
use crate::numkernel::dual::gradient;
use crate::numkernel::{EvalError, Matrix};
use crate::par::Exec;

/// `H` on `T*ℝⁿ` with coordinates `(q, p)`.
#[derive(Clone, Debug)]
pub struct HamiltonianSystem<F> {
    pub field: F,
    pub n: usize,
    /// Largest RK4 step used by [`flow_lagrangian_set`].
    pub max_step: f64,
}

impl<F: Field> HamiltonianSystem<F> {
    pub fn new(field: F, n: usize) -> Result<Self, EvalError> {
        if field.arity() != 2 * n {
            return Err(EvalError::Arity { expected: 2 * n, found: field.arity() });
        }
        Ok(Self { field, n, max_step: 1e-3 })
    }

    /// Canonical `Ω = [[0, I], [−I, 0]]`.
    pub fn omega(&self) -> Matrix {
        omega(self.n)
    }

    /// `X_H(z) = Ω ∇H(z) = (∂H/∂p, −∂H/∂q)`.
    pub fn vector_field(&self, z: &[f64]) -> Result<Vec<f64>, EvalError> {
        let (_, g) = gradient(|x| self.field.eval(x), z)?;
        let n = self.n;
        let out: Vec<f64> = (0..2 * n).map(|i| if i < n { g[n + i] } else { -g[i - n] }).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(EvalError::NonFinite)
        }
    }
}

pub fn omega(n: usize) -> Matrix {
    Matrix::from_fn(2 * n, 2 * n, |i, j| {
        if j == i + n {
            1.0
        } else if i == j + n {
            -1.0
        } else {
            0.0
        }
    })
}

fn axpy(z: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    z.iter().zip(k).map(|(x, y)| x + a * y).collect()
}

/// Classical RK4 for `ż = X_H(z)` over `[0, t]`; returns all `steps + 1` states.
pub fn hamiltonian_flow<F: Field>(
    hs: &HamiltonianSystem<F>,
    z0: &[f64],
    t: f64,
    steps: usize,
) -> Result<Vec<Vec<f64>>, EvalError> {
    if z0.len() != 2 * hs.n {
        return Err(EvalError::Arity { expected: 2 * hs.n, found: z0.len() });
    }
    let steps = steps.max(1);
    let dt = t / steps as f64;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(z0.to_vec());
    for _ in 0..steps {
        let z = out.last().expect("nonempty");
        let k1 = hs.vector_field(z)?;
        let k2 = hs.vector_field(&axpy(z, dt / 2.0, &k1))?;
        let k3 = hs.vector_field(&axpy(z, dt / 2.0, &k2))?;
        let k4 = hs.vector_field(&axpy(z, dt, &k3))?;
        let next: Vec<f64> =
            (0..z.len()).map(|i| z[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect();
        out.push(next);
    }
    Ok(out)
}

/// Points `(q, ψ₁ᵗ(q,p), −p, ψ₂ᵗ(q,p))` of the Lagrangian submanifold generated
/// by the time-`t` flow, one per grid point `(q, p)`.
pub fn flow_lagrangian_set<F: Field>(
    hs: &HamiltonianSystem<F>,
    t: f64,
    grid: &[Vec<f64>],
    exec: Exec,
) -> Result<Vec<Vec<f64>>, EvalError> {
    let steps = ((t.abs() / hs.max_step).ceil() as usize).max(1);
    let n = hs.n;
    exec.map(grid, |z| {
        let end = hamiltonian_flow(hs, z, t, steps)?.pop().expect("nonempty");
        let mut point = z[..n].to_vec();
        point.extend_from_slice(&end[..n]);
        point.extend(z[n..].iter().map(|p| -p));
        point.extend_from_slice(&end[n..]);
        Ok(point)
    })
    .into_iter()
    .collect()
}
