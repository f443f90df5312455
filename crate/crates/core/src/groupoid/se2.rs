//! SE(2) as a groupoid over a point. Elements are `(θ, x, y)` with
//! `θ ∈ (−π, π]`; Lie algebra coordinates are `(ω, v1, v2)` in the basis
//! `{e, e1, e2}` with `[e, e1] = e2`, `[e, e2] = −e1`, `[e1, e2] = 0`.

use std::convert::Infallible;
use std::f64::consts::PI;

use super::{Arrows, Groupoid, GroupoidError};
use crate::numkernel::dual::{constants, jacobian};
use crate::numkernel::{AffineMap, Dual, Matrix, Real};

/// Below this |ω| the exponential uses its Taylor expansion.
pub const SMALL_ANGLE: f64 = 1e-8;

/// Shift by a multiple of 2π into `(−π, π]`. The shift is a constant, so
/// derivatives pass through unchanged.
pub fn wrap_angle<T: Real>(theta: T) -> T {
    let v = theta.value();
    let k = ((v - PI) / (2.0 * PI)).ceil();
    if k == 0.0 {
        theta
    } else {
        theta - 2.0 * PI * k
    }
}

pub fn wrap_f64(theta: f64) -> f64 {
    wrap_angle(theta)
}

pub fn multiply<T: Real>(g: &[T], h: &[T]) -> Vec<T> {
    let (c, s) = (g[0].cos(), g[0].sin());
    vec![
        wrap_angle(g[0].clone() + h[0].clone()),
        g[1].clone() + c.clone() * h[1].clone() - s.clone() * h[2].clone(),
        g[2].clone() + s * h[1].clone() + c * h[2].clone(),
    ]
}

pub fn inverse<T: Real>(g: &[T]) -> Vec<T> {
    let (c, s) = (g[0].cos(), g[0].sin());
    vec![
        wrap_angle(-g[0].clone()),
        -(c.clone() * g[1].clone() + s.clone() * g[2].clone()),
        s * g[1].clone() - c * g[2].clone(),
    ]
}

pub fn identity<T: Real>() -> Vec<T> {
    vec![T::zero(), T::zero(), T::zero()]
}

/// `sin ω / ω` and `(cos ω − 1) / ω`, with series near zero.
fn exp_coefficients<T: Real>(w: &T) -> (T, T) {
    if w.value().abs() < SMALL_ANGLE {
        let w2 = w.square();
        let a = T::one() - w2.clone() / 6.0;
        let b = -(w.clone() / 2.0) + w2 * w.clone() / 24.0;
        (a, b)
    } else {
        // cos ω − 1 = −2 sin²(ω/2), free of cancellation for small ω.
        let half = (w.clone() * 0.5).sin();
        (w.sin() / w.clone(), -(half.square() * 2.0) / w.clone())
    }
}

pub fn exp<T: Real>(xi: &[T]) -> Vec<T> {
    let (a, b) = exp_coefficients(&xi[0]);
    vec![
        wrap_angle(xi[0].clone()),
        a.clone() * xi[1].clone() + b.clone() * xi[2].clone(),
        -(b * xi[1].clone()) + a * xi[2].clone(),
    ]
}

/// Inverse of [`exp`] on `(−π, π) × ℝ²`.
pub fn log<T: Real>(g: &[T]) -> Result<Vec<T>, GroupoidError> {
    if g[0].value().abs() >= PI {
        return Err(GroupoidError::Domain(format!("log undefined at θ = {}", g[0].value())));
    }
    let (a, b) = exp_coefficients(&g[0]);
    let det = a.square() + b.square();
    let v1 = (a.clone() * g[1].clone() - b.clone() * g[2].clone()) / det.clone();
    let v2 = (b * g[1].clone() + a * g[2].clone()) / det;
    Ok(vec![g[0].clone(), v1, v2])
}

/// Homogeneous 3×3 matrix of an element.
pub fn matrix(g: &[f64]) -> Matrix {
    let (c, s) = (g[0].cos(), g[0].sin());
    Matrix::from_row_slice(3, 3, &[c, -s, g[1], s, c, g[2], 0.0, 0.0, 1.0])
}

pub fn from_matrix(m: &Matrix) -> Vec<f64> {
    vec![m[(1, 0)].atan2(m[(0, 0)]), m[(0, 2)], m[(1, 2)]]
}

/// Homogeneous matrix of a Lie algebra vector.
pub fn algebra_matrix(xi: &[f64]) -> Matrix {
    Matrix::from_row_slice(3, 3, &[0.0, -xi[0], xi[1], xi[0], 0.0, xi[2], 0.0, 0.0, 0.0])
}

type Jac3<T> = [[T; 3]; 3];

fn jacobian3<T: Real>(f: impl FnOnce(&[Dual<T>]) -> Vec<Dual<T>>, at: &[T]) -> Jac3<T> {
    let (_, rows) = jacobian(|x| Ok::<_, Infallible>(f(x)), at).unwrap_or_else(|e| match e {});
    std::array::from_fn(|i| std::array::from_fn(|j| rows[i][j].clone()))
}

/// `∂/∂ξ (exp(ξ)·g)` at `ξ = 0`; columns are right-invariant fields at `g`.
pub fn right_jacobian<T: Real>(g: &[T]) -> Jac3<T> {
    let gd = constants(g);
    jacobian3(|xi| multiply(&exp(xi), &gd), &identity::<T>())
}

/// `∂/∂ξ (g·exp(ξ))` at `ξ = 0`; columns are left-invariant fields at `g`.
pub fn left_jacobian<T: Real>(g: &[T]) -> Jac3<T> {
    let gd = constants(g);
    jacobian3(|xi| multiply(&gd, &exp(xi)), &identity::<T>())
}

/// Jacobian of inversion at `g`.
pub fn inverse_jacobian<T: Real>(g: &[T]) -> Jac3<T> {
    jacobian3(inverse, g)
}

/// `Mᵀ p`.
pub fn transpose_apply<T: Real>(m: &Jac3<T>, p: &[T]) -> Vec<T> {
    (0..3).map(|j| (0..3).fold(T::zero(), |acc, i| acc + m[i][j].clone() * p[i].clone())).collect()
}

/// Solve `M x = b` by Cramer's rule; `M` must be regular.
pub fn solve3<T: Real>(m: &Jac3<T>, b: &[T]) -> Vec<T> {
    let det3 = |c: &Jac3<T>| {
        c[0][0].clone() * (c[1][1].clone() * c[2][2].clone() - c[1][2].clone() * c[2][1].clone())
            - c[0][1].clone() * (c[1][0].clone() * c[2][2].clone() - c[1][2].clone() * c[2][0].clone())
            + c[0][2].clone() * (c[1][0].clone() * c[2][1].clone() - c[1][1].clone() * c[2][0].clone())
    };
    let d = det3(m);
    (0..3)
        .map(|k| {
            let mut mk = m.clone();
            for i in 0..3 {
                mk[i][k] = b[i].clone();
            }
            det3(&mk) / d.clone()
        })
        .collect()
}

/// SE(2) as a Lie groupoid over a single point.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Se2Group;

impl Arrows for Se2Group {
    fn element_dim(&self) -> usize {
        3
    }
    fn base_dim(&self) -> usize {
        0
    }
    fn source<T: Real>(&self, _g: &[T]) -> Vec<T> {
        Vec::new()
    }
    fn target<T: Real>(&self, _g: &[T]) -> Vec<T> {
        Vec::new()
    }
    fn affine_structure(&self) -> Option<(AffineMap, AffineMap)> {
        Some((AffineMap::linear(Matrix::zeros(0, 3)), AffineMap::linear(Matrix::zeros(0, 3))))
    }
}

impl Groupoid for Se2Group {
    fn multiply<T: Real>(&self, g: &[T], h: &[T]) -> Vec<T> {
        multiply(g, h)
    }
    fn identity<T: Real>(&self, _x: &[T]) -> Vec<T> {
        identity()
    }
    fn inverse<T: Real>(&self, g: &[T]) -> Vec<T> {
        inverse(g)
    }
    fn element_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let dt = wrap_f64(a[0] - b[0]).abs();
        dt.max((a[1] - b[1]).abs()).max((a[2] - b[2]).abs())
    }
}
