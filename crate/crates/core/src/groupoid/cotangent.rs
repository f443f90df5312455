//! Cotangent groupoids `T*G ⇉ A*G`.
//!
//! The source of a covector is its pull-back to the algebroid by right
//! translation, the target its pull-back by left translation.

use super::se2::{self, solve3, transpose_apply};
use super::{Arrows, Groupoid};
use crate::numkernel::{AffineMap, Matrix, Real};

/// `T*(ℝⁿ × ℝⁿ) ⇉ T*ℝⁿ`, elements `(q0, q1, p0, p1)`, base points `(q, p)`.
///
/// `α̃ = (q0, −p0)`, `β̃ = (q1, p1)`, `ε̃(q, p) = (q, q, −p, p)`,
/// `ĩ(q0, q1, p0, p1) = (q1, q0, −p1, −p0)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CotangentPairGroupoid {
    pub n: usize,
}

impl CotangentPairGroupoid {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    fn blocks<'a, T>(&self, g: &'a [T]) -> (&'a [T], &'a [T], &'a [T], &'a [T]) {
        let n = self.n;
        (&g[..n], &g[n..2 * n], &g[2 * n..3 * n], &g[3 * n..4 * n])
    }
}

fn cat<T: Clone>(parts: &[&[T]]) -> Vec<T> {
    parts.iter().flat_map(|p| p.iter().cloned()).collect()
}

fn neg<T: Real>(v: &[T]) -> Vec<T> {
    v.iter().map(|x| -x.clone()).collect()
}

impl Arrows for CotangentPairGroupoid {
    fn element_dim(&self) -> usize {
        4 * self.n
    }
    fn base_dim(&self) -> usize {
        2 * self.n
    }
    fn source<T: Real>(&self, g: &[T]) -> Vec<T> {
        let (q0, _, p0, _) = self.blocks(g);
        cat(&[q0, &neg(p0)])
    }
    fn target<T: Real>(&self, g: &[T]) -> Vec<T> {
        let (_, q1, _, p1) = self.blocks(g);
        cat(&[q1, p1])
    }
    fn affine_structure(&self) -> Option<(AffineMap, AffineMap)> {
        let n = self.n;
        let alpha = Matrix::from_fn(2 * n, 4 * n, |i, j| match (i < n, j) {
            (true, j) if j == i => 1.0,
            (false, j) if j == i + n => -1.0,
            _ => 0.0,
        });
        let beta = Matrix::from_fn(2 * n, 4 * n, |i, j| match (i < n, j) {
            (true, j) if j == i + n => 1.0,
            (false, j) if j == i + 2 * n => 1.0,
            _ => 0.0,
        });
        Some((AffineMap::linear(alpha), AffineMap::linear(beta)))
    }
}

impl Groupoid for CotangentPairGroupoid {
    fn multiply<T: Real>(&self, g: &[T], h: &[T]) -> Vec<T> {
        let (q0, _, p0, _) = self.blocks(g);
        let (_, q2, _, p2) = self.blocks(h);
        cat(&[q0, q2, p0, p2])
    }
    fn identity<T: Real>(&self, x: &[T]) -> Vec<T> {
        let (q, p) = x.split_at(self.n);
        cat(&[q, q, &neg(p), p])
    }
    fn inverse<T: Real>(&self, g: &[T]) -> Vec<T> {
        let (q0, q1, p0, p1) = self.blocks(g);
        cat(&[q1, q0, &neg(p1), &neg(p0)])
    }
}

/// `T*SE(2) ⇉ se(2)*`, elements `(θ, x, y, p_θ, p_x, p_y)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct CotangentSe2;

impl Arrows for CotangentSe2 {
    fn element_dim(&self) -> usize {
        6
    }
    fn base_dim(&self) -> usize {
        3
    }
    fn source<T: Real>(&self, g: &[T]) -> Vec<T> {
        transpose_apply(&se2::right_jacobian(&g[..3]), &g[3..])
    }
    fn target<T: Real>(&self, g: &[T]) -> Vec<T> {
        transpose_apply(&se2::left_jacobian(&g[..3]), &g[3..])
    }
}

impl Groupoid for CotangentSe2 {
    fn multiply<T: Real>(&self, a: &[T], b: &[T]) -> Vec<T> {
        let gh = se2::multiply(&a[..3], &b[..3]);
        let alpha = self.source(a);
        let r = se2::right_jacobian(&gh);
        let rt = std::array::from_fn(|i| std::array::from_fn(|j| r[j][i].clone()));
        let lambda = solve3(&rt, &alpha);
        cat(&[&gh, &lambda])
    }
    fn identity<T: Real>(&self, mu: &[T]) -> Vec<T> {
        cat(&[&se2::identity::<T>(), mu])
    }
    fn inverse<T: Real>(&self, a: &[T]) -> Vec<T> {
        let gi = se2::inverse(&a[..3]);
        let p = neg(&transpose_apply(&se2::inverse_jacobian(&gi), &a[3..]));
        cat(&[&gi, &p])
    }
    fn element_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        let dt = se2::wrap_f64(a[0] - b[0]).abs();
        a[1..].iter().zip(&b[1..]).fold(dt, |m, (x, y)| m.max((x - y).abs()))
    }
}

/// Either supported cotangent groupoid.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cotangent {
    Pair(CotangentPairGroupoid),
    Se2(CotangentSe2),
}

macro_rules! delegate {
    ($self:ident, $g:ident => $e:expr) => {
        match $self {
            Cotangent::Pair($g) => $e,
            Cotangent::Se2($g) => $e,
        }
    };
}

impl Arrows for Cotangent {
    fn element_dim(&self) -> usize {
        delegate!(self, c => c.element_dim())
    }
    fn base_dim(&self) -> usize {
        delegate!(self, c => c.base_dim())
    }
    fn source<T: Real>(&self, g: &[T]) -> Vec<T> {
        delegate!(self, c => c.source(g))
    }
    fn target<T: Real>(&self, g: &[T]) -> Vec<T> {
        delegate!(self, c => c.target(g))
    }
    fn affine_structure(&self) -> Option<(AffineMap, AffineMap)> {
        delegate!(self, c => c.affine_structure())
    }
}

impl Groupoid for Cotangent {
    fn multiply<T: Real>(&self, g: &[T], h: &[T]) -> Vec<T> {
        delegate!(self, c => c.multiply(g, h))
    }
    fn identity<T: Real>(&self, x: &[T]) -> Vec<T> {
        delegate!(self, c => c.identity(x))
    }
    fn inverse<T: Real>(&self, g: &[T]) -> Vec<T> {
        delegate!(self, c => c.inverse(g))
    }
    fn element_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        delegate!(self, c => c.element_distance(a, b))
    }
}
