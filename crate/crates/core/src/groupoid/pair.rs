use super::{Arrows, Groupoid};
use crate::numkernel::{AffineMap, Matrix, Real};

/// `ℝⁿ × ℝⁿ ⇉ ℝⁿ`, elements `(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairGroupoid {
    pub n: usize,
}

impl PairGroupoid {
    pub fn new(n: usize) -> Self {
        Self { n }
    }
}

impl Arrows for PairGroupoid {
    fn element_dim(&self) -> usize {
        2 * self.n
    }
    fn base_dim(&self) -> usize {
        self.n
    }
    fn source<T: Real>(&self, g: &[T]) -> Vec<T> {
        g[..self.n].to_vec()
    }
    fn target<T: Real>(&self, g: &[T]) -> Vec<T> {
        g[self.n..2 * self.n].to_vec()
    }
    fn affine_structure(&self) -> Option<(AffineMap, AffineMap)> {
        let n = self.n;
        let alpha = Matrix::from_fn(n, 2 * n, |i, j| if j == i { 1.0 } else { 0.0 });
        let beta = Matrix::from_fn(n, 2 * n, |i, j| if j == i + n { 1.0 } else { 0.0 });
        Some((AffineMap::linear(alpha), AffineMap::linear(beta)))
    }
}

impl Groupoid for PairGroupoid {
    fn multiply<T: Real>(&self, g: &[T], h: &[T]) -> Vec<T> {
        g[..self.n].iter().chain(&h[self.n..]).cloned().collect()
    }
    fn identity<T: Real>(&self, x: &[T]) -> Vec<T> {
        x.iter().chain(x).cloned().collect()
    }
    fn inverse<T: Real>(&self, g: &[T]) -> Vec<T> {
        g[self.n..].iter().chain(&g[..self.n]).cloned().collect()
    }
}
