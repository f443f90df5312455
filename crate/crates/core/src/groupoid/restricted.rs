use super::Arrows;
use crate::numkernel::{Matrix, Real};

/// Source and target of `inner` followed by the restriction of base
/// covectors to a subspace: `x ↦ Dᵀ x` for a basis matrix `D` (columns).
#[derive(Clone, Debug)]
pub struct RestrictedArrows<A> {
    pub inner: A,
    pub basis: Matrix,
}

impl<A: Arrows> RestrictedArrows<A> {
    pub fn new(inner: A, basis: Matrix) -> Self {
        assert_eq!(basis.nrows(), inner.base_dim(), "basis rows must match the base dimension");
        Self { inner, basis }
    }

    pub fn restrict<T: Real>(&self, x: &[T]) -> Vec<T> {
        (0..self.basis.ncols())
            .map(|j| x.iter().enumerate().fold(T::zero(), |acc, (i, xi)| acc + xi.clone() * self.basis[(i, j)]))
            .collect()
    }
}

impl<A: Arrows> Arrows for RestrictedArrows<A> {
    fn element_dim(&self) -> usize {
        self.inner.element_dim()
    }
    fn base_dim(&self) -> usize {
        self.basis.ncols()
    }
    fn source<T: Real>(&self, g: &[T]) -> Vec<T> {
        self.restrict(&self.inner.source(g))
    }
    fn target<T: Real>(&self, g: &[T]) -> Vec<T> {
        self.restrict(&self.inner.target(g))
    }
}
