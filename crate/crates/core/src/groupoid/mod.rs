//! Structural maps (α, β, m, ε, i) for the pair groupoid, SE(2) and their
//! cotangent groupoids.
//!
//! Elements and base points are flat coordinate slices. All maps are generic
//! over [`Real`] so they can be differentiated with dual numbers.

mod cotangent;
mod pair;
mod restricted;
pub mod se2;

pub use cotangent::{Cotangent, CotangentPairGroupoid, CotangentSe2};
pub use pair::PairGroupoid;
pub use restricted::RestrictedArrows;
pub use se2::Se2Group;

use crate::numkernel::{AffineMap, Real};

/// Composability tolerance, relative to the magnitude of the base points.
pub const COMPOSE_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum GroupoidError {
    #[error("elements are not composable: |beta(g) - alpha(h)| = {mismatch:e}")]
    NotComposable { mismatch: f64 },
    #[error("outside chart domain: {0}")]
    Domain(String),
    #[error("expected {expected} coordinates, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// A pair of source and target maps G → M.
pub trait Arrows: Send + Sync {
    fn element_dim(&self) -> usize;
    fn base_dim(&self) -> usize;
    fn source<T: Real>(&self, g: &[T]) -> Vec<T>;
    fn target<T: Real>(&self, g: &[T]) -> Vec<T>;

    /// `(α, β)` as affine maps when both are affine in the chart.
    fn affine_structure(&self) -> Option<(AffineMap, AffineMap)> {
        None
    }

    fn is_affine(&self) -> bool {
        self.affine_structure().is_some()
    }

    /// Distance between base points.
    fn base_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        sup_distance(a, b)
    }

    /// `|β(g) − α(h)|`.
    fn mismatch(&self, g: &[f64], h: &[f64]) -> f64 {
        self.base_distance(&self.target(g), &self.source(h))
    }

    fn composable(&self, g: &[f64], h: &[f64]) -> bool {
        let t = self.target(g);
        let scale = 1.0 + t.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        self.mismatch(g, h) <= COMPOSE_TOL * scale
    }
}

/// A full groupoid realization.
pub trait Groupoid: Arrows {
    /// Product `gh`; composability is not checked.
    fn multiply<T: Real>(&self, g: &[T], h: &[T]) -> Vec<T>;
    fn identity<T: Real>(&self, x: &[T]) -> Vec<T>;
    fn inverse<T: Real>(&self, g: &[T]) -> Vec<T>;

    /// Distance between elements, aware of periodic coordinates.
    fn element_distance(&self, a: &[f64], b: &[f64]) -> f64 {
        sup_distance(a, b)
    }

    /// Checked product.
    fn compose(&self, g: &[f64], h: &[f64]) -> Result<Vec<f64>, GroupoidError> {
        for v in [g, h] {
            if v.len() != self.element_dim() {
                return Err(GroupoidError::Dimension { expected: self.element_dim(), found: v.len() });
            }
        }
        if !self.composable(g, h) {
            return Err(GroupoidError::NotComposable { mismatch: self.mismatch(g, h) });
        }
        Ok(self.multiply(g, h))
    }
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}
