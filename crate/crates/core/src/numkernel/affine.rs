//! Affine subspaces of ℝⁿ held simultaneously in implicit form `{x : Mx = c}`
//! and generator form `p + span(D)`.
//!
//! Both forms come out of one rank-revealing factorization, so every
//! constructor canonicalizes: constraint rows are orthonormal, the base point is
//! the minimum-norm point of the flat, and the direction basis is orthonormal.
//! Emptiness is a regular value, not an error.

use rand::Rng;

use super::linalg::{ensure_finite_matrix, ensure_finite_vector, rank_factor, rank_factor_scaled, spectral_norm};
use super::{KernelError, Matrix, TolerancePolicy, Vector};

/// The map `x ↦ A x + t`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    pub linear: Matrix,
    pub offset: Vector,
}

impl AffineMap {
    pub fn new(linear: Matrix, offset: Vector) -> Result<Self, KernelError> {
        if linear.nrows() != offset.len() {
            return Err(KernelError::DimensionMismatch { expected: linear.nrows(), found: offset.len() });
        }
        ensure_finite_matrix(&linear)?;
        ensure_finite_vector(&offset)?;
        Ok(Self { linear, offset })
    }

    pub fn linear(linear: Matrix) -> Self {
        let offset = Vector::zeros(linear.nrows());
        Self { linear, offset }
    }

    pub fn domain_dim(&self) -> usize {
        self.linear.ncols()
    }

    pub fn codomain_dim(&self) -> usize {
        self.linear.nrows()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.linear * x + &self.offset
    }
}

#[derive(Clone, Debug)]
struct Flat {
    /// r × n with orthonormal rows.
    constraints: Matrix,
    offset: Vector,
    /// Minimum-norm point of the flat.
    base: Vector,
    /// n × d with orthonormal columns.
    directions: Matrix,
}

#[derive(Clone, Debug)]
pub struct AffineSubspace {
    ambient: usize,
    flat: Option<Flat>,
    tol: TolerancePolicy,
}

impl AffineSubspace {
    pub fn empty(ambient: usize, tol: TolerancePolicy) -> Self {
        Self { ambient, flat: None, tol }
    }

    pub fn full(ambient: usize, tol: TolerancePolicy) -> Self {
        let flat = Flat {
            constraints: Matrix::zeros(0, ambient),
            offset: Vector::zeros(0),
            base: Vector::zeros(ambient),
            directions: Matrix::identity(ambient, ambient),
        };
        Self { ambient, flat: Some(flat), tol }
    }

    pub fn point(p: &Vector, tol: TolerancePolicy) -> Result<Self, KernelError> {
        Self::from_generators(p, &Matrix::zeros(p.len(), 0), tol)
    }

    /// `{x : M x = c}`.
    pub fn from_constraints(m: &Matrix, c: &Vector, tol: TolerancePolicy) -> Result<Self, KernelError> {
        Self::from_constraints_scaled(m, c, tol, 0.0)
    }

    /// Rows shorter than `rank_rel_tol * reference` count as zero rows.
    fn from_constraints_scaled(m: &Matrix, c: &Vector, tol: TolerancePolicy, reference: f64) -> Result<Self, KernelError> {
        if m.nrows() != c.len() {
            return Err(KernelError::DimensionMismatch { expected: m.nrows(), found: c.len() });
        }
        ensure_finite_matrix(m)?;
        ensure_finite_vector(c)?;
        let n = m.ncols();

        // Row-normalize so consistency residuals are distances.
        let max_row = (0..m.nrows()).map(|i| m.row(i).norm()).fold(reference, f64::max);
        let mut rows = Vec::new();
        let mut rhs = Vec::new();
        for i in 0..m.nrows() {
            let nrm = m.row(i).norm();
            if nrm == 0.0 || nrm < tol.rank_rel_tol * max_row {
                if c[i].abs() > tol.set_eq_tol {
                    return Ok(Self::empty(n, tol));
                }
                continue;
            }
            rows.push(m.row(i) / nrm);
            rhs.push(c[i] / nrm);
        }
        if rows.is_empty() {
            return Ok(Self::full(n, tol));
        }
        let mhat = Matrix::from_rows(&rows);
        let chat = Vector::from_vec(rhs);
        let f = rank_factor(&mhat, &tol);
        let inconsistency = (f.left_null_space.transpose() * &chat).norm();
        let scale = 1.0 + chat.amax();
        if inconsistency > tol.set_eq_tol * scale {
            return Ok(Self::empty(n, tol));
        }
        let sigma = &f.singular_values[..f.rank];
        let mut offset = f.column_space.transpose() * &chat;
        for (k, s) in sigma.iter().enumerate() {
            offset[k] /= s;
        }
        let constraints = f.row_space.transpose();
        let base = &f.row_space * &offset;
        let flat = Flat { constraints, offset, base, directions: f.null_space };
        Ok(Self { ambient: n, flat: Some(flat), tol })
    }

    /// `p + span(columns of D)`.
    pub fn from_generators(p: &Vector, d: &Matrix, tol: TolerancePolicy) -> Result<Self, KernelError> {
        Self::from_generators_scaled(p, d, tol, 0.0)
    }

    /// Directions are dropped below `rank_rel_tol * reference` as well.
    fn from_generators_scaled(p: &Vector, d: &Matrix, tol: TolerancePolicy, reference: f64) -> Result<Self, KernelError> {
        if d.nrows() != p.len() {
            return Err(KernelError::DimensionMismatch { expected: p.len(), found: d.nrows() });
        }
        ensure_finite_vector(p)?;
        ensure_finite_matrix(d)?;
        let f = rank_factor_scaled(d, &tol, reference);
        let directions = f.column_space;
        let base = p - &directions * (directions.transpose() * p);
        let constraints = f.left_null_space.transpose();
        let offset = &constraints * p;
        let flat = Flat { constraints, offset, base, directions };
        Ok(Self { ambient: p.len(), flat: Some(flat), tol })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient
    }

    pub fn tolerance(&self) -> &TolerancePolicy {
        &self.tol
    }

    pub fn is_empty(&self) -> bool {
        self.flat.is_none()
    }

    /// Dimension of the flat; `None` when empty.
    pub fn dim(&self) -> Option<usize> {
        self.flat.as_ref().map(|f| f.directions.ncols())
    }

    /// Dimension as a signed integer with `-1` for the empty set.
    pub fn signed_dim(&self) -> i64 {
        self.dim().map_or(-1, |d| d as i64)
    }

    /// Canonical implicit form `(M, c)` with orthonormal rows.
    pub fn constraints(&self) -> Option<(&Matrix, &Vector)> {
        self.flat.as_ref().map(|f| (&f.constraints, &f.offset))
    }

    pub fn base_point(&self) -> Option<&Vector> {
        self.flat.as_ref().map(|f| &f.base)
    }

    pub fn directions(&self) -> Option<&Matrix> {
        self.flat.as_ref().map(|f| &f.directions)
    }

    /// Euclidean distance from `x` to the flat (∞ when empty).
    pub fn distance(&self, x: &Vector) -> f64 {
        match &self.flat {
            None => f64::INFINITY,
            Some(f) => (&f.constraints * x - &f.offset).norm(),
        }
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.distance(x) < self.tol.set_eq_tol
    }

    /// Orthogonal projection of `x` onto the flat.
    pub fn project(&self, x: &Vector) -> Option<Vector> {
        self.flat.as_ref().map(|f| x - f.constraints.transpose() * (&f.constraints * x - &f.offset))
    }

    /// A random point `p + D u` with `u` uniform in `[-half_width, half_width]^d`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, half_width: f64) -> Option<Vector> {
        self.flat.as_ref().map(|f| {
            let u = Vector::from_fn(f.directions.ncols(), |_, _| rng.random_range(-half_width..=half_width));
            &f.base + &f.directions * u
        })
    }

    fn check_dims(&self, other: &Self) -> Result<(), KernelError> {
        if self.ambient != other.ambient {
            return Err(KernelError::DimensionMismatch { expected: self.ambient, found: other.ambient });
        }
        Ok(())
    }

    pub fn intersect(&self, other: &Self) -> Result<Self, KernelError> {
        self.check_dims(other)?;
        let (a, b) = match (&self.flat, &other.flat) {
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(Self::empty(self.ambient, self.tol)),
        };
        let m = stack_rows(&a.constraints, &b.constraints);
        let c = stack_vec(&a.offset, &b.offset);
        Self::from_constraints(&m, &c, self.tol)
    }

    /// `{A x + t : x ∈ self}`.
    pub fn image(&self, map: &AffineMap) -> Result<Self, KernelError> {
        if map.domain_dim() != self.ambient {
            return Err(KernelError::DimensionMismatch { expected: self.ambient, found: map.domain_dim() });
        }
        match &self.flat {
            None => Ok(Self::empty(map.codomain_dim(), self.tol)),
            Some(f) => {
                let p = map.apply(&f.base);
                // Directions are orthonormal, so ‖A‖ bounds the generators.
                let d = &map.linear * &f.directions;
                Self::from_generators_scaled(&p, &d, self.tol, spectral_norm(&map.linear))
            }
        }
    }

    /// `{x : A x + t ∈ self}`.
    pub fn preimage(&self, map: &AffineMap) -> Result<Self, KernelError> {
        if map.codomain_dim() != self.ambient {
            return Err(KernelError::DimensionMismatch { expected: self.ambient, found: map.codomain_dim() });
        }
        match &self.flat {
            None => Ok(Self::empty(map.domain_dim(), self.tol)),
            Some(f) => {
                let m = &f.constraints * &map.linear;
                let c = &f.offset - &f.constraints * &map.offset;
                Self::from_constraints_scaled(&m, &c, self.tol, spectral_norm(&map.linear))
            }
        }
    }

    /// Set equality up to `tol.set_eq_tol`: equal dimensions, mutual base-point
    /// residuals and the largest principal angle between direction spaces.
    pub fn approx_eq(&self, other: &Self, tol: &TolerancePolicy) -> Result<bool, KernelError> {
        self.check_dims(other)?;
        let (a, b) = match (&self.flat, &other.flat) {
            (None, None) => return Ok(true),
            (Some(a), Some(b)) => (a, b),
            _ => return Ok(false),
        };
        if a.directions.ncols() != b.directions.ncols() {
            return Ok(false);
        }
        if other.distance(&a.base) >= tol.set_eq_tol || self.distance(&b.base) >= tol.set_eq_tol {
            return Ok(false);
        }
        Ok(spectral_norm(&(&b.constraints * &a.directions)) < tol.set_eq_tol)
    }

    /// `self ⊆ other` up to `tol.set_eq_tol`.
    pub fn is_subset_of(&self, other: &Self, tol: &TolerancePolicy) -> Result<bool, KernelError> {
        self.check_dims(other)?;
        let (a, b) = match (&self.flat, &other.flat) {
            (None, _) => return Ok(true),
            (_, None) => return Ok(false),
            (Some(a), Some(b)) => (a, b),
        };
        if other.distance(&a.base) >= tol.set_eq_tol {
            return Ok(false);
        }
        Ok(spectral_norm(&(&b.constraints * &a.directions)) < tol.set_eq_tol)
    }
}

pub(crate) fn stack_rows(a: &Matrix, b: &Matrix) -> Matrix {
    let mut m = Matrix::zeros(a.nrows() + b.nrows(), a.ncols());
    m.rows_mut(0, a.nrows()).copy_from(a);
    m.rows_mut(a.nrows(), b.nrows()).copy_from(b);
    m
}

pub(crate) fn stack_vec(a: &Vector, b: &Vector) -> Vector {
    let mut v = Vector::zeros(a.len() + b.len());
    v.rows_mut(0, a.len()).copy_from(a);
    v.rows_mut(a.len(), b.len()).copy_from(b);
    v
}
