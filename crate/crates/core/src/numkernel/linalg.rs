//! Rank-revealing factorization of small dense matrices.

use nalgebra::SymmetricEigen;

use super::{KernelError, Matrix, TolerancePolicy, Vector};

/// Orthonormal bases for the four fundamental subspaces of a matrix `M` (m×n).
///
/// Bases are stored as matrices with orthonormal columns.
#[derive(Clone, Debug)]
pub struct RankFactor {
    pub rank: usize,
    /// All singular values, descending.
    pub singular_values: Vec<f64>,
    /// n × rank, spans the row space of `M`.
    pub row_space: Matrix,
    /// m × rank, spans the column space of `M`.
    pub column_space: Matrix,
    /// n × (n − rank), `M * v = 0`.
    pub null_space: Matrix,
    /// m × (m − rank), `wᵀ M = 0`.
    pub left_null_space: Matrix,
}

impl RankFactor {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    /// Smallest singular value among the `min(m, n)` computed.
    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// Moore–Penrose pseudo-inverse restricted to the numerical rank.
    pub fn pseudo_inverse(&self) -> Matrix {
        let n = self.row_space.nrows();
        let m = self.column_space.nrows();
        let mut pinv = Matrix::zeros(n, m);
        for k in 0..self.rank {
            let s = self.singular_values[k];
            pinv += self.row_space.column(k) * self.column_space.column(k).transpose() / s;
        }
        pinv
    }
}

/// Numerical rank decision relative to the largest singular value, or to
/// `reference` when that is larger.
pub fn numerical_rank(singular_values: &[f64], tol: &TolerancePolicy, reference: f64) -> usize {
    let smax = singular_values.iter().copied().fold(reference, f64::max);
    if smax == 0.0 {
        return 0;
    }
    singular_values.iter().filter(|&&s| s >= tol.rank_rel_tol * smax).count()
}

pub fn rank_factor(m: &Matrix, tol: &TolerancePolicy) -> RankFactor {
    rank_factor_scaled(m, tol, 0.0)
}

/// [`rank_factor`] with singular values below `rank_rel_tol * reference`
/// also treated as zero. Products `A·B` of well-scaled factors pass
/// `‖A‖‖B‖` so that rounding residue is not mistaken for rank.
pub fn rank_factor_scaled(m: &Matrix, tol: &TolerancePolicy, reference: f64) -> RankFactor {
    let (rows, cols) = m.shape();
    if rows == 0 || cols == 0 {
        return RankFactor {
            rank: 0,
            singular_values: Vec::new(),
            row_space: Matrix::zeros(cols, 0),
            column_space: Matrix::zeros(rows, 0),
            null_space: Matrix::identity(cols, cols),
            left_null_space: Matrix::identity(rows, rows),
        };
    }
    let Svd { u, sigma, v } = svd(m);
    let mut order: Vec<usize> = (0..sigma.len()).collect();
    order.sort_by(|&a, &b| sigma[b].total_cmp(&sigma[a]));
    let singular_values: Vec<f64> = order.iter().map(|&k| sigma[k]).collect();
    let rank = numerical_rank(&singular_values, tol, reference);

    let mut row_space = Matrix::zeros(cols, rank);
    let mut column_space = Matrix::zeros(rows, rank);
    for (j, &k) in order.iter().take(rank).enumerate() {
        row_space.set_column(j, &v.column(k));
        column_space.set_column(j, &u.column(k));
    }
    let null_space = orthogonal_complement(&row_space);
    let left_null_space = orthogonal_complement(&column_space);
    RankFactor { rank, singular_values, row_space, column_space, null_space, left_null_space }
}

/// Orthonormal basis (as columns) of the complement of the span of the
/// orthonormal columns of `basis`.
pub fn orthogonal_complement(basis: &Matrix) -> Matrix {
    let n = basis.nrows();
    let r = basis.ncols();
    if r == 0 {
        return Matrix::identity(n, n);
    }
    if r >= n {
        return Matrix::zeros(n, 0);
    }
    let projector = Matrix::identity(n, n) - basis * basis.transpose();
    let eig = SymmetricEigen::new(projector);
    let mut idx: Vec<usize> = (0..n).filter(|&k| eig.eigenvalues[k] > 0.5).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    idx.truncate(n - r);
    let mut out = Matrix::zeros(n, idx.len());
    for (j, &k) in idx.iter().enumerate() {
        out.set_column(j, &eig.eigenvectors.column(k));
    }
    // Re-orthonormalize against rounding in the eigen-solver.
    if out.ncols() > 0 {
        let qr = out.clone().qr();
        out = qr.q().columns(0, idx.len()).into_owned();
    }
    out
}

/// Minimum-norm least-squares solution of `A x = b`.
pub fn least_squares(a: &Matrix, b: &Vector, tol: &TolerancePolicy) -> Vector {
    rank_factor(a, tol).pseudo_inverse() * b
}

/// Build a matrix from rows, rejecting ragged or non-finite input.
pub fn matrix_from_rows(rows: &[Vec<f64>]) -> Result<Matrix, KernelError> {
    let ncols = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != ncols) {
        return Err(KernelError::DimensionMismatch { expected: ncols, found: bad.len() });
    }
    let m = Matrix::from_fn(rows.len(), ncols, |i, j| rows[i][j]);
    ensure_finite_matrix(&m)?;
    Ok(m)
}

pub fn vector_from_slice(v: &[f64]) -> Result<Vector, KernelError> {
    let out = Vector::from_column_slice(v);
    ensure_finite_vector(&out)?;
    Ok(out)
}

pub fn ensure_finite_matrix(m: &Matrix) -> Result<(), KernelError> {
    if m.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(KernelError::NonFinite)
    }
}

pub fn ensure_finite_vector(v: &Vector) -> Result<(), KernelError> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(KernelError::NonFinite)
    }
}

/// Spectral norm of a (small) matrix.
pub fn spectral_norm(m: &Matrix) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    svd(m).sigma.into_iter().fold(0.0, f64::max)
}

/// Thin SVD `M = U diag(σ) Vᵀ` by one-sided Jacobi rotations, unordered.
///
/// nalgebra 0.35's bidiagonal SVD returns wrong factors on some small
/// matrices (a 2×2 rank-one case and a 6×4 case with clustered singular
/// values both reconstruct only to ~1e-2), so it is not used. Jacobi keeps
/// small singular values to relative precision. `U` columns belonging to
/// zero singular values are zero.
struct Svd {
    u: Matrix,
    sigma: Vec<f64>,
    v: Matrix,
}

fn svd(m: &Matrix) -> Svd {
    if m.nrows() < m.ncols() {
        let t = svd(&m.transpose());
        return Svd { u: t.v, sigma: t.sigma, v: t.u };
    }
    let n = m.ncols();
    let mut u = m.clone();
    let mut v = Matrix::identity(n, n);
    for _sweep in 0..80 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = u.column(p).norm_squared();
                let beta = u.column(q).norm_squared();
                let gamma = u.column(p).dot(&u.column(q));
                if gamma == 0.0 || gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                for mat in [&mut u, &mut v] {
                    for i in 0..mat.nrows() {
                        let (x, y) = (mat[(i, p)], mat[(i, q)]);
                        mat[(i, p)] = c * x - s * y;
                        mat[(i, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma: Vec<f64> = (0..n).map(|k| u.column(k).norm()).collect();
    for (k, &s) in sigma.iter().enumerate() {
        if s > 0.0 {
            u.column_mut(k).unscale_mut(s);
        }
    }
    Svd { u, sigma, v }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> TolerancePolicy {
        TolerancePolicy::default()
    }

    #[test]
    fn diagonal_rank_one() {
        let m = matrix_from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let f = rank_factor(&m, &tol());
        assert_eq!(f.rank, 1);
        assert_eq!(f.left_null_space.ncols(), 1);
        let w = f.left_null_space.column(0);
        assert!(w[0].abs() < 1e-14 && (w[1].abs() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn identity_has_full_rank() {
        let f = rank_factor(&Matrix::identity(3, 3), &tol());
        assert_eq!(f.rank, 3);
        assert_eq!(f.null_space.ncols(), 0);
        assert_eq!(f.left_null_space.ncols(), 0);
    }

    #[test]
    fn nearly_singular_is_rank_one() {
        // Independent oracle: σmax from the trace of MᵀM, σmin from σmax·σmin = |det M|.
        let e = 1e-14;
        let m = matrix_from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0 + e]]).unwrap();
        let mtm = m.transpose() * &m;
        let tr = mtm[(0, 0)] + mtm[(1, 1)];
        let det = (m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)]).abs();
        let smax = (tr - 2.0 * det * det / tr).sqrt();
        let smin = det / smax;
        assert!(smin < 1e-9 * smax);
        let f = rank_factor(&m, &tol());
        assert_eq!(f.rank, 1);
        assert!((f.sigma_max() - smax).abs() < 1e-12);
    }

    #[test]
    fn reference_scale_suppresses_rounding_residue() {
        let m = matrix_from_rows(&[vec![1e-17, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(rank_factor(&m, &tol()).rank, 1);
        assert_eq!(rank_factor_scaled(&m, &tol(), 1.0).rank, 0);
    }

    #[test]
    fn clustered_singular_values_reconstruct() {
        // Four orthonormal rows stacked on two more, with σ clustered near √2 and 1.
        let a = matrix_from_rows(&[
            vec![0.0, -1.0, -2.0, 0.0],
            vec![1.0, 1.0, -1.0, 2.0],
            vec![1.0, 1.0, -1.0, 1.0],
            vec![2.0, 0.0, -1.0, 2.0],
        ])
        .unwrap();
        let qa = rank_factor(&a, &tol()).row_space.transpose();
        let b = matrix_from_rows(&[vec![0.0, 0.0, 2.0, -1.0], vec![0.0, 0.0, 1.0, -1.0]]).unwrap();
        let qb = rank_factor(&b, &tol()).row_space.transpose();
        let mut m = Matrix::zeros(6, 4);
        m.rows_mut(0, 4).copy_from(&qa);
        m.rows_mut(4, 2).copy_from(&qb);
        let f = rank_factor(&m, &tol());
        let recon = &f.column_space
            * Matrix::from_diagonal(&Vector::from_column_slice(&f.singular_values[..f.rank]))
            * f.row_space.transpose();
        assert!((recon - &m).amax() < 1e-12);
    }

    #[test]
    fn rank_one_square_column_space() {
        let m = matrix_from_rows(&[
            vec![-0.5720775535473551, 0.6324555320336761],
            vec![0.5720775535473559, -0.6324555320336755],
        ])
        .unwrap();
        let f = rank_factor(&m, &tol());
        assert_eq!(f.rank, 1);
        // Oracle: the columns are multiples of (1, −1).
        let c = f.column_space.column(0);
        assert!((c[0] + c[1]).abs() < 1e-14 && (c[0].abs() - 0.5_f64.sqrt()).abs() < 1e-14);
        assert!((f.sigma_max() - m.norm()).abs() < 1e-14);
    }

    #[test]
    fn zero_matrix_and_empty_shapes() {
        let f = rank_factor(&Matrix::zeros(2, 3), &tol());
        assert_eq!(f.rank, 0);
        assert_eq!(f.null_space.ncols(), 3);
        assert_eq!(f.left_null_space.ncols(), 2);
        let f = rank_factor(&Matrix::zeros(0, 3), &tol());
        assert_eq!(f.rank, 0);
        assert_eq!(f.null_space.ncols(), 3);
    }

    #[test]
    fn bases_are_orthonormal_and_annihilate() {
        let m = matrix_from_rows(&[
            vec![1.0, 2.0, 3.0, 4.0],
            vec![2.0, 4.0, 6.0, 8.0],
            vec![0.0, 1.0, 0.0, 1.0],
        ])
        .unwrap();
        let f = rank_factor(&m, &tol());
        assert_eq!(f.rank, 2);
        let n = &f.null_space;
        assert!((n.transpose() * n - Matrix::identity(2, 2)).norm() < 1e-12);
        assert!((&m * n).norm() < 1e-12);
        assert!((f.left_null_space.transpose() * &m).norm() < 1e-12);
        assert!((f.row_space.transpose() * n).norm() < 1e-12);
        let recon = &f.column_space
            * Matrix::from_diagonal(&Vector::from_column_slice(&f.singular_values[..f.rank]))
            * f.row_space.transpose();
        assert!((recon - &m).norm() < 1e-10 * f.sigma_max());
    }

    #[test]
    fn rejects_non_finite_and_ragged() {
        assert!(matrix_from_rows(&[vec![1.0, f64::NAN]]).is_err());
        assert!(matrix_from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
        assert!(vector_from_slice(&[f64::INFINITY]).is_err());
    }

    #[test]
    fn pseudo_inverse_solves_consistent_systems() {
        let a = matrix_from_rows(&[vec![1.0, 1.0], vec![2.0, 2.0]]).unwrap();
        let b = Vector::from_column_slice(&[2.0, 4.0]);
        let x = least_squares(&a, &b, &tol());
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 1.0).abs() < 1e-12);
    }
}
