use super::KernelError;

/// Numerical tolerances shared by every algorithm in the crate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TolerancePolicy {
    /// Singular values below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Gauss–Newton convergence threshold on the residual infinity norm.
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Distance threshold for set equality and membership.
    pub set_eq_tol: f64,
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        Self { rank_rel_tol: 1e-9, newton_tol: 1e-10, newton_max_iter: 50, set_eq_tol: 1e-8 }
    }
}

impl TolerancePolicy {
    pub fn validate(&self) -> Result<(), KernelError> {
        let ok = [self.rank_rel_tol, self.newton_tol, self.set_eq_tol]
            .iter()
            .all(|t| t.is_finite() && *t > 0.0)
            && self.newton_max_iter > 0;
        if ok {
            Ok(())
        } else {
            Err(KernelError::InvalidTolerance(*self))
        }
    }
}
