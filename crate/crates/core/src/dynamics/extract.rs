use std::fmt::Write as _;

use super::{DynamicsError, ImplicitEquation};
use crate::groupoid::Arrows;
use crate::numkernel::{AffineMap, AffineSubspace, TolerancePolicy};
use crate::output::{csv_header, csv_row};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Forward,
    Backward,
    Full,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Forward => "FORWARD",
            Mode::Backward => "BACKWARD",
            Mode::Full => "FULL",
        }
    }

    fn uses_forward_chain(self) -> bool {
        matches!(self, Mode::Forward | Mode::Full)
    }

    fn uses_backward_chain(self) -> bool {
        matches!(self, Mode::Backward | Mode::Full)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ChainStatus {
    /// `E^k̄ = E^{k̄+1}`.
    Stabilized(usize),
    /// No fixed point within this many iterations.
    NotStabilized(usize),
}

/// The constraint chain of one extraction run.
///
/// Index `k` of `c_sets`, `d_sets` and `e_sets` holds `C^k = α(E^k)`,
/// `D^k = β(E^k)` and `E^k`, with `E⁰ = E`. `c_sets` is empty in BACKWARD
/// mode and `d_sets` in FORWARD mode.
#[derive(Clone, Debug)]
pub struct ChainReport {
    pub mode: Mode,
    pub c_sets: Vec<AffineSubspace>,
    pub d_sets: Vec<AffineSubspace>,
    pub e_sets: Vec<AffineSubspace>,
    pub status: ChainStatus,
    /// `Ē = E^k̄`, or the last iterate when not stabilized.
    pub extracted: AffineSubspace,
}

impl ChainReport {
    pub fn stabilization_index(&self) -> Option<usize> {
        match self.status {
            ChainStatus::Stabilized(k) => Some(k),
            ChainStatus::NotStabilized(_) => None,
        }
    }

    pub fn c_dims(&self) -> Vec<i64> {
        self.c_sets.iter().map(AffineSubspace::signed_dim).collect()
    }

    pub fn d_dims(&self) -> Vec<i64> {
        self.d_sets.iter().map(AffineSubspace::signed_dim).collect()
    }

    pub fn e_dims(&self) -> Vec<i64> {
        self.e_sets.iter().map(AffineSubspace::signed_dim).collect()
    }

    /// Line-oriented summary.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "mode {}", self.mode.name());
        for k in 0..self.e_sets.len() {
            let _ = write!(out, "k {k}:");
            if let Some(c) = self.c_sets.get(k) {
                let _ = write!(out, " dim C = {}", c.signed_dim());
            }
            if let Some(d) = self.d_sets.get(k) {
                let _ = write!(out, " dim D = {}", d.signed_dim());
            }
            let _ = writeln!(out, " dim E = {}", self.e_sets[k].signed_dim());
        }
        match self.status {
            ChainStatus::Stabilized(k) => {
                let _ = writeln!(out, "stabilized at k = {k}");
            }
            ChainStatus::NotStabilized(n) => {
                let _ = writeln!(out, "NOT_STABILIZED after {n} iterations");
            }
        }
        let _ = writeln!(out, "extracted dim {}", self.extracted.signed_dim());
        out
    }

    /// One row per `k`; empty or absent sets have dimension −1.
    pub fn to_csv(&self) -> String {
        let mut out = csv_header("extract");
        out.push_str(&csv_row(["mode", "k", "dim_c", "dim_d", "dim_e", "stabilized"]));
        let k_bar = self.stabilization_index();
        for k in 0..self.e_sets.len() {
            let dim = |v: &[AffineSubspace]| v.get(k).map_or(-1, AffineSubspace::signed_dim).to_string();
            out.push_str(&csv_row([
                self.mode.name().to_string(),
                k.to_string(),
                dim(&self.c_sets),
                dim(&self.d_sets),
                dim(&self.e_sets),
                u8::from(k_bar == Some(k)).to_string(),
            ]));
        }
        out
    }
}

fn affine_parts<A: Arrows>(eq: &ImplicitEquation<A>) -> Result<(&AffineSubspace, AffineMap, AffineMap), DynamicsError> {
    let set = eq.as_affine().ok_or(DynamicsError::NotAffine)?;
    let (alpha, beta) = eq.arrows.affine_structure().ok_or(DynamicsError::NotAffine)?;
    Ok((set, alpha, beta))
}

/// Exact integrability test: `E ⊆ β⁻¹(α(E))` (forward), `E ⊆ α⁻¹(β(E))`
/// (backward), both for FULL.
pub fn inclusion_test<A: Arrows>(eq: &ImplicitEquation<A>, mode: Mode) -> Result<bool, DynamicsError> {
    let (set, alpha, beta) = affine_parts(eq)?;
    let tol = eq.tol;
    let mut ok = true;
    if mode.uses_forward_chain() {
        ok &= set.is_subset_of(&set.image(&alpha)?.preimage(&beta)?, &tol)?;
    }
    if mode.uses_backward_chain() {
        ok &= set.is_subset_of(&set.image(&beta)?.preimage(&alpha)?, &tol)?;
    }
    Ok(ok)
}

/// Default iteration cap: the affine chain strictly loses dimension until it
/// stabilizes, so `element_dim + 2` rounds always suffice.
pub fn default_max_iter(element_dim: usize) -> usize {
    element_dim + 2
}

/// One round: `E ∩ β⁻¹(C) ∩ α⁻¹(D)` with the chains used by `mode`.
pub(crate) fn restrict(
    e: &AffineSubspace,
    c: Option<&AffineSubspace>,
    d: Option<&AffineSubspace>,
    alpha: &AffineMap,
    beta: &AffineMap,
) -> Result<AffineSubspace, DynamicsError> {
    let mut next = e.clone();
    if let Some(c) = c {
        next = next.intersect(&c.preimage(beta)?)?;
    }
    if let Some(d) = d {
        next = next.intersect(&d.preimage(alpha)?)?;
    }
    Ok(next)
}

/// Run the extraction algorithm on an affine equation.
pub fn extract_affine<A: Arrows>(
    eq: &ImplicitEquation<A>,
    mode: Mode,
    max_iter: Option<usize>,
) -> Result<ChainReport, DynamicsError> {
    let (set, alpha, beta) = affine_parts(eq)?;
    let max_iter = max_iter.unwrap_or_else(|| default_max_iter(eq.arrows.element_dim()));
    if max_iter == 0 {
        return Err(DynamicsError::Invalid("max_iter must be at least 1".into()));
    }
    let tol: TolerancePolicy = eq.tol;
    let mut c_sets = Vec::new();
    let mut d_sets = Vec::new();
    let mut e_sets = vec![set.clone()];
    for k in 0..max_iter {
        let ek = &e_sets[k];
        let c = mode.uses_forward_chain().then(|| ek.image(&alpha)).transpose()?;
        let d = mode.uses_backward_chain().then(|| ek.image(&beta)).transpose()?;
        let next = restrict(set, c.as_ref(), d.as_ref(), &alpha, &beta)?;
        c_sets.extend(c);
        d_sets.extend(d);
        if next.approx_eq(ek, &tol)? {
            let extracted = ek.clone();
            return Ok(ChainReport { mode, c_sets, d_sets, e_sets, status: ChainStatus::Stabilized(k), extracted });
        }
        e_sets.push(next);
    }
    let extracted = e_sets.last().cloned().expect("chain starts with E");
    Ok(ChainReport { mode, c_sets, d_sets, e_sets, status: ChainStatus::NotStabilized(max_iter), extracted })
}
