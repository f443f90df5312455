use super::extract::restrict;
use super::DynamicsError;
use crate::groupoid::Arrows;
use crate::numkernel::{AffineSubspace, TolerancePolicy};
use crate::par::Exec;

/// A finite index-addressed family `k ↦ E_k`, `k = k0, …, k0 + len − 1`, of
/// affine equations on one realization.
#[derive(Clone, Debug)]
pub struct EquationSequence<A> {
    pub arrows: A,
    pub first_index: usize,
    pub sets: Vec<AffineSubspace>,
    pub tol: TolerancePolicy,
}

impl<A: Arrows> EquationSequence<A> {
    pub fn new(arrows: A, first_index: usize, sets: Vec<AffineSubspace>, tol: TolerancePolicy) -> Result<Self, DynamicsError> {
        if !arrows.is_affine() {
            return Err(DynamicsError::NotAffine);
        }
        if let Some(bad) = sets.iter().find(|s| s.ambient_dim() != arrows.element_dim()) {
            return Err(DynamicsError::Dimension { expected: arrows.element_dim(), found: bad.ambient_dim() });
        }
        Ok(Self { arrows, first_index, sets, tol })
    }

    pub fn equation(&self, k: usize) -> Option<&AffineSubspace> {
        k.checked_sub(self.first_index).and_then(|i| self.sets.get(i))
    }

    pub fn last_index(&self) -> Option<usize> {
        (!self.sets.is_empty()).then(|| self.first_index + self.sets.len() - 1)
    }
}

/// Per-index chain: `c_sets[i] = [C_k]^i`, `e_sets[i] = [E_k]^i` with
/// `[E_k]^0 = E_k`.
#[derive(Clone, Debug)]
pub struct SequenceChain {
    pub k: usize,
    pub c_sets: Vec<AffineSubspace>,
    pub e_sets: Vec<AffineSubspace>,
    /// Smallest `i` with `[E_k]^{i+1} = [E_k]^i`, if seen within the depth.
    pub stabilized: Option<usize>,
}

/// Time-indexed extraction:
/// `[E_k]^i = E_k ∩ β⁻¹([C_{k+1}]^{i−1})`, `[C_k]^i = α([E_k]^i)`.
///
/// Level `i` at index `k` needs `E_k, …, E_{k+i}`, so indices near the end
/// of the family carry shorter chains.
pub fn sequence_extract<A: Arrows>(
    seq: &EquationSequence<A>,
    k0: usize,
    depth: usize,
) -> Result<Vec<SequenceChain>, DynamicsError> {
    sequence_extract_with(seq, k0, depth, Exec::default())
}

pub fn sequence_extract_with<A: Arrows>(
    seq: &EquationSequence<A>,
    k0: usize,
    depth: usize,
    exec: Exec,
) -> Result<Vec<SequenceChain>, DynamicsError> {
    if depth == 0 {
        return Err(DynamicsError::Invalid("depth must be at least 1".into()));
    }
    seq.equation(k0).ok_or(DynamicsError::MissingIndex(k0))?;
    let last = seq.last_index().expect("k0 is present");
    let (alpha, beta) = seq.arrows.affine_structure().ok_or(DynamicsError::NotAffine)?;
    let count = last - k0 + 1;

    // levels[i][j] = ([E_{k0+j}]^i, [C_{k0+j}]^i) for j + i < count.
    let mut levels: Vec<Vec<(AffineSubspace, AffineSubspace)>> = Vec::new();
    let level0 = exec.map_range(count, |j| {
        let e = seq.equation(k0 + j).expect("in range").clone();
        let c = e.image(&alpha)?;
        Ok::<_, DynamicsError>((e, c))
    });
    levels.push(level0.into_iter().collect::<Result<_, _>>()?);
    for i in 1..=depth.min(count - 1) {
        let prev = &levels[i - 1];
        let next = exec.map_range(count - i, |j| {
            let e = restrict(seq.equation(k0 + j).expect("in range"), Some(&prev[j + 1].1), None, &alpha, &beta)?;
            let c = e.image(&alpha)?;
            Ok::<_, DynamicsError>((e, c))
        });
        levels.push(next.into_iter().collect::<Result<_, _>>()?);
    }

    let tol = seq.tol;
    (0..count)
        .map(|j| {
            let (e_sets, c_sets): (Vec<_>, Vec<_>) =
                levels.iter().take_while(|lvl| j < lvl.len()).map(|lvl| lvl[j].clone()).unzip();
            let mut stabilized = None;
            for i in 0..e_sets.len().saturating_sub(1) {
                if e_sets[i + 1].approx_eq(&e_sets[i], &tol)? {
                    stabilized = Some(i);
                    break;
                }
            }
            Ok(SequenceChain { k: k0 + j, c_sets, e_sets, stabilized })
        })
        .collect()
}
