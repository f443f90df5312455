use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{DynamicsError, ImplicitEquation, Representation};
use crate::groupoid::Arrows;
use crate::numkernel::dual::constants;
use crate::numkernel::newton::gauss_newton;
use crate::numkernel::{Dual, EvalError, Vector};
use crate::par::Exec;

/// Best residual below which an all-seeds failure is reported as inconclusive.
pub const INCONCLUSIVE_RESIDUAL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Backward,
}

#[derive(Clone, Copy, Debug)]
pub struct ClassifyOptions {
    pub depth: usize,
    /// Random restarts per feasibility solve, in addition to the warm start.
    pub seeds: usize,
    /// Random seeds are uniform in `[−half_width, half_width]^n`.
    pub half_width: f64,
    pub rng_seed: u64,
    pub exec: Exec,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        Self { depth: 5, seeds: 8, half_width: 2.0, rng_seed: 0, exec: Exec::default() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthResult {
    /// Number of successors (or predecessors) found, at most `requested`.
    pub depth: usize,
    pub requested: usize,
    /// All seeds failed at length `depth + 1` but came within
    /// [`INCONCLUSIVE_RESIDUAL`].
    pub inconclusive: bool,
    /// Best residual of the failed solve, when one failed.
    pub failing_residual: Option<f64>,
    /// The chain found for length `depth`, nearest to the start point first.
    pub witness: Vec<Vec<f64>>,
}

impl DepthResult {
    pub fn reached_requested(&self) -> bool {
        self.depth == self.requested
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub forward: DepthResult,
    pub backward: DepthResult,
}

/// Bounded-depth integrability of `E` at `g` in both directions.
pub fn classify_point<A: Arrows>(
    eq: &ImplicitEquation<A>,
    g: &[f64],
    opts: &ClassifyOptions,
) -> Result<Classification, DynamicsError> {
    Ok(Classification {
        forward: chain_depth(eq, g, Direction::Forward, opts)?,
        backward: chain_depth(eq, g, Direction::Backward, opts)?,
    })
}

/// [`classify_point`] over many points, fanned out with `opts.exec`.
pub fn classify_batch<A: Arrows>(
    eq: &ImplicitEquation<A>,
    points: &[Vec<f64>],
    opts: &ClassifyOptions,
) -> Result<Vec<Classification>, DynamicsError> {
    opts.exec.map(points, |g| classify_point(eq, g, opts)).into_iter().collect()
}

fn block_size<A: Arrows>(eq: &ImplicitEquation<A>) -> usize {
    match &eq.rep {
        Representation::Parametrized { psi, .. } => psi.in_dim(),
        _ => eq.arrows.element_dim(),
    }
}

fn element<A: Arrows>(eq: &ImplicitEquation<A>, u: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    match &eq.rep {
        Representation::Parametrized { psi, .. } => psi.eval(u),
        _ => Ok(u.to_vec()),
    }
}

fn membership<A: Arrows>(eq: &ImplicitEquation<A>, h: &[Dual]) -> Result<Vec<Dual>, EvalError> {
    match &eq.rep {
        Representation::Parametrized { .. } => Ok(Vec::new()),
        Representation::ConstraintMap(phi) => phi.eval(h),
        Representation::Affine(set) => Ok(match set.constraints() {
            None => vec![Dual::constant(1.0)],
            Some((m, c)) => (0..m.nrows())
                .map(|i| h.iter().enumerate().fold(Dual::constant(-c[i]), |acc, (j, x)| acc + x.clone() * m[(i, j)]))
                .collect(),
        }),
    }
}

/// Residual of a chain `g = g₀, g₁, …, g_d` whose unknown blocks are `z`.
fn chain_residual<A: Arrows>(
    eq: &ImplicitEquation<A>,
    g: &[f64],
    dir: Direction,
    d: usize,
    z: &[Dual],
) -> Result<Vec<Dual>, EvalError> {
    let k = block_size(eq);
    let mut prev = constants(g);
    let mut out = Vec::new();
    for i in 0..d {
        let h = element(eq, &z[i * k..(i + 1) * k])?;
        let (a, b) = match dir {
            Direction::Forward => (eq.arrows.source(&h), eq.arrows.target(&prev)),
            Direction::Backward => (eq.arrows.target(&h), eq.arrows.source(&prev)),
        };
        out.extend(a.into_iter().zip(b).map(|(x, y)| x - y));
        out.extend(membership(eq, &h)?);
        prev = h;
    }
    Ok(out)
}

fn mix_seed(base: u64, d: usize, dir: Direction) -> u64 {
    let tag = (d as u64) << 1 | u64::from(dir == Direction::Backward);
    base.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(tag.wrapping_mul(0xBF58_476D_1CE4_E5B9))
}

/// Longest chain (up to `opts.depth`) leaving `g` in direction `dir`.
///
/// Each length `d` is one joint Gauss–Newton solve over all `d` unknown
/// elements, tried first from the previous chain extended by a copy of its
/// last block, then from `opts.seeds` random starts. The search stops at the
/// first length with no chain, since a longer chain would contain one.
pub fn chain_depth<A: Arrows>(
    eq: &ImplicitEquation<A>,
    g: &[f64],
    dir: Direction,
    opts: &ClassifyOptions,
) -> Result<DepthResult, DynamicsError> {
    if opts.seeds == 0 {
        return Err(DynamicsError::Invalid("seeds must be at least 1".into()));
    }
    let residual = eq.membership_residual(g)?;
    if !eq.contains(g) {
        return Err(DynamicsError::NotMember { residual });
    }
    let k = block_size(eq);
    let first_block: Vec<f64> = match eq.rep {
        Representation::Parametrized { .. } => vec![0.0; k],
        _ => g.to_vec(),
    };
    let mut solution: Vec<f64> = Vec::new();
    let mut result = DepthResult { depth: 0, requested: opts.depth, inconclusive: false, failing_residual: None, witness: Vec::new() };

    for d in 1..=opts.depth {
        let f = |z: &[Dual]| chain_residual(eq, g, dir, d, z);
        let last_block = if d == 1 { first_block.clone() } else { solution[(d - 2) * k..].to_vec() };
        let warm: Vec<f64> = solution.iter().copied().chain(last_block).collect();

        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(opts.rng_seed, d, dir));
        let mut random_block = |n: usize| -> Vec<f64> {
            (0..n).map(|_| rng.random_range(-opts.half_width..=opts.half_width)).collect()
        };
        let mut starts = vec![warm];
        for s in 0..opts.seeds {
            let start = if s % 2 == 0 && d > 1 {
                solution.iter().copied().chain(random_block(k)).collect()
            } else {
                random_block(d * k)
            };
            starts.push(start);
        }

        let found = match gauss_newton(f, &Vector::from_vec(starts[0].clone()), &eq.tol) {
            Ok(root) => Ok(root.x),
            Err(first) => {
                let outcomes = opts.exec.map(&starts[1..], |z0| gauss_newton(f, &Vector::from_vec(z0.clone()), &eq.tol));
                let mut best = first.residual;
                let mut hit = None;
                for o in outcomes {
                    match o {
                        Ok(root) => {
                            hit = Some(root.x);
                            break;
                        }
                        Err(fail) => best = best.min(fail.residual),
                    }
                }
                hit.ok_or(best)
            }
        };
        match found {
            Ok(z) => {
                solution = z.as_slice().to_vec();
                result.depth = d;
            }
            Err(best) => {
                result.failing_residual = Some(best);
                result.inconclusive = best < INCONCLUSIVE_RESIDUAL;
                break;
            }
        }
    }

    result.witness = solution
        .chunks(k.max(1))
        .take(result.depth)
        .map(|u| element(eq, &constants(u)).map(|h| h.into_iter().map(|x| x.value).collect()))
        .collect::<Result<_, _>>()?;
    Ok(result)
}
