//! Built-in discrete Lagrangians.

use super::{DiscreteLagrangian, Realization};
use crate::expr::Field;
use crate::numkernel::{EvalError, Real};

fn arity<T>(x: &[T], n: usize) -> Result<(), EvalError> {
    if x.len() == n {
        Ok(())
    } else {
        Err(EvalError::Arity { expected: n, found: x.len() })
    }
}

/// Midpoint discretization of the unit harmonic oscillator:
/// `L = (q1 − q0)²/(2h) − h (q0 + q1)²/8`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MidpointOscillator {
    pub h: f64,
}

impl Field for MidpointOscillator {
    fn arity(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        arity(x, 2)?;
        let d = x[1].clone() - x[0].clone();
        let s = x[0].clone() + x[1].clone();
        Ok(d.square() / (2.0 * self.h) - s.square() * (self.h / 8.0))
    }
}

/// `L = ½ ((q1 − q0)/h)²` on ℝ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeParticle {
    pub h: f64,
}

impl Field for FreeParticle {
    fn arity(&self) -> usize {
        2
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        arity(x, 2)?;
        Ok(((x[1].clone() - x[0].clone()) / self.h).square() * 0.5)
    }
}

/// `L(x1, y1, x2, y2) = ½ ((x2 − x1)/h)² + ½ x1² y1` on ℝ² × ℝ², singular:
/// its mixed Hessian has rank one.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SingularExample {
    pub h: f64,
}

impl Field for SingularExample {
    fn arity(&self) -> usize {
        4
    }
    fn eval<T: Real>(&self, x: &[T]) -> Result<T, EvalError> {
        arity(x, 4)?;
        let v = (x[2].clone() - x[0].clone()) / self.h;
        Ok(v.square() * 0.5 + x[0].square() * x[1].clone() * 0.5)
    }
}

pub fn midpoint_oscillator(h: f64) -> DiscreteLagrangian<MidpointOscillator> {
    DiscreteLagrangian { realization: Realization::Pair(1), field: MidpointOscillator { h } }
}

pub fn free_particle(h: f64) -> DiscreteLagrangian<FreeParticle> {
    DiscreteLagrangian { realization: Realization::Pair(1), field: FreeParticle { h } }
}

pub fn singular_example(h: f64) -> DiscreteLagrangian<SingularExample> {
    DiscreteLagrangian { realization: Realization::Pair(2), field: SingularExample { h } }
}
