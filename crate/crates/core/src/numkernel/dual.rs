//! Forward-mode dual numbers.
//!
//! [`Dual<T>`] carries a value and a vector of partial derivatives. The inner
//! scalar is itself generic over [`Real`], so `Dual<Dual<f64>>` yields second
//! derivatives by nesting. An empty partials vector denotes a constant and is
//! treated as all zeros by every operation.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Scalar arithmetic shared by `f64` and dual numbers.
pub trait Real:
    Clone
    + Debug
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Sub<f64, Output = Self>
    + Mul<f64, Output = Self>
    + Div<f64, Output = Self>
{
    fn from_f64(v: f64) -> Self;
    /// Primal value, stripped of all derivative information.
    fn value(&self) -> f64;
    /// True when no derivative information is attached.
    fn is_constant(&self) -> bool;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn tan(&self) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn powi(&self, n: i32) -> Self;
    fn powf(&self, c: f64) -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }
    fn one() -> Self {
        Self::from_f64(1.0)
    }
    fn square(&self) -> Self {
        self.clone() * self.clone()
    }
}

impl Real for f64 {
    fn from_f64(v: f64) -> Self {
        v
    }
    fn value(&self) -> f64 {
        *self
    }
    fn is_constant(&self) -> bool {
        true
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn tan(&self) -> Self {
        f64::tan(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn powi(&self, n: i32) -> Self {
        f64::powi(*self, n)
    }
    fn powf(&self, c: f64) -> Self {
        f64::powf(*self, c)
    }
}

/// A value with first-order partial derivatives over the inner scalar `T`.
#[derive(Clone, Debug, PartialEq)]
pub struct Dual<T = f64> {
    pub value: T,
    pub partials: Vec<T>,
}

impl<T: Real> Dual<T> {
    pub fn constant(value: T) -> Self {
        Self { value, partials: Vec::new() }
    }

    /// The `index`-th independent variable out of `dim`.
    pub fn variable(value: T, index: usize, dim: usize) -> Self {
        let partials = (0..dim).map(|j| if j == index { T::one() } else { T::zero() }).collect();
        Self { value, partials }
    }

    /// Partial derivative `index`, zero when not tracked.
    pub fn partial(&self, index: usize) -> T {
        self.partials.get(index).cloned().unwrap_or_else(T::zero)
    }

    /// Partials padded with zeros to `dim` entries.
    pub fn gradient(&self, dim: usize) -> Vec<T> {
        (0..dim).map(|j| self.partial(j)).collect()
    }

    /// Chain rule for a unary function with value `f` and derivative `df`.
    fn chain(&self, f: T, df: T) -> Self {
        Self {
            value: f,
            partials: self.partials.iter().map(|d| d.clone() * df.clone()).collect(),
        }
    }
}

fn combine<T: Real>(a: &[T], b: &[T], fa: impl Fn(T) -> T, fb: impl Fn(T) -> T) -> Vec<T> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|j| match (a.get(j), b.get(j)) {
            (Some(x), Some(y)) => fa(x.clone()) + fb(y.clone()),
            (Some(x), None) => fa(x.clone()),
            (None, Some(y)) => fb(y.clone()),
            (None, None) => unreachable!(),
        })
        .collect()
}

impl<T: Real> Add for Dual<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        let partials = combine(&self.partials, &rhs.partials, |x| x, |y| y);
        Self { value: self.value + rhs.value, partials }
    }
}

impl<T: Real> Sub for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        let partials = combine(&self.partials, &rhs.partials, |x| x, |y| -y);
        Self { value: self.value - rhs.value, partials }
    }
}

impl<T: Real> Mul for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        let (a, b) = (self.value.clone(), rhs.value.clone());
        let partials = combine(&self.partials, &rhs.partials, |x| x * b.clone(), |y| y * a.clone());
        Self { value: self.value * rhs.value, partials }
    }
}

impl<T: Real> Div for Dual<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let inv = T::one() / rhs.value.clone();
        let q = self.value.clone() * inv.clone();
        let partials = combine(
            &self.partials,
            &rhs.partials,
            |x| x * inv.clone(),
            |y| -(y * q.clone() * inv.clone()),
        );
        Self { value: q, partials }
    }
}

impl<T: Real> Neg for Dual<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Self { value: -self.value, partials: self.partials.into_iter().map(|d| -d).collect() }
    }
}

impl<T: Real> Add<f64> for Dual<T> {
    type Output = Self;
    fn add(self, rhs: f64) -> Self {
        Self { value: self.value + rhs, partials: self.partials }
    }
}

impl<T: Real> Sub<f64> for Dual<T> {
    type Output = Self;
    fn sub(self, rhs: f64) -> Self {
        Self { value: self.value - rhs, partials: self.partials }
    }
}

impl<T: Real> Mul<f64> for Dual<T> {
    type Output = Self;
    fn mul(self, rhs: f64) -> Self {
        Self {
            value: self.value * rhs,
            partials: self.partials.into_iter().map(|d| d * rhs).collect(),
        }
    }
}

impl<T: Real> Div<f64> for Dual<T> {
    type Output = Self;
    fn div(self, rhs: f64) -> Self {
        Self {
            value: self.value / rhs,
            partials: self.partials.into_iter().map(|d| d / rhs).collect(),
        }
    }
}

impl<T: Real> Real for Dual<T> {
    fn from_f64(v: f64) -> Self {
        Self::constant(T::from_f64(v))
    }
    fn value(&self) -> f64 {
        self.value.value()
    }
    fn is_constant(&self) -> bool {
        self.value.is_constant() && self.partials.iter().all(|d| d.is_constant() && d.value() == 0.0)
    }
    fn sin(&self) -> Self {
        self.chain(self.value.sin(), self.value.cos())
    }
    fn cos(&self) -> Self {
        self.chain(self.value.cos(), -self.value.sin())
    }
    fn tan(&self) -> Self {
        let t = self.value.tan();
        let dt = t.square() + 1.0;
        self.chain(t, dt)
    }
    fn exp(&self) -> Self {
        let e = self.value.exp();
        self.chain(e.clone(), e)
    }
    fn ln(&self) -> Self {
        self.chain(self.value.ln(), T::one() / self.value.clone())
    }
    fn sqrt(&self) -> Self {
        let s = self.value.sqrt();
        let ds = T::one() / (s.clone() * 2.0);
        self.chain(s, ds)
    }
    fn powi(&self, n: i32) -> Self {
        match n {
            0 => Self::constant(T::one()),
            _ => {
                let f = self.value.powi(n);
                let df = self.value.powi(n - 1) * f64::from(n);
                self.chain(f, df)
            }
        }
    }
    fn powf(&self, c: f64) -> Self {
        let f = self.value.powf(c);
        let df = self.value.powf(c - 1.0) * c;
        self.chain(f, df)
    }
}

/// Gradient of a scalar function at `x`, evaluated over `Dual<T>`.
pub fn gradient<T, E, F>(f: F, x: &[T]) -> Result<(T, Vec<T>), E>
where
    T: Real,
    F: FnOnce(&[Dual<T>]) -> Result<Dual<T>, E>,
{
    let n = x.len();
    let seeded: Vec<Dual<T>> =
        x.iter().enumerate().map(|(i, xi)| Dual::variable(xi.clone(), i, n)).collect();
    let out = f(&seeded)?;
    let grad = out.gradient(n);
    Ok((out.value, grad))
}

/// Value and Jacobian (rows = outputs) of a vector function at `x`.
pub fn jacobian<T, E, F>(f: F, x: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>), E>
where
    T: Real,
    F: FnOnce(&[Dual<T>]) -> Result<Vec<Dual<T>>, E>,
{
    let n = x.len();
    let seeded: Vec<Dual<T>> =
        x.iter().enumerate().map(|(i, xi)| Dual::variable(xi.clone(), i, n)).collect();
    let out = f(&seeded)?;
    let values = out.iter().map(|d| d.value.clone()).collect();
    let rows = out.iter().map(|d| d.gradient(n)).collect();
    Ok((values, rows))
}

/// Lift plain values into constant duals.
pub fn constants<T: Real>(x: &[T]) -> Vec<Dual<T>> {
    x.iter().cloned().map(Dual::constant).collect()
}

/// Lift `f64` values into any [`Real`] type.
pub fn lift<T: Real>(x: &[f64]) -> Vec<T> {
    x.iter().map(|&v| T::from_f64(v)).collect()
}

/// Primal values of a slice.
pub fn values<T: Real>(x: &[T]) -> Vec<f64> {
    x.iter().map(Real::value).collect()
}
