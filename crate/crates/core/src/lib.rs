//! Discrete dynamics on Lie groupoids: implicit difference equations, their
//! integrable parts, discrete Lagrangian and nonholonomic mechanics, and
//! finite differencing of linear DAEs.

pub mod dae;
pub mod dynamics;
pub mod expr;
pub mod groupoid;
pub mod lagrangian;
pub mod nonholonomic;
pub mod numkernel;
pub mod output;
pub mod par;
