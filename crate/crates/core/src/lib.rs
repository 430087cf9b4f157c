//! Asymptotic integration of `x'' + f(t, x) = 0` on `[t0, +inf)`.
//!
//! Hypothesis constants are evaluated in [`criteria`], the integral operators
//! and the certified Picard loop live in [`fixpoint`], and [`verify`] checks
//! the resulting profiles independently (finite differences, a Runge-Kutta
//! oracle). [`pde_radial`] builds radial sub/supersolutions for an exterior
//! elliptic problem from the same machinery.

pub mod coefficients;
pub mod criteria;
pub mod error;
pub mod expr;
pub mod fixpoint;
pub mod funcspace;
pub mod interp;
pub mod io;
pub mod ode;
pub mod pde_radial;
pub mod quadrature;
pub mod verify;

pub use error::{Error, Result};
