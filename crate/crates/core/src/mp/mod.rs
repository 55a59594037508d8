//! Arbitrary-precision scalar kernel shared by every other module.

pub mod bessel;
pub mod combinatorics;
pub mod complex;
pub mod encoding;
pub mod laguerre;
pub mod poly;
pub mod precision;
pub mod quadrature;

pub use bessel::{bessel_i0, bessel_j0, bessel_j_all};
pub use combinatorics::{bernoulli, binomial};
pub use complex::Complex;
pub use laguerre::{curly_laguerre, laguerre};
pub use precision::{Approx, PrecisionCtx};
pub use quadrature::{integrate_adaptive, integrate_circle, integrate_to_infinity, TailSpec, VariableChange};
