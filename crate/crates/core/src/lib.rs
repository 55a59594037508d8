//! Fourier coefficients of powers of the Riemann zeta function in the
//! basis ((s-1)/s)^n, the Piltz divisor error terms Δ_k, and the Laguerre,
//! Poisson and Hankel transforms that connect them.

pub mod coefficients;
pub mod divisor;
pub mod error;
pub mod mp;
pub mod series;
pub mod transforms;
pub mod zeta;

pub use error::{Error, Result};
pub use mp::{Complex, PrecisionCtx};
