//! Coefficient families: Stieltjes constants, Taylor coefficients of
//! ((s-1)ζ(s))^k, the Fourier coefficients ℓ_{n,k} and the main-term
//! polynomial coefficients.

pub mod ell;
pub mod powers;
pub mod table;
pub mod taylor;

pub use ell::{a_coeffs, c_coeffs, ell, ell_with_policy, estimate_beta, BetaEstimate, EllTable, PrecisionPolicy};
pub use powers::lambda_k;
pub use table::{CoefficientTable, TableStore};
pub use taylor::{lambda_taylor, stieltjes};
