//! Poisson/Abel summation ψ_k(x, ρ), the Hankel/Borel transform φ_k and the
//! L² identities relating them to Δ_k.

mod distance;
mod hankel;
mod kernel;

pub use distance::{
    delta_weighted_norm_sq, parseval_check, partial_residual_sq, phi_partial_l2_distance, L2Distance, Weight,
};
pub use hankel::{phi_integral, phi_series, phi_series_ctx, phi_series_terms, phi_series_with};
pub use kernel::{abel_sum_psi, abel_sum_psi_with, abel_terms, poisson_kernel, poisson_kernel_partial};

use rayon::prelude::*;
use rug::Float;

use crate::coefficients::TableStore;
use crate::divisor::DivisorSieve;
use crate::error::{Error, Result};
use crate::mp::PrecisionCtx;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Method {
    Series,
    Integral,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Series => "series",
            Method::Integral => "integral",
        }
    }
}

/// Values of one transform along a parameter axis.
#[derive(Clone, Debug)]
pub struct TransformGrid {
    pub k: u32,
    /// Name of the parameter ("x" or "rho").
    pub axis_name: &'static str,
    pub axis: Vec<Float>,
    pub values: Vec<Float>,
    pub tail_bounds: Vec<Float>,
    pub method: Method,
    pub tail_is_rigorous: bool,
}

impl TransformGrid {
    pub fn new(
        k: u32,
        axis_name: &'static str,
        axis: Vec<Float>,
        values: Vec<Float>,
        tail_bounds: Vec<Float>,
        method: Method,
        tail_is_rigorous: bool,
    ) -> Result<Self> {
        if axis.len() != values.len() || axis.len() != tail_bounds.len() {
            return Err(Error::domain("grid columns differ in length"));
        }
        if axis.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("grid axis must be strictly increasing"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("transform grid value"));
        }
        Ok(TransformGrid {
            k,
            axis_name,
            axis,
            values,
            tail_bounds,
            method,
            tail_is_rigorous,
        })
    }

    /// max over the grid of axis^e · |value|.
    pub fn scaled_sup(&self, e: f64) -> f64 {
        self.axis
            .iter()
            .zip(&self.values)
            .map(|(a, v)| a.to_f64().powf(e) * v.to_f64().abs())
            .fold(0.0, f64::max)
    }
}

/// ψ_k(x, ρ) over increasing ρ values, each summed until ρ^n < 2^-bits.
pub fn psi_grid(x: &Float, k: u32, rhos: &[Float], ctx: &PrecisionCtx) -> Result<TransformGrid> {
    let tol = 2f64.powi(-(ctx.bits() as i32));
    let terms: Vec<usize> = rhos.iter().map(|r| abel_terms(r.to_f64(), tol)).collect();
    let nmax = terms.iter().copied().max().unwrap_or(0);
    let table = TableStore::global().get(k, nmax, k as usize, ctx)?;
    let results: Vec<_> = rhos
        .par_iter()
        .zip(&terms)
        .map(|(r, &n)| abel_sum_psi_with(&table, x, r, n, ctx))
        .collect::<Result<_>>()?;
    let (values, bounds) = results.into_iter().map(|r| (r.value.re, r.tail_bound)).unzip();
    TransformGrid::new(k, "rho", rhos.to_vec(), values, bounds, Method::Series, false)
}

/// φ_k over increasing x by the Borel series, one shared coefficient table.
pub fn phi_grid_series(k: u32, xs: &[Float], ctx: &PrecisionCtx) -> Result<TransformGrid> {
    let xmax = xs.iter().map(Float::to_f64).fold(0.0, f64::max);
    let wctx = phi_series_ctx(xmax, ctx);
    let terms: Vec<usize> = xs.iter().map(|x| phi_series_terms(x.to_f64(), ctx.bits())).collect();
    let nmax = terms.iter().copied().max().unwrap_or(0);
    let table = TableStore::global().get(k, nmax, k as usize, &wctx)?;
    let results: Vec<_> = xs
        .par_iter()
        .zip(&terms)
        .map(|(x, &n)| phi_series_with(&table, x, n, ctx))
        .collect::<Result<_>>()?;
    let rigorous = results.iter().all(|r| r.tail_is_rigorous);
    let (values, bounds) = results.into_iter().map(|r| (r.value.re, r.tail_bound)).unzip();
    TransformGrid::new(k, "x", xs.to_vec(), values, bounds, Method::Series, rigorous)
}

/// φ_k over increasing x by the integral against Δ_k.
pub fn phi_grid_integral(sieve: &DivisorSieve, xs: &[Float], ctx: &PrecisionCtx) -> Result<TransformGrid> {
    let results: Vec<_> = xs
        .par_iter()
        .map(|x| phi_integral(x, sieve.k, sieve, ctx))
        .collect::<Result<_>>()?;
    let rigorous = results.iter().all(|r| r.tail_is_rigorous);
    let bounds = results.iter().map(|r| r.tail_bound.clone()).collect();
    let values = results.iter().map(|r| r.total()).collect();
    TransformGrid::new(sieve.k, "x", xs.to_vec(), values, bounds, Method::Integral, rigorous)
}
