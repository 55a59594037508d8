//! Poisson (Abel) summation of the Laguerre expansion of Δ_k.

use rug::Float;

use crate::coefficients::{CoefficientTable, TableStore};
use crate::error::{Error, Result};
use crate::mp::laguerre::{curly_laguerre_all, laguerre_all};
use crate::mp::{bessel_i0, Complex, PrecisionCtx};
use crate::series::SeriesResult;

const TAIL_WINDOW: usize = 20;

fn check_rho(rho: &Float) -> Result<()> {
    if !rho.is_finite() || *rho < 0 || *rho >= 1 {
        return Err(Error::domain(format!("ρ must lie in [0, 1), got {}", rho.to_f64())));
    }
    Ok(())
}

fn check_at_least_one(x: &Float, name: &str) -> Result<()> {
    if !x.is_finite() || *x < 1 {
        return Err(Error::domain(format!("{name} must be at least 1, got {}", x.to_f64())));
    }
    Ok(())
}

/// K(x, y, ρ) = Σ 𝓛_n(x) 𝓛_n(y) ρ^n
///            = (xy)^{-ρ/(1-ρ)} / (1-ρ) · I_0(2 √(ρ log x log y) / (1-ρ)).
pub fn poisson_kernel(x: &Float, y: &Float, rho: &Float, ctx: &PrecisionCtx) -> Result<Float> {
    check_at_least_one(x, "x")?;
    check_at_least_one(y, "y")?;
    check_rho(rho)?;
    let p = ctx.working();
    let a = Float::with_val(p, x.ln_ref());
    let b = Float::with_val(p, y.ln_ref());
    let one_minus = Float::with_val(p, 1 - rho);
    let mut e = Float::with_val(p, &a + &b);
    e *= rho;
    e /= &one_minus;
    e = -e;
    e.exp_mut();
    let mut arg = Float::with_val(p, &a * &b);
    arg *= rho;
    arg.sqrt_mut();
    arg *= 2u32;
    arg /= &one_minus;
    let i0 = bessel_i0(&arg, ctx).value;
    Ok(e * i0 / one_minus)
}

/// Σ_{n ≤ terms} 𝓛_n(x) 𝓛_n(y) ρ^n.
pub fn poisson_kernel_partial(x: &Float, y: &Float, rho: &Float, terms: u32, ctx: &PrecisionCtx) -> Result<Float> {
    check_at_least_one(x, "x")?;
    check_at_least_one(y, "y")?;
    check_rho(rho)?;
    let p = ctx.working();
    let lx = laguerre_all(terms, &Float::with_val(p, x.ln_ref()), ctx);
    let ly = laguerre_all(terms, &Float::with_val(p, y.ln_ref()), ctx);
    let mut acc = Float::with_val(p, 0);
    let mut pow = Float::with_val(p, 1);
    for (a, b) in lx.iter().zip(&ly) {
        acc += Float::with_val(p, a * b) * &pow;
        pow *= rho;
    }
    Ok(acc)
}

/// Terms after which ρ^n falls below `tol`.
pub fn abel_terms(rho: f64, tol: f64) -> usize {
    if rho <= 0.0 {
        return 0;
    }
    (tol.ln() / rho.ln()).ceil().max(0.0) as usize
}

/// ψ_k(x, ρ) = Σ_{n ≤ terms} (-1)^n ℓ_{n,k} 𝓛_n(x) ρ^n.
pub fn abel_sum_psi(x: &Float, k: u32, rho: &Float, terms: usize, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    let table = TableStore::global().get(k, terms, k as usize, ctx)?;
    abel_sum_psi_with(&table, x, rho, terms, ctx)
}

/// As [`abel_sum_psi`] with an explicit table. The tail bound
/// max_{window} |ℓ_n 𝓛_n(x)| ρ^{terms+1}/(1-ρ) assumes the last terms are
/// representative and is flagged heuristic.
pub fn abel_sum_psi_with(
    table: &CoefficientTable,
    x: &Float,
    rho: &Float,
    terms: usize,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    check_at_least_one(x, "x")?;
    check_rho(rho)?;
    if terms > table.nmax {
        return Err(Error::Range {
            value: terms as f64,
            limit: table.nmax as u64,
        });
    }
    let p = ctx.working();
    let basis = curly_laguerre_all(terms as u32, x, ctx)?;
    let mut acc = Float::with_val(p, 0);
    let mut pow = Float::with_val(p, 1);
    let mut window = Float::with_val(p, 0);
    for (n, b) in basis.iter().enumerate() {
        let c = Float::with_val(p, table.ell_at(n as i64) * b);
        if n + TAIL_WINDOW > terms {
            window = window.max(&Float::with_val(p, c.abs_ref()));
        }
        let term = Float::with_val(p, &c * &pow);
        if n % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
        pow *= rho;
    }
    let mut tail = window * pow;
    tail /= Float::with_val(p, 1 - rho);
    Ok(SeriesResult {
        value: Complex::new(acc, Float::with_val(p, 0)),
        terms,
        tail_bound: tail,
        tail_is_rigorous: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(128).unwrap()
    }

    fn close(a: &Float, b: &Float, tol: f64) -> bool {
        Float::with_val(a.prec(), a - b).abs() <= tol
    }

    #[test]
    fn kernel_examples() {
        let c = ctx();
        let k0 = poisson_kernel(&c.real(3.3), &c.real(7.1), &c.real(0), &c).unwrap();
        assert!(close(&k0, &c.real(1), 1e-35));
        let rho = c.real(0.4);
        let y = c.real(5.5);
        let got = poisson_kernel(&c.real(1), &y, &rho, &c).unwrap();
        // y^{-ρ/(1-ρ)} / (1-ρ)
        let one_minus = Float::with_val(c.working(), 1 - &rho);
        let mut want = Float::with_val(c.working(), y.ln_ref()) * -Float::with_val(c.working(), &rho / &one_minus);
        want.exp_mut();
        want /= &one_minus;
        assert!(close(&got, &want, 1e-30));
        for (x, y, r) in [(1.5, 9.0, 0.3), (20.0, 2.0, 0.7), (4.0, 4.0, 0.95)] {
            let a = poisson_kernel(&c.real(x), &c.real(y), &c.real(r), &c).unwrap();
            let b = poisson_kernel(&c.real(y), &c.real(x), &c.real(r), &c).unwrap();
            assert!(close(&a, &b, 1e-30));
        }
    }

    #[test]
    fn kernel_matches_truncated_sum() {
        let c = ctx();
        let rho = c.real(0.5);
        for (x, y) in [(2.0, 3.0), (10.0, 1.5), (50.0, 50.0)] {
            let closed = poisson_kernel(&c.real(x), &c.real(y), &rho, &c).unwrap();
            let sum = poisson_kernel_partial(&c.real(x), &c.real(y), &rho, 200, &c).unwrap();
            assert!(close(&closed, &sum, 1e-12), "x={x} y={y}");
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        let c = ctx();
        assert!(poisson_kernel(&c.real(2), &c.real(2), &c.real(1), &c).is_err());
        assert!(poisson_kernel(&c.real(0.5), &c.real(2), &c.real(0.5), &c).is_err());
        assert!(abel_sum_psi(&c.real(2), 1, &c.real(-0.1), 5, &c).is_err());
    }

    #[test]
    fn psi_at_zero_radius_is_leading_coefficient() {
        let c = ctx();
        for k in 1..=3 {
            let table = TableStore::global().get(k, 10, k as usize, &c).unwrap();
            let r = abel_sum_psi_with(&table, &c.real(4.2), &c.real(0), 10, &c).unwrap();
            assert!(close(&r.value.re, table.ell_at(0), 1e-35));
        }
        assert_eq!(abel_terms(0.5, 1e-6), 20);
    }
}
