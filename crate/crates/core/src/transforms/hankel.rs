//! The Hankel/Borel transform φ_k(x) = e^{-x} Σ (-1)^n ℓ_{n,k} x^n/n!
//!                                  = ∫_1^∞ Δ_k(r) J_0(2√(x log r)) dr/r².

use rug::{Assign, Float};

use crate::coefficients::{CoefficientTable, TableStore};
use crate::divisor::integrals::{fit_sqrt_constant, log2_u64};
use crate::divisor::{fourier_coeff_numeric, DivisorSieve, MainTerm, TailReport};
use crate::error::{Error, Result};
use crate::mp::{bessel_j_all, poly, Complex, PrecisionCtx};
use crate::series::SeriesResult;

const TAIL_WINDOW: usize = 20;

fn check_x(x: &Float) -> Result<()> {
    if !x.is_finite() || *x < 0 {
        return Err(Error::domain(format!("x must be finite and non-negative, got {}", x.to_f64())));
    }
    Ok(())
}

/// Precision for the Borel sum at x: its terms reach about e^x, so the
/// target is raised by x·log2(e) + 16 bits, rounded up to a multiple of 64
/// so nearby x share one coefficient table.
pub fn phi_series_ctx(x: f64, ctx: &PrecisionCtx) -> PrecisionCtx {
    let extra = (x.max(0.0) * std::f64::consts::LOG2_E + 16.0).ceil() as u32;
    ctx.raised(extra.div_ceil(64) * 64)
}

/// Smallest N ≥ x + 2 with e^{-x} x^{N+1}/(N+1)! < 2^{-bits}.
pub fn phi_series_terms(x: f64, bits: u32) -> usize {
    if x <= 0.0 {
        return 0;
    }
    let target = -(bits as f64) * std::f64::consts::LN_2;
    // log of x^{N+1}/(N+1)! e^{-x}
    let mut n = 0usize;
    let mut log_term = x.ln() - x;
    loop {
        if (n as f64) >= x + 2.0 && log_term < target {
            return n;
        }
        n += 1;
        log_term += x.ln() - ((n + 1) as f64).ln();
    }
}

/// φ_k(x) through n = `terms`, with the coefficient table at the raised
/// precision of [`phi_series_ctx`].
pub fn phi_series(x: &Float, k: u32, terms: usize, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    check_x(x)?;
    let wctx = phi_series_ctx(x.to_f64(), ctx);
    let table = TableStore::global().get(k, terms, k as usize, &wctx)?;
    phi_series_with(&table, x, terms, ctx)
}

/// As [`phi_series`] with an explicit table. The remainder is bounded by
/// M e^{-x} x^{N+1}/(N+1)! / (1 - x/(N+2)) with M ≥ sup |ℓ_{n,k}|: for k = 1,
/// M = 1 by Bessel's inequality (‖Δ_1‖² ≤ ∫_1^∞ x^{-2} dx = 1); for k ≥ 2,
/// M is twice the largest of the last coefficients and the bound is heuristic.
pub fn phi_series_with(table: &CoefficientTable, x: &Float, terms: usize, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    check_x(x)?;
    if terms > table.nmax {
        return Err(Error::Range {
            value: terms as f64,
            limit: table.nmax as u64,
        });
    }
    let p = table.prec_bits.max(ctx.working());
    let x = Float::with_val(p, x);
    let mut acc = Float::with_val(p, 0);
    let mut term = Float::with_val(p, 1);
    let mut window = Float::with_val(p, 0);
    for n in 0..=terms {
        if n > 0 {
            term *= &x;
            term /= n as u32;
        }
        let ell = table.ell_at(n as i64);
        if n + TAIL_WINDOW > terms {
            window = window.max(&Float::with_val(p, ell.abs_ref()));
        }
        let t = Float::with_val(p, ell * &term);
        if n % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    let decay = Float::with_val(p, -&x).exp();
    acc *= &decay;
    let rigorous = table.k == 1;
    let m = if rigorous { Float::with_val(p, 1) } else { window * 2u32 };
    let n2 = terms as u32 + 2;
    let tail = if x < n2 {
        // next term x^{N+1}/(N+1)!, then a geometric majorant
        let mut t = Float::with_val(p, &term * &x);
        t /= terms as u32 + 1;
        t *= &decay;
        t *= m;
        t / (1u32 - Float::with_val(p, &x / n2))
    } else {
        Float::with_val(p, f64::INFINITY)
    };
    Ok(SeriesResult {
        value: Complex::new(Float::with_val(ctx.working(), acc), Float::with_val(ctx.working(), 0)),
        terms,
        tail_bound: Float::with_val(ctx.working(), tail),
        tail_is_rigorous: rigorous,
    })
}

/// T(u) = ∫_u^∞ J_0(2√(xv)) e^{-v} dv for x > 0, with z = 2√(xu):
/// e^{-u} Σ_{n≥0} (-√(x/u))^n J_n(z) when u ≥ x (repeated integration by
/// parts differentiating J_0), and e^{-x} - e^{-u} Σ_{n≥1} (√(u/x))^n J_n(z)
/// otherwise (integrating J_0 instead). Both ratios are at most 1.
pub(crate) fn bessel_tail_primitive(u: &Float, x: &Float, prec: u32) -> Float {
    let mut z = Float::with_val(prec, x * u);
    z.sqrt_mut();
    z *= 2u32;
    let js = bessel_j_all(0, &z, prec);
    if *u >= *x {
        let mut t = Float::with_val(prec, x / u);
        t.sqrt_mut();
        t = -t;
        let mut pow = Float::with_val(prec, 1);
        let mut s = Float::with_val(prec, 0);
        for j in &js {
            s += Float::with_val(prec, j * &pow);
            pow *= &t;
        }
        s * Float::with_val(prec, -u).exp()
    } else {
        let mut t = Float::with_val(prec, u / x);
        t.sqrt_mut();
        let mut pow = Float::with_val(prec, 1);
        let mut s = Float::with_val(prec, 0);
        for j in &js[1..] {
            pow *= &t;
            s += Float::with_val(prec, j * &pow);
        }
        Float::with_val(prec, -x).exp() - s * Float::with_val(prec, -u).exp()
    }
}

/// ∫_0^U P(u) J_0(2√(xu)) du = Σ_{n≥1} (-1)^{n-1} P^{(n-1)}(U) (U/x)^{n/2} J_n(2√(xU)),
/// using (d/du) (u/x)^{n/2} J_n(2√(xu)) = (u/x)^{(n-1)/2} J_{n-1}(2√(xu)).
fn smooth_part(p: &[Float], big_u: &Float, x: &Float, prec: u32) -> Float {
    let mut z = Float::with_val(prec, x * big_u);
    z.sqrt_mut();
    z *= 2u32;
    let js = bessel_j_all(p.len() as u32, &z, prec);
    let mut ratio = Float::with_val(prec, big_u / x);
    ratio.sqrt_mut();
    let mut pow = Float::with_val(prec, 1);
    let mut d = p.to_vec();
    let mut acc = Float::with_val(prec, 0);
    let mut n = 1usize;
    while !d.is_empty() {
        pow *= &ratio;
        let t = Float::with_val(prec, poly::eval(&d, big_u) * &pow) * &js[n];
        if n % 2 == 1 {
            acc += t;
        } else {
            acc -= t;
        }
        d = poly::derivative(&d);
        n += 1;
    }
    acc
}

/// φ_k(x) = ∫_1^∞ Δ_k(r) J_0(2√(x log r)) dr/r². Over [1, X] the step part
/// is summed by parts against the exact primitive T(log r) and the smooth
/// part is closed-form. Tail: for k = 1, -{r} = -1/2 - B̄_1(r) gives
/// -T(log X)/2 + g(X)/12 with |remainder| ≤ (1/12)∫_X^∞ |g'| ≤
/// (2 + √(x/log X))/(24 X²), g(r) = J_0(2√(x log r))/r²; for k ≥ 2 the bound
/// 2C/√X assumes |Δ_k(r)| ≤ C√r with C fitted on the top decade.
pub fn phi_integral(x: &Float, k: u32, sieve: &DivisorSieve, ctx: &PrecisionCtx) -> Result<TailReport> {
    check_x(x)?;
    if k != sieve.k {
        return Err(Error::domain(format!("sieve is for k = {}, asked for k = {k}", sieve.k)));
    }
    let big_x = sieve.limit;
    if big_x < 2 {
        return Err(Error::DegenerateInput(format!("sieve limit {big_x} is below 2")));
    }
    if x.is_zero() {
        return fourier_coeff_numeric(0, k, sieve, ctx);
    }
    let prec = ctx.working() + 2 * log2_u64(big_x) + 16;
    let wctx = PrecisionCtx::new(prec)?;
    let main = MainTerm::new(k, &wctx)?;
    let x = Float::with_val(prec, x);
    let mut u = Float::with_val(prec, 0);
    let mut step = Float::with_val(prec, 0);
    for m in 1..big_x {
        let d = sieve.d(m);
        if d == 0 {
            continue;
        }
        u.assign(m);
        u.ln_mut();
        step += bessel_tail_primitive(&u, &x, prec) * d;
    }
    let big_u = Float::with_val(prec, Float::with_val(prec, big_x).ln_ref());
    let t_end = bessel_tail_primitive(&big_u, &x, prec);
    step -= Float::with_val(prec, &t_end * sieve.prefix[big_x as usize - 1]);
    let value = step - smooth_part(&main.coeffs, &big_u, &x, prec);
    let round = |v: Float| Float::with_val(ctx.working(), v);
    if k == 1 {
        let mut z = Float::with_val(prec, &x * &big_u);
        z.sqrt_mut();
        z *= 2u32;
        let mut g = z.j0();
        g /= big_x;
        g /= big_x;
        let tail = Float::with_val(prec, g / 12u32) - t_end / 2u32;
        let mut bound = Float::with_val(prec, &x / &big_u);
        bound.sqrt_mut();
        bound += 2u32;
        bound /= 24u32;
        bound /= big_x;
        bound /= big_x;
        return Ok(TailReport {
            main_value: round(value),
            tail_value: round(tail),
            tail_bound: round(bound) + ctx.eps(),
            tail_is_rigorous: true,
        });
    }
    let c = fit_sqrt_constant(sieve, &main);
    Ok(TailReport {
        main_value: round(value),
        tail_value: Float::with_val(ctx.working(), 0),
        tail_bound: Float::with_val(ctx.working(), 2.0 * c / (big_x as f64).sqrt()),
        tail_is_rigorous: false,
    })
}
