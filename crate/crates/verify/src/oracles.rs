//! Reference values computed by routes that share no code path with the
//! quantities they check.

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};
use zeta_fourier::coefficients::stieltjes;
use zeta_fourier::mp::combinatorics::binomial;
use zeta_fourier::mp::integrate_adaptive;
use zeta_fourier::mp::laguerre::laguerre_all;
use zeta_fourier::mp::quadrature::gauss_laguerre;
use zeta_fourier::transforms::poisson_kernel;
use zeta_fourier::{Error, PrecisionCtx, Result};

/// ℓ_{n,1}, n = 0..=nmax, from the Stieltjes constants:
/// ℓ_0 = γ_0 - 1 and ℓ_n = Σ_{j=1}^{n} C(n-1, j-1) (-1)^{n-j} γ_j / j!.
pub fn ell_from_stieltjes(nmax: usize, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    let gamma = stieltjes(nmax.max(1), ctx)?;
    let p = ctx.working();
    let mut scaled = Vec::with_capacity(gamma.len());
    let mut fact = Integer::from(1);
    for (j, g) in gamma.iter().enumerate() {
        if j > 0 {
            fact *= j as u64;
        }
        scaled.push(Float::with_val(p, g / &fact));
    }
    let mut out = Vec::with_capacity(nmax + 1);
    out.push(Float::with_val(p, &gamma[0] - 1u32));
    for n in 1..=nmax {
        let mut acc = Float::with_val(p, 0);
        for (j, g) in scaled.iter().enumerate().take(n + 1).skip(1) {
            let t = Float::with_val(p, g * binomial(n as i64 - 1, j as i64 - 1));
            if (n - j) % 2 == 0 {
                acc += t;
            } else {
                acc -= t;
            }
        }
        out.push(acc);
    }
    Ok(out)
}

/// ζ(2) = π²/6.
pub fn zeta_two(prec: u32) -> Float {
    let pi = Float::with_val(prec, Constant::Pi);
    Float::with_val(prec, pi.square_ref()) / 6u32
}

/// ζ(3) = (5/2) Σ_{n ≥ 1} (-1)^{n+1} / (n³ C(2n, n)), summed until the
/// terms (which shrink by about 4 per step) fall below 2^-(prec+8).
pub fn zeta_three(prec: u32) -> Float {
    let wp = prec + 16;
    let mut acc = Float::with_val(wp, 0);
    let cutoff = Float::with_val(wp, Float::i_exp(1, -(prec as i32) - 8));
    for n in 1u64.. {
        let den = Integer::from(n).pow(3u32) * Integer::from(2 * n).binomial(n as u32);
        let t = Float::with_val(wp, 1) / Float::with_val(wp, &den);
        if n % 2 == 1 {
            acc += &t;
        } else {
            acc -= &t;
        }
        if t < cutoff {
            break;
        }
    }
    acc *= 5u32;
    acc /= 2u32;
    Float::with_val(prec, acc)
}

/// ζ(s) for real s > 0, s ≠ 1, by Borwein's accelerated alternating series
/// with exact integer weights d_k = n Σ_{i ≤ k} (n+i-1)! 4^i / ((n-i)! (2i)!).
/// The error is below 3 (3 + √8)^{-n} / |1 - 2^{1-s}| relative to the eta sum.
pub fn zeta_borwein(s: &Float, prec: u32) -> Result<Float> {
    if *s <= 0 || *s == 1 {
        return Err(Error::Domain(format!("Borwein oracle needs real s > 0, s ≠ 1, got {}", s.to_f64())));
    }
    let wp = prec + 32;
    // (3 + √8)^n gains log2(5.83) ≈ 2.54 bits per step
    let n = ((wp as f64) / 2.54).ceil() as u64 + 8;
    let mut d = Vec::with_capacity(n as usize + 1);
    let mut acc = Integer::new();
    let fact = |m: u64| Integer::from(Integer::factorial(m as u32));
    for i in 0..=n {
        let num = fact(n + i - 1) * (Integer::from(1) << (2 * i as u32));
        let den = fact(n - i) * fact(2 * i);
        acc += num / den;
        d.push(Integer::from(&acc * n));
    }
    let dn = d[n as usize].clone();
    let s = Float::with_val(wp, s);
    let mut sum = Float::with_val(wp, 0);
    for k in 0..n {
        let w = Float::with_val(wp, Integer::from(&d[k as usize] - &dn));
        let base = Float::with_val(wp, k + 1);
        let pw = Float::with_val(wp, (&base).pow(&s));
        let t = w / pw;
        if k % 2 == 0 {
            sum += t;
        } else {
            sum -= t;
        }
    }
    let one_minus_s = Float::with_val(wp, 1 - &s);
    let two_pow = Float::with_val(wp, Float::with_val(wp, 2).pow(&one_minus_s));
    let factor = Float::with_val(wp, 1 - two_pow) * Float::with_val(wp, &dn);
    let value = -sum / factor;
    Ok(Float::with_val(prec, value))
}

/// Value and error bound of the Poisson integral for k = 1.
#[derive(Clone, Debug)]
pub struct PoissonIntegral {
    pub value: Float,
    pub error_bound: f64,
}

/// ∫_1^∞ Δ_1(y) K(x, y, ρ) y^{-2} dy with Δ_1(y) = -{y}: adaptive quadrature
/// on each [m, m+1] below `cutoff`, then -½ ∫ g + g(cutoff)/12 for the rest,
/// whose remainder is at most g(cutoff)/12 for the decreasing g = K/y².
pub fn poisson_integral_k1(x: &Float, rho: &Float, cutoff: u32, ctx: &PrecisionCtx) -> Result<PoissonIntegral> {
    let p = ctx.working();
    let tol = Float::with_val(p, Float::i_exp(1, -(ctx.bits() as i32)));
    let g = |y: &Float| -> Result<Float> {
        let k = poisson_kernel(x, y, rho, ctx)?;
        Ok(k / Float::with_val(p, y.square_ref()))
    };
    let mut value = Float::with_val(p, 0);
    let mut error = 0.0;
    for m in 1..cutoff {
        let frac = |y: &Float| -> Result<Float> {
            let f = Float::with_val(p, y - m);
            Ok(-(g(y)? * f))
        };
        let part = integrate_adaptive(&frac, &Float::with_val(p, m), &Float::with_val(p, m + 1), &tol, ctx)?;
        value += &part.value;
        error += part.error.to_f64();
    }
    // the smooth remainder in y = e^v, truncated where g y has decayed
    let lo = Float::with_val(p, cutoff).ln();
    let hi = Float::with_val(p, &lo + 60u32);
    let gv = |v: &Float| -> Result<Float> {
        let y = Float::with_val(p, v.exp_ref());
        Ok(g(&y)? * y)
    };
    let smooth = integrate_adaptive(&gv, &lo, &hi, &tol, ctx)?;
    let edge = g(&Float::with_val(p, cutoff))?;
    value -= Float::with_val(p, &smooth.value / 2u32);
    value += Float::with_val(p, &edge / 12u32);
    error += smooth.error.to_f64() / 2.0 + edge.to_f64() / 12.0;
    Ok(PoissonIntegral {
        value,
        error_bound: error,
    })
}

/// G_{mn} = ∫_0^∞ L_m(u) L_n(u) e^{-u} du for m, n ≤ nmax by a Gauss–Laguerre
/// rule with `nodes` points (exact when 2·nodes > 2·nmax).
pub fn laguerre_gram(nmax: u32, nodes: u32, ctx: &PrecisionCtx) -> Vec<Vec<Float>> {
    let p = ctx.working();
    let rule = gauss_laguerre(nodes, p);
    let size = nmax as usize + 1;
    let mut gram = vec![vec![Float::with_val(p, 0); size]; size];
    for (u, w) in rule.nodes.iter().zip(&rule.weights) {
        let l = laguerre_all(nmax, u, ctx);
        for m in 0..size {
            let wl = Float::with_val(p, w * &l[m]);
            for n in 0..size {
                gram[m][n] += Float::with_val(p, &wl * &l[n]);
            }
        }
    }
    gram
}
