//! Reference evaluation of ζ(s) for σ > 0.

use rug::Float;

use crate::error::{Error, Result};
use crate::mp::combinatorics::bernoulli_over_factorial;
use crate::mp::precision::{err_abs, err_from_f64, err_pow2};
use crate::mp::{Complex, PrecisionCtx};

/// ζ(s) with the truncation that produced it.
#[derive(Clone, Debug)]
pub struct ZetaRefResult {
    pub value: Complex,
    /// N: the direct sum runs over n < N.
    pub terms_used: u64,
    /// M: Bernoulli corrections up to B_{2M}.
    pub em_order: u32,
    /// Majorant of the Euler–Maclaurin remainder plus accumulated rounding.
    pub error_bound: Float,
}

fn check_domain(s: &Complex) -> Result<()> {
    s.check_finite("zeta argument")?;
    if s.re == 1 && s.im.is_zero() {
        return Err(Error::Pole);
    }
    if s.re <= 0 {
        return Err(Error::domain(format!(
            "zeta reference evaluator needs Re(s) > 0, got {}",
            s.re.to_f64()
        )));
    }
    Ok(())
}

/// n^{-s} for n = 0..count (index 0 unused), computed multiplicatively:
/// one exponential per prime, a product for every composite.
pub(crate) fn inverse_powers(count: usize, s: &Complex) -> Vec<Complex> {
    let prec = s.prec();
    let mut spf = vec![0u32; count + 1];
    for p in 2..=count {
        if spf[p] == 0 {
            let mut m = p;
            while m <= count {
                if spf[m] == 0 {
                    spf[m] = p as u32;
                }
                m += p;
            }
        }
    }
    let mut out = Vec::with_capacity(count + 1);
    out.push(Complex::zero(prec));
    if count >= 1 {
        out.push(Complex::one(prec));
    }
    for n in 2..=count {
        let p = spf[n] as usize;
        let v = if p == n {
            let ln = Float::with_val(prec, n as u64).ln();
            Complex::real_pow_neg(&ln, s)
        } else {
            &out[p] * &out[n / p]
        };
        out.push(v);
    }
    out
}

/// log2 of the Euler–Maclaurin remainder majorant after M corrections.
///
/// With f(x) = x^{-s}, R = ∫_N^∞ B̃_{2M+1}(x)/(2M+1)! f^{(2M+1)}(x) dx and
/// |B̃_{2M+1}|/(2M+1)! ≤ 2ζ(2M+1)/(2π)^{2M+1}, so
/// |R| ≤ 2ζ(2M+1)/(2π)^{2M+1} · |(s)_{2M+1}| · N^{-σ-2M}/(σ+2M),
/// valid whenever σ + 2M > 0. `log2_poch` is log2 |(s)_{2M+1}| (or an
/// upper bound for it) and `sigma` a lower bound for Re(s).
pub(crate) fn log2_em_remainder(log2_poch: f64, sigma: f64, n: f64, m: u32) -> f64 {
    let two_m = 2.0 * m as f64;
    if sigma + two_m <= 0.0 {
        return f64::INFINITY;
    }
    // 2 ζ(3) < 2.41
    log2_poch + 2.41f64.log2() - (two_m + 1.0) * (2.0 * std::f64::consts::PI).log2()
        - (sigma + two_m) * n.log2()
        - (sigma + two_m).log2()
}

fn log2_remainder(sigma: f64, t: f64, n: f64, m: u32) -> f64 {
    let mut poch = 0.0;
    for j in 0..(2 * m + 1) {
        poch += ((sigma + j as f64).powi(2) + t * t).sqrt().log2();
    }
    log2_em_remainder(poch, sigma, n, m)
}

/// Truncation (N, M) meeting a remainder below 2^-target_bits.
fn choose_truncation(sigma: f64, t: f64, target_bits: u32) -> (u64, u32) {
    // Bernoulli terms shrink roughly like (|s + 2m| / 2πN)^2, so the
    // attainable accuracy is about e^{-2πN}; N must grow with the target.
    let mut n = (2.0 * t.abs()).max(20.0).max(target_bits as f64 / 7.0).ceil() as u64;
    loop {
        let mut m = 1u32;
        while m < 4 * target_bits {
            if log2_remainder(sigma, t, n as f64, m) < -(target_bits as f64) {
                return (n, m);
            }
            m += 1;
        }
        n = n * 3 / 2 + 1;
    }
}

/// ζ(s) by Euler–Maclaurin summation for Re(s) > 0, s ≠ 1:
/// Σ_{n<N} n^{-s} + N^{1-s}/(s-1) + N^{-s}/2
/// \+ Σ_{m≤M} B_{2m}/(2m)! (s)_{2m-1} N^{-s-2m+1}.
///
/// On the critical line the working precision is doubled.
pub fn zeta_em(s: &Complex, ctx: &PrecisionCtx) -> Result<ZetaRefResult> {
    check_domain(s)?;
    let ctx = if s.re == 0.5 { ctx.doubled() } else { *ctx };
    let sigma = s.re.to_f64();
    let t = s.im.to_f64();
    let target = ctx.working() + 4;
    let (n, m) = choose_truncation(sigma, t, target);
    let prec = ctx.working() + 16 + (64 - n.leading_zeros());
    let s = s.clone().with_prec(prec);

    let pw = inverse_powers(n as usize, &s);
    let mut sum = Complex::zero(prec);
    for v in &pw[1..n as usize] {
        sum += v;
    }
    let n_pow = &pw[n as usize];
    // N^{1-s}/(s-1)
    let nf = Float::with_val(prec, n);
    let mut s_minus_1 = s.clone();
    s_minus_1.re -= 1u32;
    let head = n_pow.scale(&nf).div(&s_minus_1)?;
    sum += &head;
    // N^{-s}/2
    let mut half = n_pow.clone();
    half.re >>= 1;
    half.im >>= 1;
    sum += &half;

    // Σ_m B_{2m}/(2m)! · Q_m with Q_1 = s N^{-s-1}, Q_{m+1} = Q_m (s+2m-1)(s+2m)/N^2
    let b = bernoulli_over_factorial(m as usize, prec);
    let inv_n = Float::with_val(prec, &nf).recip();
    let inv_n2 = Float::with_val(prec, inv_n.square_ref());
    let mut q = &s * n_pow;
    q *= &inv_n;
    for (i, bm) in b.iter().enumerate() {
        let mm = i as u32 + 1;
        if mm > 1 {
            let mut a = s.clone();
            a.re += 2 * mm - 3;
            let mut c = s.clone();
            c.re += 2 * mm - 2;
            q *= &a;
            q *= &c;
            q *= &inv_n2;
        }
        sum += &q.scale(bm);
    }

    let mut error = err_pow2((log2_remainder(sigma, t, n as f64, m).ceil()) as i64);
    // roundings: about N + 4M operations on terms bounded by max(1, |ζ|)
    let scale = err_abs(&sum.abs()).max(&err_from_f64(1.0)).clone();
    error += scale * err_pow2(-(prec as i64)) * err_from_f64((n + 4 * m as u64 + 8) as f64);
    Ok(ZetaRefResult {
        value: sum.with_prec(ctx.working()),
        terms_used: n,
        em_order: m,
        error_bound: error,
    })
}

/// ζ(s)^k from the reference evaluator with first-order error propagation.
pub fn zeta_pow_ref(s: &Complex, k: u32, ctx: &PrecisionCtx) -> Result<ZetaRefResult> {
    if k == 0 {
        return Err(Error::domain("power k must be positive"));
    }
    let extra = 8 + (32 - k.leading_zeros());
    let z = zeta_em(s, &ctx.with_extra_guard(extra))?;
    let value = z.value.pow_u(k);
    let abs = err_abs(&z.value.abs());
    let mut growth = err_from_f64(k as f64);
    for _ in 1..k {
        growth *= &abs;
    }
    let error = z.error_bound * growth + err_abs(&value.abs()) * err_pow2(-(ctx.working() as i64));
    Ok(ZetaRefResult {
        value: value.with_prec(ctx.working()),
        terms_used: z.terms_used,
        em_order: z.em_order,
        error_bound: error,
    })
}

/// Result of the integral-representation evaluator.
#[derive(Clone, Debug)]
pub struct IntegralCheck {
    pub value: Complex,
    /// Segments [m, m+1) integrated exactly, m < cutoff.
    pub cutoff: u64,
    pub error_bound: Float,
}

/// Largest cutoff the integral evaluator will use.
pub const INTEGRAL_MAX_CUTOFF: u64 = 400_000;

/// ζ(s) = s/(s-1) - s ∫_1^∞ {x} x^{-s-1} dx, with the integral summed
/// exactly over [m, m+1) for m < X and the remainder replaced by its mean
/// value X^{-s}/(2s). The dropped part is bounded by |s+1| X^{-σ-1}/(8(σ+1))
/// (one integration by parts against the periodic B_2), which is below the
/// cruder |s| X^{-σ}/σ for every admissible X.
pub fn zeta_integral_check(s: &Complex, ctx: &PrecisionCtx, tol: f64) -> Result<IntegralCheck> {
    check_domain(s)?;
    let sigma = s.re.to_f64();
    let abs_s = s.abs().to_f64();
    let abs_s1 = {
        let mut c = s.clone();
        c.re += 1u32;
        c.abs().to_f64()
    };
    let want = (abs_s * abs_s1 / (8.0 * (sigma + 1.0) * tol.max(1e-300))).powf(1.0 / (sigma + 1.0));
    let x = want.ceil().clamp(2.0, INTEGRAL_MAX_CUTOFF as f64) as u64;
    let prec = ctx.working() + 2 * (64 - x.leading_zeros()) + 8;
    let s = s.clone().with_prec(prec);
    let mut one_minus_s = -s.clone();
    one_minus_s.re += 1u32;
    let inv_1ms = one_minus_s.recip()?;
    let inv_s = s.recip()?;

    // powers m^{-s} for m ≤ X, reused across neighbouring segments
    let pw = inverse_powers(x as usize, &s);
    let mut acc = Complex::zero(prec);
    for m in 1..x as usize {
        let mf = Float::with_val(prec, m as u64);
        let m1 = Float::with_val(prec, m as u64 + 1);
        // ∫_m^{m+1} x^{-s} dx = ((m+1)^{1-s} - m^{1-s}) / (1-s)
        let mut a = pw[m + 1].scale(&m1);
        a -= &pw[m].scale(&mf);
        let a = &a * &inv_1ms;
        // m ∫_m^{m+1} x^{-s-1} dx = m (m^{-s} - (m+1)^{-s}) / s
        let mut b = &pw[m] - &pw[m + 1];
        b *= &mf;
        let b = &b * &inv_s;
        acc += &a;
        acc -= &b;
    }
    // mean tail: (1/2) ∫_X^∞ x^{-s-1} dx = X^{-s} / (2s)
    let mut tail = &pw[x as usize] * &inv_s;
    tail.re >>= 1;
    tail.im >>= 1;
    acc += &tail;

    // s/(s-1) - s·acc
    let mut s_minus_1 = s.clone();
    s_minus_1.re -= 1u32;
    let mut value = s.div(&s_minus_1)?;
    value -= &(&s * &acc);

    let tail_err = abs_s * abs_s1 * (x as f64).powf(-sigma - 1.0) / (8.0 * (sigma + 1.0));
    let round = err_pow2(-(prec as i64) + 2 * (64 - x.leading_zeros()) as i64 + 4);
    let error = err_from_f64(tail_err) + round * err_abs(&value.abs()).max(&err_from_f64(1.0)).clone();
    Ok(IntegralCheck {
        value: value.with_prec(ctx.working()),
        cutoff: x,
        error_bound: error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rug::float::Constant;
    use rug::ops::Pow;

    fn ctx(bits: u32) -> PrecisionCtx {
        PrecisionCtx::new(bits).unwrap()
    }

    fn real(c: &PrecisionCtx, x: f64) -> Complex {
        Complex::with_val(c.working(), x, 0)
    }

    fn dist(a: &Complex, b: &Complex) -> Float {
        (a - b).abs()
    }

    #[test]
    fn zeta_two_matches_basel() {
        let c = ctx(256);
        let z = zeta_em(&real(&c, 2.0), &c).unwrap();
        let pi = c.real(Constant::Pi);
        let basel = Complex::from_real(pi.square() / 6u32);
        assert!(dist(&z.value, &basel) < 1e-70);
        assert!(z.error_bound < 1e-70);
    }

    /// Σ_{n≤X} n^{-2} plus the Euler–Maclaurin tail 1/X - 1/(2X^2) + 1/(6X^3) - ...
    /// truncated after the X^{-3} term, as a second oracle.
    #[test]
    fn zeta_two_matches_direct_series_with_tail() {
        let c = ctx(128);
        let x = 100_000u32;
        let mut s = c.real(0);
        for n in 1..=x {
            s += Float::with_val(c.working(), n).square().recip();
        }
        let xf = c.real(x);
        s += Float::with_val(c.working(), xf.recip_ref());
        s -= Float::with_val(c.working(), xf.square_ref()).recip() / 2u32;
        s += Float::with_val(c.working(), xf.clone().square() * &xf).recip() / 6u32;
        let z = zeta_em(&real(&c, 2.0), &c).unwrap();
        // next omitted term is 1/(30 X^5) ~ 3e-27
        assert!(Float::with_val(c.working(), &z.value.re - &s).abs() < 1e-25);
    }

    #[test]
    fn zeta_half_two_truncations_agree() {
        let c = ctx(128);
        let s = real(&c, 0.5);
        let z = zeta_em(&s, &c).unwrap();
        let expected = c.real_str("-1.46035450880958681288949915251529801246722933101258149054");
        assert!(Float::with_val(c.working(), &z.value.re - &expected).abs() < 1e-25);
        let alt = zeta_em(&s, &ctx(300)).unwrap();
        assert!(dist(&z.value, &alt.value.with_prec(c.working())) < 1e-25);
        assert_ne!(alt.terms_used, z.terms_used);
    }

    #[test]
    fn first_zero_is_small() {
        let c = ctx(128);
        let s = Complex::new(c.real(0.5), c.real_str("14.134725141734695"));
        let z = zeta_em(&s, &c).unwrap();
        assert!(z.value.abs() < 1e-9);
    }

    #[test]
    fn pole_and_domain_errors() {
        let c = ctx(64);
        assert!(matches!(zeta_em(&real(&c, 1.0), &c), Err(Error::Pole)));
        assert!(matches!(zeta_em(&real(&c, -0.5), &c), Err(Error::Domain(_))));
        assert!(matches!(zeta_integral_check(&real(&c, 1.0), &c, 1e-6), Err(Error::Pole)));
        assert!(matches!(zeta_integral_check(&real(&c, 0.0), &c, 1e-6), Err(Error::Domain(_))));
    }

    #[test]
    fn pole_residue_converges_linearly() {
        let c = ctx(128);
        let mut prev = f64::INFINITY;
        for j in 2..=8 {
            let mut s = real(&c, 0.0);
            s.re = c.real(10).pow(-j) + 1u32;
            let eps_mp = Float::with_val(c.working(), &s.re - 1u32);
            let eps = eps_mp.to_f64();
            let z = zeta_em(&s, &c).unwrap();
            let r = Float::with_val(c.working(), &z.value.re * &eps_mp);
            let d = Float::with_val(c.working(), r - 1u32).abs().to_f64();
            // (s-1)ζ(s) = 1 + γ0 (s-1) + O((s-1)^2)
            assert!((d / eps - 0.5772156649).abs() < 2.0 * eps + 1e-6, "j={j}");
            assert!(d < prev);
            prev = d;
        }
    }

    #[test]
    fn powers() {
        let c = ctx(128);
        let z2 = zeta_pow_ref(&real(&c, 2.0), 2, &c).unwrap();
        assert!((z2.value.re.to_f64() - 2.7058080842778454).abs() < 1e-14);
        let h2 = zeta_pow_ref(&real(&c, 0.5), 2, &c).unwrap();
        assert!((h2.value.re.to_f64() - 2.1326352).abs() < 1e-7);
        let z1 = zeta_pow_ref(&real(&c, 2.0), 1, &c).unwrap();
        assert_eq!(z1.value, zeta_em(&real(&c, 2.0), &c).unwrap().value);
    }

    #[test]
    fn integral_representation_examples() {
        let c = ctx(128);
        let i2 = zeta_integral_check(&real(&c, 2.0), &c, 1e-12).unwrap();
        let z2 = zeta_em(&real(&c, 2.0), &c).unwrap();
        let d = dist(&i2.value, &z2.value);
        assert!(d <= Float::with_val(53, &i2.error_bound + &z2.error_bound));
        assert!(i2.error_bound < 1e-12);
        let i3 = zeta_integral_check(&real(&c, 3.0), &c, 1e-12).unwrap();
        assert!((i3.value.re.to_f64() - 1.2020569031595942).abs() < 1e-11);
        // (s-1) ζ(s) -> 1
        for j in 1..=4 {
            let eps = 10f64.powi(-j);
            let v = zeta_integral_check(&real(&c, 1.0 + eps), &c, 1e-8).unwrap();
            assert!((v.value.re.to_f64() * eps - 1.0).abs() < 0.6 * eps + 1e-7);
        }
    }

    #[test]
    fn dirichlet_series_tail_bound() {
        let c = ctx(128);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..3 {
            let sigma: f64 = rng.gen_range(2.0..4.0);
            let t: f64 = rng.gen_range(-20.0..20.0);
            let s = Complex::with_val(c.working(), sigma, t);
            let pw = inverse_powers(100_000, &s);
            let mut direct = Complex::zero(c.working());
            for v in &pw[1..] {
                direct += v;
            }
            let z = zeta_em(&s, &c).unwrap();
            let bound = 100_000f64.powf(1.0 - sigma) / (sigma - 1.0);
            assert!(dist(&direct, &z.value).to_f64() <= bound);
        }
    }

    #[test]
    fn em_and_integral_agree_at_random_points() {
        let c = ctx(96);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..25 {
            let sigma: f64 = rng.gen_range(0.1..4.0);
            let t: f64 = rng.gen_range(-50.0..50.0);
            let s = Complex::with_val(c.working(), sigma, t);
            let a = zeta_em(&s, &c).unwrap();
            let b = zeta_integral_check(&s, &c, 1e-9).unwrap();
            let d = dist(&a.value, &b.value);
            let tol = Float::with_val(53, &a.error_bound + &b.error_bound);
            assert!(d <= tol, "s={sigma}+{t}i d={d} tol={tol}");
        }
    }
}
