use rug::float::Constant;
use rug::Float;

use super::precision::{err_abs, err_from_f64, err_pow2, Approx, PrecisionCtx};
use crate::error::{Error, Result};

/// Arguments below this always use the power series for J0.
pub const J0_CROSSOVER: f64 = 30.0;

/// Bits lost to cancellation in the J0 series at argument v (the largest
/// term is about I0(v) ~ e^v / sqrt(2 pi v)).
fn j0_cancellation_bits(v: f64) -> u32 {
    (v * std::f64::consts::LOG2_E).ceil().max(0.0) as u32 + 8
}

/// Sum of (sign)^n (v/2)^{2n} / (n!)^2 at `prec` bits, returning the sum,
/// the largest term magnitude and the number of terms. Summation stops
/// once the terms are decreasing and fall below 2^stop_exp (absolute) or
/// below 2^-prec relative to the sum when `stop_exp` is `None`.
fn bessel_series(v: &Float, alternating: bool, prec: u32, stop_exp: Option<i32>) -> (Float, Float, u32) {
    let mut q = Float::with_val(prec, v.square_ref());
    q >>= 2;
    if alternating {
        q = -q;
    }
    let mut term = Float::with_val(prec, 1);
    let mut sum = Float::with_val(prec, 1);
    let mut max_term = Float::with_val(prec, 1);
    let half_v = v.to_f64() / 2.0;
    let mut n = 0u32;
    loop {
        n += 1;
        term *= &q;
        term /= n * n;
        sum += &term;
        if term.cmp_abs(&max_term) == Some(std::cmp::Ordering::Greater) {
            max_term = term.clone().abs();
        }
        let Some(te) = term.get_exp() else { break };
        if (n as f64) > half_v + 1.0 {
            // past the peak the term ratio is below 1/4, so the tail is
            // under a third of the last term
            let limit = stop_exp.unwrap_or_else(|| sum.get_exp().unwrap_or(0) - prec as i32 - 2);
            if te < limit {
                break;
            }
        }
    }
    (sum, max_term, n)
}

/// Modified Bessel function I0(v) with error below 2^-bits relative to
/// max(1, I0(v)).
pub fn bessel_i0(v: &Float, ctx: &PrecisionCtx) -> Approx<Float> {
    let vf = v.to_f64().abs();
    let extra = (vf * std::f64::consts::LOG2_E).ceil() as u32;
    let prec = ctx.working() + extra + 8;
    let (sum, _, n) = bessel_series(&Float::with_val(prec, v), false, prec, None);
    // n roundings of relative size 2^-prec on positive terms, plus a
    // truncated tail below 2^-prec of the sum
    let err = err_abs(&sum) * err_pow2(-(prec as i64)) * err_from_f64((n + 4) as f64);
    Approx::new(Float::with_val(ctx.working(), sum), err)
}

/// J0 by its power series with precision raised to absorb cancellation.
pub fn bessel_j0_series(v: &Float, ctx: &PrecisionCtx) -> Result<Approx<Float>> {
    check_nonnegative(v)?;
    let prec = ctx.working() + j0_cancellation_bits(v.to_f64());
    let stop = -(ctx.working() as i32) - 8;
    let (sum, max_term, n) = bessel_series(&Float::with_val(prec, v), true, prec, Some(stop));
    let err = err_abs(&max_term) * err_pow2(-(prec as i64)) * err_from_f64((4 * n + 8) as f64)
        + err_pow2(stop as i64);
    Ok(Approx::new(Float::with_val(ctx.working(), sum), err))
}

/// J0 by the Hankel asymptotic expansion, truncated at its smallest term.
/// The reported error is the first omitted term of P and Q scaled by the
/// prefactor, which bounds the remainder for real arguments.
pub fn bessel_j0_asymptotic(v: &Float, ctx: &PrecisionCtx) -> Result<Approx<Float>> {
    check_nonnegative(v)?;
    if v.is_zero() {
        return Err(Error::domain("asymptotic J0 needs a positive argument"));
    }
    let prec = ctx.working() + 16;
    let v = Float::with_val(prec, v);
    let inv8v = Float::with_val(prec, 8 * &v).recip();
    // a_k = prod_{m<=k} (-(2m-1)^2) / (k! 8^k v^k), alternating between P and Q
    let mut p = Float::with_val(prec, 1);
    let mut q = Float::with_val(prec, 0);
    let mut term = Float::with_val(prec, 1);
    let mut k = 0u32;
    let omitted = loop {
        k += 1;
        let odd = 2 * k - 1;
        let mut next = Float::with_val(prec, &term * &inv8v);
        next *= odd * odd;
        next /= k;
        next = -next;
        if next.cmp_abs(&term) != Some(std::cmp::Ordering::Less) {
            break next;
        }
        match k % 4 {
            0 => p += &next,
            1 => q += &next,
            2 => p -= &next,
            _ => q -= &next,
        }
        term = next;
    };
    // J0 = sqrt(2/(pi v)) (P cos chi - Q sin chi), chi = v - pi/4
    let pi = Float::with_val(prec, Constant::Pi);
    let chi = Float::with_val(prec, &v - Float::with_val(prec, &pi / 4));
    let (s, c) = chi.sin_cos(Float::new(prec));
    let pref = Float::with_val(prec, Float::with_val(prec, 2) / (pi * &v)).sqrt();
    let mut val = Float::with_val(prec, &p * &c);
    val -= Float::with_val(prec, &q * &s);
    val *= &pref;
    let err = err_abs(&omitted) * err_abs(&pref) * err_from_f64(2.0);
    Ok(Approx::new(Float::with_val(ctx.working(), val), err))
}

/// Bessel function J0(v) for v >= 0. Uses the asymptotic expansion when
/// v >= 30 and its best attainable error (about e^{-2v}) meets the
/// requested precision; otherwise the power series.
pub fn bessel_j0(v: &Float, ctx: &PrecisionCtx) -> Result<Approx<Float>> {
    check_nonnegative(v)?;
    let vf = v.to_f64();
    let asym_bits = 2.0 * vf * std::f64::consts::LOG2_E - 4.0;
    if vf >= J0_CROSSOVER && asym_bits >= ctx.bits() as f64 {
        bessel_j0_asymptotic(v, ctx)
    } else {
        bessel_j0_series(v, ctx)
    }
}

/// J_0(z), ..., J_n(z) for z >= 0 by Miller's backward recurrence, normalised
/// with J_0 + 2 Σ J_{2m} = 1. The list is extended past n until the orders
/// fall below 2^-prec, so callers summing Σ c_m J_m with |c_m| ≤ 1 can use
/// every entry.
pub fn bessel_j_all(n: u32, z: &Float, prec: u32) -> Vec<Float> {
    let zf = z.to_f64();
    if zf == 0.0 {
        let mut out = vec![Float::with_val(prec, 0); n as usize + 1];
        out[0] = Float::with_val(prec, 1);
        return out;
    }
    // J_m(z) ≈ (z/2)^m / m! once m > z
    let mut m = (zf.ceil() as u32 + 1).max(n + 1);
    let log2_half = (zf / 2.0).log2();
    let mut log2_term: f64 = (1..=m).map(|i| log2_half - (i as f64).log2()).sum();
    while log2_term > -(prec as f64) - 16.0 {
        m += 1;
        log2_term += log2_half - (m as f64).log2();
    }
    if m % 2 == 1 {
        m += 1;
    }
    let wp = prec + 32 + 32 - m.leading_zeros();
    let z = Float::with_val(wp, z);
    let two_over_z = Float::with_val(wp, 2u32 / &z);
    let mut out = vec![Float::with_val(wp, 0); m as usize + 2];
    out[m as usize] = Float::with_val(wp, Float::i_exp(1, -(wp as i32) / 2));
    for i in (1..=m).rev() {
        let mut v = Float::with_val(wp, &two_over_z * i);
        v *= &out[i as usize];
        v -= &out[i as usize + 1];
        out[i as usize - 1] = v;
    }
    let mut norm = out[0].clone();
    for i in (2..=m as usize).step_by(2) {
        norm += Float::with_val(wp, &out[i] * 2u32);
    }
    out.truncate(m as usize);
    out.into_iter().map(|v| Float::with_val(prec, v / &norm)).collect()
}

fn check_nonnegative(v: &Float) -> Result<()> {
    if !v.is_finite() {
        return Err(Error::NonFinite("bessel_j0"));
    }
    if v.is_sign_negative() && !v.is_zero() {
        return Err(Error::NegativeArgument(v.to_f64()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rug::ops::Pow;
    use rand_chacha::ChaCha8Rng;

    fn ctx(bits: u32) -> PrecisionCtx {
        PrecisionCtx::new(bits).unwrap()
    }

    /// Plain 200-term series at a generous fixed precision.
    fn slow_series(v: f64, alternating: bool) -> Float {
        let p = 1200;
        let q = Float::with_val(p, v).square() / 4u32;
        let mut term = Float::with_val(p, 1);
        let mut sum = Float::with_val(p, 1);
        for n in 1..200u32 {
            term *= &q;
            term /= n * n;
            if alternating && n % 2 == 1 {
                sum -= &term;
            } else {
                sum += &term;
            }
        }
        sum
    }

    #[test]
    fn i0_examples() {
        let c = ctx(128);
        assert_eq!(bessel_i0(&c.real(0), &c).value, 1);
        let v = bessel_i0(&c.real(2), &c).value;
        assert!((v - Float::with_val(128, 2.2795853023360673)).abs() < 1e-15);
        let a = bessel_i0(&c.real(1.7), &c).value;
        let b = bessel_i0(&c.real(-1.7), &c).value;
        assert_eq!(a, b);
    }

    #[test]
    fn j0_examples() {
        let c = ctx(128);
        assert_eq!(bessel_j0(&c.real(0), &c).unwrap().value, 1);
        let z = c.real_str("2.404825557695772768621631879326454643124");
        assert!(bessel_j0(&z, &c).unwrap().value.abs() < 1e-20);
        assert!(matches!(
            bessel_j0(&c.real(-1), &c),
            Err(Error::NegativeArgument(_))
        ));
    }

    #[test]
    fn j0_first_zero_by_bisection() {
        let c = ctx(128);
        let mut lo = c.real(2);
        let mut hi = c.real(3);
        for _ in 0..100 {
            let mid = Float::with_val(c.working(), &lo + &hi) / 2;
            if bessel_j0_series(&mid, &c).unwrap().value.is_sign_positive() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let expected = c.real_str("2.40482555769577276862163187932645464");
        assert!(Float::with_val(c.working(), &lo - &expected).abs() < 1e-25);
    }

    #[test]
    fn branches_agree_at_crossover() {
        let c = ctx(128);
        for v in [30.0, 30.5, 33.0, 40.0] {
            let s = bessel_j0_series(&c.real(v), &c).unwrap();
            let a = bessel_j0_asymptotic(&c.real(v), &c).unwrap();
            let d = Float::with_val(c.working(), &s.value - &a.value).abs();
            assert!(d < 1e-15, "v={v} diff={d}");
            assert!(d <= Float::with_val(53, &a.error + &s.error) * 4);
        }
    }

    #[test]
    fn large_argument_uses_asymptotic_when_accurate() {
        let c = ctx(64);
        let v = c.real(200);
        let a = bessel_j0(&v, &c).unwrap();
        let s = bessel_j0_series(&v, &c).unwrap();
        assert!(Float::with_val(c.working(), &a.value - &s.value).abs() < 1e-18);
    }

    #[test]
    fn random_points_match_slow_series() {
        let c = ctx(256);
        let tol = Float::with_val(53, 2).pow(-(256 - 8));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let v: f64 = rng.gen_range(0.0..25.0);
            let i0 = bessel_i0(&c.real(v), &c).value;
            let oi = slow_series(v, false);
            let rel = Float::with_val(300, &i0 - &oi).abs() / &oi;
            assert!(rel < tol, "I0({v})");
            let j0 = bessel_j0(&c.real(v), &c).unwrap().value;
            let oj = slow_series(v, true);
            assert!(Float::with_val(300, &j0 - &oj).abs() < tol, "J0({v})");
        }
    }

    #[test]
    fn bessel_j_all_matches_mpfr() {
        for &z in &[0.0, 0.3, 5.0, 17.5, 120.0] {
            let zf = Float::with_val(200, z);
            let all = bessel_j_all(6, &zf, 160);
            assert!(all.len() >= 7);
            for (m, v) in all.iter().enumerate().take(40) {
                let want = Float::with_val(200, zf.jn_ref(m as i32));
                let d = Float::with_val(200, v - &want).abs();
                assert!(d < 1e-44, "z={z} m={m} d={d}");
            }
        }
    }
}
