//! Taylor coefficients of ((s-1)ζ(s))^k.

use rug::ops::Pow;
use rug::Float;

use super::taylor::{from_taylor_scale, taylor_contour};
use crate::error::{Error, Result};
use crate::mp::combinatorics::binomial;
use crate::mp::PrecisionCtx;

/// t_{j,k} by repeated Cauchy products of t = t_{·,1}.
pub fn power_cauchy(t: &[Float], k: u32) -> Vec<Float> {
    assert!(k >= 1);
    let p = t[0].prec();
    let mut cur = t.to_vec();
    for _ in 1..k {
        cur = (0..t.len())
            .map(|j| {
                let mut acc = Float::with_val(p, 0);
                for i in 0..=j {
                    acc += Float::with_val(p, &cur[i] * &t[j - i]);
                }
                acc
            })
            .collect();
    }
    cur
}

/// t_{j,k} by the single-k recurrence obtained from f' · F = k f · F' with
/// F = f^k: t_{j,k} = (1/j) Σ_{i=1}^{j} ((k+1) i - j) t_i t_{j-i,k}.
pub fn power_recurrence(t: &[Float], k: u32) -> Vec<Float> {
    assert!(k >= 1);
    let p = t[0].prec();
    let mut out: Vec<Float> = Vec::with_capacity(t.len());
    out.push(Float::with_val(p, t[0].clone().pow(k)));
    for j in 1..t.len() {
        let mut acc = Float::with_val(p, 0);
        for i in 1..=j {
            let w = (k as i64 + 1) * i as i64 - j as i64;
            if w == 0 {
                continue;
            }
            let mut term = Float::with_val(p, &t[i] * &out[j - i]);
            term *= w;
            acc += term;
        }
        acc /= j as u32;
        out.push(acc);
    }
    out
}

/// Both recurrences, cross-checked: the results must agree to `2^-tol_bits`
/// in absolute terms on the Taylor scale.
pub fn power_checked(t: &[Float], k: u32, tol_bits: u32) -> Result<Vec<Float>> {
    let a = power_cauchy(t, k);
    if k == 1 {
        return Ok(a);
    }
    let b = power_recurrence(t, k);
    let p = t[0].prec();
    let mut worst = Float::with_val(p, 0);
    for (x, y) in a.iter().zip(&b) {
        let d = Float::with_val(p, x - y).abs();
        if d > worst {
            worst = d;
        }
    }
    let tol = Float::with_val(p, Float::i_exp(1, -(tol_bits as i32)));
    if worst > tol {
        return Err(Error::consistency(
            format!("power coefficients for k = {k}"),
            worst.to_f64(),
            tol.to_f64(),
        ));
    }
    Ok(a)
}

/// λ_{j,k} for j = 0..=jmax: the Taylor coefficients of (s-1)^k ζ^k(s) at
/// s = 1, scaled by j!.
pub fn lambda_k(jmax: usize, k: u32, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let t = taylor_contour(jmax, ctx)?;
    let tk = power_checked(&t, k, ctx.bits().saturating_sub(16))?;
    Ok(from_taylor_scale(&tk))
}

/// Upper bound γ_0^j C(j+k-1, k-1) for |λ_{j,k}|/j!.
pub fn power_bound(j: usize, k: u32, gamma0: &Float) -> Float {
    let p = gamma0.prec();
    let mut b = Float::with_val(p, gamma0.clone().pow(j as u32));
    b *= binomial(j as i64 + k as i64 - 1, k as i64 - 1);
    b
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::taylor::stieltjes_from_taylor;
    use proptest::prelude::*;

    fn taylor(jmax: usize, bits: u32) -> Vec<Float> {
        taylor_contour(jmax, &PrecisionCtx::new(bits).unwrap()).unwrap()
    }

    #[test]
    fn recurrences_agree() {
        let t = taylor(40, 256);
        for k in 1..=5 {
            let a = power_cauchy(&t, k);
            let b = power_recurrence(&t, k);
            for j in 0..=40 {
                let d = Float::with_val(300, &a[j] - &b[j]).abs();
                assert!(d < 1e-70, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn low_order_examples() {
        let ctx = PrecisionCtx::new(128).unwrap();
        let t = taylor_contour(4, &ctx).unwrap();
        let g0 = stieltjes_from_taylor(&t)[0].clone();
        let l2 = lambda_k(3, 2, &ctx).unwrap();
        assert_eq!(l2[0], 1);
        // λ_{1,2} = 2 γ_0
        let d = Float::with_val(128, &l2[1] - Float::with_val(128, &g0 * 2u32)).abs();
        assert!(d < 1e-30);
        let l3 = lambda_k(3, 3, &ctx).unwrap();
        let d = Float::with_val(128, &l3[1] - Float::with_val(128, &g0 * 3u32)).abs();
        assert!(d < 1e-30);
    }

    #[test]
    fn bound_holds() {
        let t = taylor(60, 192);
        let g0 = t[1].clone();
        for k in 1..=6 {
            let tk = power_cauchy(&t, k);
            for (j, v) in tk.iter().enumerate() {
                // equality holds at j = 1, so allow rounding slack
                let bound = power_bound(j, k, &g0) * (Float::with_val(192, Float::i_exp(1, -160)) + 1u32);
                assert!(Float::with_val(192, v.abs_ref()) <= bound, "k={k} j={j}");
            }
        }
    }

    #[test]
    fn rejects_k_zero() {
        assert!(lambda_k(3, 0, &PrecisionCtx::new(64).unwrap()).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        // (f^a)(f^b) = f^{a+b} on arbitrary truncated series with f_0 = 1
        #[test]
        fn powers_compose(coeffs in prop::collection::vec(-1.0f64..1.0, 1..12), a in 1u32..4, b in 1u32..4) {
            let mut t = vec![Float::with_val(200, 1)];
            t.extend(coeffs.iter().map(|&c| Float::with_val(200, c)));
            let fa = power_recurrence(&t, a);
            let fb = power_recurrence(&t, b);
            let fab = power_cauchy(&t, a + b);
            for j in 0..t.len() {
                let mut acc = Float::with_val(200, 0);
                for i in 0..=j {
                    acc += Float::with_val(200, &fa[i] * &fb[j - i]);
                }
                let d = Float::with_val(200, &acc - &fab[j]).abs();
                prop_assert!(d < 1e-40);
            }
        }
    }
}
