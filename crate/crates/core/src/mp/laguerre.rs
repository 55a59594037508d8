use rug::Float;

use super::precision::PrecisionCtx;
use crate::error::{Error, Result};

/// Laguerre polynomial L_n(u) by the three-term recurrence.
pub fn laguerre(n: u32, u: &Float, ctx: &PrecisionCtx) -> Float {
    laguerre_all(n, u, ctx).pop().expect("at least L_0")
}

/// L_0(u), ..., L_n(u).
pub fn laguerre_all(n: u32, u: &Float, ctx: &PrecisionCtx) -> Vec<Float> {
    let p = ctx.working();
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(Float::with_val(p, 1));
    if n == 0 {
        return out;
    }
    out.push(Float::with_val(p, 1 - u));
    for m in 1..n {
        // (m+1) L_{m+1} = (2m+1-u) L_m - m L_{m-1}
        let mut next = Float::with_val(p, (2 * m + 1) - u);
        next *= &out[m as usize];
        next -= Float::with_val(p, &out[m as usize - 1] * m);
        next /= m + 1;
        out.push(next);
    }
    out
}

/// The orthonormal basis of L^2((1, inf), dx/x^2): 𝓛_n(x) = L_n(log x).
pub fn curly_laguerre(n: u32, x: &Float, ctx: &PrecisionCtx) -> Result<Float> {
    Ok(curly_laguerre_all(n, x, ctx)?.pop().expect("at least 𝓛_0"))
}

pub fn curly_laguerre_all(n: u32, x: &Float, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    if !x.is_finite() || *x < 1 {
        return Err(Error::domain(format!(
            "𝓛_n(x) is defined for x >= 1, got {}",
            x.to_f64()
        )));
    }
    let u = Float::with_val(ctx.working(), x.ln_ref());
    Ok(laguerre_all(n, &u, ctx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::combinatorics::binomial;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rug::Integer;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(256).unwrap()
    }

    #[test]
    fn low_degree_examples() {
        let c = ctx();
        let u = c.real(0.37);
        assert_eq!(laguerre(0, &u, &c), 1);
        assert_eq!(laguerre(1, &u, &c), Float::with_val(c.working(), 1 - &u));
        assert_eq!(laguerre(2, &c.real(3), &c), -0.5);
    }

    #[test]
    fn curly_rejects_below_one() {
        let c = ctx();
        assert!(curly_laguerre(3, &c.real(0.5), &c).is_err());
        assert_eq!(curly_laguerre(7, &c.real(1), &c).unwrap(), 1);
    }

    /// 𝓛_n(x) = sum_j C(n,j) (-1)^j log^j(x) / j!
    fn explicit(n: u32, x: &Float, prec: u32) -> Float {
        let u = Float::with_val(prec, x.ln_ref());
        let mut sum = Float::with_val(prec, 0);
        let mut pow = Float::with_val(prec, 1);
        let mut fact = Integer::from(1);
        for j in 0..=n {
            if j > 0 {
                pow *= &u;
                fact *= j;
            }
            let mut t = Float::with_val(prec, &pow * binomial(n as i64, j as i64));
            t /= &fact;
            if j % 2 == 1 {
                sum -= t;
            } else {
                sum += t;
            }
        }
        sum
    }

    #[test]
    fn recurrence_matches_explicit_sum() {
        let c = ctx();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let x = c.real(rng.gen_range(1.0..100.0));
            let all = curly_laguerre_all(15, &x, &c).unwrap();
            for n in 0..=15 {
                let d = Float::with_val(c.working(), &all[n as usize] - explicit(n, &x, c.working()));
                assert!(d.abs() < 1e-25, "n={n}");
            }
        }
    }
}
