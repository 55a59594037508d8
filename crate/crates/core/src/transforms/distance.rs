//! Weighted L² distances between Δ_k and partial Laguerre reconstructions,
//! computed exactly segment by segment, and the Parseval identity for φ_k.

use rug::ops::Pow;
use rug::Float;

use super::hankel::{phi_series_ctx, phi_series_terms, phi_series_with};
use crate::coefficients::{CoefficientTable, TableStore};
use crate::divisor::integrals::{dot, exp_moment, fit_sqrt_constant, log2_u64, log_moments, sawtooth_tail, SAWTOOTH_START};
use crate::divisor::{sieve_dk, DivisorSieve, MainTerm, TailReport};
use crate::error::{Error, Result};
use crate::mp::{integrate_adaptive, poly, PrecisionCtx};
use crate::series::SeriesResult;

/// The measure on (1, ∞).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Weight {
    /// dr/r², under which the 𝓛_n are orthonormal.
    InverseSquare,
    /// dr/r³, the image of dx on (0, ∞) under the Hankel transform.
    InverseCube,
}

impl Weight {
    fn exponent(self) -> u32 {
        match self {
            Weight::InverseSquare => 2,
            Weight::InverseCube => 3,
        }
    }
}

/// e^{bu} E(u) with E' + bE = p, i.e. a primitive of e^{bu} p(u); for b = 0
/// the plain antiderivative.
struct ExpPoly {
    b: i32,
    poly: Vec<Float>,
}

impl ExpPoly {
    fn primitive(p: &[Float], b: i32, prec: u32) -> Self {
        if b == 0 {
            return ExpPoly { b, poly: poly::integral(p) };
        }
        // e^{bu} Σ_r (-1)^r p^{(r)} / b^{r+1}
        let mut out = vec![Float::with_val(prec, 0); p.len()];
        let mut d = p.to_vec();
        let mut scale = Float::with_val(prec, 1) / b;
        while !d.is_empty() {
            for (o, c) in out.iter_mut().zip(&d) {
                *o += Float::with_val(prec, c * &scale);
            }
            scale /= -b;
            d = poly::derivative(&d);
        }
        ExpPoly { b, poly: out }
    }

    fn eval(&self, u: &Float) -> Float {
        let v = poly::eval(&self.poly, u);
        if self.b == 0 {
            return v;
        }
        let e = Float::with_val(u.prec(), u * self.b).exp();
        v * e
    }

    fn at_zero(&self) -> Float {
        self.poly.first().cloned().unwrap_or_else(|| Float::with_val(64, 0))
    }
}

/// ∫_1^X (Δ_k(r) - Q(log r))² r^{-a} dr. On [m, m+1) the integrand is
/// (D(m) - rP(u) - Q(u))² r^{-a}, u = log r: the D² part is elementary, the
/// D-linear part is summed by parts against an exponential-polynomial
/// primitive Φ, and the rest telescopes to a closed form on [0, log X].
pub(crate) fn residual_main(sieve: &DivisorSieve, main: &MainTerm, q: &[Float], a: u32, prec: u32) -> Float {
    let x = sieve.limit;
    if x < 2 {
        return Float::with_val(prec, 0);
    }
    let ai = a as i32;
    let p = &main.coeffs;
    let mut squares = Float::with_val(prec, 0);
    let inv_pow = |m: u64| Float::with_val(prec, Float::with_val(prec, m).pow(1 - ai));
    let mut prev = inv_pow(1);
    for m in 1..x {
        let next = inv_pow(m + 1);
        let d = Float::with_val(prec, sieve.prefix[m as usize]);
        squares += d.square() * Float::with_val(prec, &prev - &next);
        prev = next;
    }
    squares /= a - 1;

    let big_u = Float::with_val(prec, Float::with_val(prec, x).ln_ref());
    let d_last = Float::with_val(prec, sieve.prefix[x as usize - 1]);
    let phi_parts = [ExpPoly::primitive(p, 2 - ai, prec), ExpPoly::primitive(q, 1 - ai, prec)];
    let mut cross = Float::with_val(prec, 0);
    for e in &phi_parts {
        if e.poly.is_empty() {
            continue;
        }
        let moments = log_moments(sieve, e.poly.len() - 1, (-e.b) as u32, prec);
        let zero = e.at_zero();
        // D(X-1) Φ(U) - Σ_{m=2}^{X-1} d(m) Φ(u_m), with Φ(u) = e(u) - e(0)
        cross += Float::with_val(prec, &d_last * (e.eval(&big_u) - &zero));
        cross -= dot(&e.poly, &moments, prec);
        cross += Float::with_val(prec, &zero * Float::with_val(prec, &d_last - 1u32));
    }

    let mut smooth = Float::with_val(prec, 0);
    let pq = poly::mul(p, q);
    let terms = [
        (poly::mul(p, p), 3 - ai),
        (poly::axpy(&Float::with_val(prec, 2), &pq, &[]), 2 - ai),
        (poly::mul(q, q), 1 - ai),
    ];
    for (poly_c, b) in terms {
        if poly_c.is_empty() {
            continue;
        }
        let e = ExpPoly::primitive(&poly_c, b, prec);
        smooth += e.eval(&big_u) - e.at_zero();
    }
    squares - cross * 2u32 + smooth
}

/// Tail ∫_X^∞ (Δ_k - Q)² r^{-a} dr: (value, bound, rigorous).
fn residual_tail(sieve: &DivisorSieve, main: &MainTerm, q: &[Float], a: u32, prec: u32) -> Result<(Float, Float, bool)> {
    let x = sieve.limit;
    if sieve.k == 1 {
        let x0 = x.max(SAWTOOTH_START);
        let mut value = Float::with_val(prec, 0);
        if x0 > x {
            value += residual_main(&sieve_dk(1, x0)?, main, q, a, prec);
            value -= residual_main(sieve, main, q, a, prec);
        }
        // (-{r} - Q)² = B̄_2 + B̄_1 (1 + 2Q) + (1/3 + Q + Q²)
        let one = [Float::with_val(prec, 1)];
        let (s2, b2) = sawtooth_tail(2, a, &one, x0, prec);
        let lin = poly::axpy(&Float::with_val(prec, 2), q, &one);
        let (s1, b1) = sawtooth_tail(1, a, &lin, x0, prec);
        let third = [Float::with_val(prec, 1) / 3u32];
        let smooth = poly::axpy(&Float::with_val(prec, 1), &poly::mul(q, q), &poly::axpy(&Float::with_val(prec, 1), q, &third));
        let u0 = Float::with_val(prec, Float::with_val(prec, x0).ln_ref());
        value += s2 + s1;
        value += exp_moment(&smooth, &Float::with_val(prec, a - 1), &u0);
        return Ok((value, b1 + b2, true));
    }
    if a == 2 {
        return Ok((Float::with_val(prec, 0), Float::with_val(prec, f64::INFINITY), false));
    }
    // (|Δ| + |Q|)² ≤ 2Δ² + 2Q² with |Δ_k(r)| ≤ C √r
    let c = fit_sqrt_constant(sieve, main);
    let mut bound = Float::with_val(prec, 2.0 * c * c / (a as f64 - 2.0));
    bound /= Float::with_val(prec, Float::with_val(prec, x).pow(a - 2));
    if !q.is_empty() {
        let u = Float::with_val(prec, Float::with_val(prec, x).ln_ref());
        bound += exp_moment(&poly::mul(q, q), &Float::with_val(prec, a - 1), &u) * 2u32;
    }
    Ok((Float::with_val(prec, 0), bound, false))
}

fn residual(sieve: &DivisorSieve, q: &[Float], weight: Weight, extra: u32, ctx: &PrecisionCtx) -> Result<TailReport> {
    let x = sieve.limit;
    let prec = ctx.working() + 2 * log2_u64(x.max(SAWTOOTH_START)) + 64 + extra;
    let main = MainTerm::new(sieve.k, &PrecisionCtx::new(prec)?)?;
    let q: Vec<Float> = q.iter().map(|c| Float::with_val(prec, c)).collect();
    let a = weight.exponent();
    let value = residual_main(sieve, &main, &q, a, prec);
    let (tail, bound, rigorous) = residual_tail(sieve, &main, &q, a, prec)?;
    Ok(TailReport {
        main_value: Float::with_val(ctx.working(), value),
        tail_value: Float::with_val(ctx.working(), tail),
        tail_bound: Float::with_val(ctx.working(), bound) + ctx.eps(),
        tail_is_rigorous: rigorous,
    })
}

/// Σ_{n ≤ terms} (-1)^n ℓ_{n,k} L_n(u) as a polynomial in u.
fn reconstruction_poly(table: &CoefficientTable, terms: usize, prec: u32) -> Vec<Float> {
    let mut q = vec![Float::with_val(prec, 0); terms + 1];
    for n in 0..=terms {
        let mut ell = Float::with_val(prec, table.ell_at(n as i64));
        if n % 2 == 1 {
            ell = -ell;
        }
        q = poly::axpy(&ell, &poly::laguerre_coefficients(n as u32, prec), &q);
    }
    q
}

/// ∫_1^∞ |Δ_k(r) - Σ_{n ≤ terms} (-1)^n ℓ_{n,k} 𝓛_n(r)|² w(r) dr.
pub fn partial_residual_sq(k: u32, terms: usize, sieve: &DivisorSieve, weight: Weight, ctx: &PrecisionCtx) -> Result<TailReport> {
    if k != sieve.k {
        return Err(Error::domain(format!("sieve is for k = {}, asked for k = {k}", sieve.k)));
    }
    if sieve.limit < 2 {
        return Err(Error::DegenerateInput(format!("sieve limit {} is below 2", sieve.limit)));
    }
    let table = TableStore::global().get(k, terms, k as usize, ctx)?;
    // primitives of Q² e^{-u} in powers of u carry coefficients up to
    // about 2^{4·terms}, which cancel
    let extra = 4 * terms as u32;
    let q = reconstruction_poly(&table, terms, ctx.working() + 64 + extra);
    residual(sieve, &q, weight, extra, ctx)
}

/// ‖φ_k - φ_{N,k}‖_{L²(0,∞)} and its square, via the r^{-3} weighted
/// distance between Δ_k and its partial Laguerre reconstruction.
#[derive(Clone, Debug)]
pub struct L2Distance {
    pub distance: Float,
    pub squared: TailReport,
}

pub fn phi_partial_l2_distance(k: u32, terms: usize, sieve: &DivisorSieve, ctx: &PrecisionCtx) -> Result<L2Distance> {
    let squared = partial_residual_sq(k, terms, sieve, Weight::InverseCube, ctx)?;
    let total = squared.total();
    let distance = if total > 0 { total.sqrt() } else { Float::with_val(ctx.working(), 0) };
    Ok(L2Distance { distance, squared })
}

/// ∫_1^∞ Δ_k(r)² w(r) dr.
pub fn delta_weighted_norm_sq(sieve: &DivisorSieve, weight: Weight, ctx: &PrecisionCtx) -> Result<TailReport> {
    residual(sieve, &[], weight, 0, ctx)
}

/// Both sides of ∫_0^∞ φ_k(x)² dx = ∫_1^∞ Δ_k(r)² dr/r³.
///
/// Left: φ_k from the Borel series, integrated over [0, T] in s = √x (where
/// φ_k is quasi-periodic) on unit panels, plus a tail from the model
/// φ_k² ≈ C x^{-3/2} with C matched on [T/2, T]; the tail bound is the tail
/// itself and is heuristic. Right: piecewise-exact integral with the divisor
/// tail.
pub fn parseval_check(k: u32, sieve: &DivisorSieve, t: f64, ctx: &PrecisionCtx) -> Result<(TailReport, TailReport)> {
    if k != sieve.k {
        return Err(Error::domain(format!("sieve is for k = {}, asked for k = {k}", sieve.k)));
    }
    if !t.is_finite() || t < 0.0 {
        return Err(Error::domain(format!("T must be finite and non-negative, got {t}")));
    }
    let right = delta_weighted_norm_sq(sieve, Weight::InverseCube, ctx)?;
    let p = ctx.working();
    if t == 0.0 {
        let zero = Float::with_val(p, 0);
        let left = TailReport {
            main_value: zero.clone(),
            tail_value: zero.clone(),
            tail_bound: Float::with_val(p, f64::INFINITY),
            tail_is_rigorous: false,
        };
        return Ok((left, right));
    }
    let wctx = phi_series_ctx(t, ctx);
    let table = TableStore::global().get(k, phi_series_terms(t, ctx.bits()), k as usize, &wctx)?;
    // φ(s²)² 2s
    let f = |s: &Float| -> Result<Float> {
        let x = Float::with_val(p, s.square_ref());
        let r: SeriesResult = phi_series_with(&table, &x, phi_series_terms(x.to_f64(), ctx.bits()), ctx)?;
        Ok(r.value.re.square() * Float::with_val(p, s * 2u32))
    };
    let s_max = t.sqrt();
    let s_half = (t / 2.0).sqrt();
    let tol = Float::with_val(p, Float::i_exp(1, -(ctx.bits() as i32).min(60)));
    let mut edges: Vec<f64> = (0..s_max.ceil() as usize).map(|i| i as f64).collect();
    edges.push(s_half);
    edges.push(s_max);
    edges.retain(|&e| e <= s_max);
    edges.sort_by(f64::total_cmp);
    edges.dedup();
    let mut total = Float::with_val(p, 0);
    let mut upper = Float::with_val(p, 0);
    for w in edges.windows(2) {
        let v = integrate_adaptive(&f, &Float::with_val(p, w[0]), &Float::with_val(p, w[1]), &tol, ctx)?.value;
        if w[0] >= s_half {
            upper += &v;
        }
        total += v;
    }
    // ∫_{T/2}^T x^{-3/2} dx = 2(√2 - 1)/√T and ∫_T^∞ = 2/√T
    let model_c = upper.to_f64() * t.sqrt() / (2.0 * (2f64.sqrt() - 1.0));
    let tail = 2.0 * model_c / t.sqrt();
    let left = TailReport {
        main_value: total,
        tail_value: Float::with_val(p, tail),
        tail_bound: Float::with_val(p, tail.abs()),
        tail_is_rigorous: false,
    };
    Ok((left, right))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::delta_norm_trunc;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(80).unwrap()
    }

    fn close(a: &Float, b: &Float, tol: f64) -> bool {
        Float::with_val(a.prec(), a - b).abs() <= tol
    }

    #[test]
    fn unweighted_norm_matches_divisor_route() {
        let c = ctx();
        for k in 1..=2 {
            let s = sieve_dk(k, 3000).unwrap();
            let a = delta_weighted_norm_sq(&s, Weight::InverseSquare, &c).unwrap();
            let b = delta_norm_trunc(k, &s, &c).unwrap();
            assert!(close(&a.main_value, &b.main_value, 1e-18), "k={k}");
            if k == 1 {
                assert!(close(&a.total(), &b.total(), 1e-18));
            }
        }
    }

    #[test]
    fn pythagoras_in_the_orthonormal_weight() {
        let c = ctx();
        let s = sieve_dk(1, 3000).unwrap();
        let norm = delta_norm_trunc(1, &s, &c).unwrap().total();
        let table = TableStore::global().get(1, 20, 1, &c).unwrap();
        for n in [0usize, 5, 20] {
            let r = partial_residual_sq(1, n, &s, Weight::InverseSquare, &c).unwrap();
            let mut sum = r.total();
            for i in 0..=n {
                sum += Float::with_val(c.working(), table.ell_at(i as i64).square_ref());
            }
            assert!(close(&sum, &norm, 1e-15), "N={n}");
        }
    }

    #[test]
    fn residual_matches_quadrature() {
        let c = ctx();
        let prec = c.working();
        let s = sieve_dk(2, 12).unwrap();
        let main = MainTerm::new(2, &c).unwrap();
        let q = vec![c.real(0.3), c.real(-0.2), c.real(0.05)];
        let got = residual_main(&s, &main, &q, 3, prec);
        let mut want = Float::with_val(prec, 0);
        for m in 1..12u64 {
            let d = s.prefix[m as usize];
            let f = |r: &Float| -> Result<Float> {
                let u = Float::with_val(prec, r.ln_ref());
                let mut h = Float::with_val(prec, d) - Float::with_val(prec, r * main.eval(&u));
                h -= poly::eval(&q, &u);
                Ok(h.square() / Float::with_val(prec, r * Float::with_val(prec, r.square_ref())))
            };
            want += integrate_adaptive(&f, &c.real(m), &c.real(m + 1), &c.real(1e-22), &c).unwrap().value;
        }
        assert!(close(&got, &want, 1e-18));
    }

    #[test]
    fn cubic_weight_distance_decreases() {
        let c = ctx();
        let s = sieve_dk(1, 2000).unwrap();
        let mut prev = f64::INFINITY;
        for n in [0usize, 5, 10, 50] {
            let d = phi_partial_l2_distance(1, n, &s, &c).unwrap();
            assert!(d.squared.tail_is_rigorous);
            let v = d.distance.to_f64();
            assert!(v < prev, "N={n}");
            prev = v;
        }
        assert!(matches!(
            phi_partial_l2_distance(1, 3, &sieve_dk(1, 1).unwrap(), &c),
            Err(Error::DegenerateInput(_))
        ));
    }

    #[test]
    fn parseval_trivial_range() {
        let c = ctx();
        let s = sieve_dk(1, 500).unwrap();
        let (left, right) = parseval_check(1, &s, 0.0, &c).unwrap();
        assert_eq!(left.main_value, 0);
        let direct = delta_weighted_norm_sq(&s, Weight::InverseCube, &c).unwrap();
        assert_eq!(right.total(), direct.total());
        assert!(parseval_check(2, &s, 1.0, &c).is_err());
    }

    #[test]
    fn parseval_sides_agree_roughly() {
        let c = PrecisionCtx::new(64).unwrap();
        let s = sieve_dk(1, 500).unwrap();
        let (left, right) = parseval_check(1, &s, 300.0, &c).unwrap();
        let rel = (left.total().to_f64() / right.total().to_f64() - 1.0).abs();
        assert!(rel < 0.05, "{rel}");
    }
}
