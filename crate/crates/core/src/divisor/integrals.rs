//! Integrals of Δ_k against dw(x) = dx/x² over [1, X], computed exactly
//! segment by segment, plus tail estimates beyond the sieve limit.

use rug::{Assign, Float, Integer};

use super::{sieve_dk, DivisorSieve, MainTerm};
use crate::error::{Error, Result};
use crate::mp::{bernoulli, poly, PrecisionCtx};

/// Below this cutoff the k = 1 sawtooth expansion is evaluated from here
/// instead, with the segments in between added exactly.
pub(crate) const SAWTOOTH_START: u64 = 64;
const SAWTOOTH_MAX_TERMS: u32 = 400;

/// Value of an integral over [1, X] plus what is known about [X, ∞).
#[derive(Clone, Debug)]
pub struct TailReport {
    pub main_value: Float,
    /// Estimate of the tail integral (0 when only a bound is known).
    pub tail_value: Float,
    /// Bound on |true tail - tail_value|; +∞ when none is available.
    pub tail_bound: Float,
    pub tail_is_rigorous: bool,
}

impl TailReport {
    pub fn total(&self) -> Float {
        Float::with_val(self.main_value.prec(), &self.main_value + &self.tail_value)
    }
}

pub(crate) fn log2_u64(x: u64) -> u32 {
    64 - x.max(1).leading_zeros()
}

/// Σ_{r ≥ 0} p^{(r)}.
pub(crate) fn derivative_sum(p: &[Float]) -> Vec<Float> {
    let mut out = p.to_vec();
    let mut d = poly::derivative(p);
    while !d.is_empty() {
        for (o, c) in out.iter_mut().zip(&d) {
            *o += c;
        }
        d = poly::derivative(&d);
    }
    out
}

/// Σ_{m=2}^{X-1} d_k(m) log^i(m) / m^e for i = 0..=deg.
pub(crate) fn log_moments(sieve: &DivisorSieve, deg: usize, e: u32, prec: u32) -> Vec<Float> {
    let mut acc = vec![Float::with_val(prec, 0); deg + 1];
    let mut u = Float::with_val(prec, 0);
    let mut w = Float::with_val(prec, 0);
    for m in 2..sieve.limit {
        let d = sieve.d(m);
        if d == 0 {
            continue;
        }
        u.assign(m);
        u.ln_mut();
        w.assign(d);
        for _ in 0..e {
            w /= m;
        }
        for a in acc.iter_mut() {
            *a += &w;
            w *= &u;
        }
    }
    acc
}

pub(crate) fn dot(p: &[Float], moments: &[Float], prec: u32) -> Float {
    let mut acc = Float::with_val(prec, 0);
    for (c, m) in p.iter().zip(moments) {
        acc += Float::with_val(prec, c * m);
    }
    acc
}

/// ∫_1^X Δ_k(x) L_n(log x) x^{-2} dx for n = 0..=n_max.
///
/// With S_n = Σ_r L_n^{(r)}, F(x) = -S_n(log x)/x is a primitive of
/// L_n(log x)/x², so the step part sums to
/// D(X-1)F(X) - F(1) - Σ_{m=2}^{X-1} d(m) F(m); the smooth part is R_n(log X)
/// with R_n = ∫_0 P_k L_n.
fn fourier_main(n_max: u32, sieve: &DivisorSieve, main: &MainTerm, prec: u32) -> Vec<Float> {
    let x = sieve.limit;
    if x < 2 {
        return vec![Float::with_val(prec, 0); n_max as usize + 1];
    }
    let moments = log_moments(sieve, n_max as usize, 1, prec);
    let big_u = Float::with_val(prec, Float::with_val(prec, x).ln_ref());
    let d_last = Float::with_val(prec, sieve.prefix[x as usize - 1]);
    (0..=n_max)
        .map(|n| {
            let l = poly::laguerre_coefficients(n, prec);
            let s = derivative_sum(&l);
            let r = poly::integral(&poly::mul(&main.coeffs, &l));
            let mut v = dot(&s, &moments, prec);
            v += &s[0];
            let mut last = Float::with_val(prec, &d_last * poly::eval(&s, &big_u));
            last /= x;
            v -= last;
            v -= poly::eval(&r, &big_u);
            v
        })
        .collect()
}

/// ∫_X^∞ B̄_q(x) x^{-a} p(log x) dx at integer X by repeated integration by
/// parts: -Σ_r (-1)^r q!/(q+r+1)! B_{q+r+1} g^{(r)}(X). Returns the sum and
/// twice the first omitted term.
pub(crate) fn sawtooth_tail(q: u32, a: u32, p: &[Float], x: u64, prec: u32) -> (Float, Float) {
    let big_u = Float::with_val(prec, Float::with_val(prec, x).ln_ref());
    let inv_x = Float::with_val(prec, Float::with_val(prec, x).recip_ref());
    let mut pow = Float::with_val(prec, 1);
    for _ in 0..a {
        pow *= &inv_x;
    }
    let mut a = a;
    let mut p = p.to_vec();
    // q!/(q+r+1)!
    let mut ratio = Float::with_val(prec, 1) / (q + 1);
    let mut sum = Float::with_val(prec, 0);
    let mut prev = Float::with_val(prec, f64::INFINITY);
    let tiny = Float::with_val(prec, Float::i_exp(1, -(prec as i32)));
    for r in 0..SAWTOOTH_MAX_TERMS {
        let b = bernoulli(q + r + 1);
        if b != 0 {
            let mut term = Float::with_val(prec, &pow * poly::eval(&p, &big_u));
            term *= &ratio;
            term *= Float::with_val(prec, &b);
            if r % 2 == 0 {
                term = -term;
            }
            let mag = Float::with_val(prec, term.abs_ref());
            if mag >= prev || mag <= Float::with_val(prec, &tiny * Float::with_val(prec, sum.abs_ref())) {
                return (sum, mag.min(&prev) * 2u32);
            }
            sum += &term;
            prev = mag;
        }
        // g ← g' with g = x^{-a} p(log x)
        let dp = poly::derivative(&p);
        p = poly::axpy(&Float::with_val(prec, -(a as i64)), &p, &dp);
        a += 1;
        pow *= &inv_x;
        ratio /= q + r + 2;
    }
    (sum, prev * 2u32)
}

/// Exact k = 1 tail ∫_X^∞ -{x} L_n(log x) x^{-2} dx, with {x} = B̄_1 + 1/2.
fn fourier_tail_k1(n: u32, x: u64, prec: u32) -> (Float, Float) {
    let l = poly::laguerre_coefficients(n, prec);
    let s = derivative_sum(&l);
    let big_u = Float::with_val(prec, Float::with_val(prec, x).ln_ref());
    let (saw, bound) = sawtooth_tail(1, 2, &l, x, prec);
    let mut half = poly::eval(&s, &big_u);
    half /= 2 * x;
    (-(half + saw), bound)
}

/// max |Δ_k(x)|/√x over the top decade of the sieve, sampled on both sides
/// of every jump.
pub(crate) fn fit_sqrt_constant(sieve: &DivisorSieve, main: &MainTerm) -> f64 {
    let coeffs: Vec<f64> = main.coeffs.iter().map(Float::to_f64).collect();
    let p = |u: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * u + c);
    let x = sieve.limit;
    let lo = (x / 10).max(1);
    let mut c = 0.0f64;
    for m in lo..x {
        let d = sieve.prefix[m as usize] as f64;
        for y in [m as f64, (m + 1) as f64] {
            let delta = d - y * p(y.ln());
            c = c.max(delta.abs() / y.sqrt());
        }
    }
    c
}

/// ∫_U^∞ p(u) e^{-bu} du = e^{-bU} Σ_r p^{(r)}(U) / b^{r+1}.
pub(crate) fn exp_moment(p: &[Float], b: &Float, big_u: &Float) -> Float {
    let prec = b.prec();
    let mut acc = Float::with_val(prec, 0);
    let mut d = p.to_vec();
    let mut scale = Float::with_val(prec, b.recip_ref());
    while !d.is_empty() {
        acc += Float::with_val(prec, &scale * poly::eval(&d, big_u));
        scale /= b;
        d = poly::derivative(&d);
    }
    let mut e = Float::with_val(prec, b * big_u);
    e = -e;
    e.exp_mut();
    acc * e
}

fn working_prec(ctx: &PrecisionCtx, x: u64, n_max: u32) -> u32 {
    let loglog = ((x.max(2) as f64).ln().log2().max(1.0)).ceil() as u32;
    ctx.working() + 2 * log2_u64(x) + 16 + n_max * (loglog + 2)
}

fn round(v: Float, ctx: &PrecisionCtx) -> Float {
    Float::with_val(ctx.working(), v)
}

/// (-1)^n ℓ_{n,k} ≈ ∫_1^∞ Δ_k(x) 𝓛_n(x) dx/x² for n = 0..=n_max, with the
/// integral over [1, X] exact and the tail exact (k = 1) or bounded under the
/// assumption |Δ_k(x)| ≤ C √x with C fitted on the top decade (k ≥ 2).
pub fn fourier_coeffs_numeric(n_max: u32, sieve: &DivisorSieve, ctx: &PrecisionCtx) -> Result<Vec<TailReport>> {
    let x = sieve.limit;
    let k = sieve.k;
    if k >= 2 && x < 2 {
        return Err(Error::DegenerateInput(format!(
            "sieve limit {x} leaves nothing to fit the k = {k} tail on"
        )));
    }
    let prec = working_prec(ctx, x.max(SAWTOOTH_START), n_max);
    let wctx = PrecisionCtx::new(prec)?;
    let main = MainTerm::new(k, &wctx)?;
    let values = fourier_main(n_max, sieve, &main, prec);
    if k == 1 {
        let x0 = x.max(SAWTOOTH_START);
        let bridge = if x0 > x {
            let far = fourier_main(n_max, &sieve_dk(1, x0)?, &main, prec);
            far.into_iter().zip(&values).map(|(f, v)| f - v).collect()
        } else {
            vec![Float::with_val(prec, 0); values.len()]
        };
        return Ok(values
            .into_iter()
            .zip(bridge)
            .enumerate()
            .map(|(n, (v, b))| {
                let (t, bound) = fourier_tail_k1(n as u32, x0, prec);
                TailReport {
                    main_value: round(v, ctx),
                    tail_value: round(t + b, ctx),
                    tail_bound: round(bound, ctx) + ctx.eps(),
                    tail_is_rigorous: true,
                }
            })
            .collect());
    }
    let c = Float::with_val(prec, fit_sqrt_constant(sieve, &main));
    let big_u = Float::with_val(prec, Float::with_val(prec, x).ln_ref());
    let half = Float::with_val(prec, 0.5);
    Ok(values
        .into_iter()
        .enumerate()
        .map(|(n, v)| {
            let abs_l: Vec<Float> = poly::laguerre_coefficients(n as u32, prec)
                .into_iter()
                .map(|c| c.abs())
                .collect();
            let bound = Float::with_val(prec, &c * exp_moment(&abs_l, &half, &big_u));
            TailReport {
                main_value: round(v, ctx),
                tail_value: Float::with_val(ctx.working(), 0),
                tail_bound: round(bound, ctx),
                tail_is_rigorous: false,
            }
        })
        .collect())
}

/// Single-degree form of [`fourier_coeffs_numeric`]; `k` must match the sieve.
pub fn fourier_coeff_numeric(n: u32, k: u32, sieve: &DivisorSieve, ctx: &PrecisionCtx) -> Result<TailReport> {
    if k != sieve.k {
        return Err(Error::domain(format!("sieve is for k = {}, asked for k = {k}", sieve.k)));
    }
    Ok(fourier_coeffs_numeric(n, sieve, ctx)?.pop().expect("n_max + 1 reports"))
}

/// ∫_1^X (Δ_k(x)/x)² dx, exact per segment:
/// Σ_m D(m)² (1/m - 1/(m+1)) - 2 Σ_m D(m) [R(log(m+1)) - R(log m)] + ∫_0^U P² e^u du
/// with R = ∫_0 P_k.
fn norm_main(sieve: &DivisorSieve, main: &MainTerm, prec: u32) -> Float {
    let x = sieve.limit;
    if x < 2 {
        return Float::with_val(prec, 0);
    }
    let mut squares = Float::with_val(prec, 0);
    for m in 1..x {
        let d = Integer::from(sieve.prefix[m as usize]);
        let mut t = Float::with_val(prec, d.square());
        t /= m;
        t /= m + 1;
        squares += t;
    }
    let r = poly::integral(&main.coeffs);
    let moments = log_moments(sieve, r.len() - 1, 0, prec);
    let big_u = Float::with_val(prec, Float::with_val(prec, x).ln_ref());
    // Σ_{m=1}^{X-1} D(m) [R(u_{m+1}) - R(u_m)] by parts, R(0) = 0
    let mut cross = Float::with_val(prec, sieve.prefix[x as usize - 1]) * poly::eval(&r, &big_u);
    cross -= dot(&r, &moments, prec);
    // e^u Σ_r (-1)^r q^{(r)} is a primitive of e^u q
    let q = poly::mul(&main.coeffs, &main.coeffs);
    let mut alt = q.clone();
    let mut d = poly::derivative(&q);
    let mut sign = -1i32;
    while !d.is_empty() {
        for (o, c) in alt.iter_mut().zip(&d) {
            *o += Float::with_val(prec, c * sign);
        }
        sign = -sign;
        d = poly::derivative(&d);
    }
    let mut smooth = poly::eval(&alt, &big_u);
    smooth *= x;
    smooth -= &alt[0];
    squares - cross * 2u32 + smooth
}

/// ‖Δ_k‖² over [1, X] with the tail beyond X. For k = 1 the tail is exact via
/// {x}² = B̄_2 + B̄_1 + 1/3; for k ≥ 2 an |Δ_k| ≤ C √x model makes the tail
/// diverge, so the bound is +∞.
pub fn delta_norm_trunc(k: u32, sieve: &DivisorSieve, ctx: &PrecisionCtx) -> Result<TailReport> {
    if k != sieve.k {
        return Err(Error::domain(format!("sieve is for k = {}, asked for k = {k}", sieve.k)));
    }
    let x = sieve.limit;
    let prec = working_prec(ctx, x.max(SAWTOOTH_START), 0);
    let wctx = PrecisionCtx::new(prec)?;
    let main = MainTerm::new(k, &wctx)?;
    let value = norm_main(sieve, &main, prec);
    if k >= 2 {
        return Ok(TailReport {
            main_value: round(value, ctx),
            tail_value: Float::with_val(ctx.working(), 0),
            tail_bound: Float::with_val(ctx.working(), f64::INFINITY),
            tail_is_rigorous: false,
        });
    }
    let x0 = x.max(SAWTOOTH_START);
    let mut tail = Float::with_val(prec, 0);
    if x0 > x {
        tail += norm_main(&sieve_dk(1, x0)?, &main, prec);
        tail -= &value;
    }
    let one = [Float::with_val(prec, 1)];
    let (s2, b2) = sawtooth_tail(2, 2, &one, x0, prec);
    let (s1, b1) = sawtooth_tail(1, 2, &one, x0, prec);
    tail += s2 + s1;
    tail += Float::with_val(prec, Float::with_val(prec, 3 * x0).recip_ref());
    Ok(TailReport {
        main_value: round(value, ctx),
        tail_value: round(tail, ctx),
        tail_bound: round(b1 + b2, ctx) + ctx.eps(),
        tail_is_rigorous: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coefficients::TableStore;
    use crate::mp::{curly_laguerre, integrate_adaptive};

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(96).unwrap()
    }

    fn close(a: &Float, b: &Float, tol: f64) -> bool {
        Float::with_val(a.prec(), a - b).abs() <= tol
    }

    #[test]
    fn trivial_cutoff() {
        let c = ctx();
        let s = sieve_dk(1, 1).unwrap();
        let r = fourier_coeff_numeric(0, 1, &s, &c).unwrap();
        assert_eq!(r.main_value, 0);
        assert_eq!(delta_norm_trunc(1, &s, &c).unwrap().main_value, 0);
        let s2 = sieve_dk(2, 1).unwrap();
        assert!(matches!(fourier_coeff_numeric(0, 2, &s2, &c), Err(Error::DegenerateInput(_))));
    }

    #[test]
    fn k1_zeroth_coefficient_from_small_cutoffs() {
        let c = ctx();
        let g0 = crate::coefficients::stieltjes(0, &c).unwrap()[0].clone();
        let want = Float::with_val(c.working(), &g0 - 1u32);
        for x in [1u64, 2, 10, 1000] {
            let r = fourier_coeff_numeric(0, 1, &sieve_dk(1, x).unwrap(), &c).unwrap();
            assert!(r.tail_is_rigorous);
            assert!(close(&r.total(), &want, 1e-20), "X={x} {}", r.total());
        }
    }

    #[test]
    fn k1_matches_coefficients() {
        let c = ctx();
        let table = TableStore::global().get(1, 12, 1, &c).unwrap();
        let s = sieve_dk(1, 5000).unwrap();
        let reports = fourier_coeffs_numeric(10, &s, &c).unwrap();
        for (n, r) in reports.iter().enumerate() {
            let mut want = table.ell_at(n as i64).clone();
            if n % 2 == 1 {
                want = -want;
            }
            let tol = r.tail_bound.to_f64() + 1e-20;
            assert!(close(&r.total(), &want, tol), "n={n} got {} want {want}", r.total());
        }
    }

    #[test]
    fn segments_agree_with_quadrature() {
        let c = ctx();
        let s = sieve_dk(2, 30).unwrap();
        let main = MainTerm::new(2, &c).unwrap();
        let r = fourier_coeffs_numeric(3, &s, &c).unwrap();
        for n in 0..=3u32 {
            let mut acc = Float::with_val(c.working(), 0);
            for m in 1..30u64 {
                let d = s.prefix[m as usize];
                let f = |x: &Float| {
                    let u = Float::with_val(c.working(), x.ln_ref());
                    let delta = Float::with_val(c.working(), d) - Float::with_val(c.working(), x * main.eval(&u));
                    let l = curly_laguerre(n, x, &c)?;
                    Ok(delta * l / Float::with_val(c.working(), x.square_ref()))
                };
                acc += integrate_adaptive(&f, &c.real(m), &c.real(m + 1), &c.real(1e-26), &c)
                    .unwrap()
                    .value;
            }
            assert!(close(&r[n as usize].main_value, &acc, 1e-20), "n={n}");
        }
    }

    #[test]
    fn splitting_the_cutoff_is_exact() {
        let c = ctx();
        let s = sieve_dk(3, 4000).unwrap();
        let half = sieve_dk(3, 2000).unwrap();
        let prec = c.working();
        let main = MainTerm::new(3, &c).unwrap();
        let full = fourier_main(2, &s, &main, prec);
        let part = fourier_main(2, &half, &main, prec);
        for n in 0..=2u32 {
            let l = poly::laguerre_coefficients(n, prec);
            let sder = derivative_sum(&l);
            let r = poly::integral(&poly::mul(&main.coeffs, &l));
            let f = |m: u64| {
                let u = Float::with_val(prec, Float::with_val(prec, m).ln_ref());
                -poly::eval(&sder, &u) / m
            };
            let mut extra = Float::with_val(prec, 0);
            for m in 2000..4000u64 {
                extra += Float::with_val(prec, s.prefix[m as usize]) * (f(m + 1) - f(m));
            }
            let ua = Float::with_val(prec, Float::with_val(prec, 2000).ln_ref());
            let ub = Float::with_val(prec, Float::with_val(prec, 4000).ln_ref());
            extra -= poly::eval(&r, &ub) - poly::eval(&r, &ua);
            let joined = Float::with_val(prec, &part[n as usize] + &extra);
            assert!(close(&full[n as usize], &joined, 1e-18), "n={n}");
        }
    }

    #[test]
    fn k1_norm_is_cutoff_independent() {
        let c = ctx();
        let mut totals = Vec::new();
        for x in [1u64, 5, 100, 3000] {
            let r = delta_norm_trunc(1, &sieve_dk(1, x).unwrap(), &c).unwrap();
            assert!(r.tail_bound < 1e-20);
            totals.push(r.total());
        }
        for t in &totals[1..] {
            assert!(close(t, &totals[0], 1e-20));
        }
        // ∫_1^2 (x-1)²/x² dx = 3/2 - 2 ln 2
        let r = delta_norm_trunc(1, &sieve_dk(1, 2).unwrap(), &c).unwrap();
        let want = Float::with_val(c.working(), 1.5) - Float::with_val(c.working(), rug::float::Constant::Log2) * 2u32;
        assert!(close(&r.main_value, &want, 1e-25));
    }

    #[test]
    fn norm_is_monotone_in_cutoff() {
        let c = ctx();
        let s = sieve_dk(2, 3000).unwrap();
        let main = MainTerm::new(2, &c).unwrap();
        let mut prev = Float::with_val(c.working(), 0);
        for x in [2u64, 3, 10, 50, 400, 3000] {
            let v = norm_main(&s.truncated(x), &main, c.working());
            assert!(v >= prev, "X={x}");
            prev = v;
        }
        let r = delta_norm_trunc(2, &s, &c).unwrap();
        assert!(!r.tail_is_rigorous && r.tail_bound.is_infinite());
    }

    #[test]
    fn heuristic_tail_is_flagged() {
        let c = ctx();
        let s = sieve_dk(2, 20_000).unwrap();
        let r = fourier_coeff_numeric(1, 2, &s, &c).unwrap();
        assert!(!r.tail_is_rigorous);
        assert!(r.tail_bound > 0 && r.tail_bound.is_finite());
    }

    #[test]
    fn exp_moment_matches_closed_form() {
        // ∫_U^∞ u e^{-u} du = (U + 1) e^{-U}
        let c = ctx();
        let p = [c.real(0), c.real(1)];
        let u = c.real(2.5);
        let got = exp_moment(&p, &c.real(1), &u);
        let want = Float::with_val(c.working(), 3.5) * Float::with_val(c.working(), (-u.clone()).exp_ref());
        assert!(close(&got, &want, 1e-25));
    }
}
