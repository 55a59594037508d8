//! Evaluation of ζ^k(s) and F_k(s) by their expansions in z = (s-1)/s,
//! Hardy-norm identities for h_k(z) = z^k ζ^k(1/(1+z)), and smoothed
//! partial sums on the critical line.

use rug::Float;

use crate::coefficients::{CoefficientTable, TableStore};
use crate::error::{Error, Result};
use crate::mp::{integrate_circle, Complex, PrecisionCtx};
use crate::zeta::zeta_pow_ref;

/// Width of the window of trailing coefficients used by tail estimates.
pub const TAIL_WINDOW: usize = 20;

/// A partial sum with an estimate of the omitted tail.
#[derive(Clone, Debug)]
pub struct SeriesResult {
    pub value: Complex,
    /// Index of the last coefficient included.
    pub terms: usize,
    pub tail_bound: Float,
    /// False whenever the bound rests on the observed size of the last
    /// coefficients rather than a proven growth bound.
    pub tail_is_rigorous: bool,
}

/// z = (s-1)/s.
pub fn z_of(s: &Complex) -> Result<Complex> {
    let mut num = s.clone();
    num.re -= 1u32;
    num.div(s)
}

fn check_half_plane(s: &Complex) -> Result<()> {
    s.check_finite("series argument")?;
    if s.re <= 0.5 {
        return Err(Error::domain(format!(
            "the expansion in (s-1)/s converges for Re(s) > 1/2, got {}",
            s.re.to_f64()
        )));
    }
    Ok(())
}

/// max_{n ∈ (N-w, N]} |ℓ_n| · |z|^{N+1} / (1 - |z|), w = TAIL_WINDOW.
fn windowed_tail(table: &CoefficientTable, last: usize, abs_z: f64) -> f64 {
    let lo = last.saturating_sub(TAIL_WINDOW - 1);
    let window = (lo..=last)
        .map(|n| table.ell_at(n as i64).to_f64().abs())
        .fold(0.0, f64::max);
    if abs_z >= 1.0 {
        return f64::INFINITY;
    }
    window * abs_z.powf(last as f64 + 1.0) / (1.0 - abs_z)
}

/// Σ_{n=from}^{to} (-1)^n ℓ_{n,k} z^n.
fn partial_sum(table: &CoefficientTable, z: &Complex, from: i64, to: i64, prec: u32) -> Result<Complex> {
    let mut acc = Complex::zero(prec);
    if to < from {
        return Ok(acc);
    }
    let mz = -z.clone();
    // (-z)^from
    let mut pow = if from < 0 { mz.recip()?.pow_u((-from) as u32) } else { mz.pow_u(from as u32) };
    for n in from..=to {
        let mut term = pow.clone();
        term *= table.ell_at(n);
        acc += &term;
        pow *= &mz;
    }
    Ok(acc)
}

/// ζ^k(s) = Σ_{n ≥ -k} (-1)^n ℓ_{n,k} z^n through n = `terms`, using the
/// coefficient table from the shared store.
pub fn zeta_pow_series(s: &Complex, k: u32, terms: usize, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    check_pole(s)?;
    check_half_plane(s)?;
    let table = TableStore::global().get(k, terms, k as usize, ctx)?;
    zeta_pow_series_with(&table, s, terms, ctx)
}

fn check_pole(s: &Complex) -> Result<()> {
    if s.re == 1 && s.im.is_zero() {
        return Err(Error::Pole);
    }
    Ok(())
}

/// As [`zeta_pow_series`] with an explicit table (terms ≤ table.nmax).
pub fn zeta_pow_series_with(
    table: &CoefficientTable,
    s: &Complex,
    terms: usize,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    check_pole(s)?;
    check_half_plane(s)?;
    check_terms(table, terms)?;
    let prec = ctx.working();
    let z = z_of(&s.clone().with_prec(prec))?;
    let value = partial_sum(table, &z, -(table.k as i64), terms as i64, prec)?;
    let tail = windowed_tail(table, terms, z.abs().to_f64());
    Ok(SeriesResult {
        value,
        terms,
        tail_bound: Float::with_val(53, tail),
        tail_is_rigorous: false,
    })
}

fn check_terms(table: &CoefficientTable, terms: usize) -> Result<()> {
    if terms > table.nmax {
        return Err(Error::Range {
            value: terms as f64,
            limit: table.nmax as u64,
        });
    }
    Ok(())
}

/// Sum until the windowed tail estimate drops below rel_tol · |partial sum|.
/// Fails with NoConvergence if the table is too short.
pub fn zeta_pow_series_auto(
    table: &CoefficientTable,
    s: &Complex,
    rel_tol: f64,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    check_pole(s)?;
    check_half_plane(s)?;
    let prec = ctx.working();
    let z = z_of(&s.clone().with_prec(prec))?;
    let abs_z = z.abs().to_f64();
    let k = table.k as i64;
    let mut acc = partial_sum(table, &z, -k, 0, prec)?;
    let mz = -z.clone();
    let mut pow = mz.clone();
    for n in 1..=table.nmax {
        let mut term = pow.clone();
        term *= table.ell_at(n as i64);
        acc += &term;
        pow *= &mz;
        if n >= TAIL_WINDOW {
            let tail = windowed_tail(table, n, abs_z);
            if tail <= rel_tol * acc.abs().to_f64() {
                return Ok(SeriesResult {
                    value: acc,
                    terms: n,
                    tail_bound: Float::with_val(53, tail),
                    tail_is_rigorous: false,
                });
            }
        }
    }
    Err(Error::NoConvergence(format!(
        "tail above {rel_tol:e} relative after {} terms at |z| = {abs_z}",
        table.nmax
    )))
}

/// Terms needed for a tail of rel_tol · magnitude when the trailing
/// coefficients have size about `ell_scale`.
pub fn estimate_terms(s: &Complex, rel_tol: f64, magnitude: f64, ell_scale: f64) -> Result<usize> {
    check_half_plane(s)?;
    let abs_z = z_of(s)?.abs().to_f64();
    if abs_z == 0.0 {
        return Ok(TAIL_WINDOW);
    }
    let target = rel_tol * magnitude * (1.0 - abs_z) / ell_scale;
    let n = (target.ln() / abs_z.ln()).ceil().max(TAIL_WINDOW as f64);
    Ok(n as usize)
}

/// F_k(s) = Σ_{n ≥ 0} (-1)^n ℓ_{n,k} z^n through n = `terms`; regular at s = 1.
pub fn f_k_series(s: &Complex, k: u32, terms: usize, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    check_half_plane(s)?;
    let table = TableStore::global().get(k, terms, k as usize, ctx)?;
    f_k_series_with(&table, s, terms, ctx)
}

pub fn f_k_series_with(table: &CoefficientTable, s: &Complex, terms: usize, ctx: &PrecisionCtx) -> Result<SeriesResult> {
    check_half_plane(s)?;
    check_terms(table, terms)?;
    let prec = ctx.working();
    let z = z_of(&s.clone().with_prec(prec))?;
    let value = partial_sum(table, &z, 0, terms as i64, prec)?;
    let tail = windowed_tail(table, terms, z.abs().to_f64());
    Ok(SeriesResult {
        value,
        terms,
        tail_bound: Float::with_val(53, tail),
        tail_is_rigorous: false,
    })
}

/// Both sides of ‖h_k‖² on the circle of radius r.
#[derive(Clone, Debug)]
pub struct HardyNorm {
    /// (1/2π) ∫ |h_k(r e^{iθ})|² dθ with ζ from the reference evaluator.
    pub quadrature: Float,
    /// Σ_{n ≥ 0} ℓ²_{n-k,k} r^{2n}.
    pub coefficients: Float,
    /// Coefficients used in the sum (n ≤ terms).
    pub terms: usize,
}

/// Trapezoid nodes for which the aliasing error r^M is below 2^-(bits+16).
pub fn hardy_default_nodes(r: f64, ctx: &PrecisionCtx) -> u32 {
    if r <= 0.0 {
        return 4;
    }
    let m = (ctx.bits() as f64 + 16.0) * std::f64::consts::LN_2 / -r.ln();
    (m.ceil() as u32 + 16).max(16)
}

/// Number of coefficients for which r^{2n} falls below 2^-(bits+16).
pub fn hardy_default_terms(k: u32, r: f64, ctx: &PrecisionCtx) -> usize {
    if r <= 0.0 {
        return 0;
    }
    let n = (ctx.bits() as f64 + 16.0) / (-2.0 * r.log2());
    n.ceil() as usize + k as usize
}

fn check_radius(r: f64) -> Result<()> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::domain(format!("radius must lie in [0, 1), got {r}")));
    }
    Ok(())
}

/// h_k(z) = z^k ζ^k(1/(1+z)) through the reference evaluator.
pub fn h_k(z: &Complex, k: u32, ctx: &PrecisionCtx) -> Result<Complex> {
    if z.is_zero() {
        // z^k ζ^k(s) → (-1)^k as s → 1
        return Ok(Complex::with_val(ctx.working(), if k % 2 == 0 { 1 } else { -1 }, 0));
    }
    let mut onep = z.clone();
    onep.re += 1u32;
    let s = onep.recip()?;
    let zeta = zeta_pow_ref(&s, k, ctx)?.value;
    Ok(&z.pow_u(k) * &zeta)
}

pub fn hardy_norm_sq(k: u32, r: f64, nodes: u32, ctx: &PrecisionCtx) -> Result<HardyNorm> {
    check_radius(r)?;
    let terms = hardy_default_terms(k, r, ctx);
    let table = TableStore::global().get(k, terms, k as usize, ctx)?;
    let coefficients = hardy_coefficient_sum(&table, r, terms, ctx)?;
    let quadrature = hardy_quadrature(k, r, nodes, ctx)?;
    Ok(HardyNorm {
        quadrature,
        coefficients,
        terms,
    })
}

/// (1/2π) ∫ |h_k(r e^{iθ})|² dθ by the trapezoid rule on `nodes` points.
pub fn hardy_quadrature(k: u32, r: f64, nodes: u32, ctx: &PrecisionCtx) -> Result<Float> {
    check_radius(r)?;
    if r == 0.0 {
        return Ok(Float::with_val(ctx.working(), 1));
    }
    let prec = ctx.working();
    let rr = Float::with_val(prec, r);
    let g = |theta: &Float| -> Result<Complex> {
        let (sn, cs) = theta.clone().sin_cos(Float::new(prec));
        let z = Complex::new(cs * &rr, sn * &rr);
        let h = h_k(&z, k, ctx)?;
        Ok(Complex::from_real(h.norm_sqr()))
    };
    Ok(integrate_circle(&g, nodes, ctx)?.re)
}

/// Σ_{n=0}^{terms} ℓ²_{n-k,k} r^{2n}.
pub fn hardy_coefficient_sum(table: &CoefficientTable, r: f64, terms: usize, ctx: &PrecisionCtx) -> Result<Float> {
    check_radius(r)?;
    let k = table.k as usize;
    if terms > table.nmax + k {
        return Err(Error::Range {
            value: terms as f64,
            limit: (table.nmax + k) as u64,
        });
    }
    let prec = ctx.working();
    let r2 = Float::with_val(prec, r * r);
    let mut pow = Float::with_val(prec, 1);
    let mut acc = Float::with_val(prec, 0);
    for n in 0..=terms {
        let l = table.ell_at(n as i64 - k as i64);
        acc += Float::with_val(prec, l.square_ref()) * &pow;
        pow *= &r2;
        if pow.is_zero() {
            break;
        }
    }
    Ok(acc)
}

/// ω = (1/2 - it)/(1/2 + it), the critical-line value of -z.
pub fn omega(t: &Float) -> Result<Complex> {
    let p = t.prec();
    let num = Complex::new(Float::with_val(p, 0.5), Float::with_val(p, -t));
    let den = Complex::new(Float::with_val(p, 0.5), t.clone());
    num.div(&den)
}

/// Σ_{n=-k}^{N} ℓ_{n,k} ρ^{max(n,0)} ω^n at s = 1/2 + it. A diagnostic: the
/// unsmoothed series converges conditionally at best.
pub fn critical_line_partial(
    t: f64,
    k: u32,
    terms: usize,
    rho: f64,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    if !(0.0..=1.0).contains(&rho) {
        return Err(Error::domain(format!("smoothing ρ must lie in [0, 1], got {rho}")));
    }
    let table = TableStore::global().get(k, terms, k as usize, ctx)?;
    critical_line_partial_with(&table, t, terms, rho, ctx)
}

pub fn critical_line_partial_with(
    table: &CoefficientTable,
    t: f64,
    terms: usize,
    rho: f64,
    ctx: &PrecisionCtx,
) -> Result<SeriesResult> {
    check_terms(table, terms)?;
    let prec = ctx.working();
    let w = omega(&Float::with_val(prec, t))?;
    let k = table.k as i64;
    let mut acc = Complex::zero(prec);
    // principal part, unsmoothed
    let winv = w.recip()?;
    let mut pow = winv.clone();
    for n in (-k..0).rev() {
        let mut term = pow.clone();
        term *= table.ell_at(n);
        acc += &term;
        pow *= &winv;
    }
    let mut wr = w.clone();
    wr *= &Float::with_val(prec, rho);
    let mut pow = Complex::one(prec);
    for n in 0..=terms as i64 {
        let mut term = pow.clone();
        term *= table.ell_at(n);
        acc += &term;
        pow *= &wr;
    }
    let tail = if rho < 1.0 { windowed_tail(table, terms, rho) } else { f64::INFINITY };
    Ok(SeriesResult {
        value: acc,
        terms,
        tail_bound: Float::with_val(53, tail),
        tail_is_rigorous: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::zeta::zeta_em;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(bits: u32) -> PrecisionCtx {
        PrecisionCtx::new(bits).unwrap()
    }

    fn rel(a: &Complex, b: &Complex) -> f64 {
        (a - b).abs().to_f64() / b.abs().to_f64()
    }

    #[test]
    fn zeta_two() {
        let c = ctx(128);
        let s = Complex::with_val(c.working(), 2, 0);
        let r = zeta_pow_series(&s, 1, 200, &c).unwrap();
        let pi2 = Float::with_val(c.working(), rug::float::Constant::Pi).square() / 6u32;
        let d = Float::with_val(c.working(), &r.value.re - &pi2).abs().to_f64();
        assert!(d <= r.tail_bound.to_f64().max(1e-35), "d={d} tail={}", r.tail_bound);
        assert!(d < 1e-30);
        assert!(!r.tail_is_rigorous);
    }

    #[test]
    fn domain_and_pole() {
        let c = ctx(64);
        let one = Complex::with_val(c.working(), 1, 0);
        assert!(matches!(zeta_pow_series(&one, 2, 10, &c), Err(Error::Pole)));
        let out = Complex::with_val(c.working(), 0.4, 1);
        assert!(matches!(zeta_pow_series(&out, 1, 10, &c), Err(Error::Domain(_))));
        assert!(matches!(f_k_series(&out, 1, 10, &c), Err(Error::Domain(_))));
    }

    #[test]
    fn f_k_examples() {
        let c = ctx(128);
        let one = Complex::with_val(c.working(), 1, 0);
        for k in 1..=3 {
            let f = f_k_series(&one, k, 10, &c).unwrap();
            let table = TableStore::global().get(k, 10, k as usize, &c).unwrap();
            assert_eq!(f.value.re, *table.ell_at(0));
        }
        // F_1(s) = ζ(s) - s/(s-1) at s = 2 is ζ(2) - 2
        let two = Complex::with_val(c.working(), 2, 0);
        let f = f_k_series(&two, 1, 200, &c).unwrap();
        let want = Float::with_val(c.working(), rug::float::Constant::Pi).square() / 6u32 - 2u32;
        assert!(Float::with_val(c.working(), &f.value.re - &want).abs() < 1e-30);
    }

    #[test]
    fn principal_part_splits_off() {
        let c = ctx(96);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let k = 2;
        let table = TableStore::global().get(k, 400, k as usize, &c).unwrap();
        for _ in 0..10 {
            let s = Complex::with_val(c.working(), rng.gen_range(0.8..3.0), rng.gen_range(-2.0..2.0));
            let full = zeta_pow_series_with(&table, &s, 400, &c).unwrap();
            let f = f_k_series_with(&table, &s, 400, &c).unwrap();
            let z = z_of(&s).unwrap();
            let principal = partial_sum(&table, &z, -2, -1, c.working()).unwrap();
            let d = (&(&full.value - &principal) - &f.value).abs().to_f64();
            assert!(d < 1e-25);
        }
    }

    #[test]
    fn real_axis_values_are_real() {
        let c = ctx(96);
        let s = Complex::with_val(c.working(), 0.8, 0);
        let f = f_k_series(&s, 2, 300, &c).unwrap();
        assert_eq!(f.value.im, 0);
    }

    #[test]
    fn series_matches_reference_off_axis() {
        let c = ctx(64);
        for k in 1..=3u32 {
            let table = TableStore::global().get(k, 3000, k as usize, &c).unwrap();
            for (sigma, t) in [(0.75, 1.0), (1.5, 0.5), (3.0, 10.0), (0.6, 0.5)] {
                let s = Complex::with_val(c.working(), sigma, t);
                let r = zeta_pow_series_auto(&table, &s, 1e-8, &c).unwrap();
                let want = zeta_pow_ref(&s, k, &c).unwrap().value;
                let err = (&r.value - &want).abs().to_f64();
                assert!(err <= 3.0 * r.tail_bound.to_f64() + 1e-20, "k={k} s={sigma}+{t}i");
                assert!(rel(&r.value, &want) < 1e-8);
            }
        }
    }

    #[test]
    fn hardy_identity() {
        let c = ctx(64);
        let zero = hardy_norm_sq(1, 0.0, 4, &c).unwrap();
        assert_eq!(zero.quadrature, 1);
        assert_eq!(zero.coefficients, 1);
        let h = hardy_norm_sq(1, 0.5, hardy_default_nodes(0.5, &c), &c).unwrap();
        let d = Float::with_val(c.working(), &h.quadrature - &h.coefficients).abs();
        assert!(d < 1e-10, "{d}");
        assert!(hardy_norm_sq(1, 1.0, 16, &c).is_err());
    }

    #[test]
    fn hardy_coefficients_grow_with_radius() {
        let c = ctx(64);
        let table = TableStore::global().get(1, 2000, 1, &c).unwrap();
        let mut last = Float::with_val(c.working(), 0);
        for r in [0.0, 0.2, 0.5, 0.8, 0.95, 0.99] {
            let v = hardy_coefficient_sum(&table, r, 2000, &c).unwrap();
            assert!(v >= last);
            last = v;
        }
    }

    #[test]
    fn critical_line() {
        let c = ctx(64);
        let table = TableStore::global().get(1, 5000, 1, &c).unwrap();
        let half = zeta_em(&Complex::with_val(c.working(), 0.5, 0), &c).unwrap().value;
        let r = critical_line_partial_with(&table, 0.0, 5000, 0.99, &c).unwrap();
        assert!((&r.value - &half).abs().to_f64() < 0.05);
        // ρ = 0 keeps only n ≤ 0
        let t = 3.7;
        let r0 = critical_line_partial_with(&table, t, 5000, 0.0, &c).unwrap();
        let w = omega(&Float::with_val(c.working(), t)).unwrap();
        let mut want = Complex::from_real(table.ell_at(0).clone());
        want += &w.recip().unwrap().scale(table.ell_at(-1));
        assert!((&r0.value - &want).abs().to_f64() < 1e-25);
        for t in [0.0, 1.0, -7.5, 1e3] {
            let w = omega(&Float::with_val(c.working(), t)).unwrap();
            assert!((w.abs().to_f64() - 1.0).abs() < 1e-25);
        }
    }
}
