use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::float::Constant;
use rug::Float;

use super::complex::Complex;
use super::precision::{err_abs, err_from_f64, Approx, PrecisionCtx};
use crate::error::{Error, Result};

/// Nodes and weights of an interpolatory rule.
#[derive(Debug)]
pub struct Rule {
    pub nodes: Vec<Float>,
    pub weights: Vec<Float>,
}

type RuleCache = Mutex<HashMap<(u32, u32), Arc<Rule>>>;

fn legendre_cache() -> &'static RuleCache {
    static C: OnceLock<RuleCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

fn laguerre_cache() -> &'static RuleCache {
    static C: OnceLock<RuleCache> = OnceLock::new();
    C.get_or_init(Default::default)
}

/// P_n(x) and P_n'(x).
fn legendre_with_derivative(n: u32, x: &Float, prec: u32) -> (Float, Float) {
    let mut p0 = Float::with_val(prec, 1);
    let mut p1 = Float::with_val(prec, x);
    for m in 1..n {
        let mut p2 = Float::with_val(prec, x * &p1);
        p2 *= 2 * m + 1;
        p2 -= Float::with_val(prec, &p0 * m);
        p2 /= m + 1;
        p0 = p1;
        p1 = p2;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let mut d = Float::with_val(prec, x * &p1);
    d = Float::with_val(prec, &p0 - d) * n;
    let one_minus = Float::with_val(prec, 1 - Float::with_val(prec, x.square_ref()));
    d /= one_minus;
    (p1, d)
}

/// Gauss–Legendre rule on [-1, 1] with `n` points at `prec` bits, cached.
pub fn gauss_legendre(n: u32, prec: u32) -> Arc<Rule> {
    let key = (n, prec);
    if let Some(r) = legendre_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let wp = prec + 32;
    let mut nodes = vec![Float::new(prec); n as usize];
    let mut weights = vec![Float::new(prec); n as usize];
    let tol_exp = -(wp as i32) + 8;
    for i in 0..(n as usize).div_ceil(2) {
        let guess = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut x = Float::with_val(wp, guess);
        for _ in 0..200 {
            let (p, d) = legendre_with_derivative(n, &x, wp);
            let dx = Float::with_val(wp, &p / &d);
            x -= &dx;
            if dx.is_zero() || dx.get_exp().unwrap() < tol_exp {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, &x, wp);
        let one_minus = Float::with_val(wp, 1 - Float::with_val(wp, x.square_ref()));
        let w = Float::with_val(wp, 2) / (one_minus * d.square());
        let j = n as usize - 1 - i;
        nodes[i] = Float::with_val(prec, &x);
        nodes[j] = Float::with_val(prec, -&x);
        weights[i] = Float::with_val(prec, &w);
        weights[j] = Float::with_val(prec, &w);
    }
    if n % 2 == 1 {
        nodes[n as usize / 2] = Float::new(prec);
    }
    let rule = Arc::new(Rule { nodes, weights });
    legendre_cache().lock().unwrap().insert(key, rule.clone());
    rule
}

/// Gauss–Laguerre rule for ∫_0^inf e^{-u} f(u) du, cached.
pub fn gauss_laguerre(n: u32, prec: u32) -> Arc<Rule> {
    let key = (n, prec);
    if let Some(r) = laguerre_cache().lock().unwrap().get(&key) {
        return r.clone();
    }
    let wp = prec + 32;
    let lag = |x: &Float| -> (Float, Float, Float) {
        // L_n(x), L_n'(x), L_{n+1}(x)
        let mut l0 = Float::with_val(wp, 1);
        let mut l1 = Float::with_val(wp, 1 - x);
        for m in 1..=n {
            let mut l2 = Float::with_val(wp, (2 * m + 1) - x) * &l1;
            l2 -= Float::with_val(wp, &l0 * m);
            l2 /= m + 1;
            l0 = l1;
            l1 = l2;
        }
        // now l0 = L_n, l1 = L_{n+1}; recompute L_{n-1} via the recurrence backwards
        // (n+1) L_{n+1} = (2n+1-x) L_n - n L_{n-1}
        let mut lm1 = Float::with_val(wp, (2 * n + 1) - x) * &l0;
        lm1 -= Float::with_val(wp, &l1 * (n + 1));
        lm1 /= n;
        let d = Float::with_val(wp, &l0 - &lm1) * n / x;
        (l0, d, l1)
    };
    // initial guesses from the standard asymptotic spacing, refined in f64
    let mut guesses: Vec<f64> = Vec::with_capacity(n as usize);
    let nf = n as f64;
    for i in 0..n as usize {
        let z = match i {
            0 => 3.0 / (1.0 + 2.4 * nf),
            1 => guesses[0] + 15.0 / (1.0 + 2.5 * nf),
            _ => {
                let ai = (i - 1) as f64;
                guesses[i - 1] + (1.0 + 2.55 * ai) / (1.9 * ai) * (guesses[i - 1] - guesses[i - 2])
            }
        };
        let mut x = Float::with_val(64, z);
        for _ in 0..50 {
            let (l, d, _) = lag(&x);
            x -= Float::with_val(wp, &l / &d);
        }
        guesses.push(x.to_f64());
    }
    let tol_exp = -(wp as i32) + 8;
    let mut nodes = Vec::with_capacity(n as usize);
    let mut weights = Vec::with_capacity(n as usize);
    for g in guesses {
        let mut x = Float::with_val(wp, g);
        for _ in 0..200 {
            let (l, d, _) = lag(&x);
            let dx = Float::with_val(wp, &l / &d);
            x -= &dx;
            if dx.is_zero() || dx.get_exp().unwrap() < x.get_exp().unwrap_or(0) + tol_exp {
                break;
            }
        }
        let (_, _, l1) = lag(&x);
        let denom = Float::with_val(wp, l1.square()) * ((n + 1) * (n + 1));
        let w = Float::with_val(wp, &x / denom);
        nodes.push(Float::with_val(prec, x));
        weights.push(Float::with_val(prec, w));
    }
    let rule = Arc::new(Rule { nodes, weights });
    laguerre_cache().lock().unwrap().insert(key, rule.clone());
    rule
}

/// Fixed Gauss–Legendre rule mapped to [a, b].
pub fn integrate_fixed<F>(f: &F, a: &Float, b: &Float, rule: &Rule, prec: u32) -> Result<Float>
where
    F: Fn(&Float) -> Result<Float> + ?Sized,
{
    let half = Float::with_val(prec, b - a) / 2;
    let mid = Float::with_val(prec, a + b) / 2;
    let mut sum = Float::with_val(prec, 0);
    for (x, w) in rule.nodes.iter().zip(&rule.weights) {
        let mut t = Float::with_val(prec, x * &half);
        t += &mid;
        let fx = f(&t)?;
        if !fx.is_finite() {
            return Err(Error::NonFinite("quadrature integrand"));
        }
        sum += fx * w;
    }
    Ok(sum * half)
}

/// Order of the Gauss–Legendre panel used by the adaptive integrator.
fn panel_order(ctx: &PrecisionCtx) -> u32 {
    (ctx.bits() / 8).clamp(12, 48)
}

/// Subdivision budget for adaptive quadrature.
pub const MAX_PANELS: usize = 20_000;

/// Adaptive Gauss–Legendre quadrature on [a, b]: each panel is compared
/// with its two halves and split until the difference meets its share of
/// `tol`. The returned error is the sum of accepted panel estimates.
pub fn integrate_adaptive<F>(f: &F, a: &Float, b: &Float, tol: &Float, ctx: &PrecisionCtx) -> Result<Approx<Float>>
where
    F: Fn(&Float) -> Result<Float> + ?Sized,
{
    if *a >= *b {
        return Err(Error::domain("integrate_adaptive needs a < b"));
    }
    let prec = ctx.working();
    let rule = gauss_legendre(panel_order(ctx), prec);
    let mut total = Float::with_val(prec, 0);
    let mut err = err_from_f64(0.0);
    let whole = integrate_fixed(f, a, b, &rule, prec)?;
    let mut stack = vec![(a.clone(), b.clone(), whole, Float::with_val(53, tol))];
    let mut panels = 0usize;
    while let Some((lo, hi, est, ltol)) = stack.pop() {
        panels += 1;
        if panels > MAX_PANELS {
            return Err(Error::NoConvergence(format!(
                "adaptive quadrature exhausted {MAX_PANELS} panels"
            )));
        }
        let mid = Float::with_val(prec, &lo + &hi) / 2;
        let left = integrate_fixed(f, &lo, &mid, &rule, prec)?;
        let right = integrate_fixed(f, &mid, &hi, &rule, prec)?;
        let refined = Float::with_val(prec, &left + &right);
        let diff = err_abs(&Float::with_val(prec, &refined - &est));
        if diff <= ltol || mid == lo || mid == hi {
            total += &refined;
            err += diff;
        } else {
            let half_tol: Float = ltol / 2u32;
            stack.push((mid.clone(), hi, right, half_tol.clone()));
            stack.push((lo, mid, left, half_tol));
        }
    }
    Ok(Approx::new(total, err))
}

/// Variable change used to map (a, inf) onto a finite range.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VariableChange {
    /// x = e^u, dx = e^u du (default for the weighted measures on (1, inf)).
    Log,
    /// x = a / t, dx = a / t^2 dt, t in (0, 1].
    Reciprocal,
}

/// Where the mapped integral is truncated and a bound on what is dropped.
#[derive(Clone, Debug)]
pub struct TailSpec {
    pub cutoff: Float,
    pub bound: Float,
}

/// ∫_a^inf f(x) dx: the variable change is applied, the mapped integral is
/// taken over [a, cutoff], and the caller's tail bound is added to the
/// error estimate.
pub fn integrate_to_infinity<F>(
    f: &F,
    a: &Float,
    change: VariableChange,
    tail: &TailSpec,
    tol: &Float,
    ctx: &PrecisionCtx,
) -> Result<Approx<Float>>
where
    F: Fn(&Float) -> Result<Float> + ?Sized,
{
    let prec = ctx.working();
    if *a <= 0 {
        return Err(Error::domain("semi-infinite quadrature needs a > 0"));
    }
    if tail.cutoff <= *a {
        return Err(Error::domain("tail cutoff must exceed the lower limit"));
    }
    let mut res = match change {
        VariableChange::Log => {
            let g = |u: &Float| -> Result<Float> {
                let x = Float::with_val(prec, u.exp_ref());
                Ok(f(&x)? * x)
            };
            let lo = Float::with_val(prec, a.ln_ref());
            let hi = Float::with_val(prec, tail.cutoff.ln_ref());
            integrate_adaptive(&g, &lo, &hi, tol, ctx)?
        }
        VariableChange::Reciprocal => {
            let g = |t: &Float| -> Result<Float> {
                let x = Float::with_val(prec, a / t);
                let jac = Float::with_val(prec, &x / t);
                Ok(f(&x)? * jac)
            };
            let lo = Float::with_val(prec, a / &tail.cutoff);
            let hi = Float::with_val(prec, 1);
            integrate_adaptive(&g, &lo, &hi, tol, ctx)?
        }
    };
    res.error += err_abs(&tail.bound);
    Ok(res)
}

/// Mean of g over M equally spaced angles: (1/M) Σ g(2πm/M).
pub fn integrate_circle<G>(g: &G, m: u32, ctx: &PrecisionCtx) -> Result<Complex>
where
    G: Fn(&Float) -> Result<Complex> + ?Sized,
{
    if m < 4 {
        return Err(Error::domain("integrate_circle needs at least 4 nodes"));
    }
    let prec = ctx.working();
    let step = Float::with_val(prec, Constant::Pi) * 2u32 / m;
    let mut acc = Complex::zero(prec);
    for j in 0..m {
        let theta = Float::with_val(prec, &step * j);
        let v = g(&theta)?;
        v.check_finite("integrate_circle")?;
        acc += &v;
    }
    let inv = Float::with_val(prec, m).recip();
    acc *= &inv;
    Ok(acc)
}
