//! Taylor coefficients of (s-1)ζ(s) at s = 1.
//!
//! Two independent engines: Cauchy integrals of the reference evaluator on
//! a circle around s = 1, and Euler–Maclaurin summation carried out in
//! truncated power-series arithmetic at s = 1 + x. The first is the
//! reference method for moderate orders; the second scales to the
//! thousands of coefficients needed by long ℓ tables.

use rug::float::Constant;
use rug::{Float, Integer};

use crate::error::{Error, Result};
use crate::mp::combinatorics::bernoulli_over_factorial;
use crate::mp::{Complex, PrecisionCtx};
use crate::zeta::{log2_em_remainder, zeta_em};

/// Radius of the contour |s - 1| = r used by [`taylor_contour`].
pub const CONTOUR_RADIUS: f64 = 0.75;

const MIN_NODES: u32 = 32;
const MAX_NODES: u32 = 1 << 14;

/// t_j = λ_j / j! for j = 0..=jmax by the Cauchy integral
/// t_j = r^{-j} · mean_θ (s-1)ζ(s) e^{-ijθ}, s = 1 + r e^{iθ},
/// with the node count doubled until two consecutive rules agree to the
/// working precision. Results carry absolute error about 2^{-working}.
pub fn taylor_contour(jmax: usize, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    let amplification = (jmax as f64 * (1.0 / CONTOUR_RADIUS).log2()).ceil() as u32;
    let inner = ctx.with_extra_guard(amplification + 16);
    let prec = inner.working();
    let target_exp = -(ctx.working() as i32);
    let r = Float::with_val(prec, CONTOUR_RADIUS);
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;

    // f at θ_m = 2π m / M for m = 0..=M/2 (conjugate symmetry gives the rest)
    let eval = |m: u32, nodes: u32| -> Result<Complex> {
        let theta = Float::with_val(prec, &two_pi * m) / nodes;
        let (sn, cs) = theta.sin_cos(Float::new(prec));
        let x = Complex::new(cs * &r, sn * &r);
        let mut s = x.clone();
        s.re += 1u32;
        let z = zeta_em(&s, &inner)?.value;
        Ok(&x * &z)
    };

    let mut nodes = MIN_NODES.max((2 * jmax as u32 + 8).next_power_of_two());
    let mut values: Vec<Complex> = (0..=nodes / 2).map(|m| eval(m, nodes)).collect::<Result<_>>()?;
    let mut prev = coefficients_from_samples(&values, nodes, jmax, &r, prec);
    loop {
        if nodes >= MAX_NODES {
            return Err(Error::NoConvergence(format!(
                "contour coefficients did not settle with {nodes} nodes"
            )));
        }
        let doubled = 2 * nodes;
        let mut next_values = Vec::with_capacity(doubled as usize / 2 + 1);
        for m in 0..=doubled / 2 {
            if m % 2 == 0 {
                next_values.push(values[m as usize / 2].clone());
            } else {
                next_values.push(eval(m, doubled)?);
            }
        }
        let next = coefficients_from_samples(&next_values, doubled, jmax, &r, prec);
        let settled = prev.iter().zip(&next).all(|(a, b)| {
            let d = Float::with_val(prec, a - b);
            d.is_zero() || d.get_exp().unwrap() < target_exp
        });
        values = next_values;
        nodes = doubled;
        prev = next;
        if settled {
            break;
        }
    }
    Ok(prev.into_iter().map(|v| Float::with_val(ctx.working(), v)).collect())
}

/// Real parts of the discrete Fourier coefficients, scaled by r^{-j}, from
/// samples on the upper half circle.
fn coefficients_from_samples(half: &[Complex], nodes: u32, jmax: usize, r: &Float, prec: u32) -> Vec<Float> {
    let two_pi = Float::with_val(prec, Constant::Pi) * 2u32;
    let step = Float::with_val(prec, &two_pi / nodes);
    let mut out = Vec::with_capacity(jmax + 1);
    let mut rinv = Float::with_val(prec, 1);
    let r_recip = Float::with_val(prec, r.recip_ref());
    for j in 0..=jmax {
        // Σ_m Re(f_m e^{-ijθ_m}) over the full circle = f_0 + f_{M/2}(-1)^j
        // + 2 Σ_{0<m<M/2} (Re f_m cos jθ_m + Im f_m sin jθ_m)
        let (sj, cj) = Float::with_val(prec, &step * j as u32).sin_cos(Float::new(prec));
        let mut c = Float::with_val(prec, 1);
        let mut s = Float::with_val(prec, 0);
        let mut acc = Float::with_val(prec, &half[0].re);
        let last = (nodes / 2) as usize;
        for f in half.iter().take(last).skip(1) {
            // (c, s) = (cos jθ_m, sin jθ_m) by rotation
            let nc = Float::with_val(prec, &c * &cj) - Float::with_val(prec, &s * &sj);
            let ns = Float::with_val(prec, &s * &cj) + Float::with_val(prec, &c * &sj);
            c = nc;
            s = ns;
            let mut term = Float::with_val(prec, &f.re * &c);
            term += Float::with_val(prec, &f.im * &s);
            term <<= 1;
            acc += term;
        }
        if j % 2 == 0 {
            acc += &half[last].re;
        } else {
            acc -= &half[last].re;
        }
        acc /= nodes;
        acc *= &rinv;
        out.push(acc);
        rinv *= &r_recip;
    }
    out
}

/// λ_j for j = 0..=jmax (Taylor coefficients of (s-1)ζ(s) = Σ λ_j (s-1)^j / j!),
/// from the contour engine.
pub fn lambda_taylor(jmax: usize, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    let t = taylor_contour(jmax, ctx)?;
    Ok(from_taylor_scale(&t))
}

/// Multiply t_j by j!.
pub fn from_taylor_scale(t: &[Float]) -> Vec<Float> {
    let mut fact = Integer::from(1);
    t.iter()
        .enumerate()
        .map(|(j, v)| {
            if j > 0 {
                fact *= j as u32;
            }
            Float::with_val(v.prec(), v * &fact)
        })
        .collect()
}

/// Stieltjes constants γ_j = (-1)^j λ_{j+1}/(j+1), j = 0..=jmax.
pub fn stieltjes(jmax: usize, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    let t = taylor_contour(jmax + 1, ctx)?;
    Ok(stieltjes_from_taylor(&t))
}

/// γ_j = (-1)^j j! t_{j+1}.
pub fn stieltjes_from_taylor(t: &[Float]) -> Vec<Float> {
    let mut fact = Integer::from(1);
    (0..t.len().saturating_sub(1))
        .map(|j| {
            if j > 0 {
                fact *= j as u32;
            }
            let mut g = Float::with_val(t[j + 1].prec(), &t[j + 1] * &fact);
            if j % 2 == 1 {
                g = -g;
            }
            g
        })
        .collect()
}

/// Truncation and precision for the power-series engine.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JetPlan {
    /// Direct sum over n < N.
    pub n: u64,
    /// Bernoulli corrections up to B_{2M}.
    pub m: u32,
    /// Radius |x| = ρ on which the Euler–Maclaurin remainder is bounded; the
    /// truncation error of t_j is then at most 2^{-accuracy} ρ^{-j}.
    pub rho: f64,
    pub accuracy: u32,
    pub prec: u32,
}

/// log2 of the remainder of the expansion at s = 1 + x, maximised over
/// |x| = ρ (|s| ≤ 1 + ρ, Re s ≥ 1 - ρ).
fn log2_remainder_on_circle(rho: f64, n: f64, m: u32) -> f64 {
    let mut poch = 0.0;
    for i in 0..(2 * m + 1) {
        poch += (1.0 + rho + i as f64).log2();
    }
    log2_em_remainder(poch, 1.0 - rho, n, m)
}

/// Smallest (N, M) with the circle remainder below 2^-accuracy.
fn truncation_for(rho: f64, accuracy: u32) -> (u64, u32) {
    let mut n = (accuracy as f64 / 7.0).max(20.0).max(2.0 * rho).ceil() as u64;
    loop {
        let m_min = (rho / 2.0).floor() as u32 + 1;
        let mut best = None;
        for m in m_min..(m_min + 4 * accuracy + 64) {
            if log2_remainder_on_circle(rho, n as f64, m) < -(accuracy as f64) {
                best = Some(m);
                break;
            }
        }
        if let Some(m) = best {
            return (n, m);
        }
        n = n * 5 / 4 + 1;
    }
}

/// Total number of main-sum terms for n < N: the series for ln n is cut
/// once (ln n / ln N)^j < 2^-prec.
fn main_sum_terms(n_max: u64, prec: u32, jmax: usize) -> f64 {
    let big = (n_max as f64).ln();
    (2..n_max)
        .map(|n| {
            let ratio = (big / (n as f64).ln()).log2();
            (prec as f64 / ratio).min(jmax as f64)
        })
        .sum()
}

impl JetPlan {
    /// Cheapest plan giving t_j to absolute accuracy `weight(j)` bits, where
    /// the caller supplies the accuracy needed on the circle of radius ρ:
    /// `accuracy_for(ρ)`.
    pub fn choose(jmax: usize, prec: u32, accuracy_for: impl Fn(f64) -> u32) -> JetPlan {
        let mut best: Option<(f64, JetPlan)> = None;
        for rho in [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0] {
            let accuracy = accuracy_for(rho);
            let (n, m) = truncation_for(rho, accuracy);
            let j = jmax as f64;
            let main = main_sum_terms(n, prec, jmax);
            let deg = (2 * m as usize).min(jmax) as f64;
            let cost = main + m as f64 * deg + j * deg;
            let plan = JetPlan { n, m, rho, accuracy, prec: prec.max(accuracy + 16) };
            if best.as_ref().is_none_or(|(c, _)| cost < *c) {
                best = Some((cost, plan));
            }
        }
        best.expect("at least one radius").1
    }
}

/// t_j = λ_j / j! for j = 0..=jmax from Euler–Maclaurin summation of
/// ζ(1+x) - 1/x as a power series in x truncated after x^{jmax-1}:
///
/// Σ_{n<N} n^{-1} e^{-x ln n} + (N^{-x} - 1)/x + N^{-1-x}/2
///   + N^{-x} Σ_{m≤M} B_{2m}/(2m)! N^{-2m} (1+x)(2+x)...(2m-1+x).
///
/// Since (s-1)ζ(s) = 1 + x(ζ(1+x) - 1/x), t_0 = 1 and t_j is the
/// coefficient of x^{j-1} above.
pub fn taylor_jet(jmax: usize, plan: &JetPlan) -> Vec<Float> {
    let p = plan.prec;
    let nterms = jmax.max(1);
    let mut r = vec![Float::with_val(p, 0); nterms];

    // Direct sum. Rounding errors elsewhere are relative to the scale
    // (ln N)^j / j! of the coefficient of x^j, and the series for each n is
    // cut at 2^-p times that scale rather than at an absolute level.
    let log2_ln_n = (plan.n as f64).ln().log2();
    let mut cutoff_exp = Vec::with_capacity(nterms);
    let mut lg = 0.0;
    for j in 0..nterms {
        lg += log2_ln_n - ((j + 1) as f64).log2();
        cutoff_exp.push((lg.floor() as i32).saturating_sub(p as i32 + 8));
    }
    for n in 1..plan.n {
        let l = Float::with_val(p, n).ln();
        let mut c = Float::with_val(p, n).recip();
        let neg_l = -l;
        for (j, rj) in r.iter_mut().enumerate() {
            *rj += &c;
            c *= &neg_l;
            c /= (j + 1) as u32;
            if c.is_zero() || (j > 8 && c.get_exp().unwrap() < cutoff_exp[j]) {
                break;
            }
        }
    }

    let ln_n = Float::with_val(p, plan.n).ln();
    let neg_ln_n = Float::with_val(p, -&ln_n);
    // e_j = (-ln N)^j / j!, the coefficients of N^{-x}
    let mut e = Vec::with_capacity(nterms + 1);
    let mut c = Float::with_val(p, 1);
    for j in 0..=nterms {
        e.push(c.clone());
        c *= &neg_ln_n;
        c /= (j + 1) as u32;
    }
    let inv_n = Float::with_val(p, plan.n).recip();
    let half_inv_n = Float::with_val(p, &inv_n / 2u32);
    for (j, rj) in r.iter_mut().enumerate() {
        // (N^{-x} - 1)/x contributes e_{j+1}; N^{-1-x}/2 contributes e_j/(2N)
        *rj += &e[j + 1];
        *rj += Float::with_val(p, &e[j] * &half_inv_n);
    }

    // A(x) = Σ_m B_{2m}/(2m)! N^{-2m} (1+x)_{2m-1}, truncated at degree nterms-1
    let b = bernoulli_over_factorial(plan.m as usize, p);
    let inv_n2 = Float::with_val(p, inv_n.square_ref());
    let mut poch = vec![Float::with_val(p, 1), Float::with_val(p, 1)];
    let mut scale = inv_n2.clone();
    let mut a = vec![Float::with_val(p, 0); nterms.min(2 * plan.m as usize)];
    for (i, bm) in b.iter().enumerate() {
        let mm = i + 1;
        if mm > 1 {
            // multiply by (2mm-2+x)(2mm-1+x)
            for factor in [2 * mm - 2, 2 * mm - 1] {
                mul_linear(&mut poch, factor as u32, a.len().max(1));
            }
            scale *= &inv_n2;
        }
        let coef = Float::with_val(p, bm * &scale);
        for (ai, pi) in a.iter_mut().zip(&poch) {
            *ai += Float::with_val(p, pi * &coef);
        }
    }
    // r += A · N^{-x}
    for (j, rj) in r.iter_mut().enumerate() {
        let mut acc = Float::with_val(p, 0);
        for (i, ai) in a.iter().enumerate().take(j + 1) {
            acc += Float::with_val(p, ai * &e[j - i]);
        }
        *rj += acc;
    }

    let mut t = Vec::with_capacity(jmax + 1);
    t.push(Float::with_val(p, 1));
    t.extend(r.into_iter().take(jmax));
    t
}

/// poly <- poly · (c + x), truncated to `len` coefficients.
fn mul_linear(poly: &mut Vec<Float>, c: u32, len: usize) {
    let p = poly[0].prec();
    if poly.len() < len {
        poly.push(Float::with_val(p, 0));
    }
    for i in (0..poly.len()).rev() {
        let mut v = Float::with_val(p, &poly[i] * c);
        if i > 0 {
            v += &poly[i - 1];
        }
        poly[i] = v;
    }
}

/// A rough estimate of log2 |t_j| used to size truncations before the
/// coefficients are known: log10 |γ_j/j!| ≈ -0.678 j log10 j - 0.047 j fits
/// the range 50 ≤ j ≤ 1000 to within a few percent.
pub fn log2_taylor_estimate(j: usize) -> f64 {
    if j < 2 {
        return 0.0;
    }
    let jf = (j - 1) as f64;
    if jf < 2.0 {
        return -2.0;
    }
    (-0.678 * jf * jf.log10() - 0.047 * jf) * std::f64::consts::LOG2_10
}
