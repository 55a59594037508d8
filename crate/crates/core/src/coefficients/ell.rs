//! Fourier coefficients ℓ_{n,k} of ζ^k in powers of (s-1)/s, and the
//! polynomial coefficients a_{j,k}, c_{n,k} of the principal part.
//!
//! For n ≥ 1, (-1)^n ℓ_{n,k} = Σ_j C(n-1, j-1) b_j with b_j = t_{j+k,k}, a
//! sum whose terms grow like 2^n while the result stays small. The sum is
//! evaluated for all n at once as the coefficient of w^n in Σ_j b_j u^j,
//! u = w/(1-w), by Horner's rule; multiplication by u is a shift followed by
//! a prefix sum. The working precision is sized from the cancellation and
//! the result is confirmed by recomputation at a second precision.

use rug::{Assign, Float};

use super::powers::power_checked;
use super::taylor::{log2_taylor_estimate, taylor_jet, JetPlan};
use crate::error::{Error, Result};
use crate::mp::combinatorics::binomial;
use crate::mp::PrecisionCtx;

/// How [`ell_with_policy`] chooses its working precision.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PrecisionPolicy {
    /// Size the precision from the cancellation estimate, validate by
    /// recomputation at a higher precision and escalate on disagreement.
    Auto,
    /// Use exactly `ctx.working()` bits; the recomputation must agree to
    /// relative tolerance `rel_tol` or the call fails.
    Fixed { rel_tol: f64 },
}

/// ℓ_{n,k} for n = -k..=nmax together with the Taylor data it came from.
#[derive(Clone, Debug)]
pub struct EllTable {
    pub k: u32,
    pub nmax: usize,
    /// ℓ_{n,k} at index n + k.
    pub values: Vec<Float>,
    /// t_j = λ_j/j!.
    pub taylor: Vec<Float>,
    /// t_{j,k} = λ_{j,k}/j!.
    pub taylor_k: Vec<Float>,
    /// Number of b_j kept in the positive-branch sums.
    pub order: usize,
    /// Precision of the accepted computation.
    pub prec: u32,
}

impl EllTable {
    pub fn get(&self, n: i64) -> &Float {
        &self.values[(n + self.k as i64) as usize]
    }

    /// ℓ_{0,k}, ℓ_{1,k}, ..., ℓ_{nmax,k}.
    pub fn nonnegative(&self) -> &[Float] {
        &self.values[self.k as usize..]
    }
}

/// ℓ_{n,k} for n = -k..=nmax (index n + k), validated at the target
/// precision of `ctx`.
pub fn ell(nmax: usize, k: u32, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    Ok(ell_with_policy(nmax, k, 0, ctx, PrecisionPolicy::Auto)?.values)
}

/// ℓ_{n,k} with Taylor data for at least `jlen_min + 1` coefficients.
pub fn ell_with_policy(
    nmax: usize,
    k: u32,
    jlen_min: usize,
    ctx: &PrecisionCtx,
    policy: PrecisionPolicy,
) -> Result<EllTable> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let ku = k as usize;
    let target = ctx.working();
    let power_tol = ctx.bits().saturating_sub(16);
    let threshold = -(target as f64) - 8.0;

    let mut order = estimate_order(nmax, k, target);
    loop {
        let jlen = (order + order / 8 + 16).min(nmax.max(1)) + ku;
        let jlen = jlen.max(jlen_min).max(ku + 1);
        let (mut p1, accuracy1) = match policy {
            PrecisionPolicy::Auto => (auto_precision(nmax, k, order, jlen, target), target),
            PrecisionPolicy::Fixed { .. } => (target, target),
        };
        let first = run(nmax, k, jlen, p1, accuracy1, power_tol)?;

        // confirm the truncation from the computed values
        let contributions = contributions(&first.taylor_k, k, nmax);
        let last_needed = contributions
            .iter()
            .rposition(|&c| c >= threshold)
            .map_or(1, |i| i + 1);
        let available = contributions.len();
        if available < nmax && last_needed + (available / 16).max(4) > available {
            order = (available * 3 / 2).max(order + 16);
            continue;
        }
        let order = last_needed.min(nmax);

        let mut prev = assemble(&first, k, nmax, order);
        let mut escalations = 0;
        loop {
            let p2 = p1 + 64.max(p1 / 8);
            let second = run(nmax, k, jlen, p2, accuracy1 + (p2 - p1), power_tol)?;
            let next = assemble(&second, k, nmax, order);
            let rel_tol = match policy {
                PrecisionPolicy::Auto => 2f64.powi(-(ctx.bits() as i32 - 16)),
                PrecisionPolicy::Fixed { rel_tol } => rel_tol,
            };
            match compare(&prev, &next, rel_tol) {
                Ok(()) => {
                    return Ok(EllTable {
                        k,
                        nmax,
                        values: round_all(next, target),
                        taylor: round_all(second.taylor, target),
                        taylor_k: round_all(second.taylor_k, target),
                        order,
                        prec: p2,
                    })
                }
                Err((n, d, tol)) => {
                    if matches!(policy, PrecisionPolicy::Fixed { .. }) || escalations == 3 {
                        return Err(Error::consistency(
                            format!("ℓ_{{{},{k}}} at {p1} and {p2} bits", n as i64 - k as i64),
                            d,
                            tol,
                        ));
                    }
                }
            }
            escalations += 1;
            prev = next;
            p1 = p2;
        }
    }
}

struct Run {
    taylor: Vec<Float>,
    taylor_k: Vec<Float>,
}

fn run(nmax: usize, k: u32, jlen: usize, prec: u32, target: u32, power_tol: u32) -> Result<Run> {
    let plan = jet_plan(nmax, jlen, prec, target);
    let taylor = taylor_jet(jlen, &plan);
    let taylor_k = power_checked(&taylor, k, power_tol)?;
    Ok(Run { taylor, taylor_k })
}

/// Jet truncation for an absolute error 2^-target in every ℓ_n, n ≤ nmax:
/// an error 2^-a ρ^-j in t_j reaches ℓ_n multiplied by at most
/// (1 + 1/ρ)^{n-1} ρ^{-k-1}.
fn jet_plan(nmax: usize, jlen: usize, prec: u32, target: u32) -> JetPlan {
    let n = nmax.max(1) as f64;
    let mut plan = JetPlan::choose(jlen, prec, |rho| {
        target + ((n - 1.0) * (1.0 + 1.0 / rho).log2()).ceil() as u32 + 16
    });
    plan.prec = prec;
    plan
}

/// log2 C(n, i) for i = 0..=imax.
fn log2_binomials(n: usize, imax: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(imax + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for i in 1..=imax {
        if i > n {
            out.push(f64::NEG_INFINITY);
            continue;
        }
        acc += ((n + 1 - i) as f64).log2() - (i as f64).log2();
        out.push(acc);
    }
    out
}

/// Number of b_j needed so that the neglected terms C(nmax-1, j-1) b_j are
/// below 2^-target, from the magnitude estimate of t_{j,k}.
fn estimate_order(nmax: usize, k: u32, target: u32) -> usize {
    if nmax == 0 {
        return 1;
    }
    let lc = log2_binomials(nmax - 1, nmax - 1);
    let kf = k as f64;
    let mut peaked = false;
    for j in 1..=nmax {
        let m = j + k as usize;
        // the even split of m between the k factors dominates the product
        let est = kf * log2_taylor_estimate(((m as f64) / kf).round().max(2.0) as usize)
            + log2_binomials(m + k as usize - 1, k as usize - 1)[k as usize - 1];
        let c = lc[j - 1] + est;
        if c > 0.0 {
            peaked = true;
        }
        if (peaked || j > 8) && c < -(target as f64) - 16.0 {
            return j;
        }
    }
    nmax
}

/// log2 |C(nmax-1, j-1) b_j| for j = 1..=len (index j - 1), from computed
/// coefficients.
fn contributions(tk: &[Float], k: u32, nmax: usize) -> Vec<f64> {
    let ku = k as usize;
    let avail = (tk.len() - 1 - ku).min(nmax);
    let lc = log2_binomials(nmax.saturating_sub(1), avail);
    (1..=avail)
        .map(|j| {
            let b = &tk[j + ku];
            if b.is_zero() {
                f64::NEG_INFINITY
            } else {
                lc[j - 1] + b.get_exp().unwrap() as f64
            }
        })
        .collect()
}

/// Working precision for the positive branch: the target plus the
/// cancellation, estimated as the largest rounding error committed in
/// any b_j, log2 max_j C(nmax-1, j-1) (ln N)^{j+k+1}/(j+k+1)!, where the
/// jet's main-sum terms are bounded by (ln N)^i/i!. Small tables also get
/// at least 1.1 bits per unit of nmax.
fn auto_precision(nmax: usize, k: u32, order: usize, jlen: usize, target: u32) -> u32 {
    let plan = jet_plan(nmax, jlen, target, target);
    let l = (plan.n as f64).ln().log2();
    let lc = log2_binomials(nmax.saturating_sub(1), order.min(nmax));
    let mut log_fact = 0.0;
    let mut worst: f64 = 0.0;
    for i in 1..=(order + k as usize + 1) {
        log_fact += (i as f64).log2();
        let j = i as i64 - k as i64 - 1;
        if j >= 1 && (j as usize) < lc.len() {
            worst = worst.max(lc[j as usize - 1] + i as f64 * l - log_fact);
        }
    }
    let extra = worst.ceil() as u32 + (order.max(2) as f64).log2().ceil() as u32 + 32;
    if nmax <= 256 {
        target + extra.max((1.1 * nmax as f64).ceil() as u32)
    } else {
        target + extra
    }
}

/// The full ℓ vector from one run.
fn assemble(run: &Run, k: u32, nmax: usize, order: usize) -> Vec<Float> {
    let mut out = nonpositive_branch(&run.taylor_k, k);
    out.extend(positive_branch(&run.taylor_k, k, nmax, order));
    out
}

/// ℓ_{n,k} for n = -k..=0 (index n + k):
/// (-1)^k Σ_{j=0}^{k+n} C(k-j, -n) (-1)^j t_{j,k}.
pub fn nonpositive_branch(tk: &[Float], k: u32) -> Vec<Float> {
    let p = tk[0].prec();
    let k = k as i64;
    (-k..=0)
        .map(|n| {
            let mut acc = Float::with_val(p, 0);
            for j in 0..=(k + n) {
                let term = Float::with_val(p, &tk[j as usize] * binomial(k - j, -n));
                if j % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            if k % 2 == 1 {
                acc = -acc;
            }
            acc
        })
        .collect()
}

/// ℓ_{n,k} for n = 1..=nmax using b_j = t_{j+k,k}, j = 1..=order.
pub fn positive_branch(tk: &[Float], k: u32, nmax: usize, order: usize) -> Vec<Float> {
    let p = tk[0].prec();
    let ku = k as usize;
    let order = order.min(nmax).min(tk.len() - 1 - ku);
    let mut q = vec![Float::with_val(p, 0); nmax + 1];
    let mut acc = Float::with_val(p, 0);
    // Q_j = b_j + u Q_{j+1}, needed only to degree nmax - j
    for j in (1..=order).rev() {
        shift_prefix(&mut q[..=nmax - j], &mut acc);
        q[0] += &tk[j + ku];
    }
    shift_prefix(&mut q, &mut acc);
    q.into_iter()
        .enumerate()
        .skip(1)
        .map(|(n, v)| if n % 2 == 1 { -v } else { v })
        .collect()
}

/// q <- w/(1-w) · q in place: q'_m = Σ_{i<m} q_i.
fn shift_prefix(q: &mut [Float], acc: &mut Float) {
    acc.assign(0);
    for v in q.iter_mut() {
        std::mem::swap(v, acc);
        *acc += &*v;
    }
}

/// First index whose two values differ by more than
/// rel_tol · max(|b|, 2^-40), with the discrepancy and tolerance.
fn compare(a: &[Float], b: &[Float], rel_tol: f64) -> std::result::Result<(), (usize, f64, f64)> {
    for (i, (x, y)) in a.iter().zip(b).enumerate() {
        let p = y.prec();
        let d = Float::with_val(p, x - y).abs().to_f64();
        let scale = y.to_f64().abs().max(2f64.powi(-40));
        if !(d <= rel_tol * scale) {
            return Err((i, d, rel_tol * scale));
        }
    }
    Ok(())
}

fn round_all(v: Vec<Float>, prec: u32) -> Vec<Float> {
    v.into_iter().map(|x| Float::with_val(prec, x)).collect()
}

/// a_{j,k} = (-1)^{k-1-j} Σ_{i=0}^{k-1-j} (-1)^i t_{i,k}, j = 0..k-1.
pub fn a_from_taylor(tk: &[Float], k: u32) -> Vec<Float> {
    let p = tk[0].prec();
    (0..k as usize)
        .map(|j| {
            let top = k as usize - 1 - j;
            let mut acc = Float::with_val(p, 0);
            for (i, t) in tk.iter().enumerate().take(top + 1) {
                if i % 2 == 0 {
                    acc += t;
                } else {
                    acc -= t;
                }
            }
            if top % 2 == 1 {
                acc = -acc;
            }
            acc
        })
        .collect()
}

/// c_{n,k} = Σ_{j=0}^{n} C(k-j, k-n) (-1)^{n-j} t_{j,k}, n = 0..k-1.
pub fn c_from_taylor(tk: &[Float], k: u32) -> Vec<Float> {
    let p = tk[0].prec();
    let k = k as i64;
    (0..k)
        .map(|n| {
            let mut acc = Float::with_val(p, 0);
            for j in 0..=n {
                let term = Float::with_val(p, &tk[j as usize] * binomial(k - j, k - n));
                if (n - j) % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        })
        .collect()
}

/// Check ℓ_{n,k} = (-1)^n c_{n+k,k} for -k ≤ n ≤ -1 and
/// ℓ_{0,k} = t_{k,k} - a_{0,k}.
pub fn check_principal_part(
    ell_nonpositive: &[Float],
    a: &[Float],
    c: &[Float],
    tk: &[Float],
    k: u32,
    tol: f64,
) -> Result<()> {
    let ki = k as i64;
    for n in -ki..0 {
        let mut v = c[(n + ki) as usize].clone();
        if n % 2 != 0 {
            v = -v;
        }
        let d = Float::with_val(v.prec(), &v - &ell_nonpositive[(n + ki) as usize])
            .abs()
            .to_f64();
        if !(d <= tol) {
            return Err(Error::consistency(format!("ℓ_{{{n},{k}}} from c_{{{},{k}}}", n + ki), d, tol));
        }
    }
    let f1 = Float::with_val(a[0].prec(), &tk[k as usize] - &a[0]);
    let d = Float::with_val(f1.prec(), &f1 - &ell_nonpositive[k as usize]).abs().to_f64();
    if !(d <= tol) {
        return Err(Error::consistency(format!("ℓ_{{0,{k}}} from F_{k}(1)"), d, tol));
    }
    Ok(())
}

fn taylor_k_low(k: u32, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    let t = super::taylor::taylor_contour(k as usize, ctx)?;
    power_checked(&t, k, ctx.bits().saturating_sub(16))
}

/// a_{j,k}, j = 0..k-1: coefficients of the main-term polynomial
/// P_k(u) = Σ a_{j,k} u^j / j!.
pub fn a_coeffs(k: u32, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    Ok(a_from_taylor(&taylor_k_low(k, ctx)?, k))
}

/// c_{n,k}, n = 0..k-1, cross-checked against the non-positive ℓ branch.
pub fn c_coeffs(k: u32, ctx: &PrecisionCtx) -> Result<Vec<Float>> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    let tk = taylor_k_low(k, ctx)?;
    let c = c_from_taylor(&tk, k);
    let a = a_from_taylor(&tk, k);
    let tol = 2f64.powi(-(ctx.bits() as i32 - 16));
    check_principal_part(&nonpositive_branch(&tk, k), &a, &c, &tk, k, tol)?;
    Ok(c)
}

/// Least-squares fit of log|ℓ_n| against log n.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the fit.
    pub residual: f64,
    pub points: usize,
}

/// Growth-order diagnostic: slope of log|coeffs[n]| against log n over
/// n_lo..=n_hi, skipping zero entries.
pub fn estimate_beta(coeffs: &[Float], n_lo: usize, n_hi: usize) -> Result<BetaEstimate> {
    if n_lo < 2 || n_hi <= n_lo {
        return Err(Error::domain(format!("need 2 <= n_lo < n_hi, got {n_lo}..{n_hi}")));
    }
    if n_hi >= coeffs.len() {
        return Err(Error::Range {
            value: n_hi as f64,
            limit: coeffs.len().saturating_sub(1) as u64,
        });
    }
    let pts: Vec<(f64, f64)> = (n_lo..=n_hi)
        .filter(|&n| !coeffs[n].is_zero())
        .map(|n| {
            let v = Float::with_val(coeffs[n].prec(), coeffs[n].abs_ref()).ln().to_f64();
            ((n as f64).ln(), v)
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::DegenerateInput(format!(
            "{} nonzero coefficients in {n_lo}..={n_hi}",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = (pts
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum::<f64>()
        / m)
        .sqrt();
    Ok(BetaEstimate {
        slope,
        intercept,
        residual,
        points: pts.len(),
    })
}
