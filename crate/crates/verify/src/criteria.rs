use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rug::float::Constant;
use rug::Float;
use zeta_fourier::coefficients::powers::{power_bound, power_cauchy, power_recurrence};
use zeta_fourier::coefficients::taylor::taylor_contour;
use zeta_fourier::coefficients::{ell, ell_with_policy, PrecisionPolicy, TableStore};
use zeta_fourier::divisor::{delta_norm_trunc, fourier_coeffs_numeric};
use zeta_fourier::series::{
    estimate_terms, hardy_coefficient_sum, hardy_default_nodes, hardy_default_terms, hardy_norm_sq,
    zeta_pow_series_auto,
};
use zeta_fourier::transforms::{
    abel_sum_psi, abel_terms, parseval_check, phi_grid_integral, phi_integral, phi_series, phi_series_terms,
    poisson_kernel, poisson_kernel_partial,
};
use zeta_fourier::zeta::{zeta_em, zeta_pow_ref};
use zeta_fourier::{Complex, Error, Result};

use crate::oracles;
use crate::{Criterion, Measurement, Outcome, Session};

pub(crate) static ALL: &[Criterion] = &[
    Criterion {
        id: 1,
        name: "coefficients",
        description: "ℓ_{n,1} from the Taylor route equals the Stieltjes-binomial sum, n ≤ 200",
        run: coefficients,
    },
    Criterion {
        id: 2,
        name: "recurrences",
        description: "both power recurrences agree and obey the γ_0 bound, j ≤ 40, k ≤ 5",
        run: recurrences,
    },
    Criterion {
        id: 3,
        name: "series",
        description: "the z-series for ζ^k matches Euler–Maclaurin on the 36-point grid",
        run: series,
    },
    Criterion {
        id: 4,
        name: "hardy",
        description: "circle quadrature equals the coefficient sum; second moment converges",
        run: hardy,
    },
    Criterion {
        id: 5,
        name: "fourier",
        description: "Laguerre coefficients of Δ_k reproduce (-1)^n ℓ_{n,k}",
        run: fourier,
    },
    Criterion {
        id: 6,
        name: "norm",
        description: "‖Δ_1‖² equals Σ_{n ≤ 2000} ℓ²_{n,1}",
        run: norm,
    },
    Criterion {
        id: 7,
        name: "abel",
        description: "Abel sum equals the Poisson integral; ψ_1(2.5, 0.999) approaches Δ_1(2.5)",
        run: abel,
    },
    Criterion {
        id: 8,
        name: "hankel",
        description: "Borel series equals the Hankel integral; Parseval; x^{1/4} φ_1 stays bounded",
        run: hankel,
    },
    Criterion {
        id: 9,
        name: "laguerre",
        description: "Laguerre Gram matrix is the identity; kernel sum equals its closed form",
        run: laguerre,
    },
    Criterion {
        id: 10,
        name: "oracles",
        description: "ζ(2), ζ(3), ζ(1/2) against independent series; first zero",
        run: anchors,
    },
];

fn abs_diff(a: &Float, b: &Float) -> f64 {
    Float::with_val(a.prec().max(b.prec()), a - b).abs().to_f64()
}

fn rel_diff(a: &Float, b: &Float) -> f64 {
    let d = abs_diff(a, b);
    let scale = b.to_f64().abs();
    if scale == 0.0 {
        d
    } else {
        d / scale
    }
}

fn complex_rel_diff(a: &Complex, b: &Complex) -> f64 {
    let d = (a - b).abs().to_f64();
    d / b.abs().to_f64()
}

/// Worst of `values` paired with its label.
fn worst(values: impl IntoIterator<Item = (String, f64)>) -> (String, f64) {
    values
        .into_iter()
        .fold((String::new(), f64::NEG_INFINITY), |acc, v| if v.1.total_cmp(&acc.1).is_gt() { v } else { acc })
}

fn coefficients(s: &Session) -> Result<Outcome> {
    const NMAX: usize = 200;
    let ctx = s.ctx(256 + 220)?;
    let table = ell_with_policy(NMAX, 1, 0, &ctx, PrecisionPolicy::Fixed { rel_tol: 1e-20 })?;
    let oracle = oracles::ell_from_stieltjes(NMAX, &ctx)?;
    let (label, rel) = worst((0..=NMAX).map(|n| (format!("rel diff ℓ_{n},1"), rel_diff(table.get(n as i64), &oracle[n]))));
    Ok(Outcome {
        measurements: vec![Measurement::at_most(label, rel, 1e-20)],
        notes: vec![format!("{} bits, n = 0..={NMAX}", ctx.bits())],
    })
}

fn recurrences(s: &Session) -> Result<Outcome> {
    const JMAX: usize = 40;
    let ctx = s.ctx(256)?;
    let p = ctx.working();
    let t = taylor_contour(JMAX, &ctx)?;
    let gamma0 = Float::with_val(p, Constant::Euler);
    // slack for the rounding of the bound and of the Cauchy products
    let slack = Float::with_val(p, Float::i_exp(1, 8 - ctx.bits() as i32));
    let mut agree = Vec::new();
    let mut excess = Vec::new();
    for k in 1..=5u32 {
        let a = power_cauchy(&t, k);
        let b = power_recurrence(&t, k);
        for j in 0..=JMAX {
            agree.push((format!("rel diff λ_{{{j},{k}}}"), rel_diff(&a[j], &b[j])));
            let bound = power_bound(j, k, &gamma0);
            let allowed = Float::with_val(p, &bound * Float::with_val(p, 1 + &slack));
            let over = Float::with_val(p, a[j].abs_ref()) - allowed;
            excess.push((format!("|λ_{{{j},{k}}}|/j! - bound"), over.to_f64().max(0.0)));
        }
    }
    let (la, va) = worst(agree);
    let (lb, vb) = worst(excess);
    Ok(Outcome {
        measurements: vec![Measurement::at_most(la, va, 1e-25), Measurement::at_most(lb, vb, 0.0)],
        notes: vec![format!("bound checked up to a relative rounding slack of 2^{}", 8 - ctx.bits() as i32)],
    })
}

fn series(s: &Session) -> Result<Outcome> {
    const TOL: f64 = 1e-8;
    // the summation stops on a heuristic tail estimate, so it aims lower
    const AIM: f64 = 1e-10;
    let ctx = s.ctx(128)?;
    let p = ctx.working();
    let sigmas = [0.6, 0.75, 1.5, 3.0];
    let ts = [0.5, 1.0, 10.0];
    let mut measurements = Vec::new();
    let mut notes = Vec::new();
    for k in 1..=3u32 {
        let probe = TableStore::global().get(k, 400, k as usize, &ctx)?;
        let ell_scale = (300..=400)
            .map(|n| probe.ell_at(n as i64).to_f64().abs())
            .fold(f64::MIN_POSITIVE, f64::max);
        let mut points = Vec::new();
        for &sigma in &sigmas {
            for &t in &ts {
                let z = Complex::with_val(p, sigma, t);
                let reference = zeta_pow_ref(&z, k, &ctx)?;
                let n = estimate_terms(&z, AIM, reference.value.abs().to_f64(), ell_scale)?;
                points.push((sigma, t, z, reference, n));
            }
        }
        let nmax = points.iter().map(|p| p.4).max().unwrap_or(0) * 11 / 10;
        let table = TableStore::global().get(k, nmax, k as usize, &ctx)?;
        for (sigma, t, z, reference, _) in &points {
            let label = format!("k={k} s={sigma}+{t}i");
            match zeta_pow_series_auto(&table, z, AIM, &ctx) {
                Ok(r) => {
                    let d = complex_rel_diff(&r.value, &reference.value);
                    measurements.push(Measurement::at_most(format!("rel diff {label}"), d, TOL));
                    if *sigma == 0.6 && *t == 0.5 {
                        notes.push(format!("k={k}: {} terms at s = 0.6+0.5i", r.terms));
                    }
                }
                Err(e @ Error::NoConvergence(_)) => {
                    notes.push(format!("{label}: {e}"));
                    measurements.push(Measurement::failed(format!("rel diff {label}"), TOL));
                }
                Err(e) => return Err(e),
            }
        }
        notes.push(format!("k={k}: table to n = {nmax}"));
    }
    Ok(Outcome { measurements, notes })
}

fn hardy(s: &Session) -> Result<Outcome> {
    let ctx = s.ctx(96)?;
    let mut measurements = Vec::new();
    for k in 1..=2u32 {
        for r in [0.3, 0.6, 0.9] {
            let h = hardy_norm_sq(k, r, hardy_default_nodes(r, &ctx), &ctx)?;
            let d = rel_diff(&h.quadrature, &h.coefficients);
            measurements.push(Measurement::at_most(format!("rel diff k={k} r={r}"), d, 1e-10));
        }
    }
    let ctx64 = s.ctx(64)?;
    let terms = hardy_default_terms(1, 0.999, &ctx64);
    let table = TableStore::global().get(1, terms, 1, &ctx64)?;
    let near = hardy_coefficient_sum(&table, 0.99, hardy_default_terms(1, 0.99, &ctx64), &ctx64)?;
    let nearer = hardy_coefficient_sum(&table, 0.999, terms, &ctx64)?;
    let change = (nearer.to_f64() / near.to_f64() - 1.0).abs();
    measurements.push(Measurement::at_most("relative change r=0.99 → 0.999", change, 0.05));
    Ok(Outcome {
        measurements,
        notes: vec![format!(
            "k=1 coefficient sums: {:.6} at r=0.99, {:.6} at r=0.999 ({terms} terms)",
            near.to_f64(),
            nearer.to_f64()
        )],
    })
}

fn fourier(s: &Session) -> Result<Outcome> {
    let ctx = s.ctx(64)?;
    let mut measurements = Vec::new();
    let mut notes = Vec::new();
    for (k, limit, nmax, tol) in [(1u32, 1_000_000u64, 10usize, 1e-4), (2, 10_000_000, 2, 1e-2)] {
        let sieve = s.sieve(k, limit)?;
        let reports = fourier_coeffs_numeric(nmax as u32, &sieve, &ctx)?;
        let exact = ell(nmax, k, &ctx)?;
        let ku = k as usize;
        let (label, d) = worst(reports.iter().enumerate().map(|(n, r)| {
            let mut target = exact[n + ku].clone();
            if n % 2 == 1 {
                target = -target;
            }
            (format!("abs diff k={k} n={n}"), abs_diff(&r.total(), &target))
        }));
        measurements.push(Measurement::at_most(label, d, tol));
        let bound = reports.iter().map(|r| r.tail_bound.to_f64()).fold(0.0, f64::max);
        let kind = if reports.iter().all(|r| r.tail_is_rigorous) { "rigorous" } else { "heuristic" };
        notes.push(format!("k={k}, X={limit}: {kind} tail bound {bound:.2e}"));
    }
    Ok(Outcome { measurements, notes })
}

fn norm(s: &Session) -> Result<Outcome> {
    const LIMIT: u64 = 1_000_000;
    const TERMS: usize = 2000;
    let ctx = s.ctx(64)?;
    let sieve = s.sieve(1, LIMIT)?;
    let integral = delta_norm_trunc(1, &sieve, &ctx)?;
    let coeffs = ell(TERMS, 1, &ctx)?;
    let mut sum = Float::with_val(ctx.working(), 0);
    for c in &coeffs[1..] {
        sum += Float::with_val(ctx.working(), c.square_ref());
    }
    let total = integral.total();
    Ok(Outcome {
        measurements: vec![Measurement::at_most("abs diff ‖Δ_1‖² vs Σ ℓ²", abs_diff(&total, &sum), 1e-3)],
        notes: vec![format!(
            "‖Δ_1‖² = {:.8} (X = {LIMIT}, tail bound {:.1e}); Σ_{{n ≤ {TERMS}}} ℓ² = {:.8}",
            total.to_f64(),
            integral.tail_bound.to_f64(),
            sum.to_f64()
        )],
    })
}

fn abel(s: &Session) -> Result<Outcome> {
    let ctx = s.ctx(64)?;
    let p = ctx.working();
    let tol = 2f64.powi(-(ctx.bits() as i32));
    let x = Float::with_val(p, 10);
    let rho = Float::with_val(p, 0.5);
    let psi = abel_sum_psi(&x, 1, &rho, abel_terms(0.5, tol), &ctx)?;
    let direct = oracles::poisson_integral_k1(&x, &rho, 2000, &ctx)?;
    let d = abs_diff(&psi.value.re, &direct.value);

    let x = Float::with_val(p, 2.5);
    let rho = Float::with_val(p, 0.999);
    let terms = abel_terms(0.999, 2f64.powi(-40));
    let near = abel_sum_psi(&x, 1, &rho, terms, &ctx)?;
    let gap = (near.value.re.to_f64() + 0.5).abs();
    Ok(Outcome {
        measurements: vec![
            Measurement::at_most("|ψ_1(10, 0.5) - Poisson integral|", d, 1e-6),
            Measurement::at_most("|ψ_1(2.5, 0.999) + 0.5|", gap, 0.05),
        ],
        notes: vec![
            format!("Poisson integral error bound {:.1e}", direct.error_bound),
            format!("ψ_1(2.5, 0.999) = {:.6} with {terms} terms", near.value.re.to_f64()),
        ],
    })
}

fn hankel(s: &Session) -> Result<Outcome> {
    let ctx = s.ctx(64)?;
    let p = ctx.working();
    let mut measurements = Vec::new();
    let mut notes = Vec::new();
    for (k, limit) in [(1u32, 10_000u64), (2, 1_000_000)] {
        let sieve = s.sieve(k, limit)?;
        let mut diffs = Vec::new();
        for x in [0.0, 1.0, 5.0] {
            let xf = Float::with_val(p, x);
            let series = phi_series(&xf, k, phi_series_terms(x, ctx.bits()), &ctx)?;
            let integral = phi_integral(&xf, k, &sieve, &ctx)?;
            diffs.push((format!("|series - integral| k={k} x={x}"), abs_diff(&series.value.re, &integral.total())));
            if !integral.tail_is_rigorous {
                notes.push(format!("k={k} x={x}: heuristic integral tail {:.1e}", integral.tail_bound.to_f64()));
            }
        }
        let (label, d) = worst(diffs);
        measurements.push(Measurement::at_most(label, d, 1e-3));
    }

    let sieve = s.sieve(1, 2000)?;
    let (left, right) = parseval_check(1, &sieve, 1000.0, &ctx)?;
    let rel = rel_diff(&left.total(), &right.total());
    measurements.push(Measurement::at_most("Parseval relative gap", rel, 1e-2));
    notes.push(format!(
        "Parseval: ∫ φ_1² = {:.7}, ∫ Δ_1² x^-3 = {:.7}",
        left.total().to_f64(),
        right.total().to_f64()
    ));

    let sieve = s.sieve(1, 1000)?;
    let xs: Vec<Float> = (0..=24).map(|i| Float::with_val(p, 10f64.powf(i as f64 / 6.0))).collect();
    let grid = phi_grid_integral(&sieve, &xs, &ctx)?;
    let scaled = |lo: f64, hi: f64| {
        grid.axis
            .iter()
            .zip(&grid.values)
            .filter(|(a, _)| (lo..=hi).contains(&a.to_f64()))
            .map(|(a, v)| a.to_f64().powf(0.25) * v.to_f64().abs())
            .fold(0.0, f64::max)
    };
    let constant = grid.scaled_sup(0.25);
    let growth = scaled(1e3, 1e4 * 1.0001) / scaled(1.0, 10.0 * 1.0001);
    measurements.push(Measurement::reported("sup x^{1/4}|φ_1(x)| on [1, 1e4]", constant));
    measurements.push(Measurement::at_most("sup on [1e3, 1e4] / sup on [1, 10]", growth, 1.0));
    Ok(Outcome { measurements, notes })
}

fn laguerre(s: &Session) -> Result<Outcome> {
    const NMAX: u32 = 12;
    let ctx = s.ctx(128)?;
    let p = ctx.working();
    let gram = oracles::laguerre_gram(NMAX, 2 * NMAX + 2, &ctx);
    let mut off = 0.0f64;
    for (m, row) in gram.iter().enumerate() {
        for (n, g) in row.iter().enumerate() {
            let target = if m == n { 1.0 } else { 0.0 };
            off = off.max((g.to_f64() - target).abs());
        }
    }
    let rho = Float::with_val(p, 0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(s.options.seed);
    let mut pairs = vec![(1.0, 1.0), (2.5, 10.0), (10.0, 10.0), (50.0, 3.0), (100.0, 100.0)];
    pairs.extend((0..5).map(|_| (rng.gen_range(1.0..100.0), rng.gen_range(1.0..100.0))));
    let mut kernel = Vec::new();
    for (x, y) in pairs {
        let (xf, yf) = (Float::with_val(p, x), Float::with_val(p, y));
        let closed = poisson_kernel(&xf, &yf, &rho, &ctx)?;
        let partial = poisson_kernel_partial(&xf, &yf, &rho, 200, &ctx)?;
        kernel.push((format!("|K_200 - K| at ({x:.3}, {y:.3})"), abs_diff(&partial, &closed)));
    }
    let (label, d) = worst(kernel);
    Ok(Outcome {
        measurements: vec![
            Measurement::at_most(format!("max |G - I|, n ≤ {NMAX}"), off, 1e-12),
            Measurement::at_most(label, d, 1e-12),
        ],
        notes: vec![format!("kernel sample seed {}", s.options.seed)],
    })
}

fn anchors(s: &Session) -> Result<Outcome> {
    const TOL: f64 = 1e-25;
    let ctx = s.ctx(128)?;
    let p = ctx.working();
    let wider = ctx.raised(64);
    let real = |x: f64| Complex::with_val(p, x, 0);
    let mut measurements = Vec::new();
    let half = Float::with_val(p, 0.5);
    let cases = [
        ("ζ(2)", 2.0, oracles::zeta_two(p + 32)),
        ("ζ(3)", 3.0, oracles::zeta_three(p + 32)),
        ("ζ(1/2)", 0.5, oracles::zeta_borwein(&half, p + 32)?),
    ];
    for (name, sv, oracle) in cases {
        let z = zeta_em(&real(sv), &ctx)?;
        measurements.push(Measurement::at_most(format!("rel diff {name} vs series"), rel_diff(&z.value.re, &oracle), TOL));
        let z2 = zeta_em(&real(sv), &wider)?;
        measurements.push(Measurement::at_most(
            format!("rel diff {name} at two truncations"),
            rel_diff(&z.value.re, &z2.value.re),
            TOL,
        ));
    }
    let rho1 = Complex::new(Float::with_val(p, 0.5), Float::with_val(p, 14.134725141734695));
    let z = zeta_em(&rho1, &ctx)?;
    measurements.push(Measurement::at_most("|ζ(1/2 + 14.134725141734695i)|", z.value.abs().to_f64(), 1e-9));
    Ok(Outcome {
        measurements,
        notes: vec![format!("{} and {} bits", ctx.bits(), wider.bits())],
    })
}
