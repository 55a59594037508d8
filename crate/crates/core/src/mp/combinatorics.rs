use std::sync::{OnceLock, RwLock};

use rug::{Float, Integer, Rational};

/// Binomial coefficient with the convention that it vanishes unless
/// `0 <= i <= n`.
pub fn binomial(n: i64, i: i64) -> Integer {
    if n < 0 || i < 0 || i > n {
        return Integer::new();
    }
    let i = i.min(n - i);
    Integer::from(n as u64).binomial(i as u32)
}

/// Binomial coefficient as a float at `prec` bits (exact when it fits).
pub fn binomial_float(n: i64, i: i64, prec: u32) -> Float {
    Float::with_val(prec, binomial(n, i))
}

/// Row `C(n, 0..=n)` as integers.
pub fn binomial_row(n: u32) -> Vec<Integer> {
    let mut row = Vec::with_capacity(n as usize + 1);
    let mut c = Integer::from(1);
    row.push(c.clone());
    for i in 0..n {
        c *= n - i;
        c /= i + 1;
        row.push(c.clone());
    }
    row
}

/// Even-index Bernoulli numbers B_0, B_2, B_4, ... computed so far.
fn even_table() -> &'static RwLock<Vec<Rational>> {
    static TABLE: OnceLock<RwLock<Vec<Rational>>> = OnceLock::new();
    TABLE.get_or_init(|| RwLock::new(vec![Rational::from(1)]))
}

/// Tangent numbers T_1..T_n (Brent–Harvey in-place recurrence).
fn tangent_numbers(n: usize) -> Vec<Integer> {
    let mut t = vec![Integer::new(); n + 1];
    if n == 0 {
        return t;
    }
    t[1] = Integer::from(1);
    for k in 2..=n {
        let prev = Integer::from(&t[k - 1] * (k as u64 - 1));
        t[k] = prev;
    }
    for k in 2..=n {
        for j in k..=n {
            let a = Integer::from(&t[j - 1] * (j as u64 - k as u64));
            let b = Integer::from(&t[j] * (j as u64 - k as u64 + 2));
            t[j] = a + b;
        }
    }
    t
}

fn extend_even_table(upto: usize) {
    let table = even_table();
    if table.read().unwrap().len() > upto {
        return;
    }
    let mut w = table.write().unwrap();
    if w.len() > upto {
        return;
    }
    let n = upto.max(2 * (w.len() - 1)).max(8);
    let t = tangent_numbers(n);
    let mut out = Vec::with_capacity(n + 1);
    out.push(Rational::from(1));
    for (k, tk) in t.iter().enumerate().skip(1) {
        let four_k = Integer::from(1) << (2 * k as u32);
        let den = Integer::from(&four_k - 1u32) * four_k;
        let mut num = Integer::from(tk * (2 * k as u64));
        if k % 2 == 0 {
            num = -num;
        }
        out.push(Rational::from((num, den)));
    }
    *w = out;
}

/// Exact Bernoulli number B_m with B_1 = -1/2. Results are cached in a
/// process-wide append-only table.
pub fn bernoulli(m: u32) -> Rational {
    match m {
        0 => Rational::from(1),
        1 => Rational::from((-1, 2)),
        _ if m % 2 == 1 => Rational::new(),
        _ => {
            let k = (m / 2) as usize;
            extend_even_table(k);
            even_table().read().unwrap()[k].clone()
        }
    }
}

/// B_{2m} / (2m)! for m = 1..=count, as floats.
pub fn bernoulli_over_factorial(count: usize, prec: u32) -> Vec<Float> {
    extend_even_table(count);
    let table = even_table().read().unwrap();
    let mut fact = Integer::from(1);
    let mut out = Vec::with_capacity(count);
    for m in 1..=count {
        fact *= (2 * m - 1) as u64;
        fact *= (2 * m) as u64;
        let q = Rational::from(&table[m] / &fact);
        out.push(Float::with_val(prec, &q));
    }
    out
}

/// log2 |B_{2m}/(2m)!| for m >= 1, from |B_{2m}|/(2m)! = 2 zeta(2m) / (2 pi)^{2m}.
pub fn log2_bernoulli_over_factorial(m: u32) -> f64 {
    let two_m = 2.0 * m as f64;
    let zeta: f64 = (1..=64).map(|n| (n as f64).powf(-two_m)).sum::<f64>() + 64f64.powf(1.0 - two_m) / (two_m - 1.0);
    1.0 + zeta.log2() - two_m * (2.0 * std::f64::consts::PI).log2()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(3, 1), 3);
        assert_eq!(binomial(2, 5), 0);
        assert_eq!(binomial(0, 0), 1);
        assert_eq!(binomial(-1, 0), 0);
        assert_eq!(binomial(5, -1), 0);
        assert_eq!(binomial(40, 20), Integer::from(137_846_528_820u64));
    }

    #[test]
    fn pascal_identity_under_extended_convention() {
        // C(n-1, j-1) + C(n-1, j) = C(n, j) holds for every integer pair
        // except n = j = 0, where the left side is 0.
        for n in -5..=50i64 {
            for j in -5..=50i64 {
                let lhs = binomial(n - 1, j - 1) + binomial(n - 1, j);
                let rhs = binomial(n, j);
                if n == 0 && j == 0 {
                    assert_eq!(lhs, 0);
                    assert_eq!(rhs, 1);
                } else {
                    assert_eq!(lhs, rhs, "n={n} j={j}");
                }
            }
        }
    }

    #[test]
    fn printed_pascal_variant_is_not_an_identity() {
        // C(n-1, j-1) + C(n, j-1) differs from C(n, j) already at (3, 1).
        assert_ne!(binomial(2, 0) + binomial(3, 0), binomial(3, 1));
    }

    #[test]
    fn binomial_row_matches_pointwise() {
        for (i, c) in binomial_row(30).iter().enumerate() {
            assert_eq!(*c, binomial(30, i as i64));
        }
    }

    /// B_m from the defining recurrence sum_{j<=m} C(m+1, j) B_j = 0.
    fn bernoulli_by_recurrence(n: usize) -> Vec<Rational> {
        let mut b = vec![Rational::from(1)];
        for m in 1..=n {
            let mut s = Rational::new();
            for (j, bj) in b.iter().enumerate() {
                s += Rational::from(bj * binomial(m as i64 + 1, j as i64));
            }
            b.push(-s / Integer::from(m + 1));
        }
        b
    }

    #[test]
    fn bernoulli_examples() {
        assert_eq!(bernoulli(0), 1);
        assert_eq!(bernoulli(1), Rational::from((-1, 2)));
        assert_eq!(bernoulli(2), Rational::from((1, 6)));
        assert_eq!(bernoulli(3), 0);
    }

    #[test]
    fn bernoulli_matches_recurrence_oracle() {
        let oracle = bernoulli_by_recurrence(80);
        for (m, b) in oracle.iter().enumerate() {
            assert_eq!(bernoulli(m as u32), *b, "B_{m}");
        }
    }

    #[test]
    fn bernoulli_cache_is_consistent_across_threads() {
        let handles: Vec<_> = (0..4)
            .map(|t| std::thread::spawn(move || bernoulli(100 + 20 * t)))
            .collect();
        let got: Vec<_> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        for (t, b) in got.iter().enumerate() {
            assert_eq!(*b, bernoulli(100 + 20 * t as u32));
        }
        // sign of B_{2m} is (-1)^{m+1}
        assert!(got[0] < 0);
        assert!(bernoulli(102) > 0);
    }

    #[test]
    fn bernoulli_magnitude_estimate() {
        let v = bernoulli_over_factorial(40, 128);
        for (i, x) in v.iter().enumerate() {
            let m = i as u32 + 1;
            let (mant, e) = x.to_f64_exp();
            let l = mant.abs().log2() + e as f64;
            assert!((l - log2_bernoulli_over_factorial(m)).abs() < 0.05, "m={m}");
        }
    }

    proptest! {
        #[test]
        fn binomial_symmetry(n in 0i64..200, i in 0i64..200) {
            prop_assume!(i <= n);
            prop_assert_eq!(binomial(n, i), binomial(n, n - i));
        }
    }
}
