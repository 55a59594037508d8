//! Piltz divisor functions d_k(n), their summatory functions and the error
//! terms Δ_k(x) = Σ_{n ≤ x} d_k(n) - x P_k(log x).

pub(crate) mod integrals;

pub use integrals::{delta_norm_trunc, fourier_coeff_numeric, fourier_coeffs_numeric, TailReport};

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rug::Float;
use sha2::{Digest, Sha256};

use crate::coefficients::{a_coeffs, TableStore};
use crate::error::{Error, Result};
use crate::mp::{curly_laguerre, poly, PrecisionCtx};

/// Sieve blocks: each output block is filled independently.
const BLOCK: usize = 1 << 22;
const SIEVE_VERSION: u32 = 1;
const SIEVE_MAGIC: &str = "zeta-fourier-sieve";

/// Width of the summatory accumulator D_k(n).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AccumulatorWidth {
    U32,
    U64,
}

impl AccumulatorWidth {
    fn max(self) -> u64 {
        match self {
            AccumulatorWidth::U32 => u32::MAX as u64,
            AccumulatorWidth::U64 => u64::MAX,
        }
    }
}

/// d_k(n) and D_k(n) = Σ_{m ≤ n} d_k(m) for n ≤ limit (index n; index 0 is 0).
#[derive(Clone, Debug, PartialEq)]
pub struct DivisorSieve {
    pub k: u32,
    pub limit: u64,
    pub counts: Vec<u32>,
    pub prefix: Vec<u64>,
}

/// d_k(n) for n ≤ limit by k - 1 rounds of Dirichlet convolution with 1.
pub fn sieve_dk(k: u32, limit: u64) -> Result<DivisorSieve> {
    sieve_dk_with_width(k, limit, AccumulatorWidth::U64)
}

pub fn sieve_dk_with_width(k: u32, limit: u64, width: AccumulatorWidth) -> Result<DivisorSieve> {
    if k == 0 {
        return Err(Error::domain("k must be at least 1"));
    }
    if limit == 0 {
        return Err(Error::domain("sieve limit must be at least 1"));
    }
    let x = usize::try_from(limit).map_err(|_| Error::Capacity(format!("sieve limit {limit}")))?;
    let mut counts = vec![1u32; x + 1];
    counts[0] = 0;
    for _ in 1..k {
        counts = convolve_with_one(&counts)?;
    }
    let prefix = prefix_sums(&counts, width)?;
    Ok(DivisorSieve { k, limit, counts, prefix })
}

/// out(n) = Σ_{a | n} t(a), block by block.
fn convolve_with_one(t: &[u32]) -> Result<Vec<u32>> {
    let x = t.len() - 1;
    let mut out = vec![0u32; x + 1];
    out.par_chunks_mut(BLOCK)
        .enumerate()
        .try_for_each(|(b, chunk)| -> Result<()> {
            let lo = b * BLOCK;
            let hi = lo + chunk.len() - 1;
            for a in 1..=hi {
                let ta = t[a];
                if ta == 0 {
                    continue;
                }
                // first multiple of a in [lo, hi]
                let mut n = lo.div_ceil(a).max(1) * a;
                while n <= hi {
                    let slot = &mut chunk[n - lo];
                    *slot = slot
                        .checked_add(ta)
                        .ok_or_else(|| Error::Capacity(format!("d_k({n}) exceeds 32 bits")))?;
                    n += a;
                }
            }
            Ok(())
        })?;
    Ok(out)
}

fn prefix_sums(counts: &[u32], width: AccumulatorWidth) -> Result<Vec<u64>> {
    let mut prefix = Vec::with_capacity(counts.len());
    let mut acc: u64 = 0;
    for (n, &c) in counts.iter().enumerate() {
        acc = acc
            .checked_add(c as u64)
            .filter(|&v| v <= width.max())
            .ok_or_else(|| Error::Capacity(format!("D_k({n}) overflows the {width:?} accumulator")))?;
        prefix.push(acc);
    }
    Ok(prefix)
}

impl DivisorSieve {
    pub fn d(&self, n: u64) -> u32 {
        self.counts[n as usize]
    }

    /// D_k(n) = Σ_{m ≤ n} d_k(m).
    pub fn summatory(&self, n: u64) -> Result<u64> {
        if n > self.limit {
            return Err(Error::Range {
                value: n as f64,
                limit: self.limit,
            });
        }
        Ok(self.prefix[n as usize])
    }

    /// The same sieve cut down to a smaller limit.
    pub fn truncated(&self, limit: u64) -> Self {
        let limit = limit.min(self.limit);
        let end = limit as usize + 1;
        DivisorSieve {
            k: self.k,
            limit,
            counts: self.counts[..end].to_vec(),
            prefix: self.prefix[..end].to_vec(),
        }
    }

    pub fn cache_file_name(k: u32, limit: u64) -> String {
        format!("sieve-k{k}-x{limit}.bin")
    }

    fn checksum(counts: &[u32]) -> String {
        let mut h = Sha256::new();
        for c in counts {
            h.update(c.to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    /// Header line `magic vN k=.. limit=.. total=.. sha256=..`, then the
    /// counts d_k(0..=limit) as little-endian u32.
    pub fn write_cache(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let name = Self::cache_file_name(self.k, self.limit);
        let path = dir.join(&name);
        let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
        {
            let mut f = std::io::BufWriter::new(fs::File::create(&tmp)?);
            writeln!(
                f,
                "{SIEVE_MAGIC} v{SIEVE_VERSION} k={} limit={} total={} sha256={}",
                self.k,
                self.limit,
                self.prefix[self.limit as usize],
                Self::checksum(&self.counts)
            )?;
            for c in &self.counts {
                f.write_all(&c.to_le_bytes())?;
            }
            f.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        fs::File::open(path)?.read_to_end(&mut bytes)?;
        let nl = bytes
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| Error::Format("sieve cache has no header".into()))?;
        let header = std::str::from_utf8(&bytes[..nl]).map_err(|_| Error::Format("sieve header is not UTF-8".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 6 || fields[0] != SIEVE_MAGIC || fields[1] != format!("v{SIEVE_VERSION}") {
            return Err(Error::Format(format!("unrecognised sieve header {header:?}")));
        }
        let value = |i: usize, key: &str| -> Result<&str> {
            fields[i]
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .ok_or_else(|| Error::Format(format!("header field {key} in {header:?}")))
        };
        let parse = |s: &str| -> Result<u64> { s.parse().map_err(|_| Error::Format(format!("number {s:?}"))) };
        let k = parse(value(2, "k")?)? as u32;
        let limit = parse(value(3, "limit")?)?;
        let total = parse(value(4, "total")?)?;
        let sum = value(5, "sha256")?;
        let body = &bytes[nl + 1..];
        if body.len() as u64 != 4 * (limit + 1) || k == 0 {
            return Err(Error::Format(format!("sieve body has {} bytes for limit {limit}", body.len())));
        }
        let counts: Vec<u32> = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes([c[0], c[1], c[2], c[3]]))
            .collect();
        if Self::checksum(&counts) != sum {
            return Err(Error::Format("sieve checksum mismatch".into()));
        }
        let prefix = prefix_sums(&counts, AccumulatorWidth::U64)?;
        if prefix[limit as usize] != total {
            return Err(Error::Format("sieve total mismatch".into()));
        }
        Ok(DivisorSieve { k, limit, counts, prefix })
    }

    /// Load from `dir` if a valid cache file exists, otherwise sieve and write it.
    pub fn load_or_build(k: u32, limit: u64, dir: Option<&Path>) -> Result<Self> {
        if let Some(dir) = dir {
            let path = dir.join(Self::cache_file_name(k, limit));
            if path.exists() {
                if let Ok(s) = Self::read_cache(&path) {
                    if s.k == k && s.limit == limit {
                        return Ok(s);
                    }
                }
            }
            let s = sieve_dk(k, limit)?;
            s.write_cache(dir)?;
            return Ok(s);
        }
        sieve_dk(k, limit)
    }
}

/// P_k(u) = Σ_j a_{j,k} u^j / j! as a coefficient vector.
#[derive(Clone, Debug)]
pub struct MainTerm {
    pub k: u32,
    pub coeffs: Vec<Float>,
}

impl MainTerm {
    pub fn new(k: u32, ctx: &PrecisionCtx) -> Result<Self> {
        let a = a_coeffs(k, ctx)?;
        let mut fact = Float::with_val(ctx.working(), 1);
        let coeffs = a
            .iter()
            .enumerate()
            .map(|(j, aj)| {
                if j > 0 {
                    fact *= j as u32;
                }
                Float::with_val(ctx.working(), aj / &fact)
            })
            .collect();
        Ok(MainTerm { k, coeffs })
    }

    pub fn eval(&self, u: &Float) -> Float {
        poly::eval(&self.coeffs, u)
    }
}

/// P_k(u), the main-term polynomial of the divisor problem.
pub fn p_k_eval(k: u32, u: &Float, ctx: &PrecisionCtx) -> Result<Float> {
    Ok(MainTerm::new(k, ctx)?.eval(u))
}

/// Δ_k(x) = D_k(⌊x⌋) - x P_k(log x) for 1 ≤ x ≤ limit.
pub fn delta_k(x: &Float, sieve: &DivisorSieve, ctx: &PrecisionCtx) -> Result<Float> {
    delta_k_with(x, sieve, &MainTerm::new(sieve.k, ctx)?, ctx)
}

pub fn delta_k_with(x: &Float, sieve: &DivisorSieve, main: &MainTerm, ctx: &PrecisionCtx) -> Result<Float> {
    if !x.is_finite() || *x < 1 || *x > sieve.limit {
        return Err(Error::Range {
            value: x.to_f64(),
            limit: sieve.limit,
        });
    }
    let prec = ctx.working();
    let n = x.to_integer_round(rug::float::Round::Down).expect("finite").0;
    let d = sieve.summatory(n.to_u64().expect("within sieve"))?;
    let u = Float::with_val(prec, x.ln_ref());
    let mut v = Float::with_val(prec, d);
    v -= Float::with_val(prec, x * main.eval(&u));
    Ok(v)
}

/// Σ_{n ≤ terms} (-1)^n ℓ_{n,k} 𝓛_n(x).
pub fn laguerre_partial_reconstruction(x: &Float, k: u32, terms: usize, ctx: &PrecisionCtx) -> Result<Float> {
    let table = TableStore::global().get(k, terms, k as usize, ctx)?;
    let basis = crate::mp::laguerre::curly_laguerre_all(terms as u32, x, ctx)?;
    let mut acc = Float::with_val(ctx.working(), 0);
    for (n, b) in basis.iter().enumerate() {
        let term = Float::with_val(ctx.working(), table.ell_at(n as i64) * b);
        if n % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    Ok(acc)
}

/// 𝓛_n(x) re-exported for callers pairing reconstructions with Δ_k.
pub fn basis(n: u32, x: &Float, ctx: &PrecisionCtx) -> Result<Float> {
    curly_laguerre(n, x, ctx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mp::binomial;
    use crate::zeta::zeta_pow_ref;
    use crate::Complex;

    fn ctx() -> PrecisionCtx {
        PrecisionCtx::new(128).unwrap()
    }

    #[test]
    fn sieve_examples() {
        let s1 = sieve_dk(1, 100).unwrap();
        assert!((1..=100).all(|n| s1.d(n) == 1));
        assert_eq!(sieve_dk(2, 12).unwrap().d(12), 6);
        assert_eq!(sieve_dk(3, 4).unwrap().d(4), 6);
        assert_eq!(sieve_dk(4, 1).unwrap().d(1), 1);
    }

    #[test]
    fn prime_powers() {
        let s = sieve_dk(4, 5000).unwrap();
        for p in [2u64, 3, 5, 7, 11, 13] {
            let mut q = p;
            let mut m = 1;
            while q <= 5000 {
                assert_eq!(s.d(q) as u64, binomial(m + 3, 3).to_u64().unwrap(), "p={p} m={m}");
                q *= p;
                m += 1;
            }
        }
        // multiplicativity on coprime pairs
        assert_eq!(s.d(12 * 35), s.d(12) * s.d(35));
    }

    #[test]
    fn blocks_agree_with_naive_convolution() {
        let x = BLOCK + 1000;
        let s = sieve_dk(2, x as u64).unwrap();
        for n in [BLOCK - 1, BLOCK, BLOCK + 1, BLOCK + 999] {
            let naive = (1..=n).filter(|a| n % a == 0).count() as u32;
            assert_eq!(s.d(n as u64), naive);
        }
    }

    #[test]
    fn hyperbola_identity() {
        let x = 1_000_000u64;
        let s = sieve_dk(2, x).unwrap();
        let r = (x as f64).sqrt() as u64;
        let sum: u64 = (1..=r).map(|m| 2 * (x / m)).sum::<u64>() - r * r;
        assert_eq!(s.summatory(x).unwrap(), sum);
    }

    #[test]
    fn capacity_is_enforced() {
        let err = sieve_dk_with_width(8, 200_000, AccumulatorWidth::U32);
        assert!(matches!(err, Err(Error::Capacity(_))));
        assert!(sieve_dk_with_width(2, 1000, AccumulatorWidth::U32).is_ok());
    }

    #[test]
    fn dirichlet_series_at_three() {
        let c = ctx();
        let x = 200_000u64;
        for k in 1..=4u32 {
            let s = sieve_dk(k, x).unwrap();
            let mut acc = Float::with_val(c.working(), 0);
            for n in 1..=x {
                acc += Float::with_val(c.working(), s.d(n)) / Float::with_val(c.working(), n * n * n);
            }
            let want = zeta_pow_ref(&Complex::with_val(c.working(), 3, 0), k, &c).unwrap().value.re;
            // Σ_{n > X} d_k(n) n^-3 ≤ 3 ∫_X^∞ t (1 + ln t)^{k-1} t^-4 dt ≤ 2 (1 + ln X)^{k-1} / X²
            let tail = 2.0 * (1.0 + (x as f64).ln()).powi(k as i32 - 1) / (x as f64).powi(2);
            let d = Float::with_val(c.working(), &want - &acc).to_f64();
            assert!(d >= 0.0 && d <= tail, "k={k} d={d} tail={tail}");
        }
    }

    #[test]
    fn main_term_examples() {
        let c = ctx();
        let u = c.real(1.7);
        assert!(Float::with_val(c.working(), p_k_eval(1, &u, &c).unwrap() - 1u32).abs() < 1e-35);
        let g0 = crate::coefficients::stieltjes(0, &c).unwrap()[0].clone();
        let want = Float::with_val(c.working(), &u + Float::with_val(c.working(), &g0 * 2u32)) - 1u32;
        assert!(Float::with_val(c.working(), p_k_eval(2, &u, &c).unwrap() - want).abs() < 1e-35);
        let m3 = MainTerm::new(3, &c).unwrap();
        let a3 = a_coeffs(3, &c).unwrap();
        assert_eq!(m3.eval(&c.real(0)), a3[0]);
    }

    #[test]
    fn delta_examples() {
        let c = ctx();
        let s1 = sieve_dk(1, 100).unwrap();
        assert!(Float::with_val(c.working(), delta_k(&c.real(2.5), &s1, &c).unwrap() + 0.5).abs() < 1e-35);
        assert_eq!(delta_k(&c.real(1), &s1, &c).unwrap(), 0);
        assert!(matches!(delta_k(&c.real(101), &s1, &c), Err(Error::Range { .. })));
        let s2 = sieve_dk(2, 100).unwrap();
        assert_eq!(s2.summatory(10).unwrap(), 27);
        let d = delta_k(&c.real(10), &s2, &c).unwrap().to_f64();
        assert!((d - 2.4298357).abs() < 1e-6, "{d}");
    }

    #[test]
    fn cache_round_trip_and_corruption() {
        let s = sieve_dk(3, 10_000).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = s.write_cache(dir.path()).unwrap();
        assert_eq!(DivisorSieve::read_cache(&path).unwrap(), s);
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        fs::write(&path, &bytes).unwrap();
        assert!(matches!(DivisorSieve::read_cache(&path), Err(Error::Format(_))));
        // load_or_build replaces the corrupt file
        let again = DivisorSieve::load_or_build(3, 10_000, Some(dir.path())).unwrap();
        assert_eq!(again, s);
        assert_eq!(DivisorSieve::read_cache(&path).unwrap(), s);
    }

    #[test]
    fn reconstruction_examples() {
        let c = ctx();
        let table = TableStore::global().get(2, 30, 2, &c).unwrap();
        let one = c.real(1);
        let r0 = laguerre_partial_reconstruction(&c.real(7.3), 2, 0, &c).unwrap();
        assert_eq!(r0, *table.ell_at(0));
        let r = laguerre_partial_reconstruction(&one, 2, 30, &c).unwrap();
        let mut want = Float::with_val(c.working(), 0);
        for n in 0..=30 {
            if n % 2 == 0 {
                want += table.ell_at(n);
            } else {
                want -= table.ell_at(n);
            }
        }
        assert!(Float::with_val(c.working(), &r - &want).abs() < 1e-30);
    }
}
