//! Validated coefficient tables, their cache files and a shared store.

use std::collections::HashMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

use super::ell::{a_from_taylor, c_from_taylor, check_principal_part, ell_with_policy, PrecisionPolicy};
use super::powers::power_bound;
use super::taylor::{from_taylor_scale, stieltjes_from_taylor};
use crate::error::{Error, Result};
use crate::mp::encoding::{from_hex_parts, to_decimal, to_hex_parts};
use crate::mp::precision::decimal_digits_for_bits;
use crate::mp::PrecisionCtx;

const CACHE_VERSION: u32 = 1;
const CACHE_MAGIC: &str = "zeta-fourier-coefficients";

/// Every coefficient family for one k at one precision.
#[derive(Clone, Debug, PartialEq)]
pub struct CoefficientTable {
    pub k: u32,
    pub prec_bits: u32,
    pub jmax: usize,
    pub nmax: usize,
    /// λ_{j,k}, j = 0..=jmax.
    pub lambda: Vec<Float>,
    /// ℓ_{n,k}, n = -k..=nmax, at index n + k.
    pub ell: Vec<Float>,
    /// a_{j,k}, j = 0..k-1.
    pub a: Vec<Float>,
    /// c_{n,k}, n = 0..k-1.
    pub c: Vec<Float>,
    /// γ_j, j = 0..=jmax, for k = 1; empty otherwise.
    pub gamma: Vec<Float>,
}

impl CoefficientTable {
    /// Build and validate the table for ℓ_{n,k}, n ≤ nmax, and λ_{j,k}, j ≤ jmax.
    pub fn build(k: u32, nmax: usize, jmax: usize, ctx: &PrecisionCtx) -> Result<Self> {
        Self::build_with_policy(k, nmax, jmax, ctx, PrecisionPolicy::Auto)
    }

    pub fn build_with_policy(
        k: u32,
        nmax: usize,
        jmax: usize,
        ctx: &PrecisionCtx,
        policy: PrecisionPolicy,
    ) -> Result<Self> {
        let jlen = jmax.max(k as usize) + 1;
        let e = ell_with_policy(nmax, k, jlen, ctx, policy)?;
        let tk = &e.taylor_k;
        let tol = 2f64.powi(-(ctx.bits() as i32 - 16));
        let a = a_from_taylor(tk, k);
        let c = c_from_taylor(tk, k);
        check_principal_part(&e.values[..=k as usize], &a, &c, tk, k, tol)?;

        let lambda = from_taylor_scale(&tk[..=jmax]);
        let gamma = if k == 1 {
            stieltjes_from_taylor(&e.taylor[..=jmax + 1])
        } else {
            Vec::new()
        };
        let table = CoefficientTable {
            k,
            prec_bits: ctx.bits(),
            jmax,
            nmax,
            lambda,
            ell: e.values,
            a,
            c,
            gamma,
        };
        table.check_invariants(&e.taylor[1], tk)?;
        Ok(table)
    }

    fn check_invariants(&self, gamma0: &Float, tk: &[Float]) -> Result<()> {
        if self.lambda[0] != 1 {
            return Err(Error::consistency("λ_{0,k} = 1", (self.lambda[0].to_f64() - 1.0).abs(), 0.0));
        }
        let sign = if self.k % 2 == 0 { 1 } else { -1 };
        if self.ell[0] != sign {
            return Err(Error::consistency("ℓ_{-k,k} = (-1)^k", (self.ell[0].to_f64() - sign as f64).abs(), 0.0));
        }
        let p = gamma0.prec();
        let slack = Float::with_val(p, Float::i_exp(1, -(self.prec_bits as i32))) + 1u32;
        for (j, t) in tk.iter().enumerate().take(self.jmax + 1) {
            let bound = power_bound(j, self.k, gamma0) * &slack;
            if Float::with_val(p, t.abs_ref()) > bound {
                return Err(Error::consistency(
                    format!("|λ_{{{j},{}}}|/{j}! bound", self.k),
                    t.to_f64().abs(),
                    bound.to_f64(),
                ));
            }
        }
        Ok(())
    }

    /// ℓ_{n,k} for -k ≤ n ≤ nmax.
    pub fn ell_at(&self, n: i64) -> &Float {
        &self.ell[(n + self.k as i64) as usize]
    }

    /// ℓ_{0,k}, ..., ℓ_{nmax,k}.
    pub fn ell_nonnegative(&self) -> &[Float] {
        &self.ell[self.k as usize..]
    }

    pub fn cache_file_name(k: u32, jmax: usize, nmax: usize, bits: u32) -> String {
        format!("coeffs-k{k}-j{jmax}-n{nmax}-b{bits}.txt")
    }

    fn header(&self) -> String {
        let prec = self.ell[0].prec();
        format!(
            "{CACHE_MAGIC} v{CACHE_VERSION} k={} jmax={} nmax={} bits={} prec={prec}",
            self.k, self.jmax, self.nmax, self.prec_bits
        )
    }

    /// Text form: header line, then `family index hex-mantissa exponent decimal`.
    pub fn to_cache_string(&self) -> Result<String> {
        let digits = decimal_digits_for_bits(self.prec_bits);
        let mut out = self.header();
        out.push('\n');
        let families: [(&str, &[Float], i64); 5] = [
            ("lambda", &self.lambda, 0),
            ("ell", &self.ell, -(self.k as i64)),
            ("a", &self.a, 0),
            ("c", &self.c, 0),
            ("gamma", &self.gamma, 0),
        ];
        for (name, values, offset) in families {
            for (i, v) in values.iter().enumerate() {
                let (m, e) = to_hex_parts(v)?;
                out.push_str(&format!("{name} {} {m} {e} {}\n", i as i64 + offset, to_decimal(v, digits)));
            }
        }
        Ok(out)
    }

    pub fn write_cache(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let name = Self::cache_file_name(self.k, self.jmax, self.nmax, self.prec_bits);
        let path = dir.join(&name);
        let tmp = dir.join(format!(".{name}.{}.tmp", std::process::id()));
        {
            let mut f = fs::File::create(&tmp)?;
            f.write_all(self.to_cache_string()?.as_bytes())?;
            f.sync_all()?;
        }
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    pub fn read_cache(path: &Path) -> Result<Self> {
        let f = fs::File::open(path)?;
        let mut lines = BufReader::new(f).lines();
        let header = lines.next().ok_or_else(|| Error::Format("empty cache file".into()))??;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 7 || fields[0] != CACHE_MAGIC || fields[1] != format!("v{CACHE_VERSION}") {
            return Err(Error::Format(format!("unrecognised header {header:?}")));
        }
        let field = |i: usize, key: &str| -> Result<u64> {
            fields[i]
                .strip_prefix(key)
                .and_then(|v| v.strip_prefix('='))
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| Error::Format(format!("header field {key} in {header:?}")))
        };
        let k = field(2, "k")? as u32;
        let jmax = field(3, "jmax")? as usize;
        let nmax = field(4, "nmax")? as usize;
        let bits = field(5, "bits")? as u32;
        let prec = field(6, "prec")? as u32;
        if k == 0 {
            return Err(Error::Format("k = 0 in cache header".into()));
        }
        let mut table = CoefficientTable {
            k,
            prec_bits: bits,
            jmax,
            nmax,
            lambda: Vec::new(),
            ell: Vec::new(),
            a: Vec::new(),
            c: Vec::new(),
            gamma: Vec::new(),
        };
        for line in lines {
            let line = line?;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 5 {
                return Err(Error::Format(format!("malformed record {line:?}")));
            }
            let idx: i64 = parts[1].parse().map_err(|_| Error::Format(format!("index in {line:?}")))?;
            let exp: i64 = parts[3].parse().map_err(|_| Error::Format(format!("exponent in {line:?}")))?;
            let v = from_hex_parts(parts[2], exp, prec)?;
            let (target, offset) = match parts[0] {
                "lambda" => (&mut table.lambda, 0),
                "ell" => (&mut table.ell, -(k as i64)),
                "a" => (&mut table.a, 0),
                "c" => (&mut table.c, 0),
                "gamma" => (&mut table.gamma, 0),
                other => return Err(Error::Format(format!("unknown family {other:?}"))),
            };
            if idx - offset != target.len() as i64 {
                return Err(Error::Format(format!("out-of-order record {line:?}")));
            }
            target.push(v);
        }
        let expect_gamma = if k == 1 { jmax + 1 } else { 0 };
        if table.lambda.len() != jmax + 1
            || table.ell.len() != nmax + k as usize + 1
            || table.a.len() != k as usize
            || table.c.len() != k as usize
            || table.gamma.len() != expect_gamma
        {
            return Err(Error::Format(format!("truncated cache file {}", path.display())));
        }
        Ok(table)
    }
}

type Slot = Arc<Mutex<Option<Arc<CoefficientTable>>>>;

/// Shared, build-once store of tables keyed by (k, jmax, nmax, bits), with
/// an optional cache directory behind it. Tables at other precisions are
/// never substituted.
#[derive(Debug, Default)]
pub struct TableStore {
    dir: Option<PathBuf>,
    slots: Mutex<HashMap<(u32, usize, usize, u32), Slot>>,
}

impl TableStore {
    pub fn new(dir: Option<PathBuf>) -> Self {
        Self {
            dir,
            slots: Mutex::new(HashMap::new()),
        }
    }

    /// Process-wide in-memory store without a cache directory.
    pub fn global() -> &'static TableStore {
        static STORE: OnceLock<TableStore> = OnceLock::new();
        STORE.get_or_init(TableStore::default)
    }

    pub fn get(&self, k: u32, nmax: usize, jmax: usize, ctx: &PrecisionCtx) -> Result<Arc<CoefficientTable>> {
        if k == 0 {
            return Err(Error::domain("k must be at least 1"));
        }
        let key = (k, jmax, nmax, ctx.bits());
        let slot = self.slots.lock().expect("store lock").entry(key).or_default().clone();
        // one builder per key; other keys proceed in parallel
        let mut guard = slot.lock().expect("slot lock");
        if let Some(t) = guard.as_ref() {
            return Ok(t.clone());
        }
        let path = self
            .dir
            .as_ref()
            .map(|d| d.join(CoefficientTable::cache_file_name(k, jmax, nmax, ctx.bits())));
        let from_disk = path.as_ref().filter(|p| p.exists()).and_then(|p| CoefficientTable::read_cache(p).ok());
        let table = match from_disk {
            Some(t) if t.k == k && t.jmax == jmax && t.nmax == nmax && t.prec_bits == ctx.bits() => t,
            _ => {
                let t = CoefficientTable::build(k, nmax, jmax, ctx)?;
                if let Some(dir) = &self.dir {
                    t.write_cache(dir)?;
                }
                t
            }
        };
        let table = Arc::new(table);
        *guard = Some(table.clone());
        Ok(table)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(bits: u32) -> PrecisionCtx {
        PrecisionCtx::new(bits).unwrap()
    }

    #[test]
    fn cache_round_trip_is_bit_exact() {
        let t = CoefficientTable::build(2, 30, 12, &ctx(128)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = t.write_cache(dir.path()).unwrap();
        let back = CoefficientTable::read_cache(&path).unwrap();
        assert_eq!(t, back);
        for (x, y) in t.ell.iter().zip(&back.ell) {
            assert_eq!(x.prec(), y.prec());
        }
        let text = fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("zeta-fourier-coefficients v1 k=2 jmax=12 nmax=30 bits=128"));
    }

    #[test]
    fn corrupted_cache_is_rejected() {
        let t = CoefficientTable::build(1, 10, 5, &ctx(64)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = t.write_cache(dir.path()).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(5).map(|l| format!("{l}\n")).collect();
        fs::write(&path, cut).unwrap();
        assert!(matches!(CoefficientTable::read_cache(&path), Err(Error::Format(_))));
        fs::write(&path, text.replace("v1", "v9")).unwrap();
        assert!(matches!(CoefficientTable::read_cache(&path), Err(Error::Format(_))));
    }

    #[test]
    fn table_contents() {
        let t = CoefficientTable::build(1, 20, 8, &ctx(128)).unwrap();
        assert_eq!(t.lambda.len(), 9);
        assert_eq!(t.gamma.len(), 9);
        assert_eq!(*t.ell_at(-1), -1);
        assert_eq!(t.ell_nonnegative().len(), 21);
        assert!((t.gamma[0].to_f64() - 0.5772156649015329).abs() < 1e-15);
        assert!((t.lambda[1].to_f64() - 0.5772156649015329).abs() < 1e-15);
        assert_eq!(t.a[0], 1);
        assert_eq!(t.c[0], 1);
        let t2 = CoefficientTable::build(3, 5, 2, &ctx(64)).unwrap();
        assert!(t2.gamma.is_empty());
        assert_eq!(t2.a.len(), 3);
    }

    #[test]
    fn store_reuses_disk_cache_and_keys_by_precision() {
        let dir = tempfile::tempdir().unwrap();
        let store = TableStore::new(Some(dir.path().to_path_buf()));
        let a = store.get(1, 15, 4, &ctx(96)).unwrap();
        let again = store.get(1, 15, 4, &ctx(96)).unwrap();
        assert!(Arc::ptr_eq(&a, &again));
        let other = store.get(1, 15, 4, &ctx(128)).unwrap();
        assert_eq!(other.prec_bits, 128);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 2);
        // a fresh store loads the same bits from disk
        let fresh = TableStore::new(Some(dir.path().to_path_buf()));
        assert_eq!(*fresh.get(1, 15, 4, &ctx(96)).unwrap(), *a);
    }
}
