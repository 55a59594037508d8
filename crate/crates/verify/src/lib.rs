//! Acceptance checks: each criterion compares a library route against an
//! independent oracle at a stated tolerance and reports what it measured.

mod criteria;
pub mod oracles;

use std::collections::HashMap;
use std::path::PathBuf;
use std::sync::{Arc, Mutex};
use std::time::Instant;

use serde::Serialize;
use zeta_fourier::divisor::DivisorSieve;
use zeta_fourier::{Error, PrecisionCtx, Result};

/// One compared quantity. `tolerance` is `None` for reported values that
/// are not checked against a threshold.
#[derive(Clone, Debug, Serialize)]
pub struct Measurement {
    pub label: String,
    pub measured: f64,
    pub tolerance: Option<f64>,
    pub passed: bool,
}

impl Measurement {
    /// Passes when `measured <= tolerance` (NaN fails).
    pub fn at_most(label: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Measurement {
            label: label.into(),
            measured,
            tolerance: Some(tolerance),
            passed: measured <= tolerance,
        }
    }

    pub fn reported(label: impl Into<String>, measured: f64) -> Self {
        Measurement {
            label: label.into(),
            measured,
            tolerance: None,
            passed: measured.is_finite(),
        }
    }

    pub fn failed(label: impl Into<String>, tolerance: f64) -> Self {
        Measurement {
            label: label.into(),
            measured: f64::INFINITY,
            tolerance: Some(tolerance),
            passed: false,
        }
    }

    /// measured / tolerance, the quantity the summary line ranks by.
    fn ratio(&self) -> f64 {
        match self.tolerance {
            Some(t) if t > 0.0 => self.measured / t,
            _ => 0.0,
        }
    }
}

/// An error raised by the library while a criterion ran.
#[derive(Clone, Debug, Serialize)]
pub struct Failure {
    pub kind: &'static str,
    pub message: String,
}

impl From<&Error> for Failure {
    fn from(e: &Error) -> Self {
        let kind = match e {
            Error::NegativeArgument(_) | Error::Domain(_) | Error::Pole => "domain",
            Error::NoConvergence(_) => "no_convergence",
            Error::Consistency { .. } => "consistency",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::Range { .. } => "range",
            Error::Capacity(_) => "capacity",
            Error::NonFinite(_) => "non_finite",
            Error::Format(_) => "format",
            Error::Io(_) => "io",
        };
        Failure {
            kind,
            message: e.to_string(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CriterionReport {
    pub id: u8,
    pub name: &'static str,
    pub description: &'static str,
    pub passed: bool,
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
    pub error: Option<Failure>,
    /// Wall time; left out of serialized output so reports are reproducible.
    #[serde(skip)]
    pub seconds: f64,
}

impl CriterionReport {
    /// Worst measurement relative to its tolerance, or the first failure.
    pub fn headline(&self) -> Option<&Measurement> {
        self.measurements
            .iter()
            .find(|m| !m.passed)
            .or_else(|| self.measurements.iter().max_by(|a, b| a.ratio().total_cmp(&b.ratio())))
    }

    /// One line: verdict, id, name, worst measurement and wall time.
    pub fn line(&self) -> String {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        let detail = if let Some(e) = &self.error {
            format!("{} error: {}", e.kind, e.message)
        } else if let Some(m) = self.headline() {
            match m.tolerance {
                Some(t) => format!("{} = {:.3e} (tol {:.0e})", m.label, m.measured, t),
                None => format!("{} = {:.3e}", m.label, m.measured),
            }
        } else {
            "no measurements".to_string()
        };
        format!(
            "{verdict} [{:>2}] {:<12} {detail}  ({:.1} s)",
            self.id, self.name, self.seconds
        )
    }
}

/// Settings shared by all criteria.
#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    /// Overrides the working precision of every criterion.
    pub bits: Option<u32>,
    /// Directory for divisor sieve caches.
    pub cache_dir: Option<PathBuf>,
    /// Seed for randomized sample points.
    pub seed: u64,
}

/// Options plus the divisor sieves built so far.
pub struct Session {
    pub options: VerifyOptions,
    sieves: Mutex<HashMap<u32, Arc<DivisorSieve>>>,
}

impl Session {
    pub fn new(options: VerifyOptions) -> Self {
        Session {
            options,
            sieves: Mutex::new(HashMap::new()),
        }
    }

    pub fn ctx(&self, default_bits: u32) -> Result<PrecisionCtx> {
        PrecisionCtx::new(self.options.bits.unwrap_or(default_bits))
    }

    /// d_k sieve up to `limit`, cut from a larger one when available.
    pub fn sieve(&self, k: u32, limit: u64) -> Result<Arc<DivisorSieve>> {
        let mut map = self.sieves.lock().expect("sieve map");
        if let Some(s) = map.get(&k) {
            if s.limit == limit {
                return Ok(s.clone());
            }
            if s.limit > limit {
                return Ok(Arc::new(s.truncated(limit)));
            }
        }
        let s = Arc::new(DivisorSieve::load_or_build(k, limit, self.options.cache_dir.as_deref())?);
        map.insert(k, s.clone());
        Ok(s)
    }
}

/// What a criterion runner returns on success.
pub(crate) struct Outcome {
    pub measurements: Vec<Measurement>,
    pub notes: Vec<String>,
}

type Runner = fn(&Session) -> Result<Outcome>;

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub description: &'static str,
    run: Runner,
}

pub fn criteria() -> &'static [Criterion] {
    criteria::ALL
}

/// Criteria selected by id or name; an empty filter selects all.
pub fn select(only: &[String]) -> std::result::Result<Vec<&'static Criterion>, String> {
    if only.is_empty() {
        return Ok(criteria().iter().collect());
    }
    let mut out = Vec::new();
    for key in only {
        let c = criteria()
            .iter()
            .find(|c| c.name == key || c.id.to_string() == *key)
            .ok_or_else(|| {
                let names: Vec<_> = criteria().iter().map(|c| c.name).collect();
                format!("unknown criterion {key:?}; expected an id 1-10 or one of {}", names.join(", "))
            })?;
        if !out.iter().any(|o: &&Criterion| o.id == c.id) {
            out.push(c);
        }
    }
    out.sort_by_key(|c| c.id);
    Ok(out)
}

pub fn run_criterion(c: &Criterion, session: &Session) -> CriterionReport {
    let start = Instant::now();
    let result = (c.run)(session);
    let seconds = start.elapsed().as_secs_f64();
    match result {
        Ok(o) => CriterionReport {
            id: c.id,
            name: c.name,
            description: c.description,
            passed: !o.measurements.is_empty() && o.measurements.iter().all(|m| m.passed),
            measurements: o.measurements,
            notes: o.notes,
            error: None,
            seconds,
        },
        Err(e) => CriterionReport {
            id: c.id,
            name: c.name,
            description: c.description,
            passed: false,
            measurements: Vec::new(),
            notes: Vec::new(),
            error: Some(Failure::from(&e)),
            seconds,
        },
    }
}

pub fn run_selected(selected: &[&Criterion], session: &Session) -> Vec<CriterionReport> {
    selected.iter().map(|c| run_criterion(c, session)).collect()
}
