mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rug::Float;
use serde::Serialize;
use zeta_fourier::coefficients::{stieltjes, TableStore};
use zeta_fourier::divisor::DivisorSieve;
use zeta_fourier::series::{hardy_coefficient_sum, hardy_default_terms};
use zeta_fourier::transforms::{
    phi_grid_integral, phi_grid_series, phi_partial_l2_distance, psi_grid, Method, TransformGrid,
};
use zeta_fourier::{Error, PrecisionCtx};
use zeta_fourier_verify::{run_criterion, select, CriterionReport, Session, VerifyOptions};

use output::{csv_field, decimal, json, Number, COEFFS_SCHEMA, GRID_SCHEMA, VERIFY_SCHEMA};

const EXIT_VERIFY_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(name = "zeta-fourier", version, about = "Fourier coefficients of ζ^k, divisor error terms and their transforms")]
struct Cli {
    /// Target precision in bits (each command has its own default).
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(16..=1_000_000))]
    bits: Option<u32>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Directory for coefficient tables and divisor sieves.
    #[arg(long, global = true, env = "ZETA_FOURIER_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    /// Seed for randomized sample points.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Emit coefficient tables: ℓ_{n,k}, λ_{j,k}, γ_j, a_{j,k}, c_{n,k}.
    Coeffs(CoeffsArgs),
    /// Run the acceptance checks and report each criterion.
    Verify(VerifyArgs),
    /// Sweep a transform over a parameter axis.
    Grid(GridArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Family {
    Ell,
    Lambda,
    Gamma,
    A,
    C,
    All,
}

#[derive(Args)]
struct CoeffsArgs {
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=64))]
    k: u32,
    /// Largest n for ℓ_{n,k}.
    #[arg(long, default_value_t = 50)]
    nmax: usize,
    /// Largest j for λ_{j,k} and γ_j.
    #[arg(long, default_value_t = 20)]
    jmax: usize,
    #[arg(long, value_enum, default_value_t = Family::Ell)]
    table: Family,
}

#[derive(Args)]
struct VerifyArgs {
    /// Criteria to run, by id (1-10) or name; all when absent.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum What {
    /// ψ_k(x, ρ) over --rho at one --x.
    Abel,
    /// φ_k(x) over --x.
    Phi,
    /// Σ ℓ²_{n-k,k} r^{2n} over --r.
    Hardy,
    /// L² distance between Δ_k and its Laguerre partial sums over --terms.
    Reconstruction,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum PhiMethod {
    Series,
    Integral,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long, value_enum)]
    what: What,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..=64))]
    k: u32,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    rho: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    r: Vec<f64>,
    /// Partial-sum lengths for the reconstruction grid.
    #[arg(long, value_delimiter = ',')]
    terms: Vec<usize>,
    /// Divisor sieve limit X for integral-based grids.
    #[arg(long, default_value_t = 10_000)]
    sieve_limit: u64,
    /// Route for φ_k.
    #[arg(long, value_enum, default_value_t = PhiMethod::Series)]
    method: PhiMethod,
}

/// Failure modes mapped to exit codes.
enum Failure {
    Usage(String),
    Numeric(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Numeric(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Coeffs(a) => coeffs(&cli, a),
        Command::Verify(a) => verify(&cli, a),
        Command::Grid(a) => grid(&cli, a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NUMERIC)
        }
    }
}

fn ctx(cli: &Cli, default_bits: u32) -> Result<PrecisionCtx, Failure> {
    Ok(PrecisionCtx::new(cli.bits.unwrap_or(default_bits))?)
}

#[derive(Serialize)]
struct CoeffEntry {
    family: &'static str,
    index: i64,
    value: Number,
}

#[derive(Serialize)]
struct CoeffsDoc {
    schema: &'static str,
    k: u32,
    bits: u32,
    nmax: usize,
    jmax: usize,
    coefficients: Vec<CoeffEntry>,
}

fn coeffs(cli: &Cli, a: &CoeffsArgs) -> Result<u8, Failure> {
    let ctx = ctx(cli, 128)?;
    let bits = ctx.bits();
    let store = TableStore::new(cli.cache_dir.clone());
    let table = store.get(a.k, a.nmax, a.jmax, &ctx)?;
    let gamma = if table.gamma.is_empty() { stieltjes(a.jmax, &ctx)? } else { table.gamma.clone() };
    let k = a.k as i64;
    let families: [(Family, &'static str, &[Float], i64); 5] = [
        (Family::Ell, "ell", &table.ell, -k),
        (Family::Lambda, "lambda", &table.lambda, 0),
        (Family::Gamma, "gamma", &gamma, 0),
        (Family::A, "a", &table.a, 0),
        (Family::C, "c", &table.c, 0),
    ];
    let mut entries = Vec::new();
    for (family, name, values, offset) in families {
        if a.table != Family::All && a.table != family {
            continue;
        }
        for (i, v) in values.iter().enumerate() {
            entries.push(CoeffEntry {
                family: name,
                index: i as i64 + offset,
                value: Number::new(v, bits)?,
            });
        }
    }
    let text = match cli.format {
        Format::Json => json(&CoeffsDoc {
            schema: COEFFS_SCHEMA,
            k: a.k,
            bits,
            nmax: a.nmax,
            jmax: a.jmax,
            coefficients: entries,
        }),
        Format::Csv => {
            let mut s = String::from("family,index,k,bits,digits,value\n");
            for e in &entries {
                s.push_str(&format!(
                    "{},{},{},{bits},{},{}\n",
                    e.family, e.index, a.k, e.value.digits, e.value.decimal
                ));
            }
            s
        }
    };
    print!("{text}");
    Ok(0)
}

#[derive(Serialize)]
struct VerifyDoc<'a> {
    schema: &'static str,
    passed: bool,
    criteria: &'a [CriterionReport],
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<u8, Failure> {
    let selected = select(&a.only).map_err(Failure::Usage)?;
    let session = Session::new(VerifyOptions {
        bits: cli.bits,
        cache_dir: cli.cache_dir.clone(),
        seed: cli.seed,
    });
    let mut reports = Vec::new();
    for c in selected {
        let r = run_criterion(c, &session);
        eprintln!("{}", r.line());
        reports.push(r);
    }
    let passed = reports.iter().all(|r| r.passed);
    let text = match cli.format {
        Format::Json => json(&VerifyDoc {
            schema: VERIFY_SCHEMA,
            passed,
            criteria: &reports,
        }),
        Format::Csv => {
            let mut s = String::from("id,name,criterion_passed,label,measured,tolerance,passed\n");
            for r in &reports {
                let head = format!("{},{},{}", r.id, r.name, r.passed);
                if let Some(e) = &r.error {
                    let label = format!("{} error: {}", e.kind, e.message);
                    s.push_str(&format!("{head},{},,,false\n", csv_field(&label)));
                }
                for m in &r.measurements {
                    let tol = m.tolerance.map(|t| format!("{t:e}")).unwrap_or_default();
                    s.push_str(&format!(
                        "{head},{},{:e},{tol},{}\n",
                        csv_field(&m.label),
                        m.measured,
                        m.passed
                    ));
                }
            }
            s
        }
    };
    print!("{text}");
    Ok(if passed { 0 } else { EXIT_VERIFY_FAILED })
}

fn floats(values: &[f64], prec: u32) -> Vec<Float> {
    values.iter().map(|v| Float::with_val(prec, *v)).collect()
}

fn require(values: &[f64], flag: &str, what: &str) -> Result<(), Failure> {
    if values.is_empty() {
        return Err(Failure::Usage(format!("--what {what} needs --{flag}")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Failure::Usage(format!("--{flag} values must be finite")));
    }
    Ok(())
}

fn sieve(cli: &Cli, k: u32, limit: u64) -> Result<DivisorSieve, Failure> {
    Ok(DivisorSieve::load_or_build(k, limit, cli.cache_dir.as_deref())?)
}

/// k-th column Σ_{n ≤ N} ℓ²_{n-k,k} r^{2n} with the window estimate of the
/// dropped terms.
fn hardy_grid(k: u32, rs: &[f64], ctx: &PrecisionCtx) -> Result<TransformGrid, Failure> {
    let terms: Vec<usize> = rs.iter().map(|&r| hardy_default_terms(k, r, ctx)).collect();
    let nmax = terms.iter().copied().max().unwrap_or(0);
    let table = TableStore::global().get(k, nmax, k as usize, ctx)?;
    let p = ctx.working();
    let mut values = Vec::new();
    let mut bounds = Vec::new();
    for (&r, &n) in rs.iter().zip(&terms) {
        values.push(hardy_coefficient_sum(&table, r, n, ctx)?);
        let last = table.ell_at(n as i64 - k as i64).to_f64();
        let r2 = r * r;
        bounds.push(Float::with_val(p, last * last * r2.powf(n as f64 + 1.0) / (1.0 - r2)));
    }
    Ok(TransformGrid::new(k, "r", floats(rs, p), values, bounds, Method::Series, false)?)
}

#[derive(Serialize)]
struct GridRow {
    axis: f64,
    value: Number,
    tail_bound: f64,
}

#[derive(Serialize)]
struct GridDoc {
    schema: &'static str,
    what: &'static str,
    k: u32,
    bits: u32,
    axis_name: &'static str,
    method: &'static str,
    tail_is_rigorous: bool,
    rows: Vec<GridRow>,
}

fn grid(cli: &Cli, a: &GridArgs) -> Result<u8, Failure> {
    let ctx = ctx(cli, 64)?;
    let p = ctx.working();
    let (what, g) = match a.what {
        What::Abel => {
            if a.x.len() != 1 {
                return Err(Failure::Usage("--what abel needs exactly one --x".into()));
            }
            require(&a.rho, "rho", "abel")?;
            let x = Float::with_val(p, a.x[0]);
            ("abel", psi_grid(&x, a.k, &floats(&a.rho, p), &ctx)?)
        }
        What::Phi => {
            require(&a.x, "x", "phi")?;
            let xs = floats(&a.x, p);
            let g = match a.method {
                PhiMethod::Series => phi_grid_series(a.k, &xs, &ctx)?,
                PhiMethod::Integral => phi_grid_integral(&sieve(cli, a.k, a.sieve_limit)?, &xs, &ctx)?,
            };
            ("phi", g)
        }
        What::Hardy => {
            require(&a.r, "r", "hardy")?;
            ("hardy", hardy_grid(a.k, &a.r, &ctx)?)
        }
        What::Reconstruction => {
            if a.terms.is_empty() {
                return Err(Failure::Usage("--what reconstruction needs --terms".into()));
            }
            let s = sieve(cli, a.k, a.sieve_limit)?;
            let mut values = Vec::new();
            let mut bounds = Vec::new();
            let mut rigorous = true;
            for &n in &a.terms {
                let d = phi_partial_l2_distance(a.k, n, &s, &ctx)?;
                values.push(d.distance);
                bounds.push(d.squared.tail_bound.clone());
                rigorous &= d.squared.tail_is_rigorous;
            }
            let axis = a.terms.iter().map(|&n| Float::with_val(p, n)).collect();
            (
                "reconstruction",
                TransformGrid::new(a.k, "terms", axis, values, bounds, Method::Integral, rigorous)?,
            )
        }
    };
    let bits = ctx.bits();
    let text = match cli.format {
        Format::Json => {
            let rows = g
                .axis
                .iter()
                .zip(&g.values)
                .zip(&g.tail_bounds)
                .map(|((x, v), b)| {
                    Ok(GridRow {
                        axis: x.to_f64(),
                        value: Number::new(v, bits)?,
                        tail_bound: b.to_f64(),
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            json(&GridDoc {
                schema: GRID_SCHEMA,
                what,
                k: g.k,
                bits,
                axis_name: g.axis_name,
                method: g.method.as_str(),
                tail_is_rigorous: g.tail_is_rigorous,
                rows,
            })
        }
        Format::Csv => {
            let mut s = format!("what,k,method,bits,{},value,tail_bound,tail_rigorous\n", g.axis_name);
            for ((x, v), b) in g.axis.iter().zip(&g.values).zip(&g.tail_bounds) {
                s.push_str(&format!(
                    "{what},{},{},{bits},{},{},{:e},{}\n",
                    g.k,
                    g.method.as_str(),
                    x.to_f64(),
                    decimal(v, bits),
                    b.to_f64(),
                    g.tail_is_rigorous
                ));
            }
            s
        }
    };
    print!("{text}");
    Ok(0)
}
