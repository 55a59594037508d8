use std::process::{Command, Output};

use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeta-fourier"))
        .args(args)
        .env_remove("ZETA_FOURIER_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn coeffs_csv_has_header_and_one_row_per_coefficient() {
    let o = run(&["coeffs", "--k", "1", "--nmax", "50", "--bits", "256", "--format", "csv"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines[0], "family,index,k,bits,digits,value");
    // ℓ_{-1,1} through ℓ_{50,1}
    assert_eq!(lines.len(), 1 + 52);
    assert!(lines[1].starts_with("ell,-1,1,256,77,-1.000"));
    assert!(lines[2].starts_with("ell,0,1,256,77,-4.2278433509846713939"));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["coeffs", "--k", "0"]).status.code(), Some(2));
    assert_eq!(run(&["coeffs", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["verify", "--only", "nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["grid", "--what", "abel", "--x", "2"]).status.code(), Some(2));
}

#[test]
fn numeric_errors_exit_with_three() {
    // ψ needs x ≥ 1
    let o = run(&["grid", "--what", "abel", "--x", "0.5", "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(!o.stderr.is_empty());
}

#[test]
fn warm_cache_reproduces_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let args = ["coeffs", "--k", "2", "--nmax", "30", "--jmax", "10", "--table", "all", "--format", "json", "--cache-dir", d];
    let cold = run(&args);
    assert!(cold.status.success());
    assert!(std::fs::read_dir(dir.path()).unwrap().count() > 0, "cache written");
    let warm = run(&args);
    assert_eq!(cold.stdout, warm.stdout);
    let uncached = run(&args[..args.len() - 2]);
    assert_eq!(cold.stdout, uncached.stdout);
}

#[test]
fn json_carries_schema_and_exact_parts() {
    let o = run(&["coeffs", "--k", "1", "--nmax", "3", "--bits", "128", "--table", "all", "--format", "json"]);
    let v = json(&o);
    assert_eq!(v["schema"], "zeta-fourier/coeffs/v1");
    assert_eq!(v["bits"], 128);
    let entries = v["coefficients"].as_array().unwrap();
    for family in ["ell", "lambda", "gamma", "a", "c"] {
        assert!(entries.iter().any(|e| e["family"] == family), "{family}");
    }
    for e in entries {
        let n = &e["value"];
        assert_eq!(n["digits"], 38);
        let mant = n["hex_mantissa"].as_str().unwrap();
        assert!(mant == "0" || mant.trim_start_matches('-').len() <= 32);
        // mantissa · 2^exponent agrees with the decimal rendering
        let (sign, digits) = mant.strip_prefix('-').map_or((1.0, mant), |d| (-1.0, d));
        let m = sign * u128::from_str_radix(digits, 16).unwrap() as f64;
        let x = m * 2f64.powi(n["exponent"].as_i64().unwrap() as i32);
        let d: f64 = n["decimal"].as_str().unwrap().parse().unwrap();
        assert!((x - d).abs() <= 1e-15 * d.abs().max(1e-300), "{e}");
    }
}

#[test]
fn verify_under_precision_is_a_structured_failure() {
    let o = run(&["verify", "--only", "coefficients", "--bits", "64", "--format", "json"]);
    assert_eq!(o.status.code(), Some(1));
    let v = json(&o);
    assert_eq!(v["schema"], "zeta-fourier/verify/v1");
    assert_eq!(v["passed"], false);
    let c = &v["criteria"][0];
    assert_eq!(c["name"], "coefficients");
    assert_eq!(c["error"]["kind"], "consistency");
}

#[test]
fn verify_only_runs_the_named_criteria() {
    let o = run(&["verify", "--only", "laguerre,10", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let ids: Vec<_> = v["criteria"].as_array().unwrap().iter().map(|c| c["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, vec![9, 10]);
    assert_eq!(v["passed"], true);
}

#[test]
fn verify_output_is_deterministic() {
    let a = run(&["verify", "--only", "laguerre", "--seed", "7"]);
    let b = run(&["verify", "--only", "laguerre", "--seed", "7"]);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).starts_with("id,name,criterion_passed,label,measured,tolerance,passed\n"));
}

#[test]
fn abel_grid_has_one_row_per_radius() {
    let o = run(&["grid", "--what", "abel", "--k", "1", "--x", "2.5", "--rho", "0.9,0.99,0.999"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].contains(",rho,value,"));
    let last: f64 = lines[3].split(',').nth(5).unwrap().parse().unwrap();
    assert!((last + 0.5).abs() < 0.05);
}

#[test]
fn hardy_grid_at_the_origin_is_one() {
    let o = run(&["grid", "--what", "hardy", "--k", "1", "--r", "0.0", "--format", "json"]);
    let v = json(&o);
    let value = &v["rows"][0]["value"];
    assert_eq!(value["hex_mantissa"], "8000000000000000");
    assert_eq!(value["exponent"], -63);
}

#[test]
fn phi_at_zero_is_the_leading_coefficient() {
    let phi = json(&run(&["grid", "--what", "phi", "--k", "2", "--x", "0", "--format", "json"]));
    let coeffs = json(&run(&["coeffs", "--k", "2", "--nmax", "2", "--bits", "64", "--format", "json"]));
    let ell0 = coeffs["coefficients"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["index"] == 0)
        .unwrap();
    assert_eq!(phi["rows"][0]["value"], ell0["value"]);
}

#[test]
fn reconstruction_distance_shrinks() {
    let o = run(&["grid", "--what", "reconstruction", "--k", "1", "--terms", "0,10,40", "--sieve-limit", "2000"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let values: Vec<f64> = text.lines().skip(1).map(|l| l.split(',').nth(5).unwrap().parse().unwrap()).collect();
    assert_eq!(values.len(), 3);
    assert!(values[0] > values[1] && values[1] > values[2], "{values:?}");
}
