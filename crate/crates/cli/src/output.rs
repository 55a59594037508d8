//! CSV and versioned JSON rendering.

use rug::Float;
use serde::Serialize;
use zeta_fourier::mp::encoding::{to_decimal, to_hex_parts};
use zeta_fourier::mp::precision::decimal_digits_for_bits;
use zeta_fourier::Result;

pub const COEFFS_SCHEMA: &str = "zeta-fourier/coeffs/v1";
pub const VERIFY_SCHEMA: &str = "zeta-fourier/verify/v1";
pub const GRID_SCHEMA: &str = "zeta-fourier/grid/v1";

/// A real number at a stated precision: decimal text plus the exact value
/// as mantissa · 2^exponent with a hexadecimal integer mantissa.
#[derive(Serialize)]
pub struct Number {
    pub decimal: String,
    pub hex_mantissa: String,
    pub exponent: i64,
    pub digits: usize,
}

impl Number {
    pub fn new(x: &Float, bits: u32) -> Result<Self> {
        let digits = decimal_digits_for_bits(bits);
        let rounded = Float::with_val(bits, x);
        let (hex_mantissa, exponent) = to_hex_parts(&rounded)?;
        Ok(Number {
            decimal: to_decimal(&rounded, digits),
            hex_mantissa,
            exponent,
            digits,
        })
    }
}

/// Decimal rendering of `x` rounded to `bits`.
pub fn decimal(x: &Float, bits: u32) -> String {
    to_decimal(&Float::with_val(bits, x), decimal_digits_for_bits(bits))
}

pub fn json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable output");
    s.push('\n');
    s
}

/// Quote a CSV field when it contains a separator, quote or newline.
pub fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
