//! Exact and decimal text encodings of MPFR reals.

use rug::{Float, Integer};

use crate::error::{Error, Result};

/// Hexadecimal integer mantissa m and binary exponent e with x = m · 2^e.
/// Zero is encoded as ("0", 0).
pub fn to_hex_parts(x: &Float) -> Result<(String, i64)> {
    if !x.is_finite() {
        return Err(Error::NonFinite("hex encoding"));
    }
    if x.is_zero() {
        return Ok(("0".to_string(), 0));
    }
    let (m, e) = x.to_integer_exp().expect("finite");
    Ok((m.to_string_radix(16), e as i64))
}

/// Inverse of [`to_hex_parts`]; exact whenever the mantissa fits `prec`.
pub fn from_hex_parts(mant: &str, exp: i64, prec: u32) -> Result<Float> {
    let m = Integer::from_str_radix(mant, 16).map_err(|e| Error::Format(format!("mantissa {mant:?}: {e}")))?;
    if m.significant_bits() > prec {
        return Err(Error::Format(format!("mantissa {mant} exceeds {prec} bits")));
    }
    let exp = i32::try_from(exp).map_err(|_| Error::Format(format!("exponent {exp} out of range")))?;
    let mut x = Float::with_val(prec, m);
    x <<= exp;
    Ok(x)
}

/// Scientific decimal rendering with `digits` significant digits.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits.max(1)))
}
