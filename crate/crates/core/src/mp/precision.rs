use rug::float::Round;
use rug::{Assign, Float};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Precision of a requested result plus the guard bits carried internally.
///
/// Every numeric routine receives a context and works at
/// [`PrecisionCtx::working`] bits; the error bounds it reports are stated
/// relative to `2^-bits`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PrecisionCtx {
    bits: u32,
    guard_bits: u32,
}

impl PrecisionCtx {
    pub const MIN_BITS: u32 = 64;
    pub const DEFAULT_GUARD: u32 = 32;

    /// Context with the default guard-bit allowance.
    pub fn new(bits: u32) -> Result<Self> {
        Self::with_guard(bits, Self::DEFAULT_GUARD)
    }

    pub fn with_guard(bits: u32, guard_bits: u32) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::domain(format!(
                "precision {bits} bits is below the minimum of {}",
                Self::MIN_BITS
            )));
        }
        Ok(Self { bits, guard_bits })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn guard_bits(&self) -> u32 {
        self.guard_bits
    }

    /// Mantissa width used for intermediate values.
    pub fn working(&self) -> u32 {
        self.bits + self.guard_bits
    }

    /// Same target, more guard bits.
    pub fn with_extra_guard(&self, extra: u32) -> Self {
        Self {
            bits: self.bits,
            guard_bits: self.guard_bits + extra,
        }
    }

    /// Target raised by `extra` bits (guard unchanged).
    pub fn raised(&self, extra: u32) -> Self {
        Self {
            bits: self.bits + extra,
            guard_bits: self.guard_bits,
        }
    }

    /// Twice the target precision, used on the critical line.
    pub fn doubled(&self) -> Self {
        Self {
            bits: 2 * self.bits,
            guard_bits: self.guard_bits,
        }
    }

    /// A fresh real at working precision.
    pub fn real<T>(&self, v: T) -> Float
    where
        Float: Assign<T>,
    {
        Float::with_val(self.working(), v)
    }

    /// Parse a decimal literal at working precision.
    pub fn real_str(&self, s: &str) -> Float {
        Float::with_val(self.working(), Float::parse(s).expect("valid decimal literal"))
    }

    /// `2^-bits` as a low-precision float.
    pub fn eps(&self) -> Float {
        let mut e = Float::with_val(ERR_PREC, 1);
        e >>= self.bits;
        e
    }

    /// Decimal digits matching the target precision (used when rendering).
    pub fn decimal_digits(&self) -> usize {
        decimal_digits_for_bits(self.bits)
    }
}

/// Precision used for error bounds; the exponent range is what matters.
pub const ERR_PREC: u32 = 53;

pub fn decimal_digits_for_bits(bits: u32) -> usize {
    ((bits as f64) * std::f64::consts::LOG10_2).floor() as usize
}

/// A value together with an estimated bound on its absolute error.
///
/// Bounds are kept as low-precision `Float`s because they routinely fall
/// below the `f64` exponent range.
#[derive(Clone, Debug)]
pub struct Approx<T> {
    pub value: T,
    pub error: Float,
}

impl<T> Approx<T> {
    pub fn new(value: T, error: Float) -> Self {
        Self { value, error }
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Approx<U> {
        Approx {
            value: f(self.value),
            error: self.error,
        }
    }
}

/// Low-precision error bound from an `f64` magnitude.
pub fn err_from_f64(v: f64) -> Float {
    Float::with_val(ERR_PREC, v.abs())
}

/// `2^e` as an error-bound float.
pub fn err_pow2(e: i64) -> Float {
    let mut x = Float::with_val(ERR_PREC, 1);
    if e >= 0 {
        x <<= e as u32;
    } else {
        x >>= (-e) as u32;
    }
    x
}

/// Absolute value of a real as an error-bound float (rounded up).
pub fn err_abs(x: &Float) -> Float {
    let mut e = x.clone().abs();
    e.set_prec_round(ERR_PREC, Round::Up);
    e
}

/// log2 |x|, or -inf for zero.
pub fn log2_abs(x: &Float) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let (m, e) = x.to_f64_exp();
    m.abs().log2() + e as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_low_precision() {
        assert!(PrecisionCtx::new(63).is_err());
        assert!(PrecisionCtx::new(64).is_ok());
    }

    #[test]
    fn working_precision_adds_guard() {
        let ctx = PrecisionCtx::with_guard(128, 16).unwrap();
        assert_eq!(ctx.working(), 144);
        assert_eq!(ctx.real(1).prec(), 144);
        assert_eq!(ctx.doubled().bits(), 256);
    }

    #[test]
    fn eps_is_power_of_two() {
        let ctx = PrecisionCtx::new(2000).unwrap();
        assert_eq!(log2_abs(&ctx.eps()), -2000.0);
    }
}
