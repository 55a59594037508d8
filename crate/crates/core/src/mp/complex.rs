use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::ops::NegAssign;
use rug::{Assign, Float};

use crate::error::{Error, Result};

/// Complex number as a pair of MPFR reals sharing one precision.
#[derive(Clone, Debug, PartialEq)]
pub struct Complex {
    pub re: Float,
    pub im: Float,
}

impl Complex {
    pub fn new(re: Float, im: Float) -> Self {
        Self { re, im }
    }

    pub fn with_val<R, I>(prec: u32, re: R, im: I) -> Self
    where
        Float: Assign<R> + Assign<I>,
    {
        Self {
            re: Float::with_val(prec, re),
            im: Float::with_val(prec, im),
        }
    }

    pub fn zero(prec: u32) -> Self {
        Self::with_val(prec, 0, 0)
    }

    pub fn one(prec: u32) -> Self {
        Self::with_val(prec, 1, 0)
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        Self { re, im }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec().max(self.im.prec())
    }

    pub fn set_prec(&mut self, prec: u32) {
        self.re.set_prec(prec);
        self.im.set_prec(prec);
    }

    pub fn with_prec(mut self, prec: u32) -> Self {
        self.set_prec(prec);
        self
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn check_finite(&self, ctx: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(ctx))
        }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self {
            re: self.re.clone(),
            im: Float::with_val(self.im.prec(), -&self.im),
        }
    }

    pub fn norm_sqr(&self) -> Float {
        let p = self.prec();
        let mut n = Float::with_val(p, self.re.square_ref());
        n += Float::with_val(p, self.im.square_ref());
        n
    }

    pub fn abs(&self) -> Float {
        Float::with_val(self.prec(), self.re.hypot_ref(&self.im))
    }

    /// Argument in (-pi, pi].
    pub fn arg(&self) -> Float {
        Float::with_val(self.prec(), self.im.atan2_ref(&self.re))
    }

    pub fn scale(&self, f: &Float) -> Self {
        let p = self.prec();
        Self {
            re: Float::with_val(p, &self.re * f),
            im: Float::with_val(p, &self.im * f),
        }
    }

    pub fn mul_i(&self) -> Self {
        Self {
            re: Float::with_val(self.im.prec(), -&self.im),
            im: self.re.clone(),
        }
    }

    pub fn recip(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("reciprocal of complex zero"));
        }
        let n = self.norm_sqr();
        let p = self.prec();
        Ok(Self {
            re: Float::with_val(p, &self.re / &n),
            im: -Float::with_val(p, &self.im / &n),
        })
    }

    pub fn div(&self, other: &Complex) -> Result<Self> {
        Ok(self * &other.recip()?)
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn pow_u(&self, mut k: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Complex::one(self.prec());
        while k > 0 {
            if k & 1 == 1 {
                acc *= &base;
            }
            k >>= 1;
            if k > 0 {
                base = base.square();
            }
        }
        acc
    }

    /// e^{re} (cos im + i sin im).
    pub fn exp(&self) -> Self {
        let p = self.prec();
        let m = Float::with_val(p, self.re.exp_ref());
        let (s, c) = Float::with_val(p, &self.im).sin_cos(Float::new(p));
        Self {
            re: c * &m,
            im: s * m,
        }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::domain("logarithm of complex zero"));
        }
        let p = self.prec();
        let mut r = self.norm_sqr();
        r.ln_mut();
        r /= 2;
        Ok(Self {
            re: Float::with_val(p, r),
            im: self.arg(),
        })
    }

    /// `a^{-s}` for real `a > 0` given `ln a`.
    pub fn real_pow_neg(ln_a: &Float, s: &Complex) -> Self {
        let p = s.prec();
        let mut e = Complex {
            re: Float::with_val(p, &s.re * ln_a),
            im: Float::with_val(p, &s.im * ln_a),
        };
        e.re.neg_assign();
        e.im.neg_assign();
        e.exp()
    }

    /// Low-precision approximation, for diagnostics and rendering.
    pub fn to_f64_pair(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }
}

impl fmt::Display for Complex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_f64_pair();
        if im < 0.0 {
            write!(f, "{re:e} - {:e}i", -im)
        } else {
            write!(f, "{re:e} + {im:e}i")
        }
    }
}

impl<'a> Add<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn add(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        Complex {
            re: Float::with_val(p, &self.re + &rhs.re),
            im: Float::with_val(p, &self.im + &rhs.im),
        }
    }
}

impl<'a> Sub<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn sub(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        Complex {
            re: Float::with_val(p, &self.re - &rhs.re),
            im: Float::with_val(p, &self.im - &rhs.im),
        }
    }
}

impl<'a> Mul<&'a Complex> for &'a Complex {
    type Output = Complex;
    fn mul(self, rhs: &Complex) -> Complex {
        let p = self.prec().max(rhs.prec());
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re -= Float::with_val(p, &self.im * &rhs.im);
        let mut im = Float::with_val(p, &self.re * &rhs.im);
        im += Float::with_val(p, &self.im * &rhs.re);
        Complex { re, im }
    }
}

impl Neg for Complex {
    type Output = Complex;
    fn neg(mut self) -> Complex {
        self.re.neg_assign();
        self.im.neg_assign();
        self
    }
}

impl AddAssign<&Complex> for Complex {
    fn add_assign(&mut self, rhs: &Complex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&Complex> for Complex {
    fn sub_assign(&mut self, rhs: &Complex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl MulAssign<&Complex> for Complex {
    fn mul_assign(&mut self, rhs: &Complex) {
        let p = self.prec();
        let mut re = Float::with_val(p, &self.re * &rhs.re);
        re -= Float::with_val(p, &self.im * &rhs.im);
        let mut im = Float::with_val(p, &self.re * &rhs.im);
        im += Float::with_val(p, &self.im * &rhs.re);
        self.re = re;
        self.im = im;
    }
}

impl MulAssign<&Float> for Complex {
    fn mul_assign(&mut self, rhs: &Float) {
        self.re *= rhs;
        self.im *= rhs;
    }
}

impl AddAssign<&Float> for Complex {
    fn add_assign(&mut self, rhs: &Float) {
        self.re += rhs;
    }
}
