//! Scalar abstraction shared by the 64-bit and multiprecision pipelines.
//!
//! Everything numeric in the crate is generic over [`Real`]. `f64` is the
//! default; [`Mp`] wraps an MPFR float whose precision is fixed by the type
//! parameter so that values of one working precision never mix silently with
//! another.

use std::fmt::{self, Debug, Display};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use rug::float::Constant;
use rug::{Float, Integer};

pub trait Real:
    Clone
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + for<'a> AddAssign<&'a Self>
    + for<'a> SubAssign<&'a Self>
    + for<'a> MulAssign<&'a Self>
    + for<'a> DivAssign<&'a Self>
{
    /// Mantissa bits of the representation.
    const BITS: u32;

    fn from_f64(v: f64) -> Self;
    fn from_i128(v: i128) -> Self;
    fn from_integer(v: &Integer) -> Self;
    fn to_f64(&self) -> f64;
    fn sqrt(&self) -> Self;
    fn ln(&self) -> Self;
    fn exp(&self) -> Self;
    fn abs(&self) -> Self;
    fn pi() -> Self;
    fn is_finite(&self) -> bool;
    /// Decimal rendering carrying every significant digit of the value.
    fn to_decimal(&self) -> String;
    /// Parse a decimal literal, correctly rounded to this precision.
    fn parse_decimal(s: &str) -> Option<Self>;

    fn zero() -> Self {
        Self::from_i128(0)
    }

    fn one() -> Self {
        Self::from_i128(1)
    }

    fn from_usize(v: usize) -> Self {
        Self::from_i128(v as i128)
    }

    fn from_ratio(num: i128, den: i128) -> Self {
        Self::from_i128(num) / Self::from_i128(den)
    }

    /// Unit roundoff, `2^(1 - BITS)`.
    fn epsilon() -> Self {
        let mut e = Self::one();
        let half = Self::from_ratio(1, 2);
        for _ in 1..Self::BITS {
            e *= &half;
        }
        e
    }

    fn powi(&self, n: u32) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                acc *= &base;
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * &base;
            }
        }
        acc
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn log10(&self) -> Self {
        self.ln() / Self::from_i128(10).ln()
    }
}

impl Real for f64 {
    const BITS: u32 = 53;

    fn from_f64(v: f64) -> Self {
        v
    }
    fn from_i128(v: i128) -> Self {
        v as f64
    }
    fn from_integer(v: &Integer) -> Self {
        v.to_f64()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn is_finite(&self) -> bool {
        f64::is_finite(*self)
    }
    fn to_decimal(&self) -> String {
        format!("{self:e}")
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        s.trim().parse().ok()
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn log10(&self) -> Self {
        f64::log10(*self)
    }
}

/// MPFR float with `BITS` bits of mantissa.
#[derive(Clone, PartialEq, PartialOrd)]
pub struct Mp<const BITS: u32>(pub Float);

impl<const B: u32> Mp<B> {
    pub fn new(v: Float) -> Self {
        if v.prec() == B {
            Mp(v)
        } else {
            Mp(Float::with_val(B, v))
        }
    }
}

impl<const B: u32> Debug for Mp<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal())
    }
}

impl<const B: u32> Display for Mp<B> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal())
    }
}

macro_rules! mp_binop {
    ($tr:ident, $m:ident, $atr:ident, $am:ident) => {
        impl<const B: u32> $tr for Mp<B> {
            type Output = Self;
            fn $m(self, rhs: Self) -> Self {
                Mp($tr::$m(self.0, rhs.0))
            }
        }
        impl<'a, const B: u32> $tr<&'a Mp<B>> for Mp<B> {
            type Output = Self;
            fn $m(self, rhs: &'a Self) -> Self {
                Mp($tr::$m(self.0, &rhs.0))
            }
        }
        impl<const B: u32> $atr for Mp<B> {
            fn $am(&mut self, rhs: Self) {
                $atr::$am(&mut self.0, rhs.0);
            }
        }
        impl<'a, const B: u32> $atr<&'a Mp<B>> for Mp<B> {
            fn $am(&mut self, rhs: &'a Self) {
                $atr::$am(&mut self.0, &rhs.0);
            }
        }
    };
}

mp_binop!(Add, add, AddAssign, add_assign);
mp_binop!(Sub, sub, SubAssign, sub_assign);
mp_binop!(Mul, mul, MulAssign, mul_assign);
mp_binop!(Div, div, DivAssign, div_assign);

impl<const B: u32> Neg for Mp<B> {
    type Output = Self;
    fn neg(self) -> Self {
        Mp(-self.0)
    }
}

impl<const B: u32> Real for Mp<B> {
    const BITS: u32 = B;

    fn from_f64(v: f64) -> Self {
        Mp(Float::with_val(B, v))
    }
    fn from_i128(v: i128) -> Self {
        Mp(Float::with_val(B, v))
    }
    fn from_integer(v: &Integer) -> Self {
        Mp(Float::with_val(B, v))
    }
    fn to_f64(&self) -> f64 {
        self.0.to_f64()
    }
    fn sqrt(&self) -> Self {
        Mp(self.0.clone().sqrt())
    }
    fn ln(&self) -> Self {
        Mp(self.0.clone().ln())
    }
    fn exp(&self) -> Self {
        Mp(self.0.clone().exp())
    }
    fn abs(&self) -> Self {
        Mp(self.0.clone().abs())
    }
    fn pi() -> Self {
        Mp(Float::with_val(B, Constant::Pi))
    }
    fn is_finite(&self) -> bool {
        self.0.is_finite()
    }
    fn to_decimal(&self) -> String {
        // digits needed to round-trip B bits
        let digits = (B as f64 * std::f64::consts::LOG10_2).ceil() as usize + 1;
        self.0.to_string_radix(10, Some(digits))
    }
    fn parse_decimal(s: &str) -> Option<Self> {
        let parsed = Float::parse(s.trim()).ok()?;
        Some(Mp(Float::with_val(B, parsed)))
    }
    fn epsilon() -> Self {
        Mp(Float::with_val(B, Float::i_exp(1, 1 - B as i32)))
    }
    fn log10(&self) -> Self {
        Mp(self.0.clone().log10())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roundtrip_identities<T: Real>() {
        let two = T::from_i128(2);
        let r = two.sqrt();
        let back = r.clone() * &r;
        assert!((back - &two).abs() <= T::epsilon() * T::from_i128(8));
        let e = T::one().exp();
        assert!((e.ln() - T::one()).abs() <= T::epsilon() * T::from_i128(8));
        assert_eq!(T::from_i128(3).powi(5).to_f64(), 243.0);
        assert!((T::from_i128(1000).log10() - T::from_i128(3)).abs() <= T::epsilon() * T::from_i128(16));
    }

    #[test]
    fn f64_identities() {
        roundtrip_identities::<f64>();
    }

    #[test]
    fn mp_identities() {
        roundtrip_identities::<Mp<256>>();
        assert!(Mp::<256>::epsilon().to_f64() < 1e-75);
    }

    #[test]
    fn mp_keeps_precision_through_arithmetic() {
        let tiny = Mp::<256>::from_f64(1e-40);
        let x = Mp::<256>::one() + &tiny - Mp::<256>::one();
        assert!((x.to_f64() - 1e-40).abs() < 1e-55);
        let y = 1.0f64 + 1e-40 - 1.0;
        assert_eq!(y, 0.0);
    }

    #[test]
    fn decimal_rendering_is_full_precision() {
        let third = Mp::<256>::from_ratio(1, 3);
        let s = third.to_decimal();
        assert!(s.matches('3').count() > 70, "{s}");
        assert_eq!(0.1f64.to_decimal(), "1e-1");
    }

    #[test]
    fn parsing_rounds_at_the_working_precision() {
        let tenth = Mp::<256>::parse_decimal("0.1").unwrap();
        let exact = Mp::<256>::from_ratio(1, 10);
        assert!((tenth - &exact).abs().is_zero());
        assert!((Mp::<256>::from_f64(0.1) - exact).abs().to_f64() > 1e-19);
        assert_eq!(f64::parse_decimal(" 2.5 "), Some(2.5));
        assert!(Mp::<128>::parse_decimal("abc").is_none());
    }
}
