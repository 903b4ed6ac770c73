//! Extended-precision helpers: a double-double number type and a
//! compensated (Neumaier) accumulator.
//!
//! The double-double representation stores a value as the unevaluated sum
//! `hi + lo` with `|lo| <= ulp(hi)/2`, giving roughly 106 bits of mantissa.
//! Only the operations needed by the alternating sums in this crate are
//! provided.

use std::cmp::Ordering;
use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{FromPrimitive, ToPrimitive, Zero};

/// Unit roundoff of the double-double format.
pub const DD_EPSILON: f64 = 4.93038065763132e-32;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    (s, b - (s - a))
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    (p, a.mul_add(b, -p))
}

/// A double-double floating point number.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub const ZERO: Self = Self { hi: 0.0, lo: 0.0 };
    pub const ONE: Self = Self { hi: 1.0, lo: 0.0 };
    pub const LN_2: Self = Self {
        hi: std::f64::consts::LN_2,
        lo: 2.319_046_813_846_299_6e-17,
    };
    pub const PI: Self = Self {
        hi: std::f64::consts::PI,
        lo: 1.224_646_799_147_353_2e-16,
    };

    /// Builds a normalized value from two components.
    pub fn new(hi: f64, lo: f64) -> Self {
        let (hi, lo) = two_sum(hi, lo);
        Self { hi, lo }
    }

    pub const fn from_f64(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    /// Exact conversion of integers with up to 106 significant bits;
    /// larger magnitudes are rounded.
    pub fn from_bigint(x: &BigInt) -> Self {
        let hi = x.to_f64().unwrap_or(f64::NAN);
        if !hi.is_finite() {
            return Self::from_f64(hi);
        }
        let hi_int = BigInt::from_f64(hi).unwrap_or_else(BigInt::zero);
        let lo = (x - hi_int).to_f64().unwrap_or(0.0);
        Self::new(hi, lo)
    }

    /// `n!` for small `n`, accumulated in double-double.
    pub fn factorial(n: u32) -> Self {
        (2..=n).fold(Self::ONE, |acc, k| acc * f64::from(k))
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn abs(self) -> Self {
        if self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0) {
            -self
        } else {
            self
        }
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite()
    }

    pub fn mul_pow2(self, k: i32) -> Self {
        let s = 2f64.powi(k);
        Self {
            hi: self.hi * s,
            lo: self.lo * s,
        }
    }

    pub fn powi(self, n: u32) -> Self {
        let mut base = self;
        let mut acc = Self::ONE;
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc *= base;
            }
            base *= base;
            e >>= 1;
        }
        acc
    }

    /// `exp(x) - 1`, accurate in the relative sense for small `|x|`.
    pub fn exp_m1(self) -> Self {
        let x = self.hi;
        if x.is_nan() {
            return self;
        }
        if x > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if x < -40.0 {
            // exp(x) is below the double-double resolution of 1.
            return self.exp() - Self::ONE;
        }
        // Split x = k ln2 + r, then r = 2^m r' with |r'| tiny.
        let k = if x.abs() < 0.5 {
            0.0
        } else {
            (x / std::f64::consts::LN_2).round()
        };
        let r = self - Self::LN_2 * k;
        const SQUARINGS: i32 = 10;
        let rr = r.mul_pow2(-SQUARINGS);
        // expm1 of the reduced argument by its Taylor series.
        let mut term = rr;
        let mut sum = rr;
        for i in 2..40 {
            term = term * rr / f64::from(i);
            sum += term;
            if term.hi.abs() <= 1e-34 * sum.hi.abs() {
                break;
            }
        }
        // (1+s)^2 - 1 = s (2 + s)
        for _ in 0..SQUARINGS {
            sum = sum * (sum + 2.0);
        }
        if k == 0.0 {
            sum
        } else {
            (sum + 1.0).mul_pow2(k as i32) - Self::ONE
        }
    }

    pub fn exp(self) -> Self {
        let x = self.hi;
        if x > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if x < -745.0 {
            return Self::ZERO;
        }
        let k = (x / std::f64::consts::LN_2).round();
        let r = self - Self::LN_2 * k;
        let scaled = k as i32;
        let em1 = r.exp_m1();
        let base = em1 + 1.0;
        // 2^k can underflow as a single power near the bottom of the range.
        let half = scaled / 2;
        base.mul_pow2(half).mul_pow2(scaled - half)
    }

    pub fn recip(self) -> Self {
        Self::ONE / self
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi) {
            Some(Ordering::Equal) => self.lo.partial_cmp(&other.lo),
            ord => ord,
        }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        Self {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    fn add(self, b: Self) -> Self {
        let (s, e) = two_sum(self.hi, b.hi);
        let (t, f) = two_sum(self.lo, b.lo);
        let (s, e) = quick_two_sum(s, e + t);
        let (hi, lo) = quick_two_sum(s, e + f);
        Self { hi, lo }
    }
}

impl Add<f64> for DoubleDouble {
    type Output = Self;
    fn add(self, b: f64) -> Self {
        let (s, e) = two_sum(self.hi, b);
        let (hi, lo) = quick_two_sum(s, e + self.lo);
        Self { hi, lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Sub<f64> for DoubleDouble {
    type Output = Self;
    fn sub(self, b: f64) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    fn mul(self, b: Self) -> Self {
        let (p, e) = two_prod(self.hi, b.hi);
        let e = e + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p, e);
        Self { hi, lo }
    }
}

impl Mul<f64> for DoubleDouble {
    type Output = Self;
    fn mul(self, b: f64) -> Self {
        let (p, e) = two_prod(self.hi, b);
        let (hi, lo) = quick_two_sum(p, e + self.lo * b);
        Self { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b * q1;
        let q2 = r.hi / b.hi;
        let r = r - b * q2;
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Self { hi: q1, lo: q2 } + q3
    }
}

impl Div<f64> for DoubleDouble {
    type Output = Self;
    fn div(self, b: f64) -> Self {
        self / Self::from_f64(b)
    }
}

impl AddAssign for DoubleDouble {
    fn add_assign(&mut self, b: Self) {
        *self = *self + b;
    }
}

impl AddAssign<f64> for DoubleDouble {
    fn add_assign(&mut self, b: f64) {
        *self = *self + b;
    }
}

impl SubAssign for DoubleDouble {
    fn sub_assign(&mut self, b: Self) {
        *self = *self - b;
    }
}

impl MulAssign for DoubleDouble {
    fn mul_assign(&mut self, b: Self) {
        *self = *self * b;
    }
}

impl MulAssign<f64> for DoubleDouble {
    fn mul_assign(&mut self, b: f64) {
        *self = *self * b;
    }
}

impl std::iter::Sum for DoubleDouble {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::ZERO, |a, b| a + b)
    }
}

/// Neumaier's improved Kahan summation. Also tracks `sum |x_i|`, which
/// divided by `|sum|` estimates the condition number of the sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
    abs_sum: f64,
}

impl NeumaierSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.compensation += (self.sum - t) + x;
        } else {
            self.compensation += (x - t) + self.sum;
        }
        self.sum = t;
        self.abs_sum += x.abs();
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.compensation
    }

    pub fn abs_sum(&self) -> f64 {
        self.abs_sum
    }

    /// `sum |x_i| / |sum x_i|`; infinite when the sum cancels to zero.
    pub fn condition(&self) -> f64 {
        let s = self.sum().abs();
        if s == 0.0 {
            if self.abs_sum == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_sum / s
        }
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for x in iter {
            self.add(x);
        }
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        s.extend(iter);
        s
    }
}

/// Binary fixed point `v · 2^{−bits}` over a big integer, for alternating
/// sums whose cancellation exceeds what double-double can absorb. Every
/// operation truncates to `bits` fractional bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Fixed {
    v: BigInt,
    bits: u32,
}

impl Fixed {
    pub fn zero(bits: u32) -> Self {
        Self { v: BigInt::zero(), bits }
    }

    pub fn one(bits: u32) -> Self {
        Self {
            v: BigInt::from(1u8) << bits,
            bits,
        }
    }

    /// Exact whenever `x` has no bits below `2^{−bits}`.
    pub fn from_f64(x: f64, bits: u32) -> Self {
        assert!(x.is_finite(), "fixed point needs a finite value");
        if x == 0.0 {
            return Self::zero(bits);
        }
        let raw = x.abs().to_bits();
        let exp = ((raw >> 52) & 0x7ff) as i64;
        let frac = raw & ((1u64 << 52) - 1);
        let (mant, e) = if exp == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp - 1075) };
        let shift = e + i64::from(bits);
        let mut v = BigInt::from(mant);
        v = if shift >= 0 { v << shift as u64 } else { v >> (-shift) as u64 };
        Self {
            v: if x < 0.0 { -v } else { v },
            bits,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// The scaled integer `v`.
    pub fn raw(&self) -> &BigInt {
        &self.v
    }

    pub fn from_raw(v: BigInt, bits: u32) -> Self {
        Self { v, bits }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::from_raw(&self.v + &o.v, self.bits)
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self::from_raw(&self.v - &o.v, self.bits)
    }

    pub fn mul(&self, o: &Self) -> Self {
        Self::from_raw((&self.v * &o.v) >> self.bits, self.bits)
    }

    pub fn div(&self, o: &Self) -> Self {
        Self::from_raw((&self.v << self.bits) / &o.v, self.bits)
    }

    pub fn div_u64(&self, d: u64) -> Self {
        Self::from_raw(&self.v / BigInt::from(d), self.bits)
    }

    pub fn to_f64(&self) -> f64 {
        let len = self.v.bits();
        let drop = len.saturating_sub(64);
        let head = (&self.v >> drop).to_f64().unwrap_or(f64::NAN);
        libm::ldexp(head, drop as i32 - self.bits as i32)
    }
}
