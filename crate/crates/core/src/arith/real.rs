//! Fixed-point arbitrary-precision reals.
//!
//! A [`Real`] stores an integer mantissa `m` and a number of fractional bits
//! `p`; its value is `m / 2^p`. The error model is therefore absolute: every
//! rounding step loses at most one unit in the last place, `2^-p`. All values
//! handled by this crate have modest magnitude (series partial sums, iterated
//! integrals over `[0, 1]`), so absolute precision is the natural choice and
//! keeps every operation a handful of big-integer primitives.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Fixed-point real number `mant / 2^bits`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Real {
    mant: BigInt,
    bits: u32,
}

impl Real {
    pub fn zero(bits: u32) -> Self {
        Real { mant: BigInt::zero(), bits }
    }

    pub fn one(bits: u32) -> Self {
        Real { mant: BigInt::one() << bits, bits }
    }

    pub fn from_int<T: Into<BigInt>>(v: T, bits: u32) -> Self {
        Real { mant: v.into() << bits, bits }
    }

    /// Builds a value directly from its mantissa.
    pub fn from_mantissa(mant: BigInt, bits: u32) -> Self {
        Real { mant, bits }
    }

    /// Rounds an exact rational to the nearest representable value.
    pub fn from_ratio(r: &BigRational, bits: u32) -> Self {
        let num = r.numer() << bits;
        Real { mant: div_round(&num, r.denom()), bits }
    }

    pub fn from_f64(v: f64, bits: u32) -> Self {
        let r = BigRational::from_float(v).unwrap_or_else(BigRational::zero);
        Real::from_ratio(&r, bits)
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn mantissa(&self) -> &BigInt {
        &self.mant
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn abs(&self) -> Self {
        Real { mant: self.mant.abs(), bits: self.bits }
    }

    /// Re-expresses the value with a different number of fractional bits.
    pub fn with_bits(&self, bits: u32) -> Self {
        let mant = match bits.cmp(&self.bits) {
            Ordering::Equal => self.mant.clone(),
            Ordering::Greater => &self.mant << (bits - self.bits),
            Ordering::Less => shr_round(&self.mant, self.bits - bits),
        };
        Real { mant, bits }
    }

    pub fn mul_int(&self, k: i64) -> Self {
        Real { mant: &self.mant * k, bits: self.bits }
    }

    pub fn mul_big(&self, k: &BigInt) -> Self {
        Real { mant: &self.mant * k, bits: self.bits }
    }

    /// Division by a nonzero machine integer (rounded to nearest).
    pub fn div_int(&self, k: i64) -> Self {
        assert!(k != 0, "division of Real by zero");
        Real { mant: div_round(&self.mant, &BigInt::from(k)), bits: self.bits }
    }

    pub fn div_big(&self, k: &BigInt) -> Self {
        assert!(!k.is_zero(), "division of Real by zero");
        Real { mant: div_round(&self.mant, k), bits: self.bits }
    }

    pub fn mul_ratio(&self, r: &BigRational) -> Self {
        Real { mant: div_round(&(&self.mant * r.numer()), r.denom()), bits: self.bits }
    }

    /// Multiplication by `2^k` for any sign of `k`.
    pub fn mul_pow2(&self, k: i32) -> Self {
        let mant = if k >= 0 { &self.mant << k as u32 } else { shr_round(&self.mant, (-k) as u32) };
        Real { mant, bits: self.bits }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn powi(&self, e: u32) -> Self {
        let mut acc = Real::one(self.bits);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    /// Checked division; `None` when the divisor rounds to zero.
    pub fn checked_div(&self, rhs: &Real) -> Option<Real> {
        let rhs = rhs.with_bits(self.bits);
        if rhs.mant.is_zero() {
            return None;
        }
        let num = &self.mant << self.bits;
        Some(Real { mant: div_round(&num, &rhs.mant), bits: self.bits })
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "sqrt of negative Real");
        let scaled: BigInt = &self.mant << self.bits;
        Real { mant: scaled.sqrt(), bits: self.bits }
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> Self {
        assert!(self.mant.is_positive(), "ln of non-positive Real");
        let bits = self.bits;
        let w = bits + 16;
        let x = self.with_bits(w);
        // x = y * 2^e with y in [1, 2)
        let e = x.mant.bits() as i64 - 1 - w as i64;
        let y = x.mul_pow2(-(e as i32));
        let one = Real::one(w);
        let z = (&y - &one).checked_div(&(&y + &one)).expect("y + 1 > 0");
        let series = atanh_series(&z);
        let ln2 = Real::ln2(w);
        (series.mul_int(2) + ln2.mul_int(e)).with_bits(bits)
    }

    /// π by Machin's formula.
    pub fn pi(bits: u32) -> Self {
        let w = bits + 16;
        let a = atan_inv(5, w).mul_int(16);
        let b = atan_inv(239, w).mul_int(4);
        (a - b).with_bits(bits)
    }

    /// log 2 = 2·atanh(1/3).
    pub fn ln2(bits: u32) -> Self {
        let w = bits + 16;
        let z = Real::one(w).div_int(3);
        atanh_series(&z).mul_int(2).with_bits(bits)
    }

    pub fn to_f64(&self) -> f64 {
        let shift = self.mant.bits() as i64 - 60;
        if shift <= 0 {
            let m = self.mant.to_f64().unwrap_or(0.0);
            return m * 2f64.powi(-(self.bits as i32));
        }
        let m = (&self.mant >> shift as u32).to_f64().unwrap_or(0.0);
        m * 2f64.powf(shift as f64 - self.bits as f64)
    }

    /// Exact rational value of this fixed-point number.
    pub fn to_ratio(&self) -> BigRational {
        BigRational::new(self.mant.clone(), BigInt::one() << self.bits)
    }

    /// Decimal text with exactly `digits` digits after the point, rounded
    /// half away from zero.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let scaled = shr_round(&(self.mant.abs() * scale), self.bits);
        let mut text = scaled.to_string();
        if text.len() <= digits {
            text = format!("{}{}", "0".repeat(digits + 1 - text.len()), text);
        }
        let split = text.len() - digits;
        let (int_part, frac_part) = text.split_at(split);
        let sign = if self.is_negative() && !scaled.is_zero() { "-" } else { "" };
        if digits == 0 {
            format!("{sign}{int_part}")
        } else {
            format!("{sign}{int_part}.{frac_part}")
        }
    }

    /// True when `|self| <= 10^-k`.
    pub fn abs_le_pow10(&self, k: u32) -> bool {
        let lhs = self.mant.abs() * BigInt::from(10u32).pow(k);
        lhs <= (BigInt::one() << self.bits)
    }

    /// True when `|self| <= tol` for an exact rational tolerance.
    pub fn abs_le(&self, tol: &BigRational) -> bool {
        self.to_ratio().abs() <= *tol
    }
}

/// Parses decimal text such as `-0.125`, `3`, `1e-5` into an exact rational.
pub fn parse_decimal(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if t.is_empty() {
        return None;
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => (&t[..pos], t[pos + 1..].parse::<i32>().ok()?),
        None => (t, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match body.find('.') {
        Some(pos) => (&body[..pos], &body[pos + 1..]),
        None => (body, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().ok()?;
    if neg {
        num = -num;
    }
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    let r = if scale >= 0 {
        BigRational::from_integer(num * ten.pow(scale as u32))
    } else {
        BigRational::new(num, ten.pow((-scale) as u32))
    };
    Some(r)
}

/// Number of digits after the decimal point in a decimal literal.
pub fn decimal_places(text: &str) -> usize {
    let t = text.trim();
    let mantissa = t.split(['e', 'E']).next().unwrap_or("");
    mantissa.find('.').map(|p| mantissa.len() - p - 1).unwrap_or(0)
}

fn div_round(num: &BigInt, den: &BigInt) -> BigInt {
    let (q, r) = num.div_mod_floor(den);
    let twice = r.abs() * 2u32;
    if twice >= den.abs() {
        if den.is_positive() {
            q + 1
        } else {
            q - 1
        }
    } else {
        q
    }
}

fn shr_round(m: &BigInt, k: u32) -> BigInt {
    if k == 0 {
        return m.clone();
    }
    let half = BigInt::one() << (k - 1);
    (m + half) >> k
}

fn atanh_series(z: &Real) -> Real {
    let z2 = z.square();
    let mut power = z.clone();
    let mut sum = z.clone();
    let mut k = 1i64;
    loop {
        power = &power * &z2;
        if power.is_zero() {
            break;
        }
        sum += &power.div_int(2 * k + 1);
        k += 1;
    }
    sum
}

/// atan(1/k) by its Taylor series; only small-integer divisions are needed.
fn atan_inv(k: i64, bits: u32) -> Real {
    let mut power = Real::one(bits).div_int(k);
    let k2 = k * k;
    let mut sum = power.clone();
    let mut n = 1i64;
    loop {
        power = power.div_int(k2);
        if power.is_zero() {
            break;
        }
        let term = power.div_int(2 * n + 1);
        if n % 2 == 1 {
            sum -= &term;
        } else {
            sum += &term;
        }
        n += 1;
    }
    sum
}

fn align<'a>(a: &'a Real, b: &'a Real) -> (BigInt, BigInt, u32) {
    if a.bits == b.bits {
        (a.mant.clone(), b.mant.clone(), a.bits)
    } else {
        let bits = a.bits.max(b.bits);
        (a.with_bits(bits).mant, b.with_bits(bits).mant, bits)
    }
}

impl Add<&Real> for &Real {
    type Output = Real;
    fn add(self, rhs: &Real) -> Real {
        if self.bits == rhs.bits {
            return Real { mant: &self.mant + &rhs.mant, bits: self.bits };
        }
        let (a, b, bits) = align(self, rhs);
        Real { mant: a + b, bits }
    }
}

impl Sub<&Real> for &Real {
    type Output = Real;
    fn sub(self, rhs: &Real) -> Real {
        if self.bits == rhs.bits {
            return Real { mant: &self.mant - &rhs.mant, bits: self.bits };
        }
        let (a, b, bits) = align(self, rhs);
        Real { mant: a - b, bits }
    }
}

impl Mul<&Real> for &Real {
    type Output = Real;
    fn mul(self, rhs: &Real) -> Real {
        let (a, b, bits) = align(self, rhs);
        Real { mant: shr_round(&(a * b), bits), bits }
    }
}

impl Div<&Real> for &Real {
    type Output = Real;
    fn div(self, rhs: &Real) -> Real {
        self.checked_div(rhs).expect("division of Real by zero")
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Real> for Real {
            type Output = Real;
            fn $f(self, rhs: Real) -> Real {
                (&self).$f(&rhs)
            }
        }
        impl $tr<&Real> for Real {
            type Output = Real;
            fn $f(self, rhs: &Real) -> Real {
                (&self).$f(rhs)
            }
        }
        impl $tr<Real> for &Real {
            type Output = Real;
            fn $f(self, rhs: Real) -> Real {
                self.$f(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&Real> for Real {
    fn add_assign(&mut self, rhs: &Real) {
        if self.bits == rhs.bits {
            self.mant += &rhs.mant;
        } else {
            *self = &*self + rhs;
        }
    }
}

impl SubAssign<&Real> for Real {
    fn sub_assign(&mut self, rhs: &Real) {
        if self.bits == rhs.bits {
            self.mant -= &rhs.mant;
        } else {
            *self = &*self - rhs;
        }
    }
}

impl Neg for Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { mant: -self.mant, bits: self.bits }
    }
}

impl Neg for &Real {
    type Output = Real;
    fn neg(self) -> Real {
        Real { mant: -&self.mant, bits: self.bits }
    }
}

impl PartialOrd for Real {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        let (a, b, _) = align(self, other);
        Some(a.cmp(&b))
    }
}

impl fmt::Debug for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Real({})", self.to_decimal(25))
    }
}

impl fmt::Display for Real {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let digits = f.precision().unwrap_or(((self.bits as f64) * std::f64::consts::LOG10_2) as usize);
        f.write_str(&self.to_decimal(digits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const PI_50: &str = "3.14159265358979323846264338327950288419716939937511";
    const LN2_50: &str = "0.69314718055994530941723212145817656807550013436026";

    #[test]
    fn pi_and_ln2_match_reference_digits() {
        assert_eq!(Real::pi(200).to_decimal(50), PI_50);
        assert_eq!(Real::ln2(200).to_decimal(50), LN2_50);
    }

    #[test]
    fn ln_agrees_with_ln2_and_ln3() {
        let bits = 180;
        assert_eq!(Real::from_int(2, bits).ln().to_decimal(45), Real::ln2(bits).to_decimal(45));
        // log 3 = 1.0986122886681098...
        assert_eq!(Real::from_int(3, bits).ln().to_decimal(30), "1.098612288668109691395245236923");
        let quarter = Real::from_ratio(&BigRational::new(1.into(), 4.into()), bits);
        assert_eq!(quarter.ln().to_decimal(40), (-Real::ln2(bits).mul_int(2)).to_decimal(40));
    }

    #[test]
    fn sqrt_and_division() {
        let bits = 160;
        let two = Real::from_int(2, bits);
        let r = two.sqrt();
        assert_eq!(r.to_decimal(30), "1.414213562373095048801688724210");
        let back = &r * &r;
        assert!((&back - &two).abs_le_pow10(45));
        let third = Real::one(bits) / Real::from_int(3, bits);
        assert_eq!(third.to_decimal(20), "0.33333333333333333333");
    }

    #[test]
    fn decimal_parsing() {
        assert_eq!(parse_decimal("0.5"), Some(BigRational::new(1.into(), 2.into())));
        assert_eq!(
            parse_decimal("-1.25e1"),
            Some(BigRational::from_integer((-12).into()) - BigRational::new(1.into(), 2.into()))
        );
        assert_eq!(parse_decimal("3"), Some(BigRational::from_integer(3.into())));
        assert_eq!(parse_decimal("x"), None);
        assert_eq!(parse_decimal("."), None);
        assert_eq!(decimal_places("0.36338"), 5);
        assert_eq!(decimal_places("12"), 0);
    }

    #[test]
    fn negative_rendering_and_rounding() {
        let bits = 100;
        let v = Real::from_ratio(&BigRational::new((-2).into(), 3.into()), bits);
        assert_eq!(v.to_decimal(4), "-0.6667");
        assert_eq!(Real::zero(bits).to_decimal(3), "0.000");
        assert!((v.to_f64() + 2.0 / 3.0).abs() < 1e-15);
    }
}
