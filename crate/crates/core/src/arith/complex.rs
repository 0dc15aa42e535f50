//! Complex numbers over the fixed-point [`Real`] type.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;

use super::gauss::GaussRat;
use super::real::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct BigComplex {
    pub re: Real,
    pub im: Real,
}

impl BigComplex {
    pub fn new(re: Real, im: Real) -> Self {
        BigComplex { re, im }
    }

    pub fn zero(bits: u32) -> Self {
        BigComplex { re: Real::zero(bits), im: Real::zero(bits) }
    }

    pub fn one(bits: u32) -> Self {
        BigComplex { re: Real::one(bits), im: Real::zero(bits) }
    }

    pub fn from_real(re: Real) -> Self {
        let bits = re.bits();
        BigComplex { re, im: Real::zero(bits) }
    }

    pub fn from_gauss(g: &GaussRat, bits: u32) -> Self {
        BigComplex { re: Real::from_ratio(&g.re, bits), im: Real::from_ratio(&g.im, bits) }
    }

    pub fn precision_bits(&self) -> u32 {
        self.re.bits()
    }

    pub fn with_bits(&self, bits: u32) -> Self {
        BigComplex { re: self.re.with_bits(bits), im: self.im.with_bits(bits) }
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        BigComplex { re: self.re.clone(), im: -&self.im }
    }

    pub fn scale(&self, k: &Real) -> Self {
        BigComplex { re: &self.re * k, im: &self.im * k }
    }

    pub fn div_int(&self, k: i64) -> Self {
        BigComplex { re: self.re.div_int(k), im: self.im.div_int(k) }
    }

    /// Exact product with a Gaussian rational; the only rounding is the
    /// final division by the common denominator.
    pub fn mul_gauss(&self, g: &GaussRat) -> Self {
        let den = num_integer::lcm(g.re.denom().clone(), g.im.denom().clone());
        let p: BigInt = g.re.numer() * (&den / g.re.denom());
        let q: BigInt = g.im.numer() * (&den / g.im.denom());
        let re = self.re.mul_big(&p) - self.im.mul_big(&q);
        let im = self.re.mul_big(&q) + self.im.mul_big(&p);
        if den == BigInt::from(1) {
            BigComplex { re, im }
        } else {
            BigComplex { re: re.div_big(&den), im: im.div_big(&den) }
        }
    }

    /// Max of the absolute component errors, used for tolerance checks.
    pub fn max_abs_component(&self) -> Real {
        let a = self.re.abs();
        let b = self.im.abs();
        if a >= b {
            a
        } else {
            b
        }
    }
}

impl Add for &BigComplex {
    type Output = BigComplex;
    fn add(self, rhs: &BigComplex) -> BigComplex {
        BigComplex { re: &self.re + &rhs.re, im: &self.im + &rhs.im }
    }
}

impl Sub for &BigComplex {
    type Output = BigComplex;
    fn sub(self, rhs: &BigComplex) -> BigComplex {
        BigComplex { re: &self.re - &rhs.re, im: &self.im - &rhs.im }
    }
}

impl Mul for &BigComplex {
    type Output = BigComplex;
    fn mul(self, rhs: &BigComplex) -> BigComplex {
        BigComplex { re: &self.re * &rhs.re - &self.im * &rhs.im, im: &self.re * &rhs.im + &self.im * &rhs.re }
    }
}

impl AddAssign<&BigComplex> for BigComplex {
    fn add_assign(&mut self, rhs: &BigComplex) {
        self.re += &rhs.re;
        self.im += &rhs.im;
    }
}

impl SubAssign<&BigComplex> for BigComplex {
    fn sub_assign(&mut self, rhs: &BigComplex) {
        self.re -= &rhs.re;
        self.im -= &rhs.im;
    }
}

impl Neg for &BigComplex {
    type Output = BigComplex;
    fn neg(self) -> BigComplex {
        BigComplex { re: -&self.re, im: -&self.im }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::gauss::rat;

    #[test]
    fn gauss_product_is_exact_for_dyadic_inputs() {
        let bits = 80;
        let z = BigComplex::from_gauss(&GaussRat::new(rat(3, 8), rat(-1, 4)), bits);
        let g = GaussRat::new(rat(1, 2), rat(1, 2));
        let w = z.mul_gauss(&g);
        // (3/8 - i/4)(1/2 + i/2) = 5/16 + i/16
        assert_eq!(w, BigComplex::from_gauss(&GaussRat::new(rat(5, 16), rat(1, 16)), bits));
        let prod = &z * &BigComplex::from_gauss(&g, bits);
        assert_eq!(prod, w);
    }
}
