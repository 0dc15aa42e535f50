//! Numeric layer: exact Gaussian rationals and fixed-point reals/complexes.

mod complex;
mod gauss;
mod real;

pub use complex::BigComplex;
pub use gauss::{parse_rat, rat, rat_int, rat_serde, rat_text, GaussRat};
pub use real::{decimal_places, parse_decimal, Real};

/// Fractional bits needed to carry `digits` decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32
}
