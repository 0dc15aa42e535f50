//! Series specs to trig 1-form words.
//!
//! The pipeline runs relation conversion, inner `2n-1` elimination,
//! leading-`2n-1` reduction and block compilation, in that order, and sums
//! the pieces into one [`TrigExpr`].

pub mod blocks;
pub mod forms;
pub mod relations;

use num_rational::BigRational;
use num_traits::{One, Zero};

pub use blocks::{compile_blocks, reduce_leading_gamma, Reduced};
pub use forms::{PeeledConstant, TrigExpr, TrigForm, TrigWord};
pub use relations::{convert_relations, eliminate_inner_oddlow, merge_terms, pf_decompose, Pole, SpecCombination};

use crate::error::CompileError;
use crate::series::SeriesSpec;

/// A compiled spec together with the rewrite chain that produced it.
#[derive(Clone, Debug)]
pub struct Compiled {
    pub expr: TrigExpr,
    /// Constant contributed by boundary terms of the relation rewrites.
    pub rewrite_constant: BigRational,
    pub pieces: Vec<(BigRational, Reduced)>,
}

/// Rejects specs the compiled path does not cover.
pub fn check_compilable(spec: &SeriesSpec) -> Result<(), CompileError> {
    if spec.tail_bound != 0 {
        return Err(CompileError::Unsupported("tails are evaluated by the oracle only".into()));
    }
    if !spec.argument.is_one() {
        return Err(CompileError::Unsupported("arguments x ≠ 1 are evaluated by the oracle only".into()));
    }
    Ok(())
}

/// Full compilation. Boundary constants from the rewrites are folded into
/// `expr.constant` (scaled by `π/2` for the squared binomial so that the
/// overall `2/π` factor applies uniformly).
pub fn compile_spec(spec: &SeriesSpec) -> Result<Compiled, CompileError> {
    check_compilable(spec)?;
    spec.validate().map_err(|e| CompileError::Unsupported(e.to_string()))?;
    let normal = eliminate_inner_oddlow(spec);
    let mut pieces = Vec::new();
    for (c, s) in normal.iter() {
        for (k, r) in reduce_leading_gamma(s) {
            pieces.push((c * k, r));
        }
    }
    let power = if spec.binom_power == 2 { 1 } else { 0 };
    let mut expr = TrigExpr::new(power);
    for (c, r) in &pieces {
        expr.add_scaled(&compile_blocks(r)?, c);
    }
    if !normal.constant.is_zero() {
        if power == 0 {
            expr.constant.rational += &normal.constant;
        } else {
            expr.constant.pi += &normal.constant / BigRational::from_integer(2.into());
        }
    }
    Ok(Compiled { expr, rewrite_constant: normal.constant, pieces })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::parse_spec;

    #[test]
    fn compiles_the_corpus_of_small_specs() {
        for text in ["S[2n+1^1 > 2n^1 > 0]", "S[2n^1 > 2n-1^1 > 0]", "S2[2n-1^2 > 2n^1 > 0]", "S[2n-1^3 > 2n+1^1 >= 0]"]
        {
            let spec = parse_spec(text).unwrap();
            let c = compile_spec(&spec).unwrap();
            assert!(!c.expr.terms.is_empty(), "{text}");
        }
    }

    #[test]
    fn rejects_tails_and_arguments() {
        let spec = parse_spec("S[2n^2 > 0]@tail=3").unwrap();
        assert!(compile_spec(&spec).is_err());
    }
}
