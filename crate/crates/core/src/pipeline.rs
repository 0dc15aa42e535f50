//! End-to-end helpers: spec to word sum to value, for single series,
//! harmonic sums and weighted combinations of either.

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::arith::{bits_for_digits, rat_serde, BigComplex, GaussRat};
use crate::compiler::compile_spec;
use crate::error::{CompileError, Error};
use crate::eval::Evaluator;
use crate::oracle::{direct_sum, direct_sum_harmonic, OracleConfig, OracleResult};
use crate::series::{expand_harmonic, parse_spec, HarmonicSpec, SeriesSpec};
use crate::words::{cov_guarded, WordSum};

/// Something that can be summed: a nested series, a harmonic-weighted
/// series, or a rational combination of targets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    Series { spec: String },
    Harmonic(HarmonicSpec),
    Sum { parts: Vec<Part> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Part {
    #[serde(with = "rat_serde")]
    pub coef: BigRational,
    pub target: Target,
}

impl Target {
    /// Flattens into a weighted list of plain series.
    pub fn expand(&self) -> Result<Vec<(BigRational, SeriesSpec)>, Error> {
        Ok(match self {
            Target::Series { spec } => vec![(BigRational::from_integer(1.into()), parse_spec(spec)?)],
            Target::Harmonic(h) => {
                h.validate()?;
                expand_harmonic(h)
            }
            Target::Sum { parts } => {
                let mut out = Vec::new();
                for p in parts {
                    for (c, s) in p.target.expand()? {
                        out.push((&p.coef * c, s));
                    }
                }
                out
            }
        })
    }

    /// Text form used in reports.
    pub fn describe(&self) -> String {
        match self {
            Target::Series { spec } => spec.clone(),
            Target::Harmonic(h) => h.render(),
            Target::Sum { parts } => parts
                .iter()
                .map(|p| format!("{}*{}", crate::arith::rat_text(&p.coef), p.target.describe()))
                .collect::<Vec<_>>()
                .join(" + "),
        }
    }
}

/// Compiles one spec all the way to a level-4 word sum.
pub fn spec_word_sum(spec: &SeriesSpec) -> Result<WordSum, Error> {
    let compiled = compile_spec(spec)?;
    Ok(cov_guarded(&compiled.expr, spec.weight())?)
}

/// Word sum of a weighted combination. All parts must share a binomial
/// power because the `2/π` prefactor is stored once per sum.
pub fn combination_word_sum(parts: &[(BigRational, SeriesSpec)]) -> Result<WordSum, Error> {
    let Some((_, first)) = parts.first() else {
        return Err(Error::Other("empty combination".into()));
    };
    let power = first.binom_power;
    let mut total = WordSum::new(if power == 2 { 1 } else { 0 });
    for (c, s) in parts {
        if s.binom_power != power {
            return Err(CompileError::Unsupported("combination mixes binomial powers".into()).into());
        }
        total.add_scaled(&spec_word_sum(s)?, &GaussRat::real(c.clone()));
    }
    Ok(total)
}

/// Largest weight among the series a target expands to.
pub fn target_weight(target: &Target) -> Result<u32, Error> {
    Ok(target.expand()?.iter().map(|(_, s)| s.weight()).max().unwrap_or(0))
}

pub fn target_word_sum(target: &Target) -> Result<WordSum, Error> {
    combination_word_sum(&target.expand()?)
}

pub fn compiled_value(spec: &SeriesSpec, evaluator: &Evaluator) -> Result<BigComplex, Error> {
    Ok(evaluator.eval_wordsum(&spec_word_sum(spec)?)?)
}

pub fn compiled_target(target: &Target, evaluator: &Evaluator) -> Result<BigComplex, Error> {
    Ok(evaluator.eval_wordsum(&target_word_sum(target)?)?)
}

/// Oracle configuration for a requested number of digits.
pub fn oracle_config(digits: u32) -> OracleConfig {
    OracleConfig { precision_digits: digits.max(15), ..OracleConfig::default() }
}

/// Direct summation of a target. Harmonic targets use the dedicated
/// harmonic oracle rather than their expansion, so the two paths stay
/// independent.
pub fn oracle_target(target: &Target, cfg: &OracleConfig) -> Result<OracleResult, Error> {
    match target {
        Target::Series { spec } => Ok(direct_sum(&parse_spec(spec)?, cfg)?),
        Target::Harmonic(h) => Ok(direct_sum_harmonic(h, cfg)?),
        Target::Sum { parts } => {
            let bits = bits_for_digits(cfg.precision_digits);
            let mut value = crate::arith::Real::zero(bits);
            let mut error = crate::arith::Real::zero(bits);
            let mut terms_used = 0;
            for p in parts {
                let r = oracle_target(&p.target, cfg)?;
                value = &value + &r.value.mul_ratio(&p.coef);
                error = &error + &r.error_estimate.mul_ratio(&p.coef).abs();
                terms_used = terms_used.max(r.terms_used);
            }
            Ok(OracleResult { value, error_estimate: error, terms_used })
        }
    }
}
