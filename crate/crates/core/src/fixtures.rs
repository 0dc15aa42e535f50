//! Reference values and the fixture verifier.
//!
//! Each record names a target series and carries a closed form, a printed
//! decimal, or both. Verification computes the compiled value and the
//! oracle value, then requires every pair of available estimates to agree
//! within the looser of the two tolerances. A pair involving the oracle or a
//! printed decimal is never held tighter than `10^-8`.

use std::path::Path;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::{bits_for_digits, decimal_places, parse_decimal, Real};
use crate::constants::{parse_const, ConstEvaluator};
use crate::error::Error;
use crate::eval::{Evaluator, ValueCache};
use crate::pipeline::{oracle_target, target_word_sum, Target};
use crate::series::{ParityForm, SeriesSpec};

/// The bundled reference set.
pub const BUNDLED_FIXTURES: &str = include_str!("../data/fixtures.json");

/// Records whose published closed form or decimal is inconsistent with the
/// series it describes, kept verbatim. The bundled set carries corrected
/// versions; these are expected to fail verification.
pub const ERRATA_FIXTURES: &str = include_str!("../data/errata.json");

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureRecord {
    pub id: String,
    pub target: Target,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed_form: Option<String>,
    /// Decimal text as printed in the reference, possibly truncated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value: Option<String>,
    /// Plain-language description of what the record covers.
    pub source: String,
}

impl FixtureRecord {
    pub fn check(&self) -> Result<(), Error> {
        if self.closed_form.is_none() && self.value.is_none() {
            return Err(Error::Other(format!("fixture {} has neither a closed form nor a value", self.id)));
        }
        if let Some(cf) = &self.closed_form {
            parse_const(cf)?;
        }
        if let Some(v) = &self.value {
            parse_decimal(v).ok_or_else(|| Error::Other(format!("fixture {}: bad decimal {v:?}", self.id)))?;
        }
        self.target.expand()?;
        Ok(())
    }

    /// `10^(1-d)` for a printed value with `d` decimals.
    pub fn printed_tolerance(&self) -> Option<BigRational> {
        self.value.as_ref().map(|v| pow10(1 - decimal_places(v) as i32))
    }
}

pub fn parse_fixtures(text: &str) -> Result<Vec<FixtureRecord>, Error> {
    let records: Vec<FixtureRecord> =
        serde_json::from_str(text).map_err(|e| Error::Other(format!("fixture file: {e}")))?;
    for r in &records {
        r.check()?;
    }
    Ok(records)
}

pub fn load_fixtures(path: &Path) -> Result<Vec<FixtureRecord>, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Other(format!("{}: {e}", path.display())))?;
    parse_fixtures(&text)
}

pub fn bundled_fixtures() -> Vec<FixtureRecord> {
    parse_fixtures(BUNDLED_FIXTURES).expect("bundled fixtures are well formed")
}

fn pow10(k: i32) -> BigRational {
    let p = BigInt::from(10u32).pow(k.unsigned_abs());
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::from(1), p)
    }
}

/// Upper bound on the weight of the multiple values a series reduces to.
///
/// Plain binomial: `|s| - ν(l_1)`, where `ν(l) = 1` if `l(n) = 2n-1` and
/// `0` otherwise. Squared binomial: the value is `1/π` times values of
/// weight at most `max{|s| + 1 - η(l_1), ι(l_2)}`, where `η(l) = 2` if
/// `l(n) = 2n-1` and `0` otherwise, and `ι(l) = 2` if `l(n) = 2n` and `1`
/// otherwise, including an absent `l_2`.
pub fn predicted_weight(spec: &SeriesSpec) -> u32 {
    let w = spec.weight();
    let first = spec.terms[0].parity;
    if spec.binom_power == 1 {
        w - u32::from(first == ParityForm::OddLow)
    } else {
        let eta = if first == ParityForm::OddLow { 2 } else { 0 };
        let iota = match spec.terms.get(1) {
            Some(t) if t.parity == ParityForm::Even => 2,
            _ => 1,
        };
        (w + 1 - eta).max(iota)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

/// One numeric estimate of a fixture's value.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Estimate {
    /// `compiled`, `oracle`, `closed_form` or `printed`.
    pub method: String,
    pub value: String,
    pub tolerance: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixtureReport {
    pub id: String,
    pub target: String,
    pub source: String,
    pub status: Status,
    pub estimates: Vec<Estimate>,
    /// Largest deviation seen between two estimates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_deviation: Option<String>,
    /// Weight bound for single-series targets; reporting only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub predicted_weight: Option<u32>,
    /// Longest word in the compiled word sum.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observed_weight: Option<u32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub messages: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub digits: u32,
    pub oracle_digits: Option<u32>,
    pub passed: usize,
    pub failed: usize,
    pub fixtures: Vec<FixtureReport>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.failed == 0
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    /// Human-readable table, one row per fixture.
    pub fn table(&self) -> String {
        let mut out = format!(
            "{:<18} {:<6} {:>24} {:>11} {:>4} {:>4}  target\n",
            "id", "status", "compiled", "max dev", "wt", "pred"
        );
        for f in &self.fixtures {
            let compiled =
                f.estimates.iter().find(|e| e.method == "compiled").map(|e| truncate(&e.value, 24)).unwrap_or_default();
            let dev = f.max_deviation.clone().unwrap_or_else(|| "-".into());
            let opt = |w: Option<u32>| w.map(|w| w.to_string()).unwrap_or_else(|| "-".into());
            let status = match f.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Error => "ERROR",
            };
            out.push_str(&format!(
                "{:<18} {:<6} {:>24} {:>11} {:>4} {:>4}  {}\n",
                f.id,
                status,
                compiled,
                dev,
                opt(f.observed_weight),
                opt(f.predicted_weight),
                f.target
            ));
            for m in &f.messages {
                out.push_str(&format!("    {m}\n"));
            }
        }
        out.push_str(&format!("{} passed, {} failed\n", self.passed, self.failed));
        out
    }
}

fn truncate(s: &str, n: usize) -> String {
    s.chars().take(n).collect()
}

fn sci(r: &Real) -> String {
    sci_f64(r.abs().to_f64())
}

/// Tolerances are formatted from the exact rational; a fixed-point
/// conversion at low precision would round tiny bounds to zero.
fn sci_ratio(r: &BigRational) -> String {
    sci_f64(r.to_f64().unwrap_or(0.0).abs())
}

fn sci_f64(v: f64) -> String {
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.2e}")
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    /// Compiled and closed-form values are computed to this many digits
    /// and compared to `10^-(digits-10)`.
    pub digits: u32,
    /// Oracle precision; `None` skips the oracle.
    pub oracle_digits: Option<u32>,
    pub cache: Option<Arc<ValueCache>>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { digits: 40, oracle_digits: Some(20), cache: None }
    }
}

struct Numeric {
    method: &'static str,
    value: Real,
    tolerance: BigRational,
}

fn evaluator(opts: &VerifyOptions, bits: u32) -> Evaluator {
    let e = Evaluator::new(bits);
    match &opts.cache {
        Some(c) => e.with_cache(c.clone()),
        None => e,
    }
}

pub fn verify_fixture(rec: &FixtureRecord, opts: &VerifyOptions) -> FixtureReport {
    let bits = bits_for_digits(opts.digits + 5);
    let fine = pow10(10 - opts.digits as i32);
    let mut messages = Vec::new();
    let mut nums: Vec<Numeric> = Vec::new();
    let mut observed_weight = None;
    let mut error = false;

    let single = match &rec.target {
        Target::Series { spec } => crate::series::parse_spec(spec).ok(),
        _ => None,
    };
    let predicted_weight = single.as_ref().map(predicted_weight);

    match target_word_sum(&rec.target).and_then(|ws| Ok((evaluator(opts, bits).eval_wordsum(&ws)?, ws))) {
        Ok((v, ws)) => {
            observed_weight = ws.terms.keys().map(|w| w.len() as u32).max();
            if !v.im.abs_le(&fine) {
                messages.push(format!("compiled imaginary part {} exceeds tolerance", sci(&v.im)));
                error = true;
            }
            nums.push(Numeric { method: "compiled", value: v.re, tolerance: fine.clone() });
        }
        Err(e) => {
            messages.push(format!("compiled: {e}"));
            error = true;
        }
    }
    if let Some(d) = opts.oracle_digits {
        match oracle_target(&rec.target, &crate::pipeline::oracle_config(d)) {
            Ok(r) => {
                let est = r.error_estimate.abs().to_ratio();
                let tol = pow10(-8).max(est);
                nums.push(Numeric { method: "oracle", value: r.value.with_bits(bits), tolerance: tol });
            }
            Err(e) => {
                messages.push(format!("oracle: {e}"));
                error = true;
            }
        }
    }
    if let Some(cf) = &rec.closed_form {
        let consts = ConstEvaluator::new(evaluator(opts, bits));
        match parse_const(cf).map_err(Error::from).and_then(|e| Ok(consts.eval(&e)?)) {
            Ok(v) => nums.push(Numeric { method: "closed_form", value: v.re, tolerance: fine.clone() }),
            Err(e) => {
                messages.push(format!("closed form: {e}"));
                error = true;
            }
        }
    }
    if let (Some(v), Some(tol)) = (&rec.value, rec.printed_tolerance()) {
        let r = parse_decimal(v).expect("checked on load");
        nums.push(Numeric { method: "printed", value: Real::from_ratio(&r, bits), tolerance: tol });
    }

    let floor = pow10(-8);
    let mut failed = false;
    let mut max_dev: Option<Real> = None;
    for i in 0..nums.len() {
        for j in i + 1..nums.len() {
            let (a, b) = (&nums[i], &nums[j]);
            let dev = (&a.value - &b.value).abs();
            let tol = a.tolerance.clone().max(b.tolerance.clone());
            // The 10^-8 floor only applies when a lower-precision source is
            // involved; two high-precision sources keep their own bound.
            let tol = if a.tolerance > fine || b.tolerance > fine { tol.max(floor.clone()) } else { tol };
            if !dev.abs_le(&tol) {
                failed = true;
                messages.push(format!("{} vs {}: deviation {} > {}", a.method, b.method, sci(&dev), sci_ratio(&tol)));
            }
            if max_dev.as_ref().is_none_or(|m| dev.to_ratio() > m.to_ratio()) {
                max_dev = Some(dev);
            }
        }
    }
    if nums.len() < 2 && !error {
        messages.push("fewer than two estimates".into());
        failed = true;
    }
    let status = if error {
        Status::Error
    } else if failed {
        Status::Fail
    } else {
        Status::Pass
    };
    FixtureReport {
        id: rec.id.clone(),
        target: rec.target.describe(),
        source: rec.source.clone(),
        status,
        estimates: nums
            .iter()
            .map(|n| Estimate {
                method: n.method.into(),
                value: n.value.to_decimal(opts.digits as usize),
                tolerance: sci_ratio(&n.tolerance),
            })
            .collect(),
        max_deviation: max_dev.as_ref().map(sci),
        predicted_weight,
        observed_weight,
        messages,
    }
}

/// Verifies all records in parallel; the report is sorted by id.
pub fn verify_fixtures(records: &[FixtureRecord], opts: &VerifyOptions) -> VerifyReport {
    let mut fixtures: Vec<FixtureReport> = records.par_iter().map(|r| verify_fixture(r, opts)).collect();
    fixtures.sort_by(|a, b| a.id.cmp(&b.id));
    let passed = fixtures.iter().filter(|f| f.status == Status::Pass).count();
    VerifyReport {
        digits: opts.digits,
        oracle_digits: opts.oracle_digits,
        passed,
        failed: fixtures.len() - passed,
        fixtures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::parse_spec;

    #[test]
    fn bundled_set_is_well_formed() {
        let f = bundled_fixtures();
        assert!(f.len() >= 40);
        let mut ids: Vec<&str> = f.iter().map(|r| r.id.as_str()).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), f.len(), "duplicate ids");
    }

    #[test]
    fn printed_tolerance_is_one_digit_loose() {
        let r = FixtureRecord {
            id: "x".into(),
            target: Target::Series { spec: "S2[2n-1^1 > 0]".into() },
            closed_form: None,
            value: Some("0.36338".into()),
            source: String::new(),
        };
        assert_eq!(r.printed_tolerance().unwrap(), pow10(-4));
    }

    #[test]
    fn weight_predictions() {
        let p = |t: &str| predicted_weight(&parse_spec(t).unwrap());
        assert_eq!(p("S[2n+1^2 >= 2n^1 > 0]"), 3);
        assert_eq!(p("S[2n-1^2 > 2n^1 > 0]"), 2);
        assert_eq!(p("S2[2n-1^1 > 0]"), 1);
        assert_eq!(p("S2[2n-1^1 > 2n^1 > 0]"), 2);
        assert_eq!(p("S2[2n^2 > 0]"), 3);
    }

    #[test]
    fn a_wrong_closed_form_fails() {
        let r = FixtureRecord {
            id: "bad".into(),
            target: Target::Series { spec: "S[2n^1 > 0]".into() },
            closed_form: Some("log2 + 1/10^12".into()),
            value: None,
            source: String::new(),
        };
        let rep = verify_fixture(&r, &VerifyOptions { oracle_digits: None, ..Default::default() });
        assert_eq!(rep.status, Status::Fail);
    }
}
