//! Trigonometric 1-forms on `[0, π/2]` and their rational combinations.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::arith::{rat_int, rat_serde};
use crate::error::CompileError;

/// A 1-form `f(t)·dt` on `[0, π/2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrigForm {
    Dt,
    Cot,
    Tan,
    Csc,
    Sec,
    SecCsc,
    Sin,
    Cos,
}

impl TrigForm {
    pub fn name(self) -> &'static str {
        match self {
            TrigForm::Dt => "dt",
            TrigForm::Cot => "cot",
            TrigForm::Tan => "tan",
            TrigForm::Csc => "csc",
            TrigForm::Sec => "sec",
            TrigForm::SecCsc => "seccsc",
            TrigForm::Sin => "sin",
            TrigForm::Cos => "cos",
        }
    }
}

impl fmt::Display for TrigForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A word of forms; the leftmost form is outermost (nearest `π/2`), the
/// rightmost is integrated first (nearest `0`).
pub type TrigWord = Vec<TrigForm>;

type Combo = Vec<(i64, TrigForm)>;

fn undefined(factor: &str, form: TrigForm) -> CompileError {
    CompileError::UndefinedProduct(format!("{factor}·{form}"))
}

/// `sec t` times a form.
pub fn sec_times(form: TrigForm) -> Result<TrigForm, CompileError> {
    match form {
        TrigForm::Dt => Ok(TrigForm::Sec),
        TrigForm::Cot => Ok(TrigForm::Csc),
        TrigForm::Csc => Ok(TrigForm::SecCsc),
        other => Err(undefined("sec", other)),
    }
}

/// `tan t` times a form.
pub fn tan_times(form: TrigForm) -> Result<TrigForm, CompileError> {
    match form {
        TrigForm::Dt => Ok(TrigForm::Tan),
        TrigForm::Cot => Ok(TrigForm::Dt),
        TrigForm::Csc => Ok(TrigForm::Sec),
        other => Err(undefined("tan", other)),
    }
}

/// `sin t` times a form, expanded into the alphabet.
pub fn sin_times(form: TrigForm) -> Result<Combo, CompileError> {
    use TrigForm::*;
    Ok(match form {
        Dt => vec![(1, Sin)],
        Cot => vec![(1, Cos)],
        // sin²/cos = sec − cos
        Tan => vec![(1, Sec), (-1, Cos)],
        Csc => vec![(1, Dt)],
        Sec => vec![(1, Tan)],
        SecCsc => vec![(1, Sec)],
        other => return Err(undefined("sin", other)),
    })
}

/// `cos t` times a form, expanded into the alphabet.
pub fn cos_times(form: TrigForm) -> Result<Combo, CompileError> {
    use TrigForm::*;
    Ok(match form {
        Dt => vec![(1, Cos)],
        // cos²/sin = csc − sin
        Cot => vec![(1, Csc), (-1, Sin)],
        Tan => vec![(1, Sin)],
        Csc => vec![(1, Cot)],
        Sec => vec![(1, Dt)],
        SecCsc => vec![(1, Csc)],
        other => return Err(undefined("cos", other)),
    })
}

/// Peeled scalar `rational + pi·π`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PeeledConstant {
    #[serde(with = "rat_serde")]
    pub rational: BigRational,
    #[serde(with = "rat_serde")]
    pub pi: BigRational,
}

impl PeeledConstant {
    pub fn zero() -> Self {
        PeeledConstant { rational: BigRational::zero(), pi: BigRational::zero() }
    }

    pub fn is_zero(&self) -> bool {
        self.rational.is_zero() && self.pi.is_zero()
    }

    pub fn add_scaled(&mut self, other: &PeeledConstant, k: &BigRational) {
        self.rational += &other.rational * k;
        self.pi += &other.pi * k;
    }
}

/// Rational combination of trig words plus a peeled constant, optionally
/// scaled by `2/π`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrigExpr {
    pub terms: BTreeMap<TrigWord, BigRational>,
    pub constant: PeeledConstant,
    pub two_over_pi_power: u8,
}

impl TrigExpr {
    pub fn new(two_over_pi_power: u8) -> Self {
        TrigExpr { terms: BTreeMap::new(), constant: PeeledConstant::zero(), two_over_pi_power }
    }

    pub fn add_word(&mut self, word: TrigWord, coef: &BigRational) {
        if coef.is_zero() {
            return;
        }
        match self.terms.entry(word) {
            Entry::Occupied(mut e) => {
                *e.get_mut() += coef;
                if e.get().is_zero() {
                    e.remove();
                }
            }
            Entry::Vacant(v) => {
                v.insert(coef.clone());
            }
        }
    }

    pub fn add_constant(&mut self, c: &BigRational) {
        self.constant.rational += c;
    }

    /// `self += k·other`; both sides must carry the same `2/π` power.
    pub fn add_scaled(&mut self, other: &TrigExpr, k: &BigRational) {
        debug_assert_eq!(self.two_over_pi_power, other.two_over_pi_power);
        for (w, c) in &other.terms {
            self.add_word(w.clone(), &(c * k));
        }
        self.constant.add_scaled(&other.constant, k);
    }

    pub fn max_word_len(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let terms: Vec<serde_json::Value> = self
            .terms
            .iter()
            .map(|(w, c)| {
                serde_json::json!({
                    "word": w.iter().map(|f| f.name()).collect::<Vec<_>>(),
                    "coef": crate::arith::rat_text(c),
                })
            })
            .collect();
        serde_json::json!({
            "terms": terms,
            "constant": serde_json::to_value(&self.constant).expect("serializable"),
            "two_over_pi_power": self.two_over_pi_power,
        })
    }
}

/// Multiplies the leftmost form of `word` (which must be nonempty).
pub fn with_first(
    word: &[TrigForm],
    f: impl Fn(TrigForm) -> Result<TrigForm, CompileError>,
) -> Result<TrigWord, CompileError> {
    let (first, rest) = word.split_first().expect("non-empty word");
    let mut out = vec![f(*first)?];
    out.extend_from_slice(rest);
    Ok(out)
}

/// `(cot t dt)^k` followed by `tail`.
pub fn cot_power_then(k: u32, tail: &[TrigForm]) -> TrigWord {
    let mut out = vec![TrigForm::Cot; k as usize];
    out.extend_from_slice(tail);
    out
}

/// Replaces leading `sin`/`cos` forms by integration by parts until none
/// remain. `∫_0^{π/2} sin t·G(t)dt = ∫ cos t·G'(t)dt` and
/// `∫_0^{π/2} cos t·G(t)dt = ∫ (1 − sin t)·G'(t)dt` (both boundary terms
/// vanish because `G(0) = 0`); a lone `sin` or `cos` integrates to 1.
pub fn resolve_leading_sin_cos(expr: &mut TrigExpr) -> Result<(), CompileError> {
    loop {
        let Some(word) = expr.terms.keys().find(|w| matches!(w.first(), Some(TrigForm::Sin | TrigForm::Cos))).cloned()
        else {
            return Ok(());
        };
        let coef = expr.terms.remove(&word).expect("present");
        if word.len() == 1 {
            expr.add_constant(&coef);
            continue;
        }
        let next = word[1];
        let rest = &word[2..];
        let expansion: Combo = match word[0] {
            TrigForm::Sin => cos_times(next)?,
            _ => {
                let mut v = vec![(1, next)];
                v.extend(sin_times(next)?.into_iter().map(|(c, f)| (-c, f)));
                v
            }
        };
        for (c, f) in expansion {
            let mut w = vec![f];
            w.extend_from_slice(rest);
            expr.add_word(w, &(&coef * rat_int(c)));
        }
    }
}

/// Coefficient one helper.
pub fn one() -> BigRational {
    BigRational::one()
}
