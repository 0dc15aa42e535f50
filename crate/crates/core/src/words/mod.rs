//! Level-4 iterated-integral words and the trig-to-level-4 change of variables.
//!
//! An atom is the 1-form `sign·dt/(b - t)` on `[0, 1]`. A word lists atoms
//! from the endpoint `1` inward, so `[w0, x-1]` is
//! `∫_{1>t1>t2>0} dt1/t1 · dt2/(-1-t2)`.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::arith::{parse_rat, rat_serde, rat_text, GaussRat};
use crate::compiler::{TrigExpr, TrigForm};
use crate::error::{CompileError, SpecError};
use crate::series::{ParityForm, SeriesSpec};

/// `sign·dt/(pole - t)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Atom {
    pub pole: GaussRat,
    pub sign: i8,
}

impl Atom {
    pub fn new(pole: GaussRat, sign: i8) -> Self {
        debug_assert!(sign == 1 || sign == -1);
        Atom { pole, sign }
    }

    /// `dt/t`.
    pub fn w0() -> Self {
        Atom::new(GaussRat::zero(), -1)
    }

    /// `dt/(b - t)` with `b = re + im·i`.
    pub fn x(re: i64, im: i64) -> Self {
        Atom::new(GaussRat::from_ints(re, im), 1)
    }

    pub fn x1() -> Self {
        Atom::x(1, 0)
    }

    pub fn xm1() -> Self {
        Atom::x(-1, 0)
    }

    pub fn xi() -> Self {
        Atom::x(0, 1)
    }

    pub fn xmi() -> Self {
        Atom::x(0, -1)
    }

    pub fn is_w0(&self) -> bool {
        self.pole.is_zero() && self.sign == -1
    }

    pub fn is_x1(&self) -> bool {
        self.pole.is_one_real() && self.sign == 1
    }

    pub fn conj(&self) -> Self {
        Atom::new(self.pole.conj(), self.sign)
    }

    fn canonical_name(&self) -> Option<&'static str> {
        if self.sign != 1 {
            return if self.pole.is_zero() { Some("w0") } else { None };
        }
        let (re, im) = (&self.pole.re, &self.pole.im);
        if !re.is_integer() || !im.is_integer() {
            return None;
        }
        match (re.to_integer().to_string().as_str(), im.to_integer().to_string().as_str()) {
            ("1", "0") => Some("x1"),
            ("-1", "0") => Some("x-1"),
            ("0", "1") => Some("xi"),
            ("0", "-1") => Some("x-i"),
            _ => None,
        }
    }

    pub fn is_canonical(&self) -> bool {
        self.canonical_name().is_some()
    }
}

impl fmt::Display for Atom {
    /// Canonical atoms print by name; any other atom as
    /// `x[re;im]`, prefixed with `-` for sign −1.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.canonical_name() {
            Some(n) => f.write_str(n),
            None => {
                let sign = if self.sign < 0 { "-" } else { "" };
                write!(f, "{sign}x[{};{}]", rat_text(&self.pole.re), rat_text(&self.pole.im))
            }
        }
    }
}

pub fn parse_atom(text: &str) -> Result<Atom, SpecError> {
    let bad = || SpecError::Invalid(format!("unknown atom {text:?}"));
    Ok(match text {
        "w0" => Atom::w0(),
        "x1" => Atom::x1(),
        "x-1" => Atom::xm1(),
        "xi" => Atom::xi(),
        "x-i" => Atom::xmi(),
        _ => {
            let (sign, rest) = match text.strip_prefix('-') {
                Some(r) => (-1, r),
                None => (1, text),
            };
            let inner = rest.strip_prefix("x[").and_then(|r| r.strip_suffix(']')).ok_or_else(bad)?;
            let (re, im) = inner.split_once(';').ok_or_else(bad)?;
            let pole = GaussRat::new(parse_rat(re).ok_or_else(bad)?, parse_rat(im).ok_or_else(bad)?);
            Atom::new(pole, sign)
        }
    })
}

pub type Word = Vec<Atom>;

/// A word is convergent when it neither starts with `x1` nor ends with `w0`.
pub fn is_convergent(w: &[Atom]) -> bool {
    !(w.first().is_some_and(Atom::is_x1) || w.last().is_some_and(Atom::is_w0))
}

pub fn word_key(w: &[Atom]) -> String {
    let parts: Vec<String> = w.iter().map(Atom::to_string).collect();
    format!("[{}]", parts.join(","))
}

/// All splittings `w = u·v`, from `u` empty to `v` empty.
pub fn deconcatenations(w: &[Atom]) -> Vec<(Word, Word)> {
    (0..=w.len()).map(|k| (w[..k].to_vec(), w[k..].to_vec())).collect()
}

/// Scalar part `gauss + pi·π`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Scalar {
    pub rational: GaussRat,
    #[serde(with = "rat_serde")]
    pub pi: BigRational,
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar { rational: GaussRat::zero(), pi: BigRational::zero() }
    }
}

/// `(2/π)^pi_scale · (Σ coef·I(word) + scalar)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WordSum {
    pub terms: BTreeMap<Word, GaussRat>,
    pub pi_scale: u8,
    pub scalar: Scalar,
}

impl WordSum {
    pub fn new(pi_scale: u8) -> Self {
        WordSum { terms: BTreeMap::new(), pi_scale, scalar: Scalar::zero() }
    }

    pub fn add_word(&mut self, word: Word, coef: &GaussRat) {
        if coef.is_zero() {
            return;
        }
        if word.is_empty() {
            self.scalar.rational += coef;
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

    /// `self += k·other`; both must share `pi_scale`.
    pub fn add_scaled(&mut self, other: &WordSum, k: &GaussRat) {
        debug_assert_eq!(self.pi_scale, other.pi_scale);
        for (w, c) in &other.terms {
            self.add_word(w.clone(), &(c * k));
        }
        self.scalar.rational += &(&other.scalar.rational * k);
        if !other.scalar.pi.is_zero() {
            assert!(k.is_real(), "π-scalars only scale by rationals");
            self.scalar.pi += &other.scalar.pi * &k.re;
        }
    }

    pub fn word_count(&self) -> usize {
        self.terms.len()
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(w, c)| {
                json!({
                    "word": w.iter().map(Atom::to_string).collect::<Vec<_>>(),
                    "coef": serde_json::to_value(c).expect("serializable"),
                })
            })
            .collect();
        json!({
            "terms": terms,
            "pi_scale": self.pi_scale,
            "scalar": serde_json::to_value(&self.scalar).expect("serializable"),
        })
    }

    pub fn from_json(v: &Value) -> Result<Self, SpecError> {
        let bad = |m: &str| SpecError::Invalid(format!("word sum JSON: {m}"));
        let pi_scale = v.get("pi_scale").and_then(Value::as_u64).ok_or_else(|| bad("pi_scale"))? as u8;
        let scalar: Scalar = serde_json::from_value(v.get("scalar").cloned().ok_or_else(|| bad("scalar"))?)
            .map_err(|e| bad(&e.to_string()))?;
        let mut out = WordSum::new(pi_scale);
        out.scalar = scalar;
        for t in v.get("terms").and_then(Value::as_array).ok_or_else(|| bad("terms"))? {
            let word = t
                .get("word")
                .and_then(Value::as_array)
                .ok_or_else(|| bad("word"))?
                .iter()
                .map(|a| a.as_str().ok_or_else(|| bad("atom")).and_then(parse_atom))
                .collect::<Result<Word, _>>()?;
            let coef: GaussRat = serde_json::from_value(t.get("coef").cloned().ok_or_else(|| bad("coef"))?)
                .map_err(|e| bad(&e.to_string()))?;
            out.add_word(word, &coef);
        }
        Ok(out)
    }
}

fn g(re: i64, im: i64) -> GaussRat {
    GaussRat::from_ints(re, im)
}

/// Image of one trig form under `t ↦ x` with `sin t = (1-x²)/(1+x²)`,
/// before the orientation flip.
fn form_image(f: TrigForm) -> Result<Vec<(GaussRat, Atom)>, CompileError> {
    use TrigForm::*;
    Ok(match f {
        Dt => vec![(g(0, 1), Atom::xmi()), (g(0, -1), Atom::xi())],
        Cot => vec![(g(1, 0), Atom::xmi()), (g(1, 0), Atom::xi()), (g(-1, 0), Atom::xm1()), (g(-1, 0), Atom::x1())],
        Tan => vec![(g(-1, 0), Atom::w0()), (g(-1, 0), Atom::xmi()), (g(-1, 0), Atom::xi())],
        Csc => vec![(g(1, 0), Atom::xm1()), (g(-1, 0), Atom::x1())],
        Sec => vec![(g(-1, 0), Atom::w0())],
        SecCsc => vec![(g(-1, 0), Atom::w0()), (g(-1, 0), Atom::xm1()), (g(-1, 0), Atom::x1())],
        Sin | Cos => {
            return Err(CompileError::Unsupported(format!("{f} must be resolved before the change of variables")))
        }
    })
}

/// Change of variables from trig words to level-4 words. Each word is
/// expanded, reversed and multiplied by `(-1)^length`.
pub fn cov(expr: &TrigExpr) -> Result<WordSum, CompileError> {
    let mut out = WordSum::new(expr.two_over_pi_power);
    out.scalar.rational = GaussRat::real(expr.constant.rational.clone());
    out.scalar.pi = expr.constant.pi.clone();
    for (tw, coef) in &expr.terms {
        let images = tw.iter().map(|f| form_image(*f)).collect::<Result<Vec<_>, _>>()?;
        let sign = if tw.len() % 2 == 1 { -BigRational::one() } else { BigRational::one() };
        let mut partial: Vec<(GaussRat, Word)> = vec![(GaussRat::real(coef * sign), Vec::new())];
        // Pushing images from the innermost form first yields the reversed word.
        for image in images.iter().rev() {
            let mut next = Vec::with_capacity(partial.len() * image.len());
            for (c, w) in &partial {
                for (k, a) in image {
                    let mut w2 = w.clone();
                    w2.push(a.clone());
                    next.push((c * k, w2));
                }
            }
            partial = next;
        }
        for (c, w) in partial {
            out.add_word(w, &c);
        }
    }
    if let Some(w) = out.terms.keys().find(|w| !is_convergent(w)) {
        return Err(CompileError::NonconvergentWord(word_key(w)));
    }
    Ok(out)
}

/// `cov` with the `4^weight` word-count guard. The squared binomial adds one
/// form, so its guard is `4^(weight+1)`.
pub fn cov_guarded(expr: &TrigExpr, weight: u32) -> Result<WordSum, CompileError> {
    let ws = cov(expr)?;
    let limit = 4usize.saturating_pow(weight + expr.two_over_pi_power as u32);
    if ws.word_count() > limit {
        return Err(CompileError::TooManyWords { count: ws.word_count(), limit });
    }
    Ok(ws)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RealityClass {
    /// Real word coefficients.
    Real,
    /// Purely imaginary word coefficients; the value is still real.
    ImaginaryPaired,
}

/// Parity of the number of `dt` forms decides whether the coefficients are
/// real or imaginary. The squared binomial contributes one extra outer form
/// (`dt` after a `2n` head, `csc` after a `2n+1` head), which makes both
/// heads imaginary.
///
/// Only theorem-shape specs without `2n-1` belong to a class; anything else
/// mixes both kinds of coefficient and is reported as unsupported.
pub fn reality_class(spec: &SeriesSpec) -> Result<RealityClass, CompileError> {
    let in_domain = spec.is_theorem_shape() && spec.terms[1..].iter().all(|t| t.parity != ParityForm::OddLow);
    if !in_domain && spec.terms[0].parity != ParityForm::OddLow {
        return Err(CompileError::Unsupported("reality class needs a theorem-shape spec without 2n-1".into()));
    }
    match (spec.terms[0].parity, spec.binom_power) {
        (ParityForm::OddLow, _) => Err(CompileError::Unsupported("reality class of a 2n-1 head".into())),
        (ParityForm::Even, 1) => Ok(RealityClass::Real),
        _ => Ok(RealityClass::ImaginaryPaired),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_spec;
    use crate::series::parse_spec;

    #[test]
    fn atom_names_round_trip() {
        for a in [
            Atom::w0(),
            Atom::x1(),
            Atom::xm1(),
            Atom::xi(),
            Atom::xmi(),
            Atom::x(2, 0),
            Atom::new(GaussRat::from_ints(1, -1), -1),
        ] {
            assert_eq!(parse_atom(&a.to_string()).unwrap(), a);
        }
        assert_eq!(Atom::x(1, -1).to_string(), "x[1;-1]");
        assert!(parse_atom("y3").is_err());
    }

    #[test]
    fn dt_maps_to_the_pi_half_word() {
        let mut e = TrigExpr::new(0);
        e.add_word(vec![TrigForm::Dt], &BigRational::one());
        let ws = cov(&e).unwrap();
        assert_eq!(ws.terms.get(&vec![Atom::xmi()]), Some(&g(0, -1)));
        assert_eq!(ws.terms.get(&vec![Atom::xi()]), Some(&g(0, 1)));
    }

    #[test]
    fn log_two_word_cancels_x1() {
        let c = compile_spec(&parse_spec("S[2n^1 > 0]").unwrap()).unwrap();
        let ws = cov(&c.expr).unwrap();
        let expect: BTreeMap<Word, GaussRat> =
            [(vec![Atom::xm1()], g(-2, 0)), (vec![Atom::xi()], g(1, 0)), (vec![Atom::xmi()], g(1, 0))]
                .into_iter()
                .collect();
        assert_eq!(ws.terms, expect);
    }

    #[test]
    fn constant_only_expression() {
        let mut e = TrigExpr::new(0);
        e.add_constant(&BigRational::from_integer(3.into()));
        let ws = cov(&e).unwrap();
        assert!(ws.terms.is_empty());
        assert_eq!(ws.scalar.rational, g(3, 0));
    }

    #[test]
    fn deconcatenation_counts() {
        assert_eq!(deconcatenations(&[]), vec![(vec![], vec![])]);
        let w = vec![Atom::w0(), Atom::xm1(), Atom::x1()];
        let d = deconcatenations(&w);
        assert_eq!(d.len(), 4);
        for (u, v) in d {
            assert_eq!([u, v].concat(), w);
        }
    }

    #[test]
    fn json_round_trip() {
        let c = compile_spec(&parse_spec("S2[2n+1^1 > 2n^1 > 0]").unwrap()).unwrap();
        let ws = cov(&c.expr).unwrap();
        let text = ws.to_json().to_string();
        let back = WordSum::from_json(&serde_json::from_str(&text).unwrap()).unwrap();
        assert_eq!(back, ws);
        assert_eq!(back.to_json().to_string(), text);
    }
}
