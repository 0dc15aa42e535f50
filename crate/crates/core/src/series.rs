//! Series specifications: the user-facing description of one nested
//! central-binomial sum
//!
//! ```text
//!   Σ_{n_1 ≻ n_2 ≻ … ≻ n_d ≻ tail}  a_{n_1}(x)^p / (l_1(n_1)^{s_1} ⋯ l_d(n_d)^{s_d})
//! ```
//!
//! with `a_n(x) = C(2n, n) x^{2n} / 4^n`, `l_j(n) ∈ {2n, 2n+1, 2n-1}` and each
//! `≻` either `>` or `≥`.
//!
//! The textual form is `S[2n+1^1 >= 2n^1 > 0]`, with `S2` for `p = 2` and the
//! optional suffixes `@tail=N` and `@x=DECIMAL`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::arith::{parse_decimal, parse_rat, rat_int, rat_text};
use crate::error::SpecError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ParityForm {
    /// `2n`
    Even,
    /// `2n+1`
    OddHigh,
    /// `2n-1`
    OddLow,
}

impl ParityForm {
    pub const ALL: [ParityForm; 3] = [ParityForm::Even, ParityForm::OddHigh, ParityForm::OddLow];

    /// The constant `c` in `l(n) = 2n + c`.
    pub fn offset(self) -> i64 {
        match self {
            ParityForm::Even => 0,
            ParityForm::OddHigh => 1,
            ParityForm::OddLow => -1,
        }
    }

    pub fn value(self, n: i64) -> i64 {
        2 * n + self.offset()
    }

    /// δ(l): 0 for `2n`, 1 for the odd forms.
    pub fn delta(self) -> u32 {
        match self {
            ParityForm::Even => 0,
            _ => 1,
        }
    }

    pub fn text(self) -> &'static str {
        match self {
            ParityForm::Even => "2n",
            ParityForm::OddHigh => "2n+1",
            ParityForm::OddLow => "2n-1",
        }
    }

    /// The relation this parity takes below it in theorem shape.
    pub fn conforming_relation(self) -> Relation {
        match self {
            ParityForm::OddHigh => Relation::Weak,
            _ => Relation::Strict,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relation {
    Strict,
    Weak,
}

impl Relation {
    pub fn text(self) -> &'static str {
        match self {
            Relation::Strict => ">",
            Relation::Weak => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexTerm {
    pub parity: ParityForm,
    pub exponent: u32,
}

impl IndexTerm {
    pub fn new(parity: ParityForm, exponent: u32) -> Self {
        IndexTerm { parity, exponent }
    }
}

impl std::str::FromStr for IndexTerm {
    type Err = SpecError;
    /// Parses `2n^s`, `2n+1^s` or `2n-1^s`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lx = Lexer { text: s, pos: 0 };
        let term = parse_term(&mut lx)?;
        if !lx.at_end() {
            return Err(lx.error("unexpected trailing input".into()));
        }
        if term.exponent == 0 {
            return Err(SpecError::Invalid("exponent must be at least 1".into()));
        }
        Ok(term)
    }
}

impl Serialize for IndexTerm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for IndexTerm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

impl fmt::Display for IndexTerm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}^{}", self.parity.text(), self.exponent)
    }
}

/// One nested central-binomial series.
///
/// `relations[j]` links `terms[j]` to `terms[j + 1]`; the last relation links
/// the innermost index to `tail_bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SeriesSpec {
    pub binom_power: u8,
    pub terms: Vec<IndexTerm>,
    pub relations: Vec<Relation>,
    pub tail_bound: u64,
    pub argument: BigRational,
}

impl SeriesSpec {
    /// Builds and validates a spec with `tail_bound = 0` and `x = 1`.
    pub fn new(binom_power: u8, terms: Vec<IndexTerm>, relations: Vec<Relation>) -> Result<Self, SpecError> {
        let spec = SeriesSpec { binom_power, terms, relations, tail_bound: 0, argument: BigRational::one() };
        spec.validate()?;
        Ok(spec)
    }

    /// Builds a spec without validation. Used by rewriting code whose
    /// outputs are validated in tests.
    pub fn raw(binom_power: u8, terms: Vec<IndexTerm>, relations: Vec<Relation>) -> Self {
        SeriesSpec { binom_power, terms, relations, tail_bound: 0, argument: BigRational::one() }
    }

    pub fn depth(&self) -> usize {
        self.terms.len()
    }

    pub fn weight(&self) -> u32 {
        self.terms.iter().map(|t| t.exponent).sum()
    }

    pub fn with_tail(mut self, tail: u64) -> Self {
        self.tail_bound = tail;
        self
    }

    pub fn with_argument(mut self, x: BigRational) -> Self {
        self.argument = x;
        self
    }

    /// Smallest admissible value of each index, innermost bound included.
    pub fn min_indices(&self) -> Vec<u64> {
        let d = self.terms.len();
        let mut mins = vec![0u64; d];
        let mut below = self.tail_bound;
        for j in (0..d).rev() {
            below += match self.relations[j] {
                Relation::Strict => 1,
                Relation::Weak => 0,
            };
            mins[j] = below;
        }
        mins
    }

    pub fn validate(&self) -> Result<(), SpecError> {
        let invalid = |m: String| Err(SpecError::Invalid(m));
        if self.terms.is_empty() {
            return invalid("depth must be at least 1".into());
        }
        if self.relations.len() != self.terms.len() {
            return invalid(format!(
                "expected {} relations for {} terms, found {}",
                self.terms.len(),
                self.terms.len(),
                self.relations.len()
            ));
        }
        if self.binom_power != 1 && self.binom_power != 2 {
            return invalid(format!("binomial power must be 1 or 2, found {}", self.binom_power));
        }
        if let Some(t) = self.terms.iter().find(|t| t.exponent == 0) {
            return invalid(format!("exponent must be at least 1 (term {t})"));
        }
        if !self.argument.is_positive() || self.argument > BigRational::one() {
            return invalid(format!("argument x must lie in (0, 1], found {}", rat_text(&self.argument)));
        }
        // Only 2n and 2n-1 can vanish, and only at index 0.
        for (j, (term, min)) in self.terms.iter().zip(self.min_indices()).enumerate() {
            if term.parity != ParityForm::OddHigh && min == 0 {
                return invalid(format!(
                    "definedness: index {} can reach 0, where {} vanishes",
                    j + 1,
                    term.parity.text()
                ));
            }
        }
        Ok(())
    }

    /// True when every relation is the conforming one for its parity.
    pub fn is_theorem_shape(&self) -> bool {
        self.terms.iter().zip(&self.relations).all(|(t, r)| t.parity.conforming_relation() == *r)
    }

    pub fn render(&self) -> String {
        let mut out = String::from(if self.binom_power == 2 { "S2[" } else { "S[" });
        for (t, r) in self.terms.iter().zip(&self.relations) {
            out.push_str(&format!("{t} {} ", r.text()));
        }
        out.push_str("0]");
        if self.tail_bound != 0 {
            out.push_str(&format!("@tail={}", self.tail_bound));
        }
        if !self.argument.is_one() {
            out.push_str(&format!("@x={}", render_argument(&self.argument)));
        }
        out
    }

    /// Canonical form used for hashing. The representation is already
    /// normalized (reduced rational argument, ordered fields), so this is a
    /// structural copy; it exists so callers never hash a hand-built value.
    pub fn canonicalize(&self) -> SeriesSpec {
        SeriesSpec {
            binom_power: self.binom_power,
            terms: self.terms.clone(),
            relations: self.relations.clone(),
            tail_bound: self.tail_bound,
            argument: BigRational::new(self.argument.numer().clone(), self.argument.denom().clone()),
        }
    }

    /// Lowercase hex SHA-256 of the canonical rendering.
    pub fn key(&self) -> String {
        let text = self.canonicalize().render();
        hex_sha256(text.as_bytes())
    }
}

pub(crate) fn hex_sha256(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    digest.iter().map(|b| format!("{b:02x}")).collect()
}

/// Exact decimal text when the denominator is of the form 2^a 5^b,
/// otherwise `p/q`.
fn render_argument(x: &BigRational) -> String {
    let mut den = x.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let mut places = 0u32;
    let mut twos = 0u32;
    let mut fives = 0u32;
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if !den.is_one() {
        return rat_text(x);
    }
    places = places.max(twos).max(fives);
    let scaled = x * BigRational::from_integer(BigInt::from(10).pow(places));
    let digits = scaled.to_integer().abs().to_string();
    let sign = if x.is_negative() { "-" } else { "" };
    if places == 0 {
        return format!("{sign}{digits}");
    }
    let padded = format!("{:0>width$}", digits, width = places as usize + 1);
    let (i, f) = padded.split_at(padded.len() - places as usize);
    format!("{sign}{i}.{f}")
}

impl fmt::Display for SeriesSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

impl std::str::FromStr for SeriesSpec {
    type Err = SpecError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_spec(s)
    }
}

impl Serialize for SeriesSpec {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.render())
    }
}

impl<'de> Deserialize<'de> for SeriesSpec {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let text = String::deserialize(d)?;
        parse_spec(&text).map_err(serde::de::Error::custom)
    }
}

struct Lexer<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while let Some(c) = self.text[self.pos..].chars().next() {
            if c.is_whitespace() {
                self.pos += c.len_utf8();
            } else {
                break;
            }
        }
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, token: &str) -> Result<(), SpecError> {
        if self.eat(token) {
            Ok(())
        } else {
            Err(self.error(format!("expected {token:?}")))
        }
    }

    fn uint(&mut self) -> Result<u64, SpecError> {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.chars().take_while(|c| c.is_ascii_digit()).count();
        if len == 0 {
            return Err(self.error("expected an unsigned integer".into()));
        }
        let value = rest[..len].parse().map_err(|_| self.error("integer out of range".into()))?;
        self.pos += len;
        Ok(value)
    }

    fn until_suffix(&mut self) -> &'a str {
        self.skip_ws();
        let rest = &self.text[self.pos..];
        let len = rest.find(|c: char| c == '@' || c.is_whitespace()).unwrap_or(rest.len());
        self.pos += len;
        &rest[..len]
    }

    fn error(&self, message: String) -> SpecError {
        SpecError::Syntax { position: self.pos, message }
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos == self.text.len()
    }
}

fn parse_term(lx: &mut Lexer<'_>) -> Result<IndexTerm, SpecError> {
    lx.expect("2n")?;
    let parity = if lx.eat("+1") {
        ParityForm::OddHigh
    } else if lx.eat("-1") {
        ParityForm::OddLow
    } else {
        ParityForm::Even
    };
    lx.expect("^")?;
    let exponent = lx.uint()?;
    let exponent = u32::try_from(exponent).map_err(|_| lx.error("exponent too large".into()))?;
    Ok(IndexTerm { parity, exponent })
}

/// Parses the spec mini-language and validates the result.
pub fn parse_spec(text: &str) -> Result<SeriesSpec, SpecError> {
    let mut lx = Lexer { text, pos: 0 };
    let binom_power = if lx.eat("S2") {
        2
    } else if lx.eat("S") {
        1
    } else {
        return Err(lx.error("expected \"S\" or \"S2\"".into()));
    };
    lx.expect("[")?;
    let mut terms = Vec::new();
    let mut relations = Vec::new();
    loop {
        // Either a term or the closing "0]".
        lx.skip_ws();
        if !terms.is_empty() && lx.eat("0") {
            lx.expect("]")?;
            break;
        }
        terms.push(parse_term(&mut lx)?);
        let rel = if lx.eat(">=") {
            Relation::Weak
        } else if lx.eat(">") {
            Relation::Strict
        } else {
            return Err(lx.error("expected \">\" or \">=\"".into()));
        };
        relations.push(rel);
    }
    let mut spec = SeriesSpec::raw(binom_power, terms, relations);
    let mut seen_tail = false;
    let mut seen_x = false;
    while !lx.at_end() {
        if lx.eat("@tail=") && !seen_tail {
            spec.tail_bound = lx.uint()?;
            seen_tail = true;
        } else if lx.eat("@x=") && !seen_x {
            let start = lx.pos;
            let lit = lx.until_suffix();
            let value = parse_decimal(lit)
                .or_else(|| parse_rat(lit))
                .ok_or(SpecError::Syntax { position: start, message: format!("bad argument {lit:?}") })?;
            spec.argument = value;
            seen_x = true;
        } else {
            return Err(lx.error("unexpected trailing input".into()));
        }
    }
    spec.validate()?;
    Ok(spec)
}

/// A harmonic-weighted central-binomial sum
///
/// ```text
///   Σ_n  a_n^p · ζ_n(k) · t_n(l) / l_0(n)^q
/// ```
///
/// where `ζ_n(k) = Σ_{n ≥ m_1 > … > m_e > 0} Π m_i^{-k_i}` and
/// `t_n(l) = Σ_{n ≥ r_1 > … > r_f > 0} Π (2 r_j - 1)^{-l_j}`. The outer index
/// runs over `n ≥ 0` for a `2n+1` head and `n ≥ 1` otherwise.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct HarmonicSpec {
    pub k_vec: Vec<u32>,
    pub l_vec: Vec<u32>,
    pub head: IndexTerm,
    pub binom_power: u8,
}

impl HarmonicSpec {
    pub fn validate(&self) -> Result<(), SpecError> {
        if self.binom_power != 1 && self.binom_power != 2 {
            return Err(SpecError::Invalid(format!("binomial power must be 1 or 2, found {}", self.binom_power)));
        }
        if self.head.exponent == 0 || self.k_vec.contains(&0) || self.l_vec.contains(&0) {
            return Err(SpecError::Invalid("all exponents must be at least 1".into()));
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        let list = |v: &[u32]| v.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
        format!(
            "H{}[{}; k=({}); l=({})]",
            if self.binom_power == 2 { "2" } else { "" },
            self.head,
            list(&self.k_vec),
            list(&self.l_vec)
        )
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Strand {
    Zeta(u32),
    Odd(u32),
}

/// Expands a harmonic-weighted sum into nested series, one per interleaving
/// of the `ζ_n` chain with the `t_n` chain.
///
/// The `t_n` indices are shifted down by one, so they become `2r+1` terms
/// with `n > r_1` and `r_f ≥ 0`. Between the two chains every pair is
/// ordered either `m > r` or `r ≥ m`, which makes the interleavings a
/// partition of the index region. Relations are emitted as they arise; they
/// are not converted to theorem shape here.
pub fn expand_harmonic(h: &HarmonicSpec) -> Vec<(BigRational, SeriesSpec)> {
    let mut merges = Vec::new();
    let zeta: Vec<Strand> = h.k_vec.iter().map(|&k| Strand::Zeta(k)).collect();
    let odd: Vec<Strand> = h.l_vec.iter().map(|&l| Strand::Odd(l)).collect();
    interleave(&zeta, &odd, &mut Vec::new(), &mut merges);

    let head_factor = if h.head.parity == ParityForm::Even { pow2(h.head.exponent) } else { BigRational::one() };
    let zeta_factor = h.k_vec.iter().fold(BigRational::one(), |acc, &k| acc * pow2(k));

    let mut out = Vec::new();
    for merge in merges {
        let mut terms = vec![h.head];
        // n ≥ m_1 for the ζ chain, n > r_1 for the shifted odd chain.
        let mut relations = vec![match merge.first() {
            Some(Strand::Zeta(_)) => Relation::Weak,
            Some(Strand::Odd(_)) => Relation::Strict,
            None => h.head.parity.conforming_relation(),
        }];
        for (i, s) in merge.iter().enumerate() {
            let term = match s {
                Strand::Zeta(k) => IndexTerm::new(ParityForm::Even, *k),
                Strand::Odd(l) => IndexTerm::new(ParityForm::OddHigh, *l),
            };
            terms.push(term);
            let rel = match (s, merge.get(i + 1)) {
                (Strand::Zeta(_), _) => Relation::Strict,
                (Strand::Odd(_), Some(Strand::Zeta(_))) => Relation::Weak,
                (Strand::Odd(_), Some(Strand::Odd(_))) => Relation::Strict,
                (Strand::Odd(_), None) => Relation::Weak,
            };
            relations.push(rel);
        }
        let spec = SeriesSpec::raw(h.binom_power, terms, relations);
        out.push((&head_factor * &zeta_factor, spec));
    }
    out
}

fn interleave(a: &[Strand], b: &[Strand], prefix: &mut Vec<Strand>, out: &mut Vec<Vec<Strand>>) {
    if a.is_empty() && b.is_empty() {
        out.push(prefix.clone());
        return;
    }
    if let Some((first, rest)) = a.split_first() {
        prefix.push(*first);
        interleave(rest, b, prefix, out);
        prefix.pop();
    }
    if let Some((first, rest)) = b.split_first() {
        prefix.push(*first);
        interleave(a, rest, prefix, out);
        prefix.pop();
    }
}

fn pow2(k: u32) -> BigRational {
    BigRational::from_integer(BigInt::one() << k)
}

/// `H_{2n} = ½·H_n + t_n(1)`, expressed as a weighted pair of harmonic specs
/// under a common head.
pub fn h2n_split(head: IndexTerm, binom_power: u8) -> Vec<(BigRational, HarmonicSpec)> {
    vec![
        (BigRational::new(1.into(), 2.into()), HarmonicSpec { k_vec: vec![1], l_vec: vec![], head, binom_power }),
        (rat_int(1), HarmonicSpec { k_vec: vec![], l_vec: vec![1], head, binom_power }),
    ]
}
