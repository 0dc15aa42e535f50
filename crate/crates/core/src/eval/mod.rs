//! Numerical evaluation of iterated integrals over `[0, 1]`.
//!
//! A word is split at `c` (normally `1/2`) with the path-composition rule
//! `I(w) = Σ_{w=u·v} I_{[c,1]}(u)·I_{[0,c]}(v)`. The lower piece is a power
//! series in `τ = t/c`; the upper piece is mapped to `[0, 1-c]` by
//! `t ↦ 1-t` and handled the same way. Every pole then sits at distance at
//! least `2` from the origin in the scaled variable, so the series converge
//! geometrically. Distinct prefixes and suffixes are evaluated once each by
//! walking the words in trie order.

mod cache;

use std::collections::{BTreeSet, HashMap};

use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub use cache::{ValueCache, CACHE_ENV, DEFAULT_CACHE_PATH};

use crate::arith::{rat, BigComplex, GaussRat, Real};
use crate::error::EvalError;
use crate::words::{is_convergent, word_key, Atom, Word, WordSum};

/// Extra working bits on top of the requested precision.
const GUARD_BITS: u32 = 32;

/// An atom after scaling its segment to `[0, 1]`.
#[derive(Clone, Debug)]
struct ScaledAtom {
    /// `1/b'`, or `None` for a pole at the origin.
    inv_pole: Option<GaussRat>,
    sign: i8,
}

fn scale_atom(a: &Atom, radius: &BigRational) -> Result<(ScaledAtom, Option<BigRational>), EvalError> {
    if a.pole.is_zero() {
        return Ok((ScaledAtom { inv_pole: None, sign: a.sign }, None));
    }
    let scaled = a.pole.scale(&radius.recip());
    let norm = scaled.norm_sqr();
    if norm <= BigRational::one() {
        return Err(EvalError::PoleTooClose(format!("{a} on a segment of radius {radius}")));
    }
    let inv = scaled.inv().expect("nonzero pole");
    Ok((ScaledAtom { inv_pole: Some(inv), sign: a.sign }, Some(norm)))
}

/// Number of series terms needed for `bits` bits when the nearest scaled
/// pole has squared modulus `min_norm`.
fn truncation(bits: u32, min_norm: Option<&BigRational>, depth: usize) -> usize {
    let log2_r = match min_norm {
        Some(n) => 0.5 * n.to_f64().unwrap_or(4.0).log2(),
        None => 1.0,
    };
    let log2_r = log2_r.clamp(0.05, 1.0e6);
    let slack = 48.0 + 4.0 * depth as f64 + (depth as f64) * 12.0;
    ((bits as f64 + slack) / log2_r).ceil() as usize + 8
}

/// Power series state: coefficient `m` of the running suffix integral.
struct Series {
    coef: Vec<BigComplex>,
}

impl Series {
    fn unit(n: usize, bits: u32) -> Self {
        let mut coef = vec![BigComplex::zero(bits); n + 1];
        coef[0] = BigComplex::one(bits);
        Series { coef }
    }

    /// Multiplies by the atom's 1-form and integrates from 0.
    fn absorb(&self, atom: &ScaledAtom, bits: u32) -> Series {
        let n = self.coef.len() - 1;
        let mut out = vec![BigComplex::zero(bits); n + 1];
        match &atom.inv_pole {
            // sign/(0 - τ) = -sign/τ; the running series has no constant
            // term here, so division by τ is a shift.
            None => {
                for (m, (o, h)) in out.iter_mut().zip(&self.coef).enumerate().skip(1) {
                    let v = h.div_int(m as i64);
                    *o = if atom.sign > 0 { -&v } else { v };
                }
            }
            // h = sign·g/(b' - τ):  h_m = (sign·g_m + h_{m-1})/b'.
            Some(inv) => {
                let mut h = BigComplex::zero(bits);
                for m in 0..n {
                    let g = if atom.sign > 0 { self.coef[m].clone() } else { -&self.coef[m] };
                    h = (&g + &h).mul_gauss(inv);
                    out[m + 1] = h.div_int(m as i64 + 1);
                }
            }
        }
        Series { coef: out }
    }

    fn at_one(&self, bits: u32) -> BigComplex {
        let mut s = BigComplex::zero(bits);
        for c in &self.coef {
            s += c;
        }
        s
    }
}

/// `∫_{radius>t1>…>tk>0}` of the atoms of `atoms`, leftmost outermost.
pub fn eval_segment(atoms: &[Atom], radius: &BigRational, precision_bits: u32) -> Result<BigComplex, EvalError> {
    if atoms.last().is_some_and(|a| a.pole.is_zero()) {
        return Err(EvalError::DivergentWord(word_key(atoms)));
    }
    let bits = precision_bits + GUARD_BITS;
    let mut scaled = Vec::with_capacity(atoms.len());
    let mut min_norm: Option<BigRational> = None;
    for a in atoms {
        let (s, norm) = scale_atom(a, radius)?;
        if let Some(n) = norm {
            min_norm = Some(match min_norm {
                Some(m) if m < n => m,
                _ => n,
            });
        }
        scaled.push(s);
    }
    let n = truncation(bits, min_norm.as_ref(), atoms.len());
    let mut series = Series::unit(n, bits);
    for a in scaled.iter().rev() {
        series = series.absorb(a, bits);
    }
    Ok(series.at_one(bits).with_bits(precision_bits))
}

/// Image of an atom under `t ↦ 1 - t`.
fn reflect(a: &Atom) -> Atom {
    Atom::new(a.pole.one_minus(), -a.sign)
}

/// Evaluates every distinct suffix of `words` over `[0, radius]` (reflected
/// prefixes for the upper piece). Words are walked in trie order so that a
/// shared suffix is absorbed only once.
fn all_suffix_values(
    chains: &BTreeSet<Vec<Atom>>,
    radius: &BigRational,
    bits: u32,
) -> Result<HashMap<Vec<Atom>, BigComplex>, EvalError> {
    // Chains are stored innermost atom first; a prefix of a chain is a
    // suffix of the word it came from.
    let mut values = HashMap::new();
    let mut max_len = 0;
    let mut min_norm: Option<BigRational> = None;
    let mut scaled_of: HashMap<Atom, ScaledAtom> = HashMap::new();
    for ch in chains {
        max_len = max_len.max(ch.len());
        for a in ch {
            if !scaled_of.contains_key(a) {
                let (s, norm) = scale_atom(a, radius)?;
                if let Some(n) = norm {
                    min_norm = Some(match min_norm {
                        Some(m) if m < n => m,
                        _ => n,
                    });
                }
                scaled_of.insert(a.clone(), s);
            }
        }
    }
    let n = truncation(bits, min_norm.as_ref(), max_len);
    let mut stack: Vec<(Atom, Series)> = Vec::new();
    let base = Series::unit(n, bits);
    for ch in chains {
        let common = stack.iter().zip(ch.iter()).take_while(|((a, _), b)| a == *b).count();
        stack.truncate(common);
        for a in &ch[common..] {
            let next = stack.last().map(|(_, s)| s).unwrap_or(&base).absorb(&scaled_of[a], bits);
            stack.push((a.clone(), next));
            let key: Vec<Atom> = stack.iter().map(|(a, _)| a.clone()).collect();
            let v = stack.last().expect("pushed").1.at_one(bits);
            values.insert(key, v);
        }
    }
    Ok(values)
}

/// Batch evaluator with an optional persistent cache.
#[derive(Clone, Debug)]
pub struct Evaluator {
    pub precision_bits: u32,
    pub split: BigRational,
    cache: Option<std::sync::Arc<ValueCache>>,
}

impl Evaluator {
    pub fn new(precision_bits: u32) -> Self {
        Evaluator { precision_bits, split: rat(1, 2), cache: None }
    }

    /// Split point other than `1/2`; only used for consistency checks.
    pub fn with_split(mut self, c: BigRational) -> Self {
        assert!(c.is_positive() && c < BigRational::one(), "split point must lie in (0, 1)");
        self.split = c;
        self
    }

    pub fn with_cache(mut self, cache: std::sync::Arc<ValueCache>) -> Self {
        self.cache = Some(cache);
        self
    }

    fn working_bits(&self) -> u32 {
        self.precision_bits + GUARD_BITS
    }

    /// Evaluates a batch of convergent words; values carry the working
    /// precision.
    pub fn eval_words(&self, words: &[Word]) -> Result<HashMap<Word, BigComplex>, EvalError> {
        let bits = self.working_bits();
        let mut out = HashMap::new();
        let mut todo = Vec::new();
        for w in words {
            if !is_convergent(w) {
                return Err(EvalError::DivergentWord(word_key(w)));
            }
            if out.contains_key(w) {
                continue;
            }
            let cached = if self.split == rat(1, 2) {
                self.cache.as_ref().and_then(|c| c.get(&word_key(w), self.precision_bits))
            } else {
                None
            };
            match cached {
                Some(v) => {
                    out.insert(w.clone(), v.with_bits(bits));
                }
                None => {
                    out.insert(w.clone(), BigComplex::zero(bits));
                    todo.push(w.clone());
                }
            }
        }
        if todo.is_empty() {
            return Ok(out);
        }
        let lower_chains: BTreeSet<Vec<Atom>> = todo.iter().map(|w| w.iter().rev().cloned().collect()).collect();
        let upper_chains: BTreeSet<Vec<Atom>> = todo.iter().map(|w| w.iter().map(reflect).collect()).collect();
        let lower = all_suffix_values(&lower_chains, &self.split, bits)?;
        let upper = all_suffix_values(&upper_chains, &(BigRational::one() - &self.split), bits)?;
        let one = BigComplex::one(bits);
        for w in todo {
            let k = w.len();
            let mut total = BigComplex::zero(bits);
            for cut in 0..=k {
                let up = if cut == 0 {
                    &one
                } else {
                    let key: Vec<Atom> = w[..cut].iter().map(reflect).collect();
                    &upper[&key]
                };
                let low = if cut == k {
                    &one
                } else {
                    let key: Vec<Atom> = w[cut..].iter().rev().cloned().collect();
                    &lower[&key]
                };
                total += &(up * low);
            }
            if let (Some(c), true) = (&self.cache, self.split == rat(1, 2)) {
                c.insert(&word_key(&w), self.precision_bits, &total);
            }
            out.insert(w, total);
        }
        Ok(out)
    }

    pub fn eval_word(&self, w: &[Atom]) -> Result<BigComplex, EvalError> {
        let mut m = self.eval_words(&[w.to_vec()])?;
        Ok(m.remove(w).expect("evaluated").with_bits(self.precision_bits))
    }

    /// `(2/π)^pi_scale · (Σ coef·I(w) + scalar)`.
    pub fn eval_wordsum(&self, ws: &WordSum) -> Result<BigComplex, EvalError> {
        let bits = self.working_bits();
        let words: Vec<Word> = ws.terms.keys().cloned().collect();
        let values = self.eval_words(&words)?;
        let mut total = BigComplex::zero(bits);
        for (w, c) in &ws.terms {
            total += &values[w].mul_gauss(c);
        }
        total += &BigComplex::from_gauss(&ws.scalar.rational, bits);
        let pi = Real::pi(bits);
        if !ws.scalar.pi.is_zero() {
            total += &BigComplex::from_real(pi.mul_ratio(&ws.scalar.pi));
        }
        for _ in 0..ws.pi_scale {
            let two_over_pi = Real::from_int(2, bits).checked_div(&pi).ok_or(EvalError::DivisionByZero)?;
            total = total.scale(&two_over_pi);
        }
        Ok(total.with_bits(self.precision_bits))
    }
}

/// `I_{[0,1]}(w)` split at `1/2`.
pub fn eval_word(w: &[Atom], precision_bits: u32) -> Result<BigComplex, EvalError> {
    Evaluator::new(precision_bits).eval_word(w)
}

/// `I_{[0,1]}(w)` split at `c` instead of `1/2`.
pub fn split_consistency(w: &[Atom], c: &BigRational, precision_bits: u32) -> Result<BigComplex, EvalError> {
    Evaluator::new(precision_bits).with_split(c.clone()).eval_word(w)
}

pub fn eval_wordsum(ws: &WordSum, precision_bits: u32) -> Result<BigComplex, EvalError> {
    Evaluator::new(precision_bits).eval_wordsum(ws)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_decimal;

    const BITS: u32 = 160;

    fn close(v: &Real, text: &str, digits: u32) {
        let want = Real::from_ratio(&parse_decimal(text).unwrap(), v.bits());
        let diff = v - &want;
        assert!(diff.abs_le_pow10(digits), "{v} vs {text}");
    }

    #[test]
    fn logarithm_words() {
        let v = eval_word(&[Atom::xm1()], BITS).unwrap();
        close(&v.re, "-0.69314718055994530941723212145817656807550013436026", 40);
        assert!(v.im.abs_le_pow10(40));
        let s = eval_segment(&[Atom::xm1()], &rat(1, 2), BITS).unwrap();
        close(&s.re, "-0.40546510810816438197801311546434913657199042346249", 40);
        let s = eval_segment(&[Atom::x(2, 0)], &rat(1, 2), BITS).unwrap();
        close(&s.re, "0.28768207245178092743921900599382743150350971089776", 40);
    }

    #[test]
    fn dilogarithm_words() {
        // Li2(-1) = -π²/12.
        let v = eval_word(&[Atom::w0(), Atom::xm1()], BITS).unwrap();
        close(&v.re, "-0.82246703342411321823620758332301259460947495060340", 40);
        // I[w0, x-i] = -π²/48 + i·G.
        let v = eval_word(&[Atom::w0(), Atom::xmi()], BITS).unwrap();
        close(&v.re, "-0.20561675835602830455905189583075314865236873765085", 40);
        close(&v.im, "0.91596559417721901505460351493238411077414937428167", 40);
    }

    #[test]
    fn zeta_words_with_two_splits() {
        for c in [rat(1, 3), rat(1, 2), rat(2, 3)] {
            let z2 = split_consistency(&[Atom::w0(), Atom::x1()], &c, BITS).unwrap();
            close(&z2.re, "1.6449340668482264364724151666460251892189499012068", 40);
            let z3 = split_consistency(&[Atom::w0(), Atom::w0(), Atom::x1()], &c, BITS).unwrap();
            close(&z3.re, "1.2020569031595942853997381615114499907649862923405", 40);
        }
    }

    #[test]
    fn divergent_and_close_poles_are_rejected() {
        assert!(matches!(eval_word(&[Atom::x1()], BITS), Err(EvalError::DivergentWord(_))));
        assert!(matches!(eval_word(&[Atom::w0()], BITS), Err(EvalError::DivergentWord(_))));
        let near = Atom::new(GaussRat::new(rat(1, 4), rat(0, 1)), 1);
        assert!(matches!(eval_segment(&[near], &rat(1, 2), BITS), Err(EvalError::PoleTooClose(_))));
    }

    #[test]
    fn pi_half_from_the_dt_word() {
        let mut ws = WordSum::new(0);
        ws.add_word(vec![Atom::xmi()], &GaussRat::from_ints(0, -1));
        ws.add_word(vec![Atom::xi()], &GaussRat::from_ints(0, 1));
        let v = eval_wordsum(&ws, BITS).unwrap();
        close(&v.re, "1.5707963267948966192313216916397514420985846996876", 40);
        assert!(v.im.abs_le_pow10(40));
    }

    #[test]
    fn scalar_pi_half() {
        let mut ws = WordSum::new(0);
        ws.scalar.pi = rat(1, 2);
        let v = eval_wordsum(&ws, BITS).unwrap();
        close(&v.re, "1.5707963267948966192313216916397514420985846996876", 40);
    }
}
