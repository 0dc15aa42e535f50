//! Block-by-block construction of trig words for theorem-shape specs.
//!
//! A spec is read from its innermost index outward. After absorbing the
//! indices `j..d` the partial result is a list of words plus a pending
//! factor (`1` or `csc t`) that multiplies the form contributed by the next
//! block. The pending factor is `csc t` exactly when the last absorbed index
//! was `2n+1`.

use num_rational::BigRational;
use num_traits::{One, Zero};

use super::forms::{
    cot_power_then, resolve_leading_sin_cos, sec_times, tan_times, with_first, TrigExpr, TrigForm, TrigWord,
};
use crate::error::CompileError;
use crate::series::{IndexTerm, ParityForm, Relation, SeriesSpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pending {
    One,
    Csc,
}

/// One summand of a partially compiled chain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partial {
    pub coef: BigRational,
    pub pending: Pending,
    pub word: TrigWord,
}

/// Output of the leading-`2n-1` reduction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Reduced {
    Spec(SeriesSpec),
    /// `Σ a_{n_1}/(2n_1-1)^weight` nested strictly over `rest`.
    GammaHead {
        weight: u32,
        binom_power: u8,
        rest: Option<SeriesSpec>,
    },
}

fn tail_spec(spec: &SeriesSpec) -> Option<SeriesSpec> {
    if spec.depth() == 1 {
        return None;
    }
    Some(SeriesSpec::raw(spec.binom_power, spec.terms[1..].to_vec(), spec.relations[1..].to_vec()))
}

/// Strips leading `(2n-1)^1` indices with a strict relation. The identity
/// `Σ_{n>m} a_n/(2n-1) = a_m` makes this exact for the plain binomial; a
/// whole chain of such indices collapses to the constant `1`.
pub fn reduce_leading_gamma(spec: &SeriesSpec) -> Vec<(BigRational, Reduced)> {
    let mut current = spec.clone();
    loop {
        let head = current.terms[0];
        if head.parity != ParityForm::OddLow {
            return vec![(BigRational::one(), Reduced::Spec(current))];
        }
        let droppable = current.binom_power == 1
            && head.exponent == 1
            && current.depth() >= 2
            && current.relations[0] == Relation::Strict;
        if !droppable {
            return vec![(
                BigRational::one(),
                Reduced::GammaHead {
                    weight: head.exponent,
                    binom_power: current.binom_power,
                    rest: tail_spec(&current),
                },
            )];
        }
        current = tail_spec(&current).expect("depth ≥ 2");
    }
}

fn push(out: &mut Vec<Partial>, coef: BigRational, pending: Pending, word: TrigWord) {
    if !coef.is_zero() {
        out.push(Partial { coef, pending, word });
    }
}

fn concat(mut head: TrigWord, tail: TrigWord) -> TrigWord {
    head.extend(tail);
    head
}

/// Absorbs one more (outer) index into the partial chain.
pub fn apply_block(state: &[Partial], term: IndexTerm) -> Result<Vec<Partial>, CompileError> {
    let lead = term.exponent - 1;
    let mut out = Vec::with_capacity(state.len() * 2);
    match term.parity {
        ParityForm::Even => {
            let csc = cot_power_then(lead, &[TrigForm::Csc]);
            let cot = cot_power_then(lead, &[TrigForm::Cot]);
            for p in state {
                match (p.pending, p.word.is_empty()) {
                    (Pending::One, true) => {
                        push(&mut out, p.coef.clone(), Pending::One, csc.clone());
                        push(&mut out, -p.coef.clone(), Pending::One, cot.clone());
                    }
                    (Pending::One, false) => {
                        push(&mut out, -p.coef.clone(), Pending::One, concat(cot.clone(), p.word.clone()));
                        push(
                            &mut out,
                            p.coef.clone(),
                            Pending::One,
                            concat(csc.clone(), with_first(&p.word, sec_times)?),
                        );
                    }
                    (Pending::Csc, _) => {
                        push(
                            &mut out,
                            p.coef.clone(),
                            Pending::One,
                            concat(csc.clone(), with_first(&p.word, tan_times)?),
                        );
                    }
                }
            }
        }
        ParityForm::OddHigh => {
            let dt = cot_power_then(lead, &[TrigForm::Dt]);
            let cot = cot_power_then(lead, &[TrigForm::Cot]);
            for p in state {
                match (p.pending, p.word.is_empty()) {
                    (Pending::One, true) => push(&mut out, p.coef.clone(), Pending::Csc, dt.clone()),
                    (Pending::One, false) => {
                        push(
                            &mut out,
                            p.coef.clone(),
                            Pending::Csc,
                            concat(dt.clone(), with_first(&p.word, sec_times)?),
                        );
                    }
                    (Pending::Csc, _) => {
                        push(&mut out, p.coef.clone(), Pending::Csc, concat(cot.clone(), p.word.clone()));
                        push(
                            &mut out,
                            p.coef.clone(),
                            Pending::Csc,
                            concat(dt.clone(), with_first(&p.word, tan_times)?),
                        );
                    }
                }
            }
        }
        ParityForm::OddLow => {
            return Err(CompileError::Unsupported("2n-1 index below the leading position".into()));
        }
    }
    Ok(out)
}

/// Compiles a chain of `2n`/`2n+1` indices in theorem relation shape.
pub fn compile_chain(terms: &[IndexTerm]) -> Result<Vec<Partial>, CompileError> {
    let mut state = vec![Partial { coef: BigRational::one(), pending: Pending::One, word: Vec::new() }];
    for term in terms.iter().rev() {
        state = apply_block(&state, *term)?;
    }
    Ok(state)
}

fn add_partials(expr: &mut TrigExpr, parts: &[Partial], sign: &BigRational, prefix: Option<TrigForm>) {
    for p in parts {
        let word = match prefix {
            Some(f) => concat(vec![f], p.word.clone()),
            None => p.word.clone(),
        };
        if word.is_empty() {
            expr.add_constant(&(&p.coef * sign));
        } else {
            expr.add_word(word, &(&p.coef * sign));
        }
    }
}

fn rest_chain(rest: &Option<SeriesSpec>) -> Result<Vec<Partial>, CompileError> {
    match rest {
        None => compile_chain(&[]),
        Some(r) => compile_chain(&r.terms),
    }
}

fn odd_high_over(state: &[Partial], exponent: u32) -> Result<Vec<Partial>, CompileError> {
    apply_block(state, IndexTerm::new(ParityForm::OddHigh, exponent))
}

/// Plain binomial, leading `(2n-1)^s`. Uses
/// `a_n/(2n-1) = a_{n-1} - a_n`, which turns the head into a `2n+1`
/// index of weight `s-1` minus the same head of weight `s-1`.
fn gamma_head_plain(weight: u32, rest: &Option<SeriesSpec>) -> Result<TrigExpr, CompileError> {
    let phi = rest_chain(rest)?;
    let mut expr = TrigExpr::new(0);
    add_partials(&mut expr, &phi, &BigRational::one(), None);
    for s in 2..=weight {
        let mut next = TrigExpr::new(0);
        next.add_scaled(&expr, &-BigRational::one());
        add_partials(&mut next, &odd_high_over(&phi, s - 1)?, &BigRational::one(), None);
        expr = next;
    }
    Ok(expr)
}

/// Squared binomial, leading `(2n-1)^s`: the `s = 1` head has its own
/// end patterns and each further power peels off one `sin`-prefixed
/// `2n+1` chain.
fn gamma_head_squared(weight: u32, rest: &Option<SeriesSpec>) -> Result<TrigExpr, CompileError> {
    let phi = rest_chain(rest)?;
    let one = BigRational::one();
    let mut expr = TrigExpr::new(1);
    for p in &phi {
        match (p.pending, p.word.is_empty()) {
            (Pending::One, true) => {
                expr.add_word(vec![TrigForm::Dt], &p.coef);
                expr.add_constant(&-p.coef.clone());
            }
            (Pending::One, false) => {
                expr.add_word(concat(vec![TrigForm::Dt], p.word.clone()), &p.coef);
                expr.add_word(concat(vec![TrigForm::Cos], with_first(&p.word, sec_times)?), &-p.coef.clone());
            }
            (Pending::Csc, _) => {
                expr.add_word(concat(vec![TrigForm::Sin], p.word.clone()), &p.coef);
                expr.add_word(concat(vec![TrigForm::Cos], with_first(&p.word, tan_times)?), &-p.coef.clone());
            }
        }
    }
    for s in 2..=weight {
        let mut next = TrigExpr::new(1);
        next.add_scaled(&expr, &-one.clone());
        add_partials(&mut next, &odd_high_over(&phi, s - 1)?, &one, Some(TrigForm::Sin));
        expr = next;
    }
    Ok(expr)
}

/// Compiles one reduced item into a trig expression.
pub fn compile_blocks(item: &Reduced) -> Result<TrigExpr, CompileError> {
    let mut expr = match item {
        Reduced::Spec(spec) => {
            if !spec.is_theorem_shape() {
                return Err(CompileError::Unsupported(format!("{spec} is not in theorem shape")));
            }
            let state = compile_chain(&spec.terms)?;
            let mut expr = TrigExpr::new(if spec.binom_power == 2 { 1 } else { 0 });
            for p in &state {
                let word = if spec.binom_power == 2 {
                    // a_n = (2/π)∫ sin^{2n} t dt supplies one more outer form.
                    let prefix = match p.pending {
                        Pending::One => TrigForm::Dt,
                        Pending::Csc => TrigForm::Csc,
                    };
                    concat(vec![prefix], p.word.clone())
                } else {
                    p.word.clone()
                };
                expr.add_word(word, &p.coef);
            }
            expr
        }
        Reduced::GammaHead { weight, binom_power, rest } => {
            if let Some(r) = rest {
                if r.terms.iter().any(|t| t.parity == ParityForm::OddLow) {
                    return Err(CompileError::Unsupported("2n-1 head followed by another 2n-1 index".into()));
                }
            }
            match binom_power {
                1 => gamma_head_plain(*weight, rest)?,
                _ => gamma_head_squared(*weight, rest)?,
            }
        }
    };
    resolve_leading_sin_cos(&mut expr)?;
    Ok(expr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::parse_spec;
    use TrigForm::*;

    fn words(expr: &TrigExpr) -> Vec<(TrigWord, BigRational)> {
        expr.terms.iter().map(|(w, c)| (w.clone(), c.clone())).collect()
    }

    fn compile_text(s: &str) -> TrigExpr {
        let spec = parse_spec(s).unwrap();
        compile_blocks(&Reduced::Spec(spec)).unwrap()
    }

    #[test]
    fn single_even_index() {
        let e = compile_text("S[2n^3 > 0]");
        let one = BigRational::one();
        assert_eq!(words(&e), vec![(vec![Cot, Cot, Cot], -one.clone()), (vec![Cot, Cot, Csc], one)]);
    }

    #[test]
    fn single_odd_index_and_squared_prefix() {
        let e = compile_text("S[2n+1^2 >= 0]");
        assert_eq!(words(&e), vec![(vec![Cot, Dt], BigRational::one())]);
        let e = compile_text("S2[2n+1^1 >= 0]");
        assert_eq!(e.two_over_pi_power, 1);
        assert_eq!(words(&e), vec![(vec![Csc, Dt], BigRational::one())]);
    }

    #[test]
    fn leading_gamma_chain_collapses() {
        let spec = parse_spec("S[2n-1^1 > 2n-1^1 > 2n-1^1 > 0]").unwrap();
        let red = reduce_leading_gamma(&spec);
        assert_eq!(red.len(), 1);
        let expr = compile_blocks(&red[0].1).unwrap();
        assert!(expr.terms.is_empty());
        assert_eq!(expr.constant.rational, BigRational::one());

        let spec = parse_spec("S[2n-1^1 > 2n^1 > 0]").unwrap();
        assert_eq!(reduce_leading_gamma(&spec)[0].1, Reduced::Spec(parse_spec("S[2n^1 > 0]").unwrap()));
    }

    #[test]
    fn gamma_head_below_gamma_is_rejected() {
        let item = Reduced::GammaHead {
            weight: 2,
            binom_power: 1,
            rest: Some(SeriesSpec::raw(1, vec![IndexTerm::new(ParityForm::OddLow, 1)], vec![Relation::Strict])),
        };
        assert!(matches!(compile_blocks(&item), Err(CompileError::Unsupported(_))));
    }
}
