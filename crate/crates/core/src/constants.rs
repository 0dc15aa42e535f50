//! Closed-form constant expressions and their evaluation.
//!
//! Leaf constants other than `π` and `log 2` are pinned to iterated-integral
//! words and evaluated with the word evaluator, so a closed form is checked
//! against the same numerics that evaluate compiled series. `π` and `log 2`
//! come from the arithmetic layer.

use std::collections::HashMap;
use std::fmt;
use std::sync::Mutex;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::arith::{rat_text, BigComplex, GaussRat, Real};
use crate::error::{EvalError, SpecError};
use crate::eval::Evaluator;
use crate::words::{Atom, Word};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Leaf {
    Pi,
    Log2,
    Zeta2,
    Zeta3,
    Catalan,
    Beta4,
    /// `Li_k(1/2)`, `1 ≤ k ≤ 4`.
    LiHalf(u8),
    /// `Re Li_k((1+i)/2)`, `k ∈ {3, 4}`.
    ReLiC(u8),
    /// `Im Li_k((1+i)/2)`, `k ∈ {3, 4}`.
    ImLiC(u8),
}

impl Leaf {
    pub const ALL: [Leaf; 14] = [
        Leaf::Pi,
        Leaf::Log2,
        Leaf::Zeta2,
        Leaf::Zeta3,
        Leaf::Catalan,
        Leaf::Beta4,
        Leaf::LiHalf(1),
        Leaf::LiHalf(2),
        Leaf::LiHalf(3),
        Leaf::LiHalf(4),
        Leaf::ReLiC(3),
        Leaf::ImLiC(3),
        Leaf::ReLiC(4),
        Leaf::ImLiC(4),
    ];

    pub fn name(self) -> String {
        match self {
            Leaf::Pi => "pi".into(),
            Leaf::Log2 => "log2".into(),
            Leaf::Zeta2 => "zeta2".into(),
            Leaf::Zeta3 => "zeta3".into(),
            Leaf::Catalan => "G".into(),
            Leaf::Beta4 => "beta4".into(),
            Leaf::LiHalf(k) => format!("Li{k}(1/2)"),
            Leaf::ReLiC(k) => format!("ReLi{k}((1+i)/2)"),
            Leaf::ImLiC(k) => format!("ImLi{k}((1+i)/2)"),
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Leaf::Pi => "π",
            Leaf::Log2 => "log 2",
            Leaf::Zeta2 => "ζ(2) = I[w0,x1]",
            Leaf::Zeta3 => "ζ(3) = I[w0,w0,x1]",
            Leaf::Catalan => "Catalan G = Im I[w0,x-i]",
            Leaf::Beta4 => "Dirichlet β(4) = Im I[w0,w0,w0,x-i]",
            Leaf::LiHalf(_) => "Li_k(1/2) = I[w0^(k-1), x[2;0]]",
            Leaf::ReLiC(_) => "Re Li_k((1+i)/2) = Re I[w0^(k-1), x[1;-1]]",
            Leaf::ImLiC(_) => "Im Li_k((1+i)/2) = Im I[w0^(k-1), x[1;-1]]",
        }
    }

    /// Defining word, or `None` for the built-in constants.
    pub fn word(self) -> Option<Word> {
        let w0s = |k: u8| vec![Atom::w0(); k as usize - 1];
        let with = |mut w: Word, a: Atom| {
            w.push(a);
            w
        };
        match self {
            Leaf::Pi | Leaf::Log2 => None,
            Leaf::Zeta2 => Some(vec![Atom::w0(), Atom::x1()]),
            Leaf::Zeta3 => Some(vec![Atom::w0(), Atom::w0(), Atom::x1()]),
            Leaf::Catalan => Some(vec![Atom::w0(), Atom::xmi()]),
            Leaf::Beta4 => Some(vec![Atom::w0(), Atom::w0(), Atom::w0(), Atom::xmi()]),
            Leaf::LiHalf(k) => Some(with(w0s(k), Atom::x(2, 0))),
            Leaf::ReLiC(k) | Leaf::ImLiC(k) => Some(with(w0s(k), Atom::x(1, -1))),
        }
    }

    fn takes_imaginary_part(self) -> bool {
        matches!(self, Leaf::Catalan | Leaf::Beta4 | Leaf::ImLiC(_))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConstExpr {
    Rational(BigRational),
    Leaf(Leaf),
    Neg(Box<ConstExpr>),
    Add(Box<ConstExpr>, Box<ConstExpr>),
    Sub(Box<ConstExpr>, Box<ConstExpr>),
    Mul(Box<ConstExpr>, Box<ConstExpr>),
    Div(Box<ConstExpr>, Box<ConstExpr>),
    Pow(Box<ConstExpr>, i32),
}

impl ConstExpr {
    pub fn leaf(l: Leaf) -> Self {
        ConstExpr::Leaf(l)
    }

    pub fn int(k: i64) -> Self {
        ConstExpr::Rational(BigRational::from_integer(BigInt::from(k)))
    }

    fn precedence(&self) -> u8 {
        match self {
            ConstExpr::Add(..) | ConstExpr::Sub(..) => 1,
            ConstExpr::Mul(..) | ConstExpr::Div(..) => 2,
            ConstExpr::Neg(_) => 3,
            ConstExpr::Pow(..) => 4,
            ConstExpr::Rational(r) if !r.is_integer() || r.is_negative() => 2,
            ConstExpr::Rational(_) | ConstExpr::Leaf(_) => 5,
        }
    }

    pub fn leaves(&self, out: &mut Vec<Leaf>) {
        match self {
            ConstExpr::Rational(_) => {}
            ConstExpr::Leaf(l) => out.push(*l),
            ConstExpr::Neg(a) | ConstExpr::Pow(a, _) => a.leaves(out),
            ConstExpr::Add(a, b) | ConstExpr::Sub(a, b) | ConstExpr::Mul(a, b) | ConstExpr::Div(a, b) => {
                a.leaves(out);
                b.leaves(out);
            }
        }
    }
}

impl fmt::Display for ConstExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn side(f: &mut fmt::Formatter<'_>, e: &ConstExpr, min: u8) -> fmt::Result {
            if e.precedence() < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        }
        match self {
            ConstExpr::Rational(r) => f.write_str(&rat_text(r)),
            ConstExpr::Leaf(l) => f.write_str(&l.name()),
            ConstExpr::Neg(a) => {
                f.write_str("-")?;
                side(f, a, 4)
            }
            ConstExpr::Add(a, b) => {
                side(f, a, 1)?;
                f.write_str(" + ")?;
                side(f, b, 2)
            }
            ConstExpr::Sub(a, b) => {
                side(f, a, 1)?;
                f.write_str(" - ")?;
                side(f, b, 2)
            }
            ConstExpr::Mul(a, b) => {
                side(f, a, 2)?;
                f.write_str("*")?;
                side(f, b, 3)
            }
            ConstExpr::Div(a, b) => {
                side(f, a, 2)?;
                f.write_str("/")?;
                side(f, b, 3)
            }
            ConstExpr::Pow(a, k) => {
                side(f, a, 5)?;
                write!(f, "^{k}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigInt),
    Leaf(Leaf),
    Op(char),
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, SpecError> {
    let names: Vec<(String, Leaf)> = {
        let mut v: Vec<(String, Leaf)> = Leaf::ALL.iter().map(|l| (l.name(), *l)).collect();
        // Longest names first so `zeta2` is not read as a prefix of something longer.
        v.sort_by_key(|(n, _)| std::cmp::Reverse(n.len()));
        v
    };
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = i;
            while i < bytes.len() && (bytes[i] as char).is_ascii_digit() {
                i += 1;
            }
            out.push((start, Tok::Num(text[start..i].parse().expect("digits"))));
            continue;
        }
        if "+-*/^()".contains(c) {
            out.push((i, Tok::Op(c)));
            i += 1;
            continue;
        }
        match names.iter().find(|(n, _)| text[i..].starts_with(n.as_str())) {
            Some((n, l)) => {
                out.push((i, Tok::Leaf(*l)));
                i += n.len();
            }
            None => return Err(SpecError::Syntax { position: i, message: format!("unexpected {:?}", &text[i..]) }),
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|(p, _)| *p).unwrap_or(self.end)
    }

    fn err(&self, message: &str) -> SpecError {
        SpecError::Syntax { position: self.here(), message: message.into() }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Op(c)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<ConstExpr, SpecError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = ConstExpr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = ConstExpr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ConstExpr, SpecError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = ConstExpr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                let rhs = self.unary()?;
                // Integer quotients fold into one rational literal.
                lhs = match (lhs, rhs) {
                    (ConstExpr::Rational(a), ConstExpr::Rational(b))
                        if a.is_integer() && b.is_integer() && !b.is_zero() =>
                    {
                        ConstExpr::Rational(a / b)
                    }
                    (a, b) => ConstExpr::Div(Box::new(a), Box::new(b)),
                };
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<ConstExpr, SpecError> {
        if self.eat('-') {
            let inner = self.unary()?;
            return Ok(match inner {
                ConstExpr::Rational(r) if r.is_integer() => ConstExpr::Rational(-r),
                e => ConstExpr::Neg(Box::new(e)),
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<ConstExpr, SpecError> {
        let base = self.atom()?;
        if self.eat('^') {
            let neg = self.eat('-');
            match self.peek().cloned() {
                Some(Tok::Num(k)) => {
                    self.pos += 1;
                    let k: i32 = k.try_into().map_err(|_| self.err("exponent too large"))?;
                    return Ok(ConstExpr::Pow(Box::new(base), if neg { -k } else { k }));
                }
                _ => return Err(self.err("expected an integer exponent")),
            }
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ConstExpr, SpecError> {
        match self.peek().cloned() {
            Some(Tok::Num(n)) => {
                self.pos += 1;
                Ok(ConstExpr::Rational(BigRational::from_integer(n)))
            }
            Some(Tok::Leaf(l)) => {
                self.pos += 1;
                Ok(ConstExpr::Leaf(l))
            }
            Some(Tok::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            _ => Err(self.err("expected a number, constant or '('")),
        }
    }
}

/// Parses text such as `2*G - 1/2*pi*log2` or `(8*log2 - 4)/pi`.
pub fn parse_const(text: &str) -> Result<ConstExpr, SpecError> {
    let mut p = Parser { toks: lex(text)?, pos: 0, end: text.len() };
    let e = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(p.err("trailing input"));
    }
    Ok(e)
}

fn cdiv(a: &BigComplex, b: &BigComplex) -> Result<BigComplex, EvalError> {
    let den = &(&b.re * &b.re) + &(&b.im * &b.im);
    if den.is_zero() {
        return Err(EvalError::DivisionByZero);
    }
    let re = &(&a.re * &b.re) + &(&a.im * &b.im);
    let im = &(&a.im * &b.re) - &(&a.re * &b.im);
    Ok(BigComplex::new(
        re.checked_div(&den).ok_or(EvalError::DivisionByZero)?,
        im.checked_div(&den).ok_or(EvalError::DivisionByZero)?,
    ))
}

/// Evaluates constant expressions, sharing leaf values between calls.
#[derive(Debug)]
pub struct ConstEvaluator {
    evaluator: Evaluator,
    leaves: Mutex<HashMap<Leaf, Real>>,
}

impl ConstEvaluator {
    pub fn new(evaluator: Evaluator) -> Self {
        ConstEvaluator { evaluator, leaves: Mutex::new(HashMap::new()) }
    }

    fn bits(&self) -> u32 {
        self.evaluator.precision_bits + 32
    }

    pub fn leaf_value(&self, l: Leaf) -> Result<Real, EvalError> {
        if let Some(v) = self.leaves.lock().expect("leaf lock").get(&l) {
            return Ok(v.clone());
        }
        let bits = self.bits();
        let v = match l.word() {
            None if l == Leaf::Pi => Real::pi(bits),
            None => Real::ln2(bits),
            Some(w) => {
                let mut inner = self.evaluator.clone();
                inner.precision_bits = bits;
                let z = inner.eval_word(&w)?;
                if l.takes_imaginary_part() {
                    z.im
                } else {
                    z.re
                }
            }
        };
        self.leaves.lock().expect("leaf lock").insert(l, v.clone());
        Ok(v)
    }

    pub fn eval(&self, e: &ConstExpr) -> Result<BigComplex, EvalError> {
        Ok(self.eval_inner(e)?.with_bits(self.evaluator.precision_bits))
    }

    fn eval_inner(&self, e: &ConstExpr) -> Result<BigComplex, EvalError> {
        let bits = self.bits();
        Ok(match e {
            ConstExpr::Rational(r) => BigComplex::from_gauss(&GaussRat::real(r.clone()), bits),
            ConstExpr::Leaf(l) => BigComplex::from_real(self.leaf_value(*l)?),
            ConstExpr::Neg(a) => -&self.eval_inner(a)?,
            ConstExpr::Add(a, b) => &self.eval_inner(a)? + &self.eval_inner(b)?,
            ConstExpr::Sub(a, b) => &self.eval_inner(a)? - &self.eval_inner(b)?,
            ConstExpr::Mul(a, b) => &self.eval_inner(a)? * &self.eval_inner(b)?,
            ConstExpr::Div(a, b) => cdiv(&self.eval_inner(a)?, &self.eval_inner(b)?)?,
            ConstExpr::Pow(a, k) => {
                let base = self.eval_inner(a)?;
                let mut acc = BigComplex::one(bits);
                for _ in 0..k.unsigned_abs() {
                    acc = &acc * &base;
                }
                if *k < 0 {
                    cdiv(&BigComplex::one(bits), &acc)?
                } else {
                    acc
                }
            }
        })
    }
}

/// One-shot evaluation at `precision_bits`.
pub fn eval_const(e: &ConstExpr, precision_bits: u32) -> Result<BigComplex, EvalError> {
    ConstEvaluator::new(Evaluator::new(precision_bits)).eval(e)
}

/// Convenience for tests: `1` as an expression.
pub fn one() -> ConstExpr {
    ConstExpr::Rational(BigRational::one())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::parse_decimal;

    fn value(text: &str) -> Real {
        eval_const(&parse_const(text).unwrap(), 160).unwrap().re
    }

    fn near(v: Real, want: &str) {
        let w = Real::from_ratio(&parse_decimal(want).unwrap(), v.bits());
        assert!((&v - &w).abs_le_pow10(38), "{v} vs {want}");
    }

    #[test]
    fn classical_leaves() {
        near(value("zeta2"), "1.6449340668482264364724151666460251892189499012068");
        near(value("zeta3"), "1.2020569031595942853997381615114499907649862923405");
        near(value("G"), "0.91596559417721901505460351493238411077414937428167");
        near(value("beta4"), "0.98894455174110533610842263322837782131586088706273");
        near(value("Li1(1/2)"), "0.69314718055994530941723212145817656807550013436026");
        near(value("Li2(1/2)"), "0.58224052646501250590265632015968010874419847480613");
        near(value("Li4(1/2)"), "0.51747906167389938633075816189886294562237747514138");
        near(value("ReLi3((1+i)/2)"), "0.48615953708556007896672148708009734817942276768858");
        near(value("ImLi3((1+i)/2)"), "0.57007740708876897819560975759007455106314580991873");
        near(value("ReLi4((1+i)/2)"), "0.49578112182183877843591975450867933461484441096856");
        near(value("ImLi4((1+i)/2)"), "0.53402238407975354996023804225277663673304234938988");
    }

    #[test]
    fn zeta2_matches_pi_squared_over_six() {
        let d = &value("zeta2") - &value("pi^2/6");
        assert!(d.abs_le_pow10(40));
    }

    #[test]
    fn parse_and_render_round_trip() {
        for t in
            ["2*G - 1/2*pi*log2", "(8*log2 - 4)/pi", "pi/48*(pi^2 + 12*log2^2)", "-3/8*pi^3*log2", "2/pi*(pi/2 - 1)"]
        {
            let e = parse_const(t).unwrap();
            let text = e.to_string();
            assert_eq!(parse_const(&text).unwrap(), e, "{t} -> {text}");
            let d = &value(t) - &value(&text);
            assert!(d.abs_le_pow10(40));
        }
        assert!(parse_const("2*").is_err());
        assert!(parse_const("pi ^ x").is_err());
        assert!(parse_const("foo").is_err());
    }

    #[test]
    fn division_by_zero_is_reported() {
        let e = parse_const("1/(pi - pi)").unwrap();
        assert!(matches!(eval_const(&e, 128), Err(EvalError::DivisionByZero)));
    }
}
