//! Inclusion–exclusion rewrites that bring a spec into theorem shape.
//!
//! Theorem shape means every `2n+1` index is followed by `≥` and every other
//! index by `>`, and `2n-1` appears only in the leading position. Each
//! rewrite is an exact identity between nested sums; the oracle tests check
//! them numerically.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::rat_int;
use crate::series::{IndexTerm, ParityForm, Relation, SeriesSpec};

/// `constant + Σ coef·spec`.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct SpecCombination {
    pub constant: BigRational,
    pub terms: BTreeMap<SeriesSpec, BigRational>,
}

impl SpecCombination {
    pub fn single(spec: SeriesSpec) -> Self {
        let mut c = SpecCombination::default();
        c.add(spec, &BigRational::one());
        c
    }

    pub fn add(&mut self, spec: SeriesSpec, coef: &BigRational) {
        if coef.is_zero() {
            return;
        }
        let entry = self.terms.entry(spec.clone()).or_insert_with(BigRational::zero);
        *entry += coef;
        if entry.is_zero() {
            self.terms.remove(&spec);
        }
    }

    pub fn add_scaled(&mut self, other: &SpecCombination, k: &BigRational) {
        self.constant += &other.constant * k;
        for (s, c) in &other.terms {
            self.add(s.clone(), &(c * k));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BigRational, &SeriesSpec)> {
        self.terms.iter().map(|(s, c)| (c, s))
    }
}

/// Which factor of `1/(x^a (x-1)^b)` a partial-fraction term belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Pole {
    X,
    XMinus1,
}

/// Generalized binomial `C(-a, k) = (-1)^k C(a+k-1, k)`.
fn binom_neg(a: u32, k: u32) -> BigInt {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(a + i) / BigInt::from(i + 1);
    }
    if k % 2 == 1 {
        -c
    } else {
        c
    }
}

/// Coefficients of
/// `1/(x^a (x-1)^b) = Σ_{j≤b} C(-a, b-j)/(x-1)^j + Σ_{j≤a} (-1)^{a+b-j} C(-b, a-j)/x^j`.
pub fn pf_decompose(a: u32, b: u32) -> Vec<(BigRational, Pole, u32)> {
    assert!(a >= 1 && b >= 1, "partial fractions need a, b ≥ 1");
    let mut out = Vec::new();
    for j in 1..=b {
        out.push((BigRational::from_integer(binom_neg(a, b - j)), Pole::XMinus1, j));
    }
    for j in 1..=a {
        let sign = if (a + b - j) % 2 == 1 { -1 } else { 1 };
        out.push((BigRational::from_integer(binom_neg(b, a - j) * sign), Pole::X, j));
    }
    out
}

/// Splits `1/(P(n)^a Q(n)^b)` for two index forms at the same index into
/// single-form terms.
pub fn merge_terms(upper: IndexTerm, lower: IndexTerm) -> Vec<(BigRational, IndexTerm)> {
    if upper.parity == lower.parity {
        return vec![(BigRational::one(), IndexTerm::new(upper.parity, upper.exponent + lower.exponent))];
    }
    // X = P(n), X - δ = Q(n). With X = δ·x this is δ^{-a-b}/(x^a (x-1)^b).
    let delta = upper.parity.offset() - lower.parity.offset();
    let (a, b) = (upper.exponent, lower.exponent);
    let delta_pow = |e: i64| -> BigRational {
        let base = rat_int(delta);
        if e >= 0 {
            num_traits::pow(base, e as usize)
        } else {
            num_traits::pow(base, (-e) as usize).recip()
        }
    };
    pf_decompose(a, b)
        .into_iter()
        .map(|(c, pole, j)| {
            let scale = delta_pow(j as i64 - a as i64 - b as i64);
            let parity = match pole {
                Pole::X => upper.parity,
                Pole::XMinus1 => lower.parity,
            };
            (c * scale, IndexTerm::new(parity, j))
        })
        .collect()
}

/// The diagonal `n_j = n_{j+1}` of a spec: terms `j` and `j+1` merged into
/// one index carrying the lower relation.
fn diagonal(spec: &SeriesSpec, j: usize) -> SpecCombination {
    let mut out = SpecCombination::default();
    for (c, term) in merge_terms(spec.terms[j], spec.terms[j + 1]) {
        let mut terms = spec.terms.clone();
        let mut relations = spec.relations.clone();
        terms.splice(j..=j + 1, [term]);
        relations.remove(j);
        out.add(SeriesSpec::raw(spec.binom_power, terms, relations), &c);
    }
    out
}

/// One inclusion–exclusion step on the topmost nonconforming relation, or
/// `None` when the spec is already in theorem relation shape.
fn convert_step(spec: &SeriesSpec) -> Option<SpecCombination> {
    let d = spec.depth();
    let j = (0..d).find(|&j| spec.relations[j] != spec.terms[j].parity.conforming_relation())?;
    let mut main = spec.clone();
    main.relations[j] = spec.terms[j].parity.conforming_relation();
    let mut out = SpecCombination::single(main);
    match spec.relations[j] {
        // n ≥ m  =  n > m  +  (n = m)
        Relation::Weak => {
            out.add_scaled(&diagonal(spec, j), &BigRational::one());
        }
        // n > m  =  n ≥ m  −  (n = m)
        Relation::Strict if j + 1 < d => {
            out.add_scaled(&diagonal(spec, j), &-BigRational::one());
        }
        // n_d > 0  =  n_d ≥ 0  −  (n_d = 0); the 2n+1 factor is 1 there.
        Relation::Strict => {
            if d == 1 {
                out.constant -= BigRational::one();
            } else {
                let mut terms = spec.terms.clone();
                let mut relations = spec.relations.clone();
                terms.pop();
                relations.pop();
                out.add(SeriesSpec::raw(spec.binom_power, terms, relations), &-BigRational::one());
            }
        }
    }
    Some(out)
}

/// Shifts the topmost inner `2n-1` index down by one, making it `2n+1`.
fn eliminate_step(spec: &SeriesSpec) -> Option<SpecCombination> {
    let j = (1..spec.depth()).find(|&j| spec.terms[j].parity == ParityForm::OddLow)?;
    debug_assert_eq!(spec.relations[j], Relation::Strict);
    // n_j = n' + 1:  n_j > n_{j+1}  ⇔  n' ≥ n_{j+1}.
    let mut main = spec.clone();
    main.terms[j].parity = ParityForm::OddHigh;
    main.relations[j] = Relation::Weak;
    // n_{j-1} ≻ n' + 1 becomes n_{j-1} > n', minus the collision
    // n_{j-1} = n' + 1 when the original step was strict.
    main.relations[j - 1] = Relation::Strict;
    let mut out = SpecCombination::single(main);
    if spec.relations[j - 1] == Relation::Strict {
        out.add_scaled(&diagonal(spec, j - 1), &-BigRational::one());
    }
    Some(out)
}

fn rewrite(spec: &SeriesSpec, eliminate: bool) -> SpecCombination {
    let mut result = SpecCombination::default();
    let mut work: Vec<(BigRational, SeriesSpec)> = vec![(BigRational::one(), spec.clone())];
    while let Some((coef, s)) = work.pop() {
        let step = convert_step(&s).or_else(|| if eliminate { eliminate_step(&s) } else { None });
        match step {
            Some(comb) => {
                result.constant += &comb.constant * &coef;
                for (c, t) in comb.iter() {
                    work.push((c * &coef, t.clone()));
                }
            }
            None => result.add(s, &coef),
        }
    }
    result
}

/// Rewrites a spec (tail 0) into a combination of specs whose relations
/// follow theorem shape.
pub fn convert_relations(spec: &SeriesSpec) -> SpecCombination {
    rewrite(spec, false)
}

/// Full normalization: theorem relations and no `2n-1` below the leading
/// position.
pub fn eliminate_inner_oddlow(spec: &SeriesSpec) -> SpecCombination {
    rewrite(spec, true)
}
