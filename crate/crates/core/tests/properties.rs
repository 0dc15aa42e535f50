mod common;

use cmzv_core::arith::{rat, GaussRat, Real};
use cmzv_core::compiler::{compile_spec, convert_relations, eliminate_inner_oddlow, SpecCombination, TrigExpr};
use cmzv_core::error::CompileError;
use cmzv_core::eval::{split_consistency, Evaluator};
use cmzv_core::oracle::{direct_sum, gamma_tail_check, OracleConfig};
use cmzv_core::pipeline::{compiled_value, spec_word_sum};
use cmzv_core::series::{parse_spec, IndexTerm, ParityForm, Relation, SeriesSpec};
use cmzv_core::words::{cov, reality_class, Atom, RealityClass, Word, WordSum};
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn oracle(digits: u32) -> OracleConfig {
    OracleConfig { precision_digits: digits, ..OracleConfig::default() }
}

fn term() -> impl Strategy<Value = IndexTerm> {
    (0usize..3, 1u32..4).prop_map(|(p, s)| IndexTerm::new(ParityForm::ALL[p], s))
}

fn any_spec() -> impl Strategy<Value = SeriesSpec> {
    (1u8..=2, prop::collection::vec((term(), any::<bool>()), 1..=3)).prop_map(|(p, parts)| {
        let terms = parts.iter().map(|(t, _)| *t).collect();
        let rels = parts.iter().map(|(_, w)| if *w { Relation::Weak } else { Relation::Strict }).collect();
        SeriesSpec::raw(p, terms, rels)
    })
}

fn valid_spec() -> impl Strategy<Value = SeriesSpec> {
    any_spec().prop_filter("definedness", |s| s.validate().is_ok())
}

fn combination_value(c: &SpecCombination, cfg: &OracleConfig) -> Real {
    let bits = cfg.working_bits();
    let mut total = Real::from_ratio(&c.constant, bits);
    for (k, s) in c.iter() {
        let v = direct_sum(s, cfg).expect("oracle").value;
        total = &total + &v.mul_ratio(k);
    }
    total
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, ..ProptestConfig::default() })]

    #[test]
    fn render_parse_round_trip(spec in valid_spec()) {
        let text = spec.render();
        let back = parse_spec(&text).unwrap();
        prop_assert_eq!(&back, &spec);
        prop_assert_eq!(back.render(), text);
        prop_assert_eq!(back.key(), spec.key());
        prop_assert_eq!(spec.key().len(), 64);
    }

    #[test]
    fn distinct_specs_have_distinct_keys(a in valid_spec(), b in valid_spec()) {
        prop_assert_eq!(a == b, a.key() == b.key());
    }

    #[test]
    fn invalid_specs_are_rejected_everywhere(spec in any_spec()) {
        if spec.validate().is_err() {
            prop_assert!(parse_spec(&spec.render()).is_err());
            prop_assert!(direct_sum(&spec, &oracle(20)).is_err());
            prop_assert!(compile_spec(&spec).is_err());
        }
    }

    #[test]
    fn rewrites_emit_valid_theorem_shape_specs(spec in valid_spec()) {
        for comb in [convert_relations(&spec), eliminate_inner_oddlow(&spec)] {
            for (_, s) in comb.iter() {
                prop_assert!(s.is_theorem_shape(), "{}", s);
                prop_assert!(s.validate().is_ok(), "{}", s);
            }
        }
        for (_, s) in eliminate_inner_oddlow(&spec).iter() {
            prop_assert!(s.terms[1..].iter().all(|t| t.parity != ParityForm::OddLow), "{}", s);
        }
    }
}

proptest! {
    // Each case runs the oracle on every piece of two rewrites.
    #![proptest_config(ProptestConfig { cases: 24, ..ProptestConfig::default() })]

    #[test]
    fn rewrites_preserve_the_oracle_value(spec in valid_spec()) {
        let cfg = oracle(20);
        let want = direct_sum(&spec, &cfg).unwrap().value;
        let tol = Real::from_f64(1e-8, 64);
        for comb in [convert_relations(&spec), eliminate_inner_oddlow(&spec)] {
            let got = combination_value(&comb, &cfg);
            let d = common::abs_diff(&got, &want);
            prop_assert!(d.to_ratio() <= tol.to_ratio(), "{}: {}", spec, d);
        }
    }
}

/// Compiled vs oracle on a fixed 100-spec random corpus, plus the reality
/// property on the same values.
#[test]
fn corpus_compiled_matches_oracle_and_is_real() {
    let specs = common::corpus(0x5eed, 100, 3, 5);
    assert!(specs.iter().any(|s| s.binom_power == 1) && specs.iter().any(|s| s.binom_power == 2));
    let ev = Evaluator::new(160);
    let cfg = oracle(20);
    for spec in &specs {
        let v = compiled_value(spec, &ev).unwrap_or_else(|e| panic!("{spec}: {e}"));
        assert!(v.im.abs_le_pow10(20), "{spec}: imaginary part {}", v.im);
        let o = direct_sum(spec, &cfg).unwrap();
        let d = common::abs_diff(&v.re, &o.value);
        assert!(d.abs_le_pow10(8), "{spec}: compiled {} oracle {}", v.re, o.value);
    }
}

/// Word coefficients are all real or all imaginary as predicted. The class
/// is defined for theorem-shape specs with no `2n-1` term, so the audit runs
/// over the normalized pieces of every corpus spec.
#[test]
fn reality_class_audit() {
    let mut audited = 0;
    for spec in common::corpus(0xa0d1, 60, 3, 5) {
        for (_, piece) in eliminate_inner_oddlow(&spec).iter() {
            if piece.terms[0].parity == ParityForm::OddLow {
                assert!(reality_class(piece).is_err(), "{piece}");
                continue;
            }
            let class = reality_class(piece).unwrap();
            let ws = spec_word_sum(piece).unwrap();
            for c in ws.terms.values() {
                match class {
                    RealityClass::Real => assert!(c.is_real(), "{piece}: {c}"),
                    RealityClass::ImaginaryPaired => assert!(c.is_imaginary(), "{piece}: {c}"),
                }
            }
            audited += 1;
        }
    }
    assert!(audited >= 30, "only {audited} pieces in the audited class");
}

#[test]
fn gamma_tail_identity() {
    let cfg = oracle(20);
    let bits = cfg.working_bits();
    for d in 1..=4 {
        for n in 0..=10u64 {
            let tail = gamma_tail_check(n, d, &cfg).unwrap();
            let a_n = cmzv_core::oracle::central_ratio(n, &rat(1, 1), bits);
            let diff = common::abs_diff(&tail, &a_n);
            assert!(diff.abs_le_pow10(8), "d={d} n={n}: {tail} vs {a_n}");
        }
    }
}

/// Dropping a leading `(2n-1)^1` index: the compiled value of the rest
/// equals the oracle value of the full series.
#[test]
fn leading_gamma_drop() {
    let cfg = oracle(30);
    let ev = Evaluator::new(160);
    for rest in common::corpus(0x1ead, 20, 2, 4) {
        if rest.binom_power != 1 {
            continue;
        }
        let mut terms = vec![IndexTerm::new(ParityForm::OddLow, 1)];
        terms.extend(rest.terms.iter().copied());
        let mut relations = vec![Relation::Strict];
        relations.extend(rest.relations.iter().copied());
        let full = SeriesSpec::raw(1, terms, relations);
        if full.validate().is_err() {
            continue;
        }
        let dropped = compiled_value(&rest, &ev).unwrap();
        let o = direct_sum(&full, &cfg).unwrap();
        assert!(common::abs_diff(&dropped.re, &o.value).abs_le_pow10(10), "{full}");
    }
}

fn corpus_words(limit: usize) -> Vec<Word> {
    let mut words: Vec<Word> = Vec::new();
    for spec in common::corpus(0x00d5, 12, 2, 4) {
        let ws = spec_word_sum(&spec).unwrap();
        words.extend(ws.terms.keys().cloned());
    }
    words.sort();
    words.dedup();
    words.truncate(limit);
    words
}

#[test]
fn split_point_independence() {
    for w in corpus_words(40) {
        let a = split_consistency(&w, &rat(1, 2), 160).unwrap();
        for c in [rat(1, 3), rat(3, 5)] {
            let b = split_consistency(&w, &c, 160).unwrap();
            assert!((&a - &b).max_abs_component().abs_le_pow10(40), "{w:?} split {c}");
        }
    }
}

#[test]
fn precision_scaling() {
    let tol = BigRational::new(1.into(), BigInt::from(1u8) << 120u32);
    for w in corpus_words(40) {
        let lo = Evaluator::new(128).eval_word(&w).unwrap();
        let hi = Evaluator::new(256).eval_word(&w).unwrap();
        let d = (&lo.with_bits(256) - &hi).max_abs_component();
        assert!(d.abs_le(&tol), "{w:?}: {d}");
    }
}

#[test]
fn conjugation_symmetry() {
    let ev = Evaluator::new(160);
    for w in corpus_words(40) {
        let conj: Word = w.iter().map(Atom::conj).collect();
        let a = ev.eval_word(&w).unwrap();
        let b = ev.eval_word(&conj).unwrap();
        assert!((&a.conj() - &b).max_abs_component().abs_le_pow10(40), "{w:?}");
    }
}

#[test]
fn cov_is_linear() {
    let specs: Vec<_> = common::corpus(0x11ea, 10, 2, 4).into_iter().filter(|s| s.binom_power == 1).collect();
    let (a, b) = (rat(3, 2), rat(-5, 7));
    for pair in specs.windows(2) {
        let e1 = compile_spec(&pair[0]).unwrap().expr;
        let e2 = compile_spec(&pair[1]).unwrap().expr;
        let mut combo = TrigExpr::new(0);
        combo.add_scaled(&e1, &a);
        combo.add_scaled(&e2, &b);
        let mut separate = WordSum::new(0);
        separate.add_scaled(&cov(&e1).unwrap(), &GaussRat::real(a.clone()));
        separate.add_scaled(&cov(&e2).unwrap(), &GaussRat::real(b.clone()));
        assert_eq!(cov(&combo).unwrap(), separate, "{} / {}", pair[0], pair[1]);
    }
}

#[test]
fn unsupported_specs_report_unsupported() {
    let tail = parse_spec("S[2n^2 > 0]@tail=3").unwrap();
    assert!(matches!(compile_spec(&tail), Err(CompileError::Unsupported(_))));
}
