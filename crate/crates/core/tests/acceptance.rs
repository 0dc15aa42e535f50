//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Tolerances are fixed here rather than derived from options.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use cmzv_core::arith::{bits_for_digits, parse_decimal, rat, Real};
use cmzv_core::fixtures::{bundled_fixtures, verify_fixture};
use cmzv_core::oracle::{central_ratio, gamma_tail_check};
use cmzv_core::pipeline::{compiled_target, oracle_config, oracle_target, spec_word_sum};
use cmzv_core::series::{h2n_split, IndexTerm, ParityForm, Relation, SeriesSpec};
use cmzv_core::{
    compiled_value, direct_sum, eval::split_consistency, parse_const, parse_spec, ConstEvaluator, Evaluator,
    HarmonicSpec, Part, Target, VerifyOptions,
};
use num_bigint::BigInt;
use num_rational::BigRational;

const DIGITS: u32 = 40;
const ORACLE_DIGITS: u32 = 20;

fn pow10(k: i32) -> BigRational {
    let p = BigInt::from(10).pow(k.unsigned_abs());
    if k >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(1.into(), p)
    }
}

fn sci(r: &Real) -> String {
    format!("{:.1e}", r.abs().to_f64())
}

fn bits() -> u32 {
    bits_for_digits(DIGITS + 5)
}

/// Outcome of one criterion: failures collected as text.
#[derive(Default)]
struct Check {
    failures: Vec<String>,
    worst: Vec<(String, Real)>,
}

impl Check {
    /// Records `|a - b| ≤ 10^-k` under `label`.
    fn close(&mut self, label: &str, a: &Real, b: &Real, k: i32) {
        let d = (a - b).abs();
        if !d.abs_le(&pow10(-k)) {
            self.failures.push(format!("{label}: deviation {} > 1e-{k}", sci(&d)));
        }
        match self.worst.iter_mut().find(|(l, _)| l == label) {
            Some((_, w)) if d.to_ratio() > w.to_ratio() => *w = d,
            Some(_) => {}
            None => self.worst.push((label.to_string(), d)),
        }
    }

    fn require(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn within(&mut self, elapsed: Duration, budget: Duration, what: &str) {
        self.require(elapsed <= budget, format!("{what} took {:.1} s > {} s", elapsed.as_secs_f64(), budget.as_secs()));
    }

    fn summary(&self) -> String {
        self.worst.iter().map(|(l, d)| format!("{l} {}", sci(d))).collect::<Vec<_>>().join(", ")
    }
}

struct Ctx {
    consts: ConstEvaluator,
    ev: Evaluator,
}

impl Ctx {
    fn closed(&self, expr: &str) -> Real {
        self.consts.eval(&parse_const(expr).expect("closed form parses")).expect("closed form evaluates").re
    }

    /// Compiled, oracle and closed-form comparison for one target.
    fn target(&self, c: &mut Check, target: &Target, closed: &str, compiled_k: i32) {
        let cf = self.closed(closed);
        match compiled_target(target, &self.ev) {
            Ok(v) => {
                c.close("compiled-closed", &v.re, &cf, compiled_k);
                c.close("compiled-im", &v.im, &Real::zero(bits()), 20);
            }
            Err(e) => c.failures.push(format!("{}: compiled: {e}", target.describe())),
        }
        match oracle_target(target, &oracle_config(ORACLE_DIGITS)) {
            Ok(r) => c.close("oracle-closed", &r.value.with_bits(bits()), &cf, 8),
            Err(e) => c.failures.push(format!("{}: oracle: {e}", target.describe())),
        }
    }
}

fn series(spec: &str) -> Target {
    Target::Series { spec: spec.into() }
}

fn criterion_1(ctx: &Ctx) -> Check {
    let mut c = Check::default();
    for (spec, closed) in [("S[2n^1 > 0]", "log2"), ("S[2n+1^1 >= 0]", "pi/2"), ("S[2n+1^2 >= 0]", "pi*log2/2")] {
        let t0 = Instant::now();
        ctx.target(&mut c, &series(spec), closed, 30);
        c.within(t0.elapsed(), Duration::from_secs(5), spec);
    }
    c
}

fn criterion_2(ctx: &Ctx) -> Check {
    let mut c = Check::default();
    let t0 = Instant::now();
    for (spec, closed, printed) in [
        ("S[2n+1^1 >= 2n^1 > 0]", "2*G - pi*log2/2", "0.7431381432"),
        ("S[2n^1 > 2n+1^1 >= 0]", "pi^2/8", "1.2337005"),
        ("S[2n-1^2 > 2n^1 > 0]", "2*G - pi*log2/2 - log2", "0.04999096264"),
    ] {
        ctx.target(&mut c, &series(spec), closed, 30);
        printed_check(ctx, &mut c, spec, printed);
    }
    c.within(t0.elapsed(), Duration::from_secs(30), "criterion 2");
    c
}

/// Compiled value against a printed decimal with `d` places, tolerance
/// `10^(1-d)`.
fn printed_check(ctx: &Ctx, c: &mut Check, spec: &str, printed: &str) {
    let places = cmzv_core::arith::decimal_places(printed) as i32;
    let v = compiled_value(&parse_spec(spec).unwrap(), &ctx.ev).unwrap();
    let p = Real::from_ratio(&parse_decimal(printed).unwrap(), bits());
    c.close("compiled-printed", &v.re, &p, places - 1);
}

fn criterion_3(ctx: &Ctx) -> Check {
    let mut c = Check::default();
    let t0 = Instant::now();
    for (spec, closed, printed) in [
        ("S2[2n^1 > 0]", "2/pi*(pi*log2 - 2*G)", "0.2200507"),
        ("S2[2n+1^1 >= 0]", "4*G/pi", "1.1662436"),
        ("S2[2n-1^1 > 0]", "2/pi*(pi/2 - 1)", "0.36338"),
        ("S2[2n-1^2 > 2n-1^1 > 0]", "2/pi*(3 - pi/2 - 2*log2)", "0.0273169"),
        ("S2[2n-1^1 > 2n-1^1 > 2n+1^1 >= 0]", "2/pi*(2*log2 - pi^2/12 - log2^2/2)", "0.20601068"),
    ] {
        ctx.target(&mut c, &series(spec), closed, 30);
        printed_check(ctx, &mut c, spec, printed);
    }
    c.within(t0.elapsed(), Duration::from_secs(60), "criterion 3");
    c
}

fn criterion_4(ctx: &Ctx) -> Check {
    let mut c = Check::default();
    let harmonic = |k_vec: Vec<u32>, exponent: u32| {
        let h =
            HarmonicSpec { k_vec, l_vec: vec![], head: IndexTerm::new(ParityForm::OddLow, exponent), binom_power: 2 };
        Target::Sum { parts: vec![Part { coef: rat(1, 1), target: Target::Harmonic(h) }] }
    };
    let h2n = Target::Sum {
        parts: h2n_split(IndexTerm::new(ParityForm::OddLow, 2), 2)
            .into_iter()
            .map(|(coef, h)| Part { coef, target: Target::Harmonic(h) })
            .collect(),
    };
    ctx.target(&mut c, &harmonic(vec![1], 1), "(8*log2 - 4)/pi", 25);
    ctx.target(&mut c, &harmonic(vec![1], 2), "(12 - 16*log2)/pi", 25);
    ctx.target(&mut c, &h2n, "(4*G - 12*log2 + 6)/pi", 25);
    c
}

fn criterion_5() -> Check {
    let mut c = Check::default();
    let t0 = Instant::now();
    let ev = Evaluator::new(bits());
    let cfg = oracle_config(ORACLE_DIGITS);

    // (a) and (d): random corpus, both binomial powers.
    let corpus = common::corpus(0x5eed, 100, 3, 5);
    c.require(
        corpus.iter().any(|s| s.binom_power == 1) && corpus.iter().any(|s| s.binom_power == 2),
        "corpus lacks a power",
    );
    for spec in &corpus {
        match (compiled_value(spec, &ev), direct_sum(spec, &cfg)) {
            (Ok(v), Ok(o)) => {
                c.close("corpus", &v.re, &o.value.with_bits(bits()), 8);
                c.close("corpus-im", &v.im, &Real::zero(bits()), 20);
            }
            (Err(e), _) => c.failures.push(format!("{spec}: compiled: {e}")),
            (_, Err(e)) => c.failures.push(format!("{spec}: oracle: {e}")),
        }
    }

    // (b) the γ-tail identity.
    for d in 1..=4 {
        for n in 0..=10 {
            match gamma_tail_check(n, d, &cfg) {
                Ok(v) => c.close("gamma-tail", &v, &central_ratio(n, &rat(1, 1), cfg.working_bits()), 8),
                Err(e) => c.failures.push(format!("gamma tail d={d} n={n}: {e}")),
            }
        }
    }

    // (c) leading (2n-1)^1 drop: oracle of the full series vs compiled rest.
    let drop_cfg = oracle_config(30);
    for rest in common::corpus(0x1ead, 12, 2, 4).into_iter().filter(|s| s.binom_power == 1) {
        let mut terms = vec![IndexTerm::new(ParityForm::OddLow, 1)];
        terms.extend(rest.terms.iter().copied());
        let mut relations = vec![Relation::Strict];
        relations.extend(rest.relations.iter().copied());
        let full = SeriesSpec::raw(1, terms, relations);
        if full.validate().is_err() {
            continue;
        }
        let v = compiled_value(&rest, &ev).unwrap();
        let o = direct_sum(&full, &drop_cfg).unwrap();
        c.close("gamma-drop", &v.re, &o.value.with_bits(bits()), 10);
    }

    // (e) evaluator checks on words from part of the corpus.
    let mut words: Vec<_> = corpus[..10].iter().flat_map(|s| spec_word_sum(s).unwrap().terms.into_keys()).collect();
    words.sort();
    words.dedup();
    words.truncate(30);
    let lo_tol = BigRational::new(1.into(), BigInt::from(1) << 120u32);
    for w in &words {
        let half = split_consistency(w, &rat(1, 2), 160).unwrap();
        for s in [rat(1, 3), rat(2, 3)] {
            let other = split_consistency(w, &s, 160).unwrap();
            c.close("split", &half.re, &other.re, 40);
            c.close("split", &half.im, &other.im, 40);
        }
        let lo = Evaluator::new(128).eval_word(w).unwrap().with_bits(256);
        let hi = Evaluator::new(256).eval_word(w).unwrap();
        c.require(
            (&lo - &hi).max_abs_component().abs_le(&lo_tol),
            format!("{w:?}: 128 vs 256 bits differ beyond 2^-120"),
        );
    }
    c.within(t0.elapsed(), Duration::from_secs(15 * 60), "criterion 5");
    c
}

fn criterion_6() -> Check {
    let mut c = Check::default();
    let readme = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/../../README.md")).unwrap_or_default();
    let text = readme.to_lowercase();
    c.require(
        text.contains("not machine-checked"),
        "README lacks the statement that membership claims are not machine-checked",
    );
    c.require(text.contains("weight"), "README does not describe weight reporting");
    let rec = bundled_fixtures().into_iter().find(|r| r.id == "b1-ee-11").expect("fixture b1-ee-11");
    let report = verify_fixture(&rec, &VerifyOptions { oracle_digits: None, ..VerifyOptions::default() });
    c.require(report.predicted_weight.is_some() && report.observed_weight.is_some(), "report lacks weight fields");
    c
}

type Criterion<'a> = (&'static str, Box<dyn Fn() -> Check + 'a>);

fn main() -> ExitCode {
    let ev = Evaluator::new(bits());
    let ctx = Ctx { consts: ConstEvaluator::new(ev.clone()), ev };
    let criteria: [Criterion; 6] = [
        ("1 depth-1 exact values", Box::new(|| criterion_1(&ctx))),
        ("2 depth-2 mixed parity", Box::new(|| criterion_2(&ctx))),
        ("3 squared-binomial values", Box::new(|| criterion_3(&ctx))),
        ("4 harmonic identities", Box::new(|| criterion_4(&ctx))),
        ("5 property suite", Box::new(criterion_5)),
        ("6 membership claims documented", Box::new(criterion_6)),
    ];
    let mut all_ok = true;
    for (name, run) in criteria {
        let t0 = Instant::now();
        let check = run();
        let ok = check.failures.is_empty();
        all_ok &= ok;
        println!(
            "{} criterion {name} ({:.1} s) {}",
            if ok { "PASS" } else { "FAIL" },
            t0.elapsed().as_secs_f64(),
            check.summary()
        );
        for f in &check.failures {
            println!("    {f}");
        }
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
