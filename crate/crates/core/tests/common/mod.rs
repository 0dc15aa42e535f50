//! Helpers shared by the integration tests.
#![allow(dead_code)]

use cmzv_core::arith::Real;
use cmzv_core::series::{IndexTerm, ParityForm, Relation, SeriesSpec};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Random valid spec with depth ≤ `max_depth` and weight ≤ `max_weight`.
pub fn random_spec(rng: &mut impl Rng, max_depth: usize, max_weight: u32) -> SeriesSpec {
    loop {
        let depth = rng.gen_range(1..=max_depth);
        let mut budget = max_weight;
        let mut terms = Vec::new();
        for i in 0..depth {
            let left = (depth - i - 1) as u32;
            let s = rng.gen_range(1..=(budget - left).min(3));
            budget -= s;
            terms.push(IndexTerm::new(ParityForm::ALL[rng.gen_range(0..3)], s));
        }
        let relations = (0..depth).map(|_| if rng.gen_bool(0.5) { Relation::Weak } else { Relation::Strict }).collect();
        let spec = SeriesSpec::raw(rng.gen_range(1..=2), terms, relations);
        if spec.validate().is_ok() {
            return spec;
        }
    }
}

/// Deterministic corpus of `count` distinct specs.
pub fn corpus(seed: u64, count: usize, max_depth: usize, max_weight: u32) -> Vec<SeriesSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out: Vec<SeriesSpec> = Vec::new();
    while out.len() < count {
        let s = random_spec(&mut rng, max_depth, max_weight);
        if !out.contains(&s) {
            out.push(s);
        }
    }
    out
}

pub fn abs_diff(a: &Real, b: &Real) -> Real {
    (a - b).abs()
}
