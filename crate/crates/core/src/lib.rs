//! Compiler and evaluator for Apéry-type central binomial series.
//!
//! A series spec is compiled to words in trigonometric 1-forms, mapped to
//! iterated integrals over the level-4 alphabet `{0, ±1, ±i}`, and evaluated
//! to arbitrary precision. An independent direct-summation oracle checks
//! every value.

pub mod arith;
pub mod compiler;
pub mod constants;
pub mod error;
pub mod eval;
pub mod fixtures;
pub mod oracle;
pub mod pipeline;
pub mod series;
pub mod words;

pub use arith::{BigComplex, GaussRat, Real};
pub use compiler::{compile_spec, Compiled, TrigExpr, TrigForm, TrigWord};
pub use constants::{eval_const, parse_const, ConstEvaluator, ConstExpr, Leaf};
pub use error::{CompileError, Error, EvalError, OracleError, SpecError};
pub use eval::{Evaluator, ValueCache};
pub use fixtures::{FixtureRecord, FixtureReport, VerifyOptions, VerifyReport};
pub use oracle::{direct_sum, direct_sum_harmonic, OracleConfig, OracleResult};
pub use pipeline::{compiled_target, compiled_value, Part, Target};
pub use series::{parse_spec, HarmonicSpec, IndexTerm, ParityForm, Relation, SeriesSpec};
pub use words::{cov, reality_class, Atom, RealityClass, Word, WordSum};
