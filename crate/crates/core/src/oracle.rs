//! Direct summation oracle.
//!
//! Nested sums are accumulated in a single sweep of the outer index: each
//! level keeps its running partial sum, so a depth-`d` series costs `O(N·d)`
//! operations instead of `O(N^d)`. The remaining outer tail is removed by a
//! generalized Richardson extrapolation over partial sums recorded along the
//! sweep, using the basis `N^{-β-k}·log^j N` with `β = s_1 + p/2 - 1`. The log
//! powers (`j` up to the number of inner levels) are needed because inner
//! sums with unit exponents grow like powers of `log n`; a pure power basis
//! stalls around `10^-6` on such series.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::arith::{bits_for_digits, Real};
use crate::error::OracleError;
use crate::series::{HarmonicSpec, IndexTerm, ParityForm, Relation, SeriesSpec};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleConfig {
    /// Largest outer index summed explicitly.
    pub cutoff: u64,
    /// The checkpoints span a factor `2^levels` below the cutoff, and the
    /// extrapolation removes `levels` orders of the tail expansion.
    pub extrapolation_levels: u32,
    pub precision_digits: u32,
    /// A result whose error estimate exceeds `10^-k` is rejected with
    /// [`OracleError::ConfigTooSmall`]; `None` means `k = precision_digits / 2`.
    pub max_error_digits: Option<u32>,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig { cutoff: 200_000, extrapolation_levels: 8, precision_digits: 40, max_error_digits: None }
    }
}

impl OracleConfig {
    pub fn validate(&self) -> Result<(), OracleError> {
        if self.cutoff < 100 {
            return Err(OracleError::BadConfig(format!("cutoff {} < 100", self.cutoff)));
        }
        if self.precision_digits < 15 {
            return Err(OracleError::BadConfig(format!("precision_digits {} < 15", self.precision_digits)));
        }
        Ok(())
    }

    pub fn error_limit_digits(&self) -> u32 {
        self.max_error_digits.unwrap_or(self.precision_digits / 2)
    }

    /// Working precision: requested digits plus 15 guard digits.
    pub fn working_bits(&self) -> u32 {
        bits_for_digits(self.precision_digits + 15)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleResult {
    pub value: Real,
    pub error_estimate: Real,
    pub terms_used: u64,
}

/// `a_n(x) = C(2n, n) x^{2n} / 4^n` by its product recurrence.
pub fn central_ratio(n: u64, x: &BigRational, bits: u32) -> Real {
    let x2 = x * x;
    let mut a = Real::one(bits + 32);
    for m in 1..=n as i64 {
        a = a.mul_int(2 * m - 1).div_int(2 * m);
        if !x2.is_one() {
            a = a.mul_ratio(&x2);
        }
    }
    a.with_bits(bits)
}

/// One level of a nested chain: denominator `(scale·n + offset)^exponent`
/// and the relation linking it to the level below.
#[derive(Clone, Debug)]
struct Level {
    scale: i64,
    offset: i64,
    exponent: u32,
    below: Relation,
}

/// Running partial sums of a chain `n_1 ≻ n_2 ≻ … ≻ n_d ≻ bound`.
///
/// After `step(n)`, `sums[j]` is the sum over all chain assignments whose
/// level-`j` index is at most `n`.
struct ChainSums {
    levels: Vec<Level>,
    bound: u64,
    sums: Vec<Real>,
}

impl ChainSums {
    fn new(levels: Vec<Level>, bound: u64, bits: u32) -> Self {
        let sums = vec![Real::zero(bits); levels.len()];
        ChainSums { levels, bound, sums }
    }

    /// Advances every level to index `n`. `top_weight` multiplies the
    /// level-0 summand (the binomial factor of the series).
    fn step(&mut self, n: u64, top_weight: Option<&Real>) {
        let d = self.levels.len();
        let bits = self.sums[0].bits();
        // Value of sums[j+1] before this step, i.e. at index n-1.
        let mut old_below: Option<Real> = None;
        for j in (0..d).rev() {
            let lv = &self.levels[j];
            let inner: Option<Real> = if j == d - 1 {
                let admitted = match lv.below {
                    Relation::Strict => n > self.bound,
                    Relation::Weak => n >= self.bound,
                };
                admitted.then(|| Real::one(bits))
            } else {
                let v = match lv.below {
                    Relation::Weak => self.sums[j + 1].clone(),
                    Relation::Strict => old_below.take().unwrap_or_else(|| Real::zero(bits)),
                };
                (!v.is_zero()).then_some(v)
            };
            let previous = self.sums[j].clone();
            if let Some(mut v) = inner {
                let den = lv.scale * n as i64 + lv.offset;
                assert!(den != 0, "zero denominator at index {n}; spec failed definedness");
                if j == 0 {
                    if let Some(w) = top_weight {
                        v = &v * w;
                    }
                }
                let den = BigInt::from(den).pow(lv.exponent);
                self.sums[j] += &v.div_big(&den);
            }
            old_below = Some(previous);
        }
    }

    fn total(&self) -> &Real {
        &self.sums[0]
    }
}

fn spec_levels(terms: &[IndexTerm], relations: &[Relation]) -> Vec<Level> {
    terms
        .iter()
        .zip(relations)
        .map(|(t, r)| Level { scale: 2, offset: t.parity.offset(), exponent: t.exponent, below: *r })
        .collect()
}

/// Incremental `a_n^p` with `x^2` folded in.
struct BinomialWeight {
    value: Real,
    x2: BigRational,
    power: u8,
}

impl BinomialWeight {
    fn new(x: &BigRational, power: u8, bits: u32) -> Self {
        BinomialWeight { value: Real::one(bits), x2: x * x, power }
    }

    /// Moves from index n-1 to n (n ≥ 1).
    fn advance(&mut self, n: u64) {
        let (num, den) = (2 * n as i64 - 1, 2 * n as i64);
        if self.power == 1 {
            self.value = self.value.mul_int(num).div_int(den);
            if !self.x2.is_one() {
                self.value = self.value.mul_ratio(&self.x2);
            }
        } else {
            self.value = self.value.mul_int(num * num).div_int(den * den);
            if !self.x2.is_one() {
                let x4 = &self.x2 * &self.x2;
                self.value = self.value.mul_ratio(&x4);
            }
        }
    }
}

/// Partial sums recorded at the checkpoint indices.
struct Sweep {
    checkpoints: Vec<u64>,
    values: Vec<Real>,
}

fn checkpoints(cfg: &OracleConfig, unknowns: usize) -> Vec<u64> {
    let n = cfg.cutoff as f64;
    if unknowns <= 1 {
        return vec![cfg.cutoff / 2, cfg.cutoff];
    }
    let span = 2f64.powi(cfg.extrapolation_levels as i32);
    let ratio = span.powf(1.0 / (unknowns as f64 - 1.0));
    let mut pts: Vec<u64> = (0..unknowns).map(|i| (n / ratio.powi(i as i32)).round() as u64).collect();
    pts.reverse();
    pts.dedup();
    pts
}

/// Limit of `S(N)` fitted by `c + Σ_{k<orders} Σ_{j≤log_degree}
/// c_{kj} N^{-β-k} log^j N` through the given points, where `β = beta2/2`.
fn extrapolate(points: &[(u64, Real)], beta2: u32, log_degree: u32, orders: u32, bits: u32) -> Real {
    let unknowns = 1 + (orders * (log_degree + 1)) as usize;
    assert!(points.len() >= unknowns, "not enough checkpoints");
    let pts = &points[points.len() - unknowns..];
    let w = bits + 64;
    let n_min = pts[0].0;
    let n_max = pts[pts.len() - 1].0;
    let log_span = Real::from_int(n_max, w).ln() - Real::from_int(n_min, w).ln();
    let ln_min = Real::from_int(n_min, w).ln();

    let mut rows: Vec<Vec<Real>> = Vec::with_capacity(unknowns);
    for (n, s) in pts {
        let ratio = Real::from_ratio(&BigRational::new(n_min.into(), (*n).into()), w);
        let rho = ratio.sqrt();
        let ell = if log_degree > 0 && !log_span.is_zero() {
            (Real::from_int(*n, w).ln() - &ln_min) / &log_span
        } else {
            Real::zero(w)
        };
        let mut row = vec![Real::one(w)];
        for k in 0..orders {
            let base = rho.powi(beta2 + 2 * k);
            let mut lp = Real::one(w);
            for _ in 0..=log_degree {
                row.push(&base * &lp);
                lp = &lp * &ell;
            }
        }
        row.push(s.with_bits(w));
        rows.push(row);
    }
    solve_first(rows, w).with_bits(bits)
}

/// Gaussian elimination with partial pivoting on an augmented matrix;
/// returns the first unknown.
// Row operations read one row while writing another, so indices stay explicit.
#[allow(clippy::needless_range_loop)]
fn solve_first(mut m: Vec<Vec<Real>>, bits: u32) -> Real {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| m[a][col].abs().partial_cmp(&m[b][col].abs()).expect("total order"))
            .expect("non-empty");
        m.swap(col, pivot);
        if m[col][col].is_zero() {
            continue;
        }
        for r in col + 1..n {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &m[col][col];
            for c in col..=n {
                let delta = &factor * &m[col][c];
                m[r][c] -= &delta;
            }
        }
    }
    let mut x = vec![Real::zero(bits); n];
    for r in (0..n).rev() {
        let mut acc = m[r][n].clone();
        for c in r + 1..n {
            acc -= &(&m[r][c] * &x[c]);
        }
        x[r] = if m[r][r].is_zero() { Real::zero(bits) } else { &acc / &m[r][r] };
    }
    x.swap_remove(0)
}

/// Shared tail treatment: extrapolate to the limit when `x = 1`, otherwise
/// take the (geometrically converged) last partial sum.
fn finish(
    sweep: Sweep,
    geometric: bool,
    beta2: u32,
    log_degree: u32,
    cfg: &OracleConfig,
    bits: u32,
) -> Result<OracleResult, OracleError> {
    let points: Vec<(u64, Real)> = sweep.checkpoints.iter().copied().zip(sweep.values).collect();
    let out_bits = bits_for_digits(cfg.precision_digits);
    let (value, error) = if geometric || cfg.extrapolation_levels == 0 {
        let last = points[points.len() - 1].1.clone();
        let prev = points[points.len() - 2].1.clone();
        let err = (&last - &prev).abs();
        (last, err)
    } else {
        let full = extrapolate(&points, beta2, log_degree, cfg.extrapolation_levels, bits);
        let reduced_orders = cfg.extrapolation_levels - 1;
        let reduced = extrapolate(&points, beta2, log_degree, reduced_orders, bits);
        let err = (&full - &reduced).abs();
        (full, err)
    };
    let limit_digits = cfg.error_limit_digits();
    let limit = BigRational::new(BigInt::one(), BigInt::from(10).pow(limit_digits));
    if !error.abs_le(&limit) {
        return Err(OracleError::ConfigTooSmall {
            estimate: format!("{:e}", error.to_f64()),
            limit: format!("1e-{limit_digits}"),
        });
    }
    // Rounding the value to the output precision adds up to half an ulp;
    // one full ulp keeps the reported estimate strictly positive.
    let ulp = Real::from_mantissa(BigInt::one(), out_bits);
    let error_estimate = &error.abs().with_bits(out_bits) + &ulp;
    Ok(OracleResult { value: value.with_bits(out_bits), error_estimate, terms_used: cfg.cutoff })
}

fn sweep_plan(cfg: &OracleConfig, log_degree: u32, geometric: bool) -> Vec<u64> {
    if geometric || cfg.extrapolation_levels == 0 {
        return vec![cfg.cutoff / 2, cfg.cutoff];
    }
    let unknowns = 1 + (cfg.extrapolation_levels * (log_degree + 1)) as usize;
    checkpoints(cfg, unknowns)
}

/// Sums a series spec directly.
pub fn direct_sum(spec: &SeriesSpec, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    direct_sum_x2(spec, &(&spec.argument * &spec.argument), cfg)
}

/// As [`direct_sum`] but with `x^2` supplied exactly, which covers
/// arguments such as `x = sin(π/4)` whose square is rational.
pub fn direct_sum_x2(spec: &SeriesSpec, x2: &BigRational, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    cfg.validate()?;
    spec.validate().map_err(|e| OracleError::BadConfig(e.to_string()))?;
    let out_bits = bits_for_digits(cfg.precision_digits);
    if spec.tail_bound >= cfg.cutoff {
        return Ok(OracleResult { value: Real::zero(out_bits), error_estimate: Real::zero(out_bits), terms_used: 0 });
    }
    let bits = cfg.working_bits();
    let geometric = !x2.is_one();
    let log_degree = (spec.depth() - 1) as u32;
    let plan = sweep_plan(cfg, log_degree, geometric);
    let mut chain = ChainSums::new(spec_levels(&spec.terms, &spec.relations), spec.tail_bound, bits);
    // a_n(x)^p depends on x only through x^2.
    let mut weight = BinomialWeight { value: Real::one(bits), x2: x2.clone(), power: spec.binom_power };
    let mut sweep = Sweep { checkpoints: plan.clone(), values: Vec::with_capacity(plan.len()) };
    let mut next = 0;
    for n in 0..=cfg.cutoff {
        if n > 0 {
            weight.advance(n);
        }
        chain.step(n, Some(&weight.value));
        if next < plan.len() && n == plan[next] {
            sweep.values.push(chain.total().clone());
            next += 1;
        }
    }
    // β = s_1 + p/2 - 1, doubled to stay integral.
    let beta2 = 2 * spec.terms[0].exponent + spec.binom_power as u32 - 2;
    finish(sweep, geometric, beta2, log_degree, cfg, bits)
}

/// Sums a harmonic-weighted series directly, evaluating `ζ_n(k)` and
/// `t_n(l)` by their own running chains.
pub fn direct_sum_harmonic(h: &HarmonicSpec, cfg: &OracleConfig) -> Result<OracleResult, OracleError> {
    cfg.validate()?;
    h.validate().map_err(|e| OracleError::BadConfig(e.to_string()))?;
    let bits = cfg.working_bits();
    let log_degree = (h.k_vec.len() + h.l_vec.len()) as u32;
    let plan = sweep_plan(cfg, log_degree, false);
    let strict_chain = |scale: i64, offset: i64, exps: &[u32]| {
        let levels = exps.iter().map(|&e| Level { scale, offset, exponent: e, below: Relation::Strict }).collect();
        ChainSums::new(levels, 0, bits)
    };
    let mut zeta = (!h.k_vec.is_empty()).then(|| strict_chain(1, 0, &h.k_vec));
    let mut odd = (!h.l_vec.is_empty()).then(|| strict_chain(2, -1, &h.l_vec));
    let mut weight = BinomialWeight::new(&BigRational::one(), h.binom_power, bits);
    let start = if h.head.parity == ParityForm::OddHigh { 0 } else { 1 };
    let mut total = Real::zero(bits);
    let mut sweep = Sweep { checkpoints: plan.clone(), values: Vec::with_capacity(plan.len()) };
    let mut next = 0;
    for n in 0..=cfg.cutoff {
        if n > 0 {
            weight.advance(n);
        }
        let mut factor = weight.value.clone();
        if let Some(z) = zeta.as_mut() {
            z.step(n, None);
            factor = &factor * z.total();
        }
        if let Some(t) = odd.as_mut() {
            t.step(n, None);
            factor = &factor * t.total();
        }
        if n >= start && !factor.is_zero() {
            let den = BigInt::from(h.head.parity.value(n as i64)).pow(h.head.exponent);
            total += &factor.div_big(&den);
        }
        if next < plan.len() && n == plan[next] {
            sweep.values.push(total.clone());
            next += 1;
        }
    }
    let beta2 = 2 * h.head.exponent + h.binom_power as u32 - 2;
    finish(sweep, false, beta2, log_degree, cfg, bits)
}

/// Sum of `S[2n-1^1 > … > 2n-1^1 > 0]` (depth `d`) over indices above `n`;
/// equals `a_n`.
pub fn gamma_tail_check(n: u64, d: usize, cfg: &OracleConfig) -> Result<Real, OracleError> {
    let spec =
        SeriesSpec::raw(1, vec![IndexTerm::new(ParityForm::OddLow, 1); d], vec![Relation::Strict; d]).with_tail(n);
    direct_sum(&spec, cfg).map(|r| r.value)
}

/// Partial sums `S(n)` for `n ≤ limit` of the spec, without extrapolation.
pub fn partial_sum(spec: &SeriesSpec, limit: u64, bits: u32) -> Real {
    let mut chain = ChainSums::new(spec_levels(&spec.terms, &spec.relations), spec.tail_bound, bits);
    let mut weight = BinomialWeight::new(&spec.argument, spec.binom_power, bits);
    for n in 0..=limit {
        if n > 0 {
            weight.advance(n);
        }
        chain.step(n, Some(&weight.value));
    }
    chain.total().clone()
}

/// Exact rational value of a finite truncation, used to cross-check the
/// fixed-point accumulation on small inputs.
pub fn partial_sum_exact(spec: &SeriesSpec, limit: u64) -> BigRational {
    fn rec(spec: &SeriesSpec, level: usize, upper: u64) -> BigRational {
        let d = spec.depth();
        let term = spec.terms[level];
        let lo = if level + 1 == d {
            match spec.relations[level] {
                Relation::Strict => spec.tail_bound + 1,
                Relation::Weak => spec.tail_bound,
            }
        } else {
            0
        };
        let mut acc = BigRational::zero();
        for n in lo..=upper {
            let inner = if level + 1 == d {
                BigRational::one()
            } else {
                let next_upper = match spec.relations[level] {
                    Relation::Strict => match n.checked_sub(1) {
                        Some(u) => u,
                        None => continue,
                    },
                    Relation::Weak => n,
                };
                rec(spec, level + 1, next_upper)
            };
            if inner.is_zero() {
                continue;
            }
            let den = BigInt::from(term.parity.value(n as i64)).pow(term.exponent);
            let mut v = inner / BigRational::from_integer(den);
            if level == 0 {
                let mut a = BigRational::one();
                for m in 1..=n {
                    a *= BigRational::new(BigInt::from(2 * m - 1), BigInt::from(2 * m));
                }
                let x2 = &spec.argument * &spec.argument;
                let mut w = a.clone() * num_traits::pow(x2.clone(), n as usize);
                if spec.binom_power == 2 {
                    w = &w * &w;
                }
                v *= w;
            }
            acc += v;
        }
        acc
    }
    rec(spec, 0, limit)
}
