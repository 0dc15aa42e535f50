use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use cmzv_core::arith::{bits_for_digits, rat_int};
use cmzv_core::constants::Leaf;
use cmzv_core::eval::CACHE_ENV;
use cmzv_core::fixtures::{bundled_fixtures, load_fixtures, verify_fixtures};
use cmzv_core::pipeline::{compiled_target, oracle_config, oracle_target, spec_word_sum, target_weight, Part};
use cmzv_core::series::h2n_split;
use cmzv_core::{
    compile_spec, parse_const, parse_spec, reality_class, BigComplex, ConstEvaluator, Error, Evaluator, HarmonicSpec,
    IndexTerm, Real, Target, ValueCache, VerifyOptions,
};

#[derive(Parser)]
#[command(name = "cmzv", version, about = "Compile and evaluate central binomial series")]
struct Cli {
    /// Word-value cache file (JSON lines). The CMZV_CACHE environment
    /// variable takes precedence. Without either, values are not persisted.
    #[arg(long, global = true)]
    cache_path: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Direct,
    Compiled,
    Both,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Ir {
    Trig,
    Words,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one series, e.g. "S[2n+1^1 >= 2n^1 > 0]".
    Eval {
        spec: String,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        /// Closed form to compare against, e.g. "2*G - pi*log2/2".
        #[arg(long)]
        closed: Option<String>,
        #[arg(long)]
        json: bool,
    },
    /// Dump the intermediate representation of a series.
    Compile {
        spec: String,
        #[arg(long, value_enum, default_value = "trig")]
        ir: Ir,
    },
    /// Check the reference fixtures; exits with status 1 on any failure.
    Verify {
        /// Fixture file; defaults to the bundled set.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        #[arg(long, default_value_t = 20)]
        oracle_digits: u32,
        /// Skip direct summation.
        #[arg(long)]
        no_oracle: bool,
        #[arg(long)]
        json: bool,
    },
    /// Print the constant catalog.
    Constants {
        #[arg(long, default_value_t = 40)]
        digits: u32,
        #[arg(long)]
        json: bool,
    },
    /// Evaluate Σ a_n^p ζ_n(k) t_n(l) / head(n), where ζ_n runs over
    /// integers and t_n over odd integers up to n.
    Harmonic {
        /// Comma-separated ζ_n exponents, e.g. "1,1"; may be empty.
        #[arg(long, default_value = "")]
        k: String,
        /// Comma-separated t_n exponents; may be empty.
        #[arg(long, default_value = "")]
        l: String,
        /// Head term such as "2n-1^1".
        #[arg(long)]
        head: String,
        /// Binomial power, 1 or 2.
        #[arg(long, default_value_t = 1)]
        binom: u8,
        /// Weight by H_{2n} instead; --k and --l must be empty.
        #[arg(long)]
        h2n: bool,
        #[arg(long, value_enum, default_value = "both")]
        method: Method,
        #[arg(long, default_value_t = 40)]
        digits: u32,
        #[arg(long)]
        closed: Option<String>,
        #[arg(long)]
        json: bool,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Usage(String),
    Runtime(String),
    Verification,
}

impl From<cmzv_core::EvalError> for Failure {
    fn from(e: cmzv_core::EvalError) -> Self {
        Failure::Runtime(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Spec(_) => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Verification) => ExitCode::from(1),
    }
}

fn open_cache(explicit: Option<&PathBuf>) -> Result<Option<Arc<ValueCache>>, Failure> {
    let env_set = std::env::var(CACHE_ENV).map(|v| !v.is_empty()).unwrap_or(false);
    if !env_set && explicit.is_none() {
        return Ok(None);
    }
    let path = ValueCache::resolve_path(explicit.map(PathBuf::as_path));
    ValueCache::open(&path)
        .map(|c| Some(Arc::new(c)))
        .map_err(|e| Failure::Runtime(format!("cache {}: {e}", path.display())))
}

fn evaluator(digits: u32, cache: &Option<Arc<ValueCache>>) -> Evaluator {
    let e = Evaluator::new(bits_for_digits(digits + 5));
    match cache {
        Some(c) => e.with_cache(c.clone()),
        None => e,
    }
}

/// Writes to stdout, ignoring a closed pipe (e.g. output piped into `head`).
fn emit(text: &str) {
    use std::io::Write;
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(text.as_bytes()).and_then(|_| out.flush());
}

fn print_json(v: &Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(v).expect("serializable")));
}

fn complex_json(z: &BigComplex, digits: u32) -> Value {
    json!({ "re": z.re.to_decimal(digits as usize), "im": z.im.to_decimal(digits as usize) })
}

fn sci(r: &Real) -> String {
    let v = r.abs().to_f64();
    if v == 0.0 {
        "0".into()
    } else {
        format!("{v:.3e}")
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let cache = open_cache(cli.cache_path.as_ref())?;
    match cli.command {
        Command::Eval { spec, method, digits, closed, json } => {
            let parsed = parse_spec(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
            let target = Target::Series { spec: parsed.render() };
            evaluate(&target, method, digits, closed.as_deref(), json, &cache)
        }
        Command::Compile { spec, ir } => {
            let parsed = parse_spec(&spec).map_err(|e| Failure::Usage(e.to_string()))?;
            let compiled = compile_spec(&parsed).map_err(Error::from)?;
            let mut out = json!({
                "spec": parsed.render(),
                "weight": parsed.weight(),
                "reality_class": reality_class(&parsed).ok(),
            });
            match ir {
                Ir::Trig => out["trig"] = compiled.expr.to_json(),
                Ir::Words => out["words"] = spec_word_sum(&parsed)?.to_json(),
            }
            print_json(&out);
            Ok(())
        }
        Command::Verify { fixtures, digits, oracle_digits, no_oracle, json } => {
            if digits <= 10 {
                return Err(Failure::Usage("--digits must exceed 10".into()));
            }
            let records = match &fixtures {
                Some(p) => load_fixtures(p)?,
                None => bundled_fixtures(),
            };
            let opts =
                VerifyOptions { digits, oracle_digits: (!no_oracle).then_some(oracle_digits), cache: cache.clone() };
            let report = verify_fixtures(&records, &opts);
            if json {
                emit(&format!("{}\n", report.to_json()));
            } else {
                emit(&report.table());
            }
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Verification)
            }
        }
        Command::Constants { digits, json } => {
            let consts = ConstEvaluator::new(evaluator(digits, &cache));
            let mut rows = Vec::new();
            for leaf in Leaf::ALL {
                let v = consts.leaf_value(leaf)?;
                rows.push(json!({
                    "name": leaf.name(),
                    "definition": leaf.description(),
                    "value": v.with_bits(bits_for_digits(digits + 5)).to_decimal(digits as usize),
                }));
            }
            if json {
                print_json(&Value::Array(rows));
            } else {
                for r in rows {
                    emit(&format!(
                        "{:<18} {}  {}\n",
                        r["name"].as_str().unwrap(),
                        r["value"].as_str().unwrap(),
                        r["definition"].as_str().unwrap()
                    ));
                }
            }
            Ok(())
        }
        Command::Harmonic { k, l, head, binom, h2n, method, digits, closed, json } => {
            let head: IndexTerm = head.parse().map_err(|e: cmzv_core::SpecError| Failure::Usage(e.to_string()))?;
            let k_vec = parse_list(&k)?;
            let l_vec = parse_list(&l)?;
            let target = if h2n {
                if !k_vec.is_empty() || !l_vec.is_empty() {
                    return Err(Failure::Usage("--h2n excludes --k and --l".into()));
                }
                let parts = h2n_split(head, binom)
                    .into_iter()
                    .map(|(coef, h)| Part { coef, target: Target::Harmonic(h) })
                    .collect();
                Target::Sum { parts }
            } else {
                let h = HarmonicSpec { k_vec, l_vec, head, binom_power: binom };
                h.validate().map_err(|e| Failure::Usage(e.to_string()))?;
                // A single part keeps the description uniform with --h2n.
                Target::Sum { parts: vec![Part { coef: rat_int(1), target: Target::Harmonic(h) }] }
            };
            evaluate(&target, method, digits, closed.as_deref(), json, &cache)
        }
    }
}

fn parse_list(text: &str) -> Result<Vec<u32>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<u32>().map_err(|_| Failure::Usage(format!("bad exponent {s:?}"))))
        .collect()
}

fn evaluate(
    target: &Target,
    method: Method,
    digits: u32,
    closed: Option<&str>,
    json: bool,
    cache: &Option<Arc<ValueCache>>,
) -> Result<(), Failure> {
    let bits = bits_for_digits(digits + 5);
    let closed_expr = closed.map(parse_const).transpose().map_err(|e| Failure::Usage(e.to_string()))?;
    let mut out = json!({ "target": target.describe(), "digits": digits });
    let mut text = vec![format!("target     {}", target.describe())];
    if let Ok(w) = target_weight(target) {
        out["weight"] = json!(w);
    }

    let mut compiled = None;
    if method != Method::Direct {
        let ev = evaluator(digits, cache);
        let t0 = std::time::Instant::now();
        let v = compiled_target(target, &ev)?;
        out["compiled"] = complex_json(&v, digits);
        out["compiled_seconds"] = json!(format!("{:.3}", t0.elapsed().as_secs_f64()));
        text.push(format!("compiled   {}", v.re.to_decimal(digits as usize)));
        if !v.im.abs_le_pow10(digits) {
            text.push(format!("  imaginary part {}", v.im.to_decimal(digits as usize)));
        }
        compiled = Some(v.re);
    }

    let mut direct = None;
    if method != Method::Compiled {
        let cfg = oracle_config(digits.min(60));
        let r = oracle_target(target, &cfg)?;
        let v = r.value.with_bits(bits);
        out["direct"] = json!({
            "value": v.to_decimal(cfg.precision_digits as usize),
            "error_estimate": sci(&r.error_estimate),
            "terms_used": r.terms_used,
        });
        text.push(format!(
            "direct     {}  (error estimate {})",
            v.to_decimal(cfg.precision_digits as usize),
            sci(&r.error_estimate)
        ));
        direct = Some(v);
    }

    if let (Some(c), Some(d)) = (&compiled, &direct) {
        let dev = (c - d).abs();
        out["deviation"] = json!(sci(&dev));
        text.push(format!("deviation  {}", sci(&dev)));
    }

    if let Some(e) = closed_expr {
        let v = ConstEvaluator::new(evaluator(digits, cache)).eval(&e)?.re;
        out["closed_form"] = json!({ "expr": e.to_string(), "value": v.to_decimal(digits as usize) });
        text.push(format!("closed     {}  = {}", v.to_decimal(digits as usize), e));
        if let Some(c) = compiled.as_ref().or(direct.as_ref()) {
            let dev = (c - &v).abs();
            out["closed_form"]["deviation"] = json!(sci(&dev));
            text.push(format!("  deviation from closed form {}", sci(&dev)));
        }
    }

    if json {
        print_json(&out);
    } else {
        emit(&format!("{}\n", text.join("\n")));
    }
    Ok(())
}
