mod output;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rug::Rational;
use serde::Serialize;

use dhtlab::estimate::{power_iterate, WindowedOperator};
use dhtlab::exact::Monomial;
use dhtlab::norms::{building_norm, norm_records, Branch, Method, NormRecord};
use dhtlab::operators::{KernelSource, OperatorKind, Perturbed, Standard};
use dhtlab::skeletal::{expand_power, exprs_equal, skeleton_count, skeleton_normal_form, skeletons, Expansion};
use dhtlab::{hp, FiniteSeq};

use output::{emit, Format, Stamp};
use verify::Suite;

#[derive(Parser, Debug)]
#[command(name = "dhtlab", version, about = "Exact and numerical checks for discrete Hilbert-type transforms")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    /// Working precision in bits for high-precision evaluation.
    #[arg(long, global = true, env = "DHTLAB_PRECISION", default_value_t = hp::DEFAULT_PRECISION)]
    precision: u32,

    /// Leave `timestamp` and `seconds` out of JSON reports.
    #[arg(long, global = true)]
    no_timestamp: bool,

    /// Perturb one exact kernel entry, as `OP:m:q` (adds `q` times the
    /// kernel's power of 1/pi at offset `m`). Test fixture.
    #[arg(long, global = true, hide = true)]
    corrupt_kernel: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a verification suite.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
        /// Random cases per suite.
        #[arg(long, default_value_t = 100)]
        cases: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Largest power or skeleton size checked.
        #[arg(long, default_value_t = 20)]
        k_max: usize,
        /// Largest exponent for the fixed-point grid.
        #[arg(long, default_value_t = 64)]
        p_max: u32,
        /// Tolerance for NUMERIC checks; each check has its own default.
        #[arg(long)]
        tolerance: Option<f64>,
        /// Sequence file (`[[n, num, den], ...]`) used instead of random inputs.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// List the skeletons of size k.
    Skeletons {
        k: usize,
        /// Also print building norms at this exponent.
        #[arg(long)]
        p: Option<String>,
        #[arg(long)]
        count_only: bool,
    },
    /// Print the expansion of (K a)^k and its skeleton form.
    Decompose {
        k: usize,
        /// Render with script operator names instead of plain text.
        #[arg(long)]
        latex: bool,
    },
    /// Sharp constants and bound chains.
    Norms {
        /// Comma-separated exponents, integers, fractions or decimals.
        #[arg(long, value_delimiter = ',', default_value = "4")]
        p: Vec<String>,
        /// Comma-separated methods.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "sharp,skeletal,doubling,gohberg_krupnik,titchmarsh,riesz"
        )]
        methods: Vec<String>,
    },
    /// Windowed power-iteration estimate of an operator norm.
    Estimate {
        #[arg(long, default_value = "K")]
        op: String,
        #[arg(long, default_value_t = 4.0)]
        p: f64,
        #[arg(long = "N", alias = "n", default_value_t = 2048)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Write the convergence curve as CSV to this path.
        #[arg(long)]
        curve: Option<PathBuf>,
    },
}

/// Exit codes: 0 success, 1 contract violation or internal error, 2 usage.
enum Failure {
    Usage(String),
    Violation(String),
}

impl From<dhtlab::Error> for Failure {
    fn from(e: dhtlab::Error) -> Failure {
        Failure::Violation(e.to_string())
    }
}

type Outcome = Result<bool, Failure>;

fn usage<T>(msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure::Usage(msg.into()))
}

fn parse_corruption(spec: &str) -> Result<Perturbed, Failure> {
    let parts: Vec<&str> = spec.split(':').collect();
    let [op, m, q] = parts.as_slice() else {
        return usage(format!("--corrupt-kernel expects OP:m:q, got {spec}"));
    };
    let target: OperatorKind = op.parse().or_else(|_| usage(format!("unknown operator {op}")))?;
    let offset: i64 = m.parse().or_else(|_| usage(format!("bad offset {m}")))?;
    let coeff = hp::parse_rational(q).map_or_else(|| usage(format!("bad rational {q}")), Ok)?;
    let grade = target.grade_shift()?;
    Ok(Perturbed {
        target,
        offset,
        delta: Monomial::new(coeff, grade),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Violation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("usage error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    if !(32..=1 << 16).contains(&cli.precision) {
        return usage(format!("precision {} outside 32..=65536", cli.precision));
    }
    let stamp = Stamp::new(!cli.no_timestamp);
    let perturbed = cli.corrupt_kernel.as_deref().map(parse_corruption).transpose()?;
    let kernels: &dyn KernelSource = match &perturbed {
        Some(p) => p,
        None => &Standard,
    };
    match cli.command {
        Command::Verify {
            suite,
            cases,
            seed,
            k_max,
            p_max,
            tolerance,
            input,
        } => {
            if !(1..=20).contains(&k_max) || p_max < 1 || p_max > 256 {
                return usage("need 1 <= k-max <= 20 and 1 <= p-max <= 256");
            }
            if tolerance.is_some_and(|t| !(t >= 0.0)) {
                return usage("tolerance must be non-negative");
            }
            let input = match input {
                Some(path) => {
                    let text = std::fs::read_to_string(&path)
                        .or_else(|e| usage(format!("{}: {e}", path.display())))?;
                    Some(FiniteSeq::from_json(&text).or_else(|e| usage(e.to_string()))?)
                }
                None => None,
            };
            let cfg = verify::Config {
                cases,
                seed,
                k_max,
                p_max,
                tolerance,
                precision: cli.precision,
                input,
                kernels,
            };
            cmd_verify(suite, &cfg, cli.format, &stamp)
        }
        Command::Skeletons { k, p, count_only } => cmd_skeletons(k, p, count_only, cli.precision, cli.format, &stamp),
        Command::Decompose { k, latex } => cmd_decompose(k, latex, cli.format, &stamp),
        Command::Norms { p, methods } => cmd_norms(&p, &methods, cli.precision, cli.format, &stamp),
        Command::Estimate {
            op,
            p,
            n,
            iters,
            seed,
            curve,
        } => cmd_estimate(&op, p, n, iters, seed, curve, cli.format, &stamp),
    }
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    command: &'static str,
    suite: &'static str,
    passed: bool,
    failures: usize,
    checks: &'a [verify::Check],
}

fn cmd_verify(suite: Suite, cfg: &verify::Config, format: Format, stamp: &Stamp) -> Outcome {
    let checks = verify::run(suite, cfg)?;
    let failures = checks.iter().filter(|c| !c.ok).count();
    match format {
        Format::Json => emit(&output::json(
            &VerifyReport {
                command: "verify",
                suite: suite.name(),
                passed: failures == 0,
                failures,
                checks: &checks,
            },
            stamp,
        )),
        Format::Csv => emit(&output::csv(&checks)),
        Format::Text => {
            let mut s = String::new();
            for c in &checks {
                let verdict = if c.ok { "ok" } else { "FAILED" };
                s.push_str(&format!(
                    "{:<9} {:<16} {:<28} residual {:.3e}  bound {:.3e}  {verdict}\n",
                    c.class.name(),
                    c.suite,
                    c.case,
                    c.residual,
                    c.bound
                ));
            }
            s.push_str(&format!("{} checks, {failures} failed", checks.len()));
            emit(&s);
        }
    }
    Ok(failures == 0)
}

#[derive(Serialize)]
struct SkeletonRow {
    index: usize,
    skeleton: String,
    size: usize,
    depth: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    norm: Option<f64>,
}

fn cmd_skeletons(k: usize, p: Option<String>, count_only: bool, prec: u32, format: Format, stamp: &Stamp) -> Outcome {
    if !(1..=16).contains(&k) {
        return usage(format!("k = {k} outside 1..=16"));
    }
    let p = match p {
        Some(s) => Some(exponent(&s)?),
        None => None,
    };
    if let Some(p) = &p {
        if *p <= k as u32 {
            return usage(format!("building norms need p > k, got p = {p}, k = {k}"));
        }
    }
    if count_only {
        let n = skeleton_count(k)?;
        match format {
            Format::Json => emit(&output::json(&serde_json::json!({ "k": k, "count": n }), stamp)),
            Format::Csv => emit(&format!("k,count\n{k},{n}")),
            Format::Text => emit(&n.to_string()),
        }
        return Ok(true);
    }
    let mut rows = Vec::new();
    for (index, s) in skeletons(k)?.enumerate() {
        let norm = match &p {
            Some(p) => Some(building_norm(p, &s, Branch::Sharp, prec)?.to_f64()),
            None => None,
        };
        rows.push(SkeletonRow {
            index,
            skeleton: s.to_string(),
            size: s.size(),
            depth: s.depth(),
            norm,
        });
    }
    match format {
        Format::Json => emit(&output::json(&serde_json::json!({ "k": k, "skeletons": rows }), stamp)),
        Format::Csv => emit(&output::csv(&rows)),
        Format::Text => {
            let width = rows.iter().map(|r| r.skeleton.len()).max().unwrap_or(0);
            let mut s = String::new();
            for r in &rows {
                s.push_str(&format!("{:<width$}  size {}  depth {}", r.skeleton, r.size, r.depth));
                if let Some(v) = r.norm {
                    s.push_str(&format!("  norm {v:.12}"));
                }
                s.push('\n');
            }
            emit(s.trim_end());
        }
    }
    Ok(true)
}

/// Script-letter rendering of an expansion.
fn latex(e: &Expansion) -> String {
    e.to_string()
        .replace("K[", "\\mathscr{K}[")
        .replace("H[", "\\mathscr{H}[")
        .replace("I[", "\\mathscr{I}[")
        .replace('a', "a_n")
        .replace('*', " \\cdot ")
}

#[derive(Serialize)]
struct TermRow {
    form: &'static str,
    coefficient: i64,
    term: String,
}

fn cmd_decompose(k: usize, as_latex: bool, format: Format, stamp: &Stamp) -> Outcome {
    if !(1..=10).contains(&k) {
        return usage(format!("k = {k} outside 1..=10"));
    }
    let expansion = expand_power(k)?;
    let normal = skeleton_normal_form(k)?;
    let equal = exprs_equal(&expansion, &normal);
    let render = |e: &Expansion| if as_latex { latex(e) } else { e.to_string() };
    match format {
        Format::Json => emit(&output::json(
            &serde_json::json!({
                "k": k,
                "expansion": render(&expansion),
                "skeleton_form": render(&normal),
                "terms": expansion.terms.len(),
                "equal": equal,
            }),
            stamp,
        )),
        Format::Csv => {
            let mut rows = Vec::new();
            for (form, e) in [("expansion", &expansion), ("skeleton_form", &normal)] {
                for t in &e.terms {
                    rows.push(TermRow {
                        form,
                        coefficient: t.coeff,
                        term: if as_latex { latex(&Expansion::new(vec![dhtlab::skeletal::Term::new(1, t.expr.clone())])) } else { t.expr.to_string() },
                    });
                }
            }
            emit(&output::csv(&rows));
        }
        Format::Text => emit(&format!(
            "{}\nskeleton form: {}\nequal: {equal}",
            render(&expansion),
            render(&normal)
        )),
    }
    Ok(equal)
}

fn exponent(s: &str) -> Result<Rational, Failure> {
    let p = hp::parse_rational(s).map_or_else(|| usage(format!("cannot parse exponent {s:?}")), Ok)?;
    if p <= 1 {
        return usage(format!("exponent must exceed 1, got {s}"));
    }
    Ok(p)
}

fn cmd_norms(ps: &[String], methods: &[String], prec: u32, format: Format, stamp: &Stamp) -> Outcome {
    let ps: Vec<Rational> = ps.iter().map(|s| exponent(s.trim())).collect::<Result<_, _>>()?;
    let methods: Vec<Method> = methods
        .iter()
        .map(|m| Method::parse(m.trim()).map_or_else(|| usage(format!("unknown method {m:?}")), Ok))
        .collect::<Result<_, _>>()?;
    let mut rows: Vec<NormRecord> = Vec::new();
    for p in &ps {
        rows.extend(norm_records(p, &methods, prec)?);
    }
    match format {
        Format::Json => emit(&output::json(&serde_json::json!({ "rows": rows }), stamp)),
        Format::Csv => emit(&output::csv(&rows)),
        Format::Text => {
            let mut s = format!(
                "{:<16} {:>6} {:>4} {:>14} {:>14} {:>11}  status\n",
                "method", "p", "k", "bound", "sharp", "residual"
            );
            for r in &rows {
                let k = r.k.map_or("-".to_string(), |k| k.to_string());
                s.push_str(&format!(
                    "{:<16} {:>6} {:>4} {:>14.9} {:>14.9} {:>11.3e}  {}\n",
                    r.method.name(),
                    r.p,
                    k,
                    r.bound,
                    r.sharp,
                    r.residual,
                    match r.status {
                        dhtlab::norms::Status::Proven => "PROVEN",
                        dhtlab::norms::Status::Conjectured => "CONJECTURED",
                    }
                ));
            }
            emit(s.trim_end());
        }
    }
    Ok(true)
}

#[allow(clippy::too_many_arguments)]
fn cmd_estimate(
    op: &str,
    p: f64,
    n: usize,
    iters: usize,
    seed: u64,
    curve: Option<PathBuf>,
    format: Format,
    stamp: &Stamp,
) -> Outcome {
    let kind: OperatorKind = op.parse().or_else(|_| usage(format!("unknown operator {op:?}")))?;
    if !(p > 1.0) || !p.is_finite() {
        return usage(format!("p must exceed 1, got {p}"));
    }
    if n == 0 || n > 1 << 22 || iters == 0 {
        return usage("need 1 <= N <= 2^22 and iters >= 1");
    }
    let w = WindowedOperator::new(kind, n)?;
    let report = power_iterate(&w, p, iters, seed)?;
    if let Some(path) = curve {
        let mut s = String::from("iteration,ratio\n");
        for (i, v) in report.curve.iter().enumerate() {
            s.push_str(&format!("{},{v}\n", i + 1));
        }
        std::fs::write(&path, s).map_err(|e| Failure::Violation(format!("{}: {e}", path.display())))?;
    }
    let body = output::without_seconds(serde_json::to_value(&report).expect("report serializes"));
    match format {
        Format::Json => emit(&output::json(&body, stamp)),
        Format::Csv => {
            let row = serde_json::json!({
                "op": report.op, "p": report.p, "N": report.n, "iters": report.iters, "seed": report.seed,
                "best_ratio": report.best_ratio, "sharp": report.sharp, "gap": report.gap,
            });
            let fields = ["op", "p", "N", "iters", "seed", "best_ratio", "sharp", "gap"];
            let values: Vec<String> = fields
                .iter()
                .map(|f| match &row[*f] {
                    serde_json::Value::String(s) => s.clone(),
                    serde_json::Value::Null => String::new(),
                    v => v.to_string(),
                })
                .collect();
            emit(&format!("{}\n{}", fields.join(","), values.join(",")));
        }
        Format::Text => {
            let mut s = format!(
                "op {}  p {}  N {}  iters {}  seed {}\nbest_ratio {:.12} (start {})",
                report.op,
                report.p,
                report.n,
                report.iters,
                report.seed,
                report.best_ratio,
                report.start.name()
            );
            if let (Some(sharp), Some(gap)) = (report.sharp, report.gap) {
                s.push_str(&format!("\nsharp      {sharp:.12}\ngap        {gap:.12}"));
            }
            if stamp.enabled() {
                s.push_str(&format!("\nseconds    {:.3}", report.seconds));
            }
            emit(&s);
        }
    }
    Ok(true)
}
