//! Command-line front end: evaluate the self-affine family and its
//! parameter derivatives, sample graphs, classify points, print the
//! polynomial/threshold tables, fit box dimensions, and run the Markov
//! simulations. All numeric output is deterministic given the flags
//! (including seeds); CSV floats carry 17 significant digits so values
//! round-trip exactly.

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use okamoto::classifier;
use okamoto::dimension;
use okamoto::evaluator;
use okamoto::hermite;
use okamoto::increments;
use okamoto::ternary::DigitSource;

#[derive(Parser)]
#[command(
    name = "okamoto",
    version,
    about = "Self-affine function family: evaluation, classification, dimension"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate F_a (k = 0) or the k-th parameter derivative at a point
    Eval {
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long)]
        a: f64,
        /// Point spec: F:..., P:pre|period, R:p/q, or G:family:params
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Sample the depth-n grid values as CSV (3^n + 1 rows)
    Graph {
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Classify the derivative behavior of M_{k,a} at a point
    Classify {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        a: f64,
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 16384)]
        horizon: u64,
    },
    /// Integer coefficients, roots, and scaled thresholds of q_k
    Qpoly {
        #[arg(long)]
        k: u32,
        /// Optional parameter for the scaled thresholds t_i sqrt(2a(1-2a))
        #[arg(long)]
        a: Option<f64>,
    },
    /// The special constants of the parameter axis
    Consts,
    /// Box-counting dimension fit over scales n = 4..=nmax
    Boxdim {
        #[arg(long, default_value_t = 0)]
        k: u32,
        #[arg(long)]
        a: f64,
        #[arg(long, default_value_t = 9)]
        nmax: u32,
        #[arg(long, default_value_t = 3)]
        m: u32,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Markov digit model summary, optionally with excursion-cycle checks
    Markov {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        p: f64,
        /// Number of excursion cycles to simulate for the empirical checks
        #[arg(long, default_value_t = 0)]
        cycles: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Law-of-the-iterated-logarithm simulation of the digit chain
    Lil {
        #[arg(long)]
        a: f64,
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1_000_000)]
        steps: u64,
        #[arg(long, default_value_t = 20)]
        trials: u32,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Dimension lower/upper bound curves on a grid, as CSV
    Curve {
        #[arg(long, default_value_t = 0.125)]
        amin: f64,
        #[arg(long, default_value_t = 0.375)]
        amax: f64,
        #[arg(long, default_value_t = 100)]
        points: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Failures mapped to exit codes: validation errors exit 2 with a
/// machine-readable JSON object on stderr, internal failures exit 1.
enum CliError {
    Validation { code: &'static str, message: String },
    Internal(String),
}

impl CliError {
    fn validation(code: &'static str, err: impl std::fmt::Display) -> Self {
        CliError::Validation {
            code,
            message: err.to_string(),
        }
    }
}

/// 17-significant-digit decimal form; round-trips f64 exactly.
fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_point(spec: &str) -> Result<DigitSource, CliError> {
    spec.parse()
        .map_err(|e: okamoto::ternary::TernaryError| CliError::validation("bad-point-spec", e))
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, content)
            .map_err(|e| CliError::Internal(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Eval { k, a, x, tol, format } => {
            let params = evaluator::EvalParams::new(a, k, tol)
                .map_err(|e| CliError::validation("invalid-param", e))?;
            let point = parse_point(&x)?;
            let result = if params.k == 0 {
                evaluator::okamoto_f(params.a, &point, params.tol)
            } else {
                evaluator::partial_m(params.k, params.a, &point, params.tol)
            };
            let result = result.map_err(|e| match e {
                evaluator::EvalError::InvalidParam { .. } => {
                    CliError::validation("invalid-param", e)
                }
                evaluator::EvalError::ToleranceNotReached { .. } => {
                    CliError::Internal(e.to_string())
                }
            })?;
            match format {
                Format::Json => println!(
                    "{}",
                    json!({
                        "k": k, "a": a, "x": x,
                        "value": result.value,
                        "err_bound": result.err_bound,
                        "terms": result.terms,
                        "exact": result.exact,
                    })
                ),
                Format::Csv => {
                    println!("value,err_bound,terms,exact");
                    println!(
                        "{},{},{},{}",
                        fmt17(result.value),
                        fmt17(result.err_bound),
                        result.terms,
                        result.exact
                    );
                }
            }
            Ok(())
        }
        Command::Graph { k, a, n, out } => {
            if !(1..=12).contains(&n) {
                return Err(CliError::validation(
                    "invalid-param",
                    format!("graph depth must satisfy 1 <= n <= 12, got {n}"),
                ));
            }
            let values = increments::rational_profile(k, a, n)
                .map_err(|e| CliError::validation("invalid-param", e))?;
            let pow = 3f64.powi(n as i32);
            let mut csv = String::from("x,value\n");
            for (j, v) in values.iter().enumerate() {
                csv.push_str(&fmt17(j as f64 / pow));
                csv.push(',');
                csv.push_str(&fmt17(*v));
                csv.push('\n');
            }
            emit(&out, &csv)
        }
        Command::Classify { k, a, x, horizon } => {
            let point = parse_point(&x)?;
            let class = classifier::classify(k, a, &point, horizon)
                .map_err(|e| CliError::validation("invalid-param", e))?;
            let certainty = if class.exactness { "proved" } else { "consistent-with-window" };
            println!(
                "{}",
                json!({
                    "k": k, "a": a, "x": x,
                    "verdict": class.verdict,
                    "reason": class.reason,
                    "exactness": class.exactness,
                    "certainty": certainty,
                    "stats": class.stats,
                })
            );
            Ok(())
        }
        Command::Qpoly { k, a } => {
            let poly = hermite::q_poly(k).map_err(|e| CliError::validation("invalid-param", e))?;
            let roots = hermite::q_roots(k).map_err(|e| CliError::Internal(e.to_string()))?;
            let coefficients: Vec<String> = poly.coeffs().iter().map(|c| c.to_string()).collect();
            let mut output = json!({
                "k": k,
                "coefficients": coefficients,
                "roots": roots,
            });
            if let Some(a) = a {
                let thresholds = hermite::thresholds(k, a)
                    .map_err(|e| CliError::validation("invalid-param", e))?;
                output["a"] = json!(a);
                output["thresholds"] = json!(thresholds.scaled);
            }
            println!("{output}");
            Ok(())
        }
        Command::Consts => {
            let c = classifier::special_constants();
            println!(
                "{}",
                json!({ "a0": c.a0, "a_hat": c.a_hat, "inv_golden": c.inv_golden })
            );
            Ok(())
        }
        Command::Boxdim { k, a, nmax, m, format, out } => {
            let report = dimension::dimension_report(k, a, 4, nmax, m)
                .map_err(|e| CliError::validation("invalid-param", e))?;
            match format {
                Format::Json => {
                    println!(
                        "{}",
                        serde_json::to_string(&report)
                            .map_err(|e| CliError::Internal(e.to_string()))?
                    );
                    Ok(())
                }
                Format::Csv => {
                    let mut csv = String::from("n,count,log3_count\n");
                    for i in 0..report.scales.len() {
                        csv.push_str(&format!(
                            "{},{},{}\n",
                            report.scales[i],
                            report.counts[i],
                            fmt17(report.log3_counts[i])
                        ));
                    }
                    emit(&out, &csv)
                }
            }
        }
        Command::Markov { a, p, cycles, seed } => {
            let model = dimension::markov_model(a, p)
                .map_err(|e| CliError::validation("invalid-param", e))?;
            let mut output =
                serde_json::to_value(&model).map_err(|e| CliError::Internal(e.to_string()))?;
            if cycles > 0 {
                let checks = dimension::cycle_checks(a, p, cycles, seed)
                    .map_err(|e| CliError::validation("invalid-param", e))?;
                output["cycle_checks"] =
                    serde_json::to_value(&checks).map_err(|e| CliError::Internal(e.to_string()))?;
            }
            println!("{output}");
            Ok(())
        }
        Command::Lil { a, p, steps, trials, seed } => {
            let report = dimension::lil_simulate(a, p, steps, trials, seed)
                .map_err(|e| CliError::validation("invalid-param", e))?;
            println!(
                "{}",
                serde_json::to_string(&report).map_err(|e| CliError::Internal(e.to_string()))?
            );
            Ok(())
        }
        Command::Curve { amin, amax, points, out } => {
            if points < 2 {
                return Err(CliError::validation(
                    "invalid-param",
                    format!("need at least 2 grid points, got {points}"),
                ));
            }
            let grid: Vec<f64> = (0..points)
                .map(|i| amin + (amax - amin) * i as f64 / (points - 1) as f64)
                .collect();
            let rows = dimension::dim_lower_curve(&grid)
                .map_err(|e| CliError::validation("invalid-param", e))?;
            let mut csv = String::from("a,h_tilde,h_upper\n");
            for row in rows {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt17(row.a),
                    fmt17(row.h_tilde),
                    fmt17(row.h_upper)
                ));
            }
            emit(&out, &csv)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation { code, message }) => {
            eprintln!("{}", json!({ "error": code, "message": message }));
            ExitCode::from(2)
        }
        Err(CliError::Internal(message)) => {
            eprintln!("{}", json!({ "error": "internal", "message": message }));
            ExitCode::from(1)
        }
    }
}
