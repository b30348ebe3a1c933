//! Command-line front end: orchestrates the verifications with
//! reproducible configuration and machine-readable output.
//!
//! Every run prints a JSON object with the fully resolved configuration in
//! a `config` header and the result under `report`. Exit status: 0 when
//! all requested checks pass, 1 when a check fails its tolerance, 2 on
//! configuration errors. `--emit-csv PATH` writes tabular data with
//! 17-significant-digit floats. `QKMIRROR_TOL` overrides the default
//! tolerance when `--tol` is absent. `--parallel N` fans independent cells
//! out to N workers; results are assembled in input order, so output is
//! identical across thread counts.

use crate::algebra::{build_algebra, element_json_exact, element_json_float};
use crate::confluence::{
    spiral_confluence_jfun, spiral_confluence_oscillatory, stripped_limit_table, ConfluenceTable,
};
use crate::error::Error;
use crate::modelfile::{model_from_inline, model_from_toml, parse_class, parse_kword};
use crate::oscillatory::{compare_coh, compare_kth, q_mellin_factor_check, ComparisonReport};
use crate::qfun::{self, QParam};
use crate::scalar::{parse_rational, rational_string, Rational};
use crate::series::{self, i_coh, i_kth, ode_residual_coh, qde_residual, residual_is_zero};
use crate::toric::{self, validate, RankTwoModel};
use crate::Result;
use clap::{Args, Parser, Subcommand};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::Serialize;
use serde_json::json;

#[derive(Debug, Parser)]
#[command(
    name = "qkmirror",
    about = "Verification toolkit for toric mirror-symmetry identities in quantum K-theory",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct ModelArgs {
    /// Path to a TOML model file (matrix or family form).
    #[arg(long)]
    model: Option<String>,
    /// Inline family spec: "N=3,a=[1]", "N=2,a=1,0", "P^2".
    #[arg(long)]
    family: Option<String>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<RankTwoModel> {
        match (&self.model, &self.family) {
            (Some(path), None) => {
                let text = std::fs::read_to_string(path)?;
                model_from_toml(&text)
            }
            (None, Some(spec)) => model_from_inline(spec),
            _ => Err(Error::Config(
                "provide exactly one of --model, --family".into(),
            )),
        }
    }
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Absolute/relative tolerance for the requested check.
    #[arg(long)]
    tol: Option<f64>,
    /// Write tabular data (parameters, lhs, rhs, relerr) to this CSV path.
    #[arg(long, value_name = "PATH")]
    emit_csv: Option<String>,
    /// Worker count for independent cells (default 1: reproducibility-first).
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Seed for randomized property suites.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Validate a moment matrix: compact, smooth, Fano, c1.
    Validate {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Carry a rank-2 matrix to the normal form (N, a).
    Normalize {
        #[command(flatten)]
        model: ModelArgs,
    },
    /// Intersection number of a polynomial class by iterated residues.
    Intersect {
        #[command(flatten)]
        model: ModelArgs,
        /// Class like "p1^2*p2" or "p2^2 - p1*p2".
        #[arg(long)]
        class: String,
    },
    /// Euler pairing chi(E, F) of two K-words.
    Euler {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value = "1")]
        e: String,
        #[arg(long, default_value = "1")]
        f: String,
    },
    /// Emit I-function coefficients as JSON.
    Ifunction {
        #[command(flatten)]
        model: ModelArgs,
        /// "coh" or "kth".
        #[arg(long)]
        kind: String,
        #[arg(long, default_value_t = 8)]
        degree: u32,
        /// z for coh (rational "5/2" = exact, decimal "2.0" = numeric).
        #[arg(long)]
        z: Option<String>,
        /// q for kth (rational = exact, decimal = numeric).
        #[arg(long)]
        q: Option<String>,
    },
    /// Exact q-difference-equation residual check of the K-theoretic I.
    QdeCheck {
        #[command(flatten)]
        model: ModelArgs,
        /// Exact rational q like "5/2" (repeatable).
        #[arg(long, default_values_t = [String::from("2"), String::from("3"), String::from("5/2")])]
        q: Vec<String>,
        #[arg(long, default_value_t = 8)]
        degree: u32,
    },
    /// Exact differential-equation residual check of the cohomological I.
    OdeCheck {
        #[command(flatten)]
        model: ModelArgs,
        /// Exact rational z (repeatable).
        #[arg(long, default_values_t = [String::from("1"), String::from("2")])]
        z: Vec<String>,
        #[arg(long, default_value_t = 8)]
        degree: u32,
    },
    /// K-theoretic comparison: Jackson integral vs q-gamma-class pairing.
    CompareKth {
        #[command(flatten)]
        model: ModelArgs,
        /// Base q > 1: a rational like "2" or "3/2" selects the exact
        /// cancellation-free pairing path; a decimal like "2.0" the float
        /// path.
        #[arg(long)]
        q: String,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        b1: i64,
        #[arg(long, default_value_t = 0, allow_negative_numbers = true)]
        b2: i64,
        #[arg(long, default_value_t = 12)]
        degree: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Classical comparison: oscillatory integral vs Gamma-class pairing.
    CompareCoh {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1.0)]
        z: f64,
        #[arg(long = "Q1", default_value_t = 1.0)]
        q1: f64,
        #[arg(long = "Q2", default_value_t = 1.0)]
        q2: f64,
        #[arg(long, default_value_t = 14)]
        degree: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// q-Mellin factorization check at a strip point or random points.
    QmellinCheck {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        p1: Option<f64>,
        #[arg(long)]
        p2: Option<f64>,
        /// Check this many random strip points instead of a single one.
        #[arg(long)]
        random: Option<usize>,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Confluence error tables (series or spiral mode), CSV-friendly.
    Confluence {
        #[command(flatten)]
        model: ModelArgs,
        /// "series" or "spiral".
        #[arg(long, default_value = "series")]
        mode: String,
        #[arg(long = "Q1", default_value_t = 1.0)]
        q1: f64,
        #[arg(long = "Q2", default_value_t = 1.0)]
        q2: f64,
        #[arg(long, default_value_t = 6)]
        degree: u32,
        /// Number of q-steps (series: q = 1 + 10^{-1 - s/2}; spiral: k-list).
        #[arg(long, default_value_t = 6)]
        steps: u32,
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Spot-evaluate a scalar q-special function.
    Qfun {
        #[command(subcommand)]
        action: QfunAction,
    },
}

#[derive(Debug, Subcommand)]
enum QfunAction {
    /// Evaluate by name: gamma_q, gamma_qinv, gamma, gamma_q_c, q_exp_E,
    /// theta, q_log, pochhammer, jackson_gamma_rep.
    Eval {
        #[arg(long = "fn")]
        function: String,
        #[arg(long)]
        q: Option<f64>,
        /// Main argument (t, z or x depending on the function).
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

/// Outcome of a CLI run: exit status and the full stdout payload.
#[derive(Debug)]
pub struct CliOutcome {
    pub exit: i32,
    pub stdout: String,
}

/// Resolved-run header embedded in every output.
#[derive(Debug, Serialize)]
struct RunConfig {
    command: String,
    model: Option<String>,
    parameters: serde_json::Value,
    tolerance: Option<f64>,
    seed: Option<u64>,
    parallel: Option<usize>,
}

fn default_tol(fallback: f64, requested: Option<f64>) -> f64 {
    requested
        .or_else(|| {
            std::env::var("QKMIRROR_TOL")
                .ok()
                .and_then(|s| s.parse().ok())
        })
        .unwrap_or(fallback)
}

/// Run the CLI on the given argument vector (excluding the binary name is
/// fine; clap handles both). Never panics on bad input: configuration
/// problems exit 2, failed checks exit 1.
pub fn run(args: &[String]) -> CliOutcome {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            // clap renders --help/--version through this path as well
            let msg = e.to_string();
            let code = if e.use_stderr() { 2 } else { 0 };
            return CliOutcome {
                exit: code,
                stdout: msg,
            };
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => outcome,
        Err(e) => CliOutcome {
            exit: 2,
            stdout: format!("{{\"error\": \"{e}\"}}\n"),
        },
    }
}

fn envelope(config: RunConfig, report: serde_json::Value) -> String {
    let mut out = serde_json::to_string_pretty(&json!({
        "config": config,
        "report": report,
    }))
    .expect("serializable");
    out.push('\n');
    out
}

fn dispatch(command: Command) -> Result<CliOutcome> {
    match command {
        Command::Validate { model } => {
            let data_model = model.resolve()?;
            let report = validate(&data_model.to_moment_data())?;
            let ok = report.compact && report.smooth;
            let config = RunConfig {
                command: "validate".into(),
                model: Some(data_model.label()),
                parameters: json!({}),
                tolerance: None,
                seed: None,
                parallel: None,
            };
            Ok(CliOutcome {
                exit: i32::from(!ok),
                stdout: envelope(config, serde_json::to_value(&report).unwrap()),
            })
        }
        Command::Normalize { model } => {
            let path_model = match (&model.model, &model.family) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(path)?;
                    // normalize against the raw matrix to expose the transform
                    let file: toml::Value = toml::from_str(&text)
                        .map_err(|e| Error::Config(format!("model file: {e}")))?;
                    if let Some(matrix) = file.get("matrix") {
                        let matrix: Vec<Vec<i64>> = matrix
                            .clone()
                            .try_into()
                            .map_err(|e| Error::Config(format!("matrix: {e}")))?;
                        let data = toric::MomentData::new(matrix, toric::Chamber::PositiveOrthant)?;
                        Some(toric::normalize_rank2(&data)?)
                    } else {
                        None
                    }
                }
                _ => None,
            };
            let report = match path_model {
                Some(r) => r,
                None => {
                    let m = model.resolve()?;
                    toric::normalize_rank2(&m.to_moment_data())?
                }
            };
            let config = RunConfig {
                command: "normalize".into(),
                model: Some(report.model.label()),
                parameters: json!({}),
                tolerance: None,
                seed: None,
                parallel: None,
            };
            Ok(CliOutcome {
                exit: 0,
                stdout: envelope(config, serde_json::to_value(&report).unwrap()),
            })
        }
        Command::Intersect { model, class } => {
            let m = model.resolve()?;
            let poly = parse_class(&class)?;
            let value = toric::integrate_poly(&m, &poly);
            let config = RunConfig {
                command: "intersect".into(),
                model: Some(m.label()),
                parameters: json!({ "class": class }),
                tolerance: None,
                seed: None,
                parallel: None,
            };
            Ok(CliOutcome {
                exit: 0,
                stdout: envelope(config, json!({ "value": rational_string(&value) })),
            })
        }
        Command::Euler { model, e, f } => {
            let m = model.resolve()?;
            let we = parse_kword(&e)?;
            let wf = parse_kword(&f)?;
            let value = toric::euler_pairing(&m, &we, &wf)?;
            let config = RunConfig {
                command: "euler".into(),
                model: Some(m.label()),
                parameters: json!({ "e": e, "f": f }),
                tolerance: None,
                seed: None,
                parallel: None,
            };
            Ok(CliOutcome {
                exit: 0,
                stdout: envelope(config, json!({ "value": rational_string(&value) })),
            })
        }
        Command::Ifunction {
            model,
            kind,
            degree,
            z,
            q,
        } => {
            let m = model.resolve()?;
            let (report, param) = ifunction_json(&m, &kind, degree, z.as_deref(), q.as_deref())?;
            let config = RunConfig {
                command: "ifunction".into(),
                model: Some(m.label()),
                parameters: param,
                tolerance: None,
                seed: None,
                parallel: None,
            };
            Ok(CliOutcome {
                exit: 0,
                stdout: envelope(config, report),
            })
        }
        Command::QdeCheck { model, q, degree } => {
            let m = model.resolve()?;
            let algebra = build_algebra::<Rational>(&m)?;
            let mut failures = Vec::new();
            let mut q_labels = Vec::new();
            for q_text in &q {
                let qv = parse_rational(q_text)
                    .ok_or_else(|| Error::Config(format!("exact rational q required: {q_text}")))?;
                q_labels.push(rational_string(&qv));
                let series = i_kth(&algebra, degree, qv)?;
                for i in 0..m.rank() {
                    let residual = qde_residual(&series, i)?;
                    if !residual_is_zero(&residual, i) {
                        failures.push(json!({ "q": q_text, "operator": i + 1 }));
                    }
                }
            }
            let pass = failures.is_empty();
            let config = RunConfig {
                command: "qde-check".into(),
                model: Some(m.label()),
                parameters: json!({ "q": q_labels, "degree": degree }),
                tolerance: None,
                seed: None,
                parallel: None,
            };
            Ok(CliOutcome {
                exit: i32::from(!pass),
                stdout: envelope(config, json!({ "exact_zero": pass, "failures": failures })),
            })
        }
        Command::OdeCheck { model, z, degree } => {
            let m = model.resolve()?;
            let algebra = build_algebra::<Rational>(&m)?;
            let mut failures = Vec::new();
            let mut z_labels = Vec::new();
            for z_text in &z {
                let zv = parse_rational(z_text)
                    .ok_or_else(|| Error::Config(format!("exact rational z required: {z_text}")))?;
                z_labels.push(rational_string(&zv));
                let series = i_coh(&algebra, degree, zv)?;
                for i in 0..m.rank() {
                    let residual = ode_residual_coh(&series, i)?;
                    if !residual_is_zero(&residual, i) {
                        failures.push(json!({ "z": z_text, "operator": i + 1 }));
                    }
                }
            }
            let pass = failures.is_empty();
            let config = RunConfig {
                command: "ode-check".into(),
                model: Some(m.label()),
                parameters: json!({ "z": z_labels, "degree": degree }),
                tolerance: None,
                seed: None,
                parallel: None,
            };
            Ok(CliOutcome {
                exit: i32::from(!pass),
                stdout: envelope(config, json!({ "exact_zero": pass, "failures": failures })),
            })
        }
        Command::CompareKth {
            model,
            q,
            b1,
            b2,
            degree,
            common,
        } => {
            let m = model.resolve()?;
            let tol = default_tol(1e-8, common.tol);
            let b = spiral_exponents(&m, b1, b2);
            let exact_q = if q.contains('.') {
                None
            } else {
                parse_rational(&q)
            };
            let report = match exact_q {
                Some(qr) => {
                    let mut ctx = crate::oscillatory::KthPairingContext::new(&m, &qr)?;
                    ctx.compare(&b, degree, tol)?
                }
                None => {
                    let qv: f64 = q
                        .parse()
                        .map_err(|_| Error::Config(format!("bad q: {q}")))?;
                    compare_kth(&m, qv, &b, degree, tol)?
                }
            };
            if let Some(path) = &common.emit_csv {
                let row = format!(
                    "model,q,b1,b2,lhs,rhs,relerr\n{},{q},{b1},{b2},{:.16e},{:.16e},{:.16e}\n",
                    m.label(),
                    report.lhs,
                    report.rhs,
                    report.rel_err
                );
                std::fs::write(path, row)?;
            }
            let config = RunConfig {
                command: "compare-kth".into(),
                model: Some(m.label()),
                parameters: json!({ "q": q, "b1": b1, "b2": b2, "degree": degree }),
                tolerance: Some(tol),
                seed: None,
                parallel: Some(common.parallel),
            };
            Ok(CliOutcome {
                exit: i32::from(!report.pass),
                stdout: envelope(config, serde_json::to_value(&report).unwrap()),
            })
        }
        Command::CompareCoh {
            model,
            z,
            q1,
            q2,
            degree,
            common,
        } => {
            let m = model.resolve()?;
            let tol = default_tol(1e-6, common.tol);
            let q_values = novikov_values(&m, q1, q2);
            let report = compare_coh(&m, z, &q_values, degree, tol)?;
            if let Some(path) = &common.emit_csv {
                let row = format!(
                    "model,z,Q1,Q2,lhs,rhs,relerr\n{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                    m.label(),
                    z,
                    q1,
                    q2,
                    report.lhs,
                    report.rhs,
                    report.rel_err
                );
                std::fs::write(path, row)?;
            }
            let config = RunConfig {
                command: "compare-coh".into(),
                model: Some(m.label()),
                parameters: json!({ "z": z, "Q1": q1, "Q2": q2, "degree": degree }),
                tolerance: Some(tol),
                seed: None,
                parallel: Some(common.parallel),
            };
            Ok(CliOutcome {
                exit: i32::from(!report.pass),
                stdout: envelope(config, serde_json::to_value(&report).unwrap()),
            })
        }
        Command::QmellinCheck {
            model,
            q,
            p1,
            p2,
            random,
            common,
        } => {
            let m = model.resolve()?;
            let tol = default_tol(1e-10, common.tol);
            let qp = QParam::above_one(q)?;
            let points: Vec<Vec<f64>> = match random {
                Some(count) => random_strip_points(&m, count, common.seed),
                None => {
                    let p1 = p1.ok_or_else(|| Error::Config("need --p1 (or --random)".into()))?;
                    match m.rank() {
                        1 => vec![vec![p1]],
                        _ => {
                            let p2 =
                                p2.ok_or_else(|| Error::Config("rank-2 models need --p2".into()))?;
                            vec![vec![p1, p2]]
                        }
                    }
                }
            };
            let reports = parallel_map(&points, common.parallel, |p| {
                q_mellin_factor_check(&m, qp, p, tol)
            });
            let mut rows = Vec::new();
            let mut pass = true;
            for (p, rep) in points.iter().zip(reports) {
                let rep = rep?;
                pass &= rep.pass;
                rows.push(json!({
                    "p": p,
                    "lhs": rep.lhs,
                    "rhs": rep.rhs,
                    "rel_err": rep.rel_err,
                    "pass": rep.pass,
                }));
            }
            if let Some(path) = &common.emit_csv {
                let mut csv = String::from("p1,p2,lhs,rhs,relerr\n");
                for row in &rows {
                    let p = row["p"].as_array().unwrap();
                    csv.push_str(&format!(
                        "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                        p[0].as_f64().unwrap(),
                        p.get(1).and_then(|v| v.as_f64()).unwrap_or(0.0),
                        row["lhs"].as_f64().unwrap(),
                        row["rhs"].as_f64().unwrap(),
                        row["rel_err"].as_f64().unwrap()
                    ));
                }
                std::fs::write(path, csv)?;
            }
            let config = RunConfig {
                command: "qmellin-check".into(),
                model: Some(m.label()),
                parameters: json!({ "q": q, "points": points.len() }),
                tolerance: Some(tol),
                seed: Some(common.seed),
                parallel: Some(common.parallel),
            };
            Ok(CliOutcome {
                exit: i32::from(!pass),
                stdout: envelope(config, json!({ "pass": pass, "rows": rows })),
            })
        }
        Command::Confluence {
            model,
            mode,
            q1,
            q2,
            degree,
            steps,
            common,
        } => {
            let m = model.resolve()?;
            let q_targets = novikov_values(&m, q1, q2);
            let table = match mode.as_str() {
                "series" => {
                    let q_list: Vec<f64> = (0..steps)
                        .map(|s| 1.0 + 10f64.powf(-1.0 - s as f64 / 2.0))
                        .collect();
                    stripped_limit_table(&m, degree, &q_list)?
                }
                "spiral" => {
                    let k_list: Vec<u32> = (1..=steps).map(|s| 5 * s + 5).collect();
                    let jfun = spiral_confluence_jfun(&m, &q_targets, &k_list, 2 * degree)?;
                    let mut combined = jfun;
                    if m.dim() <= 2 {
                        let osc = spiral_confluence_oscillatory(&m, &q_targets, &k_list)?;
                        combined.rows.extend(osc.rows);
                    }
                    combined
                }
                other => return Err(Error::Config(format!("unknown confluence mode: {other}"))),
            };
            let csv = confluence_csv(&table);
            if let Some(path) = &common.emit_csv {
                std::fs::write(path, &csv)?;
            }
            let max_err = table.rows.iter().map(|r| r.error).fold(0.0f64, f64::max);
            let config = RunConfig {
                command: "confluence".into(),
                model: Some(m.label()),
                parameters: json!({
                    "mode": mode, "Q1": q1, "Q2": q2, "degree": degree, "steps": steps,
                }),
                tolerance: common.tol,
                seed: None,
                parallel: Some(common.parallel),
            };
            let report = json!({
                "rows": table.rows.len(),
                "max_error": max_err,
                "csv": csv,
            });
            Ok(CliOutcome {
                exit: 0,
                stdout: envelope(config, report),
            })
        }
        Command::Qfun { action } => qfun_eval(action),
    }
}

/// b-exponent vector sized to the rank.
fn spiral_exponents(model: &RankTwoModel, b1: i64, b2: i64) -> Vec<i64> {
    match model.rank() {
        1 => vec![b1],
        _ => vec![b1, b2],
    }
}

/// Novikov value vector sized to the rank.
fn novikov_values(model: &RankTwoModel, q1: f64, q2: f64) -> Vec<f64> {
    match model.rank() {
        1 => vec![q1],
        _ => vec![q1, q2],
    }
}

/// Deterministic strip points for the q-Mellin suite.
fn random_strip_points(model: &RankTwoModel, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let a_max = model.a().iter().copied().max().unwrap_or(0) as f64;
    (0..count)
        .map(|_| {
            let p1: f64 = rng.gen_range(0.1..2.0);
            match model.rank() {
                1 => vec![p1],
                _ => {
                    let p2 = a_max * p1 + rng.gen_range(0.1..2.0);
                    vec![p1, p2]
                }
            }
        })
        .collect()
}

/// Ordered map over independent work items with a fixed worker count.
pub fn parallel_map<T: Sync, U: Send>(
    items: &[T],
    workers: usize,
    f: impl Fn(&T) -> U + Sync,
) -> Vec<U> {
    let workers = workers.max(1).min(items.len().max(1));
    if workers == 1 {
        return items.iter().map(&f).collect();
    }
    let mut slots: Vec<Option<U>> = Vec::with_capacity(items.len());
    slots.resize_with(items.len(), || None);
    let next = std::sync::atomic::AtomicUsize::new(0);
    let slots_ref = std::sync::Mutex::new(&mut slots);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                if i >= items.len() {
                    break;
                }
                let value = f(&items[i]);
                slots_ref.lock().unwrap()[i] = Some(value);
            });
        }
    });
    slots
        .into_iter()
        .map(|v| v.expect("worker filled slot"))
        .collect()
}

fn ifunction_json(
    model: &RankTwoModel,
    kind: &str,
    degree: u32,
    z: Option<&str>,
    q: Option<&str>,
) -> Result<(serde_json::Value, serde_json::Value)> {
    let is_exact = |s: &str| !s.contains('.');
    let key = |d: &series::Deg| format!("{},{}", d.d1, d.d2);
    match kind {
        "coh" => {
            let z_text = z.ok_or_else(|| Error::Config("ifunction coh needs --z".into()))?;
            if is_exact(z_text) {
                let zv = parse_rational(z_text)
                    .ok_or_else(|| Error::Config(format!("bad z: {z_text}")))?;
                let algebra = build_algebra::<Rational>(model)?;
                let s = i_coh(&algebra, degree, zv.clone())?;
                let coefficients: serde_json::Map<String, serde_json::Value> = s
                    .terms()
                    .iter()
                    .map(|(d, c)| (key(d), element_json_exact(c)))
                    .collect();
                Ok((
                    json!({
                        "model": model.label(), "kind": "coh", "D": degree,
                        "z": rational_string(&zv), "coefficients": coefficients,
                    }),
                    json!({ "kind": "coh", "z": z_text, "degree": degree, "mode": "exact" }),
                ))
            } else {
                let zv: f64 = z_text
                    .parse()
                    .map_err(|_| Error::Config(format!("bad z: {z_text}")))?;
                let algebra = build_algebra::<f64>(model)?;
                let s = i_coh(&algebra, degree, zv)?;
                let coefficients: serde_json::Map<String, serde_json::Value> = s
                    .terms()
                    .iter()
                    .map(|(d, c)| (key(d), element_json_float(c)))
                    .collect();
                Ok((
                    json!({
                        "model": model.label(), "kind": "coh", "D": degree,
                        "z": zv, "coefficients": coefficients,
                    }),
                    json!({ "kind": "coh", "z": z_text, "degree": degree, "mode": "numeric" }),
                ))
            }
        }
        "kth" => {
            let q_text = q.ok_or_else(|| Error::Config("ifunction kth needs --q".into()))?;
            if is_exact(q_text) {
                let qv = parse_rational(q_text)
                    .ok_or_else(|| Error::Config(format!("bad q: {q_text}")))?;
                let algebra = build_algebra::<Rational>(model)?;
                let s = i_kth(&algebra, degree, qv.clone())?;
                let coefficients: serde_json::Map<String, serde_json::Value> = s
                    .terms()
                    .iter()
                    .map(|(d, c)| (key(d), element_json_exact(c)))
                    .collect();
                Ok((
                    json!({
                        "model": model.label(), "kind": "kth", "D": degree,
                        "q": rational_string(&qv), "coefficients": coefficients,
                    }),
                    json!({ "kind": "kth", "q": q_text, "degree": degree, "mode": "exact" }),
                ))
            } else {
                let qv: f64 = q_text
                    .parse()
                    .map_err(|_| Error::Config(format!("bad q: {q_text}")))?;
                let algebra = build_algebra::<f64>(model)?;
                let s = i_kth(&algebra, degree, qv)?;
                let coefficients: serde_json::Map<String, serde_json::Value> = s
                    .terms()
                    .iter()
                    .map(|(d, c)| (key(d), element_json_float(c)))
                    .collect();
                Ok((
                    json!({
                        "model": model.label(), "kind": "kth", "D": degree,
                        "q": qv, "coefficients": coefficients,
                    }),
                    json!({ "kind": "kth", "q": q_text, "degree": degree, "mode": "numeric" }),
                ))
            }
        }
        other => Err(Error::Config(format!("unknown ifunction kind: {other}"))),
    }
}

fn qfun_eval(action: QfunAction) -> Result<CliOutcome> {
    let QfunAction::Eval {
        function,
        q,
        x,
        tol,
    } = action;
    let need_q = || q.ok_or_else(|| Error::Config(format!("{function} needs --q")));
    let (value, tail): (f64, Option<f64>) = match function.as_str() {
        "gamma_q" => (qfun::gamma_q(x, QParam::above_one(need_q()?)?)?, None),
        "gamma_qinv" => (qfun::gamma_qinv(x, QParam::above_one(need_q()?)?)?, None),
        "gamma" => (qfun::classical_gamma(x)?, None),
        "gamma_q_c" => (qfun::gamma_q_c(x, QParam::below_one(need_q()?)?)?, None),
        "q_exp_E" => {
            let (v, tb) = qfun::q_exp_e(x, QParam::above_one(need_q()?)?, tol)?;
            (v, Some(tb.achieved))
        }
        "theta" => {
            let (v, tb) = qfun::theta(x, QParam::above_one(need_q()?)?, tol)?;
            (v, Some(tb.achieved))
        }
        "q_log" => (qfun::q_log(x, QParam::above_one(need_q()?)?)?, None),
        "pochhammer" => {
            let (v, tb) = qfun::pochhammer_inf(x, QParam::below_one(need_q()?)?, tol)?;
            (v, Some(tb.achieved))
        }
        other => return Err(Error::Config(format!("unknown qfun function: {other}"))),
    };
    let config = RunConfig {
        command: "qfun eval".into(),
        model: None,
        parameters: json!({ "fn": function, "q": q, "x": x, "tol": tol }),
        tolerance: Some(tol),
        seed: None,
        parallel: None,
    };
    Ok(CliOutcome {
        exit: 0,
        stdout: envelope(config, json!({ "value": value, "tail": tail })),
    })
}

/// CSV rendering of a confluence table: (q, k, d, basis, value, target, error).
pub fn confluence_csv(table: &ConfluenceTable) -> String {
    let mut out = String::from("q,k,d1,d2,basis,value,target,error\n");
    for row in &table.rows {
        out.push_str(&format!(
            "{:.16e},{},{},{},{},{:.16e},{:.16e},{:.16e}\n",
            row.q,
            row.k.map(|k| k.to_string()).unwrap_or_default(),
            row.d1.map(|d| d.to_string()).unwrap_or_default(),
            row.d2.map(|d| d.to_string()).unwrap_or_default(),
            row.basis,
            row.value,
            row.target,
            row.error
        ));
    }
    out
}

/// CSV rendering of a comparison report row for grid sweeps.
pub fn comparison_csv_row(params: &str, report: &ComparisonReport) -> String {
    format!(
        "{params},{:.16e},{:.16e},{:.16e}\n",
        report.lhs, report.rhs, report.rel_err
    )
}
