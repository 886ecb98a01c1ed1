//! Command-line front end. Every command is a pure function of its flags and
//! input files; results go to `--out` (or standard output) and a one-line
//! summary is printed.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input, 3 solver did not
//! converge (the artifact is still written).

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::capacity::{capacity_primal_check, equilibrium, EquilibriumSummary, PrimalReport, DEFAULT_MAX_ITER, DEFAULT_TOL};
use crate::construct::{self, nested_compacts, nested_from_radii, DEFAULT_C_CONST};
use crate::error::Error;
use crate::grid::GridSet;
use crate::io::{csv_float, csv_string, emit, to_json_string};
use crate::kernels::{sample_h, tilde_h_series, verify_b_conv_h, KernelTable};
use crate::series::{self, vec_norm, CoeffArray};
use crate::setspec::{SetFile, SetSpec};

#[derive(Debug, Parser)]
#[command(name = "polycap", version, about = "Logarithmic capacity on the n-torus and summation of multiple Fourier series")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Artifact format.
    #[arg(long, value_enum, global = true, default_value = "json")]
    pub format: Format,
    /// Artifact path; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (default: available processors).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Seed for every randomized input.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Tolerance (solver tolerance or convergence threshold, per command).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct SetArgs {
    /// Set specification: a path or inline JSON, either `{"n","m","set"}` or a
    /// bare `{"type": ...}` together with --n and --m.
    #[arg(long)]
    pub set: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Args)]
pub struct CoeffArgs {
    /// Coefficient file (JSON).
    #[arg(long)]
    pub coeffs: PathBuf,
    /// Evaluation point, comma-separated radians; repeat for several points.
    #[arg(long, required = true)]
    pub theta: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity of a grid set with its solver diagnostics.
    Capacity {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Equilibrium measure, potential and primal check of a grid set.
    Equilibrium {
        #[command(flatten)]
        set: SetArgs,
    },
    /// Rectangular partial sums over all rectangles up to --nmax.
    SumScan {
        #[command(flatten)]
        input: CoeffArgs,
        /// Rectangle cap: one integer for every axis or a comma list; repeat
        /// for several caps. Defaults to the full shape.
        #[arg(long)]
        nmax: Vec<String>,
    },
    /// Abel means along the diagonal radius t.
    AbelTrace {
        #[command(flatten)]
        input: CoeffArgs,
        /// Comma-separated radii in [0, 1).
        #[arg(long)]
        r: String,
    },
    /// Box averages through sinc multipliers.
    StrongDiff {
        #[command(flatten)]
        input: CoeffArgs,
        /// Comma-separated half-widths in (0, pi), applied to every axis.
        #[arg(long)]
        h: String,
    },
    /// Radial variation levels and extrapolation.
    Variation {
        /// Coefficient file (JSON).
        #[arg(long)]
        coeffs: PathBuf,
        /// Evaluation points; when absent, --samples points are drawn from --seed.
        #[arg(long)]
        theta: Vec<String>,
        #[arg(long, default_value_t = 4)]
        samples: usize,
        #[arg(long, default_value_t = series::MAX_DEPTH)]
        depth: usize,
    },
    /// Coefficients of the log-kernel function over a nested chain.
    ConstructDivergent {
        /// Target set (path or inline JSON).
        #[arg(long)]
        set: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "J", default_value_t = 4)]
        levels: usize,
        #[arg(long, default_value_t = 1.0)]
        budget: f64,
        /// Explicit nonincreasing dilation radii (overrides --J/--budget).
        #[arg(long)]
        radii: Option<String>,
        #[arg(long = "c-const", default_value_t = DEFAULT_C_CONST)]
        c_const: f64,
        /// Coefficient shape: one integer for every axis or a comma list.
        #[arg(long, default_value = "65")]
        shape: String,
        #[arg(long, default_value_t = DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Localization failure of the bi-Poisson integral.
    DemoLocalization {
        #[arg(long, default_value_t = 4096)]
        m: usize,
    },
    /// Kernel tables and the discrete identity b * b = h.
    VerifyKernels {
        #[arg(long)]
        m: usize,
        /// Truncation of the b series (default m/2).
        #[arg(long = "K")]
        k: Option<usize>,
    },
    /// Random coefficients with power decay and seeded phases.
    GenCoeffs {
        /// Comma-separated shape.
        #[arg(long)]
        shape: String,
        #[arg(long, default_value_t = 1.6)]
        decay: f64,
        #[arg(long, default_value_t = 1)]
        d: usize,
    },
}

/// Failure of a command, with its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => 1,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(field: &str, reason: impl std::fmt::Display) -> Failure {
    Failure {
        code: 2,
        message: format!("{field}: {reason}"),
    }
}

/// Successful run: summary line and exit code (0, or 3 for non-convergence).
#[derive(Debug)]
pub struct Outcome {
    pub summary: String,
    pub code: i32,
}

fn parse_f64_list(field: &str, text: &str) -> Result<Vec<f64>, Failure> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| usage(field, format!("`{s}` is not a number ({e})")))
        })
        .collect()
}

fn parse_index_list(field: &str, text: &str, n: usize) -> Result<Vec<usize>, Failure> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| usage(field, format!("`{s}` is not a nonnegative integer ({e})")))
        })
        .collect::<Result<_, _>>()?;
    match parts.len() {
        1 => Ok(vec![parts[0]; n]),
        k if k == n => Ok(parts),
        k => Err(usage(field, format!("expected 1 or {n} entries, found {k}"))),
    }
}

fn parse_point(field: &str, text: &str, n: usize) -> Result<Vec<f64>, Failure> {
    let v = parse_f64_list(field, text)?;
    if v.len() != n {
        return Err(usage(field, format!("expected {n} coordinates, found {}", v.len())));
    }
    Ok(v)
}

fn read_text(field: &str, source: &str) -> Result<String, Failure> {
    if source.trim_start().starts_with('{') {
        Ok(source.to_string())
    } else {
        std::fs::read_to_string(source).map_err(|e| usage(field, format!("cannot read `{source}`: {e}")))
    }
}

fn load_set(source: &str, n: Option<usize>, m: Option<usize>) -> Result<GridSet, Failure> {
    let text = read_text("set", source)?;
    let value: serde_json::Value = serde_json::from_str(&text).map_err(|e| usage("set", e))?;
    let file = if value.get("set").is_some() {
        let file = SetFile::parse(&text)?;
        for (field, flag, have) in [("n", n, file.n), ("m", m, file.m)] {
            if let Some(v) = flag {
                if v != have {
                    return Err(usage(field, format!("--{field} {v} conflicts with the set file value {have}")));
                }
            }
        }
        file
    } else {
        let spec: SetSpec = serde_json::from_value(value).map_err(|e| usage("set", e))?;
        SetFile {
            n: n.ok_or_else(|| usage("n", "required with a bare set specification"))?,
            m: m.ok_or_else(|| usage("m", "required with a bare set specification"))?,
            set: spec,
        }
    };
    Ok(file.build()?)
}

fn load_coeffs(path: &Path) -> Result<CoeffArray, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| usage("coeffs", format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage("coeffs", e))
}

fn theta_points(field: &str, raw: &[String], n: usize) -> Result<Vec<Vec<f64>>, Failure> {
    raw.iter().map(|t| parse_point(field, t, n)).collect()
}

fn complex_columns(prefix: &str, d: usize) -> Vec<String> {
    (0..d)
        .flat_map(|c| [format!("{prefix}_re_{c}"), format!("{prefix}_im_{c}")])
        .collect()
}

fn complex_cells(v: &[Complex64]) -> Vec<String> {
    v.iter().flat_map(|z| [csv_float(z.re), csv_float(z.im)]).collect()
}

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|j| format!("{prefix}_{j}")).collect()
}

/// Artifact of the `equilibrium` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumArtifact {
    pub n: usize,
    pub m: usize,
    pub summary: EquilibriumSummary,
    pub primal: PrimalReport,
    pub weights: Vec<f64>,
    pub potential: Vec<f64>,
}

/// Artifact of the `verify-kernels` command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelArtifact {
    pub table: KernelTable,
    pub max_deviation: f64,
    pub symmetric: bool,
    pub convolution: Vec<f64>,
    pub min_eigenvalue: f64,
    pub tilde_h_lower_bound: f64,
    pub tilde_b_lower_bound: f64,
}

/// Artifact of `abel-trace` and `strong-diff`: one entry per (theta, parameter).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub theta: Vec<f64>,
    pub parameter: f64,
    pub value: Vec<Complex64>,
}

/// Run a parsed command line.
pub fn run(cli: Cli) -> Result<Outcome, Failure> {
    if let Some(t) = cli.common.threads {
        if t == 0 {
            return Err(usage("threads", "must be at least 1"));
        }
        // a pool may already exist when called repeatedly in one process
        let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
    }
    let common = &cli.common;
    let out = common.out.as_deref();
    let tol_or = |default: f64| -> Result<f64, Failure> {
        match common.tol {
            Some(t) if !(t > 0.0 && t.is_finite()) => Err(usage("tol", format!("{t} must be positive"))),
            Some(t) => Ok(t),
            None => Ok(default),
        }
    };
    match &cli.command {
        Command::Capacity { set } => {
            let tol = tol_or(DEFAULT_TOL)?;
            let e = load_set(&set.set, set.n, set.m)?;
            let r = equilibrium(&e, tol, set.max_iter)?;
            let s = r.summary();
            let text = match common.format {
                Format::Json => to_json_string(&s)?,
                Format::Csv => csv_string(
                    &["capacity", "mass", "energy", "residual", "violation_fraction", "iterations", "converged"].map(String::from),
                    &[vec![
                        csv_float(s.capacity),
                        csv_float(s.mass),
                        csv_float(s.energy),
                        csv_float(s.residual),
                        csv_float(s.violation_fraction),
                        s.iterations.to_string(),
                        s.converged.to_string(),
                    ]],
                )?,
            };
            emit(out, &text)?;
            Ok(converged_outcome(format!("capacity {:.10}", s.capacity), s.converged))
        }
        Command::Equilibrium { set } => {
            let tol = tol_or(DEFAULT_TOL)?;
            let e = load_set(&set.set, set.n, set.m)?;
            let r = equilibrium(&e, tol, set.max_iter)?;
            let primal = capacity_primal_check(&e, &r, tol)?;
            let grid = e.grid();
            let potential = crate::capacity::HOperator::new(grid)?.potential(&r.measure)?;
            let s = r.summary();
            let text = match common.format {
                Format::Json => to_json_string(&EquilibriumArtifact {
                    n: grid.n(),
                    m: grid.m(),
                    summary: s.clone(),
                    primal,
                    weights: r.measure.weights().to_vec(),
                    potential,
                })?,
                Format::Csv => {
                    let mut header = indexed("index", grid.n());
                    header.extend(indexed("theta", grid.n()));
                    header.extend(["in_set", "weight", "potential"].map(String::from));
                    let rows: Vec<Vec<String>> = (0..grid.len())
                        .map(|flat| {
                            let idx = grid.unflatten(flat);
                            let mut row: Vec<String> = idx.iter().map(|p| p.to_string()).collect();
                            row.extend(idx.iter().map(|&p| csv_float(grid.angle(p))));
                            row.push(u8::from(e.contains(flat)).to_string());
                            row.push(csv_float(r.measure.weights()[flat]));
                            row.push(csv_float(potential[flat]));
                            row
                        })
                        .collect();
                    csv_string(&header, &rows)?
                }
            };
            emit(out, &text)?;
            Ok(converged_outcome(
                format!("capacity {:.10} residual {:.3e}", s.capacity, s.residual),
                s.converged,
            ))
        }
        Command::SumScan { input, nmax } => {
            let tol = tol_or(1e-10)?;
            let f = load_coeffs(&input.coeffs)?;
            let thetas = theta_points("theta", &input.theta, f.n())?;
            let caps: Vec<Vec<usize>> = if nmax.is_empty() {
                vec![f.shape().iter().map(|s| s - 1).collect()]
            } else {
                nmax.iter().map(|t| parse_index_list("nmax", t, f.n())).collect::<Result<_, _>>()?
            };
            let mut scans = Vec::new();
            for theta in &thetas {
                for cap in &caps {
                    scans.push(series::pringsheim_scan(&f, theta, cap, tol)?);
                }
            }
            let text = match common.format {
                Format::Json => to_json_string(&scans)?,
                Format::Csv => {
                    let mut header = indexed("theta", f.n());
                    header.extend(indexed("nmax", f.n()));
                    header.extend(["sup_norm", "final_norm", "oscillation_tail", "verdict"].map(String::from));
                    header.extend(complex_columns("final", f.d()));
                    let rows: Vec<Vec<String>> = scans
                        .iter()
                        .map(|s| {
                            let mut row: Vec<String> = s.theta.iter().map(|&t| csv_float(t)).collect();
                            row.extend(s.n_max.iter().map(|k| k.to_string()));
                            row.push(csv_float(s.sup_norm));
                            row.push(csv_float(vec_norm(&s.final_value)));
                            row.push(csv_float(s.oscillation_tail));
                            row.push(s.verdict.to_string());
                            row.extend(complex_cells(&s.final_value));
                            row
                        })
                        .collect();
                    csv_string(&header, &rows)?
                }
            };
            emit(out, &text)?;
            let verdicts: Vec<String> = scans.iter().map(|s| s.verdict.to_string()).collect();
            Ok(Outcome {
                summary: verdicts.join(" "),
                code: 0,
            })
        }
        Command::AbelTrace { input, r } => {
            let f = load_coeffs(&input.coeffs)?;
            let thetas = theta_points("theta", &input.theta, f.n())?;
            let radii = parse_f64_list("r", r)?;
            let mut rows = Vec::new();
            for theta in &thetas {
                for (&t, value) in radii.iter().zip(construct::radial_trace(&f, theta, &radii)?) {
                    rows.push(TraceRow {
                        theta: theta.clone(),
                        parameter: t,
                        value,
                    });
                }
            }
            emit_trace(out, common.format, "r", &rows, f.n(), f.d())?;
            Ok(trace_outcome("abel mean", &rows))
        }
        Command::StrongDiff { input, h } => {
            let f = load_coeffs(&input.coeffs)?;
            let thetas = theta_points("theta", &input.theta, f.n())?;
            let widths = parse_f64_list("h", h)?;
            let mut rows = Vec::new();
            for theta in &thetas {
                for &w in &widths {
                    rows.push(TraceRow {
                        theta: theta.clone(),
                        parameter: w,
                        value: series::strong_diff_mean(&f, &vec![w; f.n()], theta)?,
                    });
                }
            }
            emit_trace(out, common.format, "h", &rows, f.n(), f.d())?;
            Ok(trace_outcome("box mean", &rows))
        }
        Command::Variation {
            coeffs,
            theta,
            samples,
            depth,
        } => {
            let f = load_coeffs(coeffs)?;
            let thetas = if theta.is_empty() {
                let mut rng = ChaCha8Rng::seed_from_u64(common.seed);
                (0..*samples)
                    .map(|_| (0..f.n()).map(|_| rng.gen::<f64>() * TAU).collect())
                    .collect()
            } else {
                theta_points("theta", theta, f.n())?
            };
            let results = thetas
                .iter()
                .map(|t| series::radial_variation(&f, t, *depth))
                .collect::<Result<Vec<_>, _>>()?;
            let text = match common.format {
                Format::Json => to_json_string(&results)?,
                Format::Csv => {
                    let mut header = indexed("theta", f.n());
                    header.extend(["level", "delta", "value", "extrapolated", "monotone"].map(String::from));
                    let mut rows = Vec::new();
                    for res in &results {
                        for (k, l) in res.levels.iter().enumerate() {
                            let mut row: Vec<String> = res.theta.iter().map(|&t| csv_float(t)).collect();
                            row.push((k + 1).to_string());
                            row.push(csv_float(l.delta));
                            row.push(csv_float(l.value));
                            row.push(csv_float(res.extrapolated_value()));
                            row.push(res.monotone.to_string());
                            rows.push(row);
                        }
                    }
                    csv_string(&header, &rows)?
                }
            };
            emit(out, &text)?;
            let finite = results.iter().filter(|r| r.extrapolated.is_some()).count();
            Ok(Outcome {
                summary: format!("variation finite at {finite}/{} points", results.len()),
                code: 0,
            })
        }
        Command::ConstructDivergent {
            set,
            n,
            m,
            levels,
            budget,
            radii,
            c_const,
            shape,
            max_iter,
        } => {
            let tol = tol_or(DEFAULT_TOL)?;
            if common.format != Format::Json {
                return Err(usage("format", "construct-divergent writes JSON only"));
            }
            let target = load_set(set, *n, *m)?;
            let chain = match radii {
                Some(text) => {
                    let list: Vec<usize> = text
                        .split(',')
                        .map(|s| s.trim().parse::<usize>().map_err(|e| usage("radii", format!("`{s}`: {e}"))))
                        .collect::<Result<_, _>>()?;
                    nested_from_radii(&target, &list, tol, *max_iter)?
                }
                None => nested_compacts(&target, *levels, *budget, tol, *max_iter)?,
            };
            if chain.shortfall {
                return Err(usage(
                    "budget",
                    format!(
                        "the chain reached only {} of {levels} levels: the target's capacity exceeds budget * 2^-j",
                        chain.radii.len()
                    ),
                ));
            }
            let shape = parse_index_list("shape", shape, target.grid().n())?;
            let f = construct::divergent_function(&chain, *c_const, &shape)?;
            let sidecar = f.sidecar();
            let coeff_text = to_json_string(&f.coeffs)?;
            let sidecar_text = to_json_string(&sidecar)?;
            match out {
                Some(path) => {
                    emit(Some(path), &coeff_text)?;
                    emit(Some(&sidecar_path(path)), &sidecar_text)?;
                }
                None => {
                    emit(None, &coeff_text)?;
                    emit(None, &sidecar_text)?;
                }
            }
            let ratios = f.norm_ratios();
            Ok(Outcome {
                summary: format!(
                    "dirichlet norm {:.10} sqrt_cap_sum {:.10} norm/capacity ratios {:?}",
                    f.coeffs.dirichlet_norm(),
                    sidecar.sqrt_cap_sum,
                    ratios
                ),
                code: 0,
            })
        }
        Command::DemoLocalization { m } => {
            let rep = construct::localization_demo(*m)?;
            let text = match common.format {
                Format::Json => to_json_string(&rep)?,
                Format::Csv => {
                    let header = ["r1", "r2", "bump_trace", "series_trace", "value"].map(String::from);
                    let mut rows = Vec::new();
                    for (i, r1) in rep.radii.iter().enumerate() {
                        for (j, r2) in rep.radii.iter().enumerate() {
                            rows.push(vec![
                                csv_float(*r1),
                                csv_float(*r2),
                                csv_float(rep.bump_trace[i]),
                                csv_float(rep.series_trace[j]),
                                csv_float(rep.trace[i][j]),
                            ]);
                        }
                    }
                    csv_string(&header, &rows)?
                }
            };
            emit(out, &text)?;
            Ok(Outcome {
                summary: format!(
                    "oscillation {:.10} ({})",
                    rep.oscillation,
                    if rep.fails_to_localize { "no limit" } else { "inconclusive" }
                ),
                code: 0,
            })
        }
        Command::VerifyKernels { m, k } => {
            let k = k.unwrap_or(m / 2);
            let table = sample_h(*m)?.with_b(k)?;
            let report = verify_b_conv_h(*m, k)?;
            let tilde = tilde_h_series(*m, (*m / 2).max(16))?;
            let min_eigenvalue = table.eigenvalues().into_iter().fold(f64::INFINITY, f64::min);
            let text = match common.format {
                Format::Json => to_json_string(&KernelArtifact {
                    table: table.clone(),
                    max_deviation: report.max_deviation,
                    symmetric: report.symmetric,
                    convolution: report.convolution.clone(),
                    min_eigenvalue,
                    tilde_h_lower_bound: tilde.lower_bound,
                    tilde_b_lower_bound: tilde.b_lower_bound,
                })?,
                Format::Csv => {
                    let header = ["p", "theta", "h", "b", "b_conv_b", "relative_deviation"].map(String::from);
                    let b = table.b().expect("b attached");
                    let rows: Vec<Vec<String>> = (0..*m)
                        .map(|p| {
                            vec![
                                p.to_string(),
                                csv_float(TAU * p as f64 / *m as f64),
                                csv_float(table.h()[p]),
                                csv_float(b[p]),
                                csv_float(report.convolution[p]),
                                csv_float(report.relative_deviation[p]),
                            ]
                        })
                        .collect();
                    csv_string(&header, &rows)?
                }
            };
            emit(out, &text)?;
            Ok(Outcome {
                summary: format!("max deviation {:.6e}", report.max_deviation),
                code: 0,
            })
        }
        Command::GenCoeffs { shape, decay, d } => {
            let dims = parse_f64_list("shape", shape)?;
            let dims: Vec<usize> = dims
                .iter()
                .map(|&x| {
                    if x >= 1.0 && x.fract() == 0.0 {
                        Ok(x as usize)
                    } else {
                        Err(usage("shape", format!("{x} is not a positive integer")))
                    }
                })
                .collect::<Result<_, _>>()?;
            if common.format != Format::Json {
                return Err(usage("format", "gen-coeffs writes JSON only"));
            }
            let f = series::generate_random_coeffs(common.seed, &dims, *decay, *d)?;
            emit(out, &to_json_string(&f)?)?;
            Ok(Outcome {
                summary: format!("dirichlet norm {:.10}", f.dirichlet_norm()),
                code: 0,
            })
        }
    }
}

fn converged_outcome(summary: String, converged: bool) -> Outcome {
    if converged {
        Outcome { summary, code: 0 }
    } else {
        Outcome {
            summary: format!("{summary} (not converged)"),
            code: 3,
        }
    }
}

fn trace_outcome(label: &str, rows: &[TraceRow]) -> Outcome {
    let last = rows.last().map(|r| vec_norm(&r.value)).unwrap_or(0.0);
    Outcome {
        summary: format!("{label} norm {last:.10}"),
        code: 0,
    }
}

fn emit_trace(out: Option<&Path>, format: Format, parameter: &str, rows: &[TraceRow], n: usize, d: usize) -> Result<(), Failure> {
    let text = match format {
        Format::Json => to_json_string(rows)?,
        Format::Csv => {
            let mut header = indexed("theta", n);
            header.push(parameter.to_string());
            header.extend(complex_columns("value", d));
            header.push("norm".into());
            let body: Vec<Vec<String>> = rows
                .iter()
                .map(|r| {
                    let mut row: Vec<String> = r.theta.iter().map(|&t| csv_float(t)).collect();
                    row.push(csv_float(r.parameter));
                    row.extend(complex_cells(&r.value));
                    row.push(csv_float(vec_norm(&r.value)));
                    row
                })
                .collect();
            csv_string(&header, &body)?
        }
    };
    emit(out, &text)?;
    Ok(())
}

/// `coeffs.json` -> `coeffs.sidecar.json`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}.sidecar.json"))
}
