//! Command-line surface: instance ingestion, dispatch and reports.
//!
//! Exit codes: 0 success, 2 parse error, 3 precondition violation,
//! 4 numerical failure.

use std::ffi::OsString;
use std::fmt::Display;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{GtrsError, Precondition};
use crate::model::{ext_f64, verify_certificate, Certificate, GtrsInstance};
use crate::oracle::oracle_min_gtrs;
use crate::slemma::{slemma_eq, slemma_ineq, slemma_interval, SearchOptions, SlemmaVerdict};
use crate::solver::{solve, Assumptions, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;
pub const EXIT_NUMERICAL: i32 = 4;

pub const SEED_ENV: &str = "GTRS_SEED";

#[derive(Parser)]
#[command(
    name = "gtrs",
    version,
    about = "Certified GTRS solver and S-lemma toolkit"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Search {
    /// Seed for the multistart searches; defaults to $GTRS_SEED, then 0.
    #[arg(long)]
    seed: Option<u64>,
    /// Starts per radius in the multistart searches.
    #[arg(long, default_value_t = 16)]
    budget: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Interval,
    Eq,
    Ineq,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the instance and report value, point and certificates.
    Solve {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        search: Search,
    },
    /// Decide the S-lemma for the instance's system.
    Slemma {
        file: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        search: Search,
    },
    /// Report the standing assumption verdicts with witnesses.
    Assumptions {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        search: Search,
    },
    /// Compare the solver value with the multistart oracle.
    OracleCompare {
        file: PathBuf,
        #[arg(long)]
        json: bool,
        #[command(flatten)]
        search: Search,
    },
    /// Check a certificate file against the instance.
    Certify {
        file: PathBuf,
        certificate: PathBuf,
        #[arg(long)]
        json: bool,
    },
}

enum Failure {
    Parse(String),
    Precondition(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Parse(_) => EXIT_PARSE,
            Failure::Precondition(_) => EXIT_PRECONDITION,
            Failure::Numerical(_) => EXIT_NUMERICAL,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Parse(m) | Failure::Precondition(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<GtrsError> for Failure {
    fn from(e: GtrsError) -> Self {
        match e {
            GtrsError::Precondition(p) => {
                Failure::Precondition(format!("precondition violated: {p}"))
            }
            other => Failure::Numerical(other.to_string()),
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path)
        .map_err(|e| Failure::Parse(format!("cannot read {}: {e}", path.display())))
}

fn load_instance(path: &Path) -> Result<GtrsInstance, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Parse(format!("parse error in {}: {e}", path.display())))
}

fn load_certificate(path: &Path) -> Result<Certificate, Failure> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| Failure::Parse(format!("parse error in {}: {e}", path.display())))
}

fn options(search: &Search) -> Result<SearchOptions, Failure> {
    let seed = match search.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                Failure::Parse(format!("{SEED_ENV}: `{v}` is not an unsigned integer"))
            })?,
            Err(_) => 0,
        },
    };
    Ok(SearchOptions {
        seed,
        budget: search.budget,
    })
}

fn json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("reports serialize")
}

fn vector(x: &[f64]) -> String {
    let parts: Vec<String> = x.iter().map(|v| v.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn opt<T: Display>(v: &Option<T>) -> String {
    v.as_ref()
        .map_or_else(|| "none".to_string(), |v| v.to_string())
}

fn opt_vector(v: &Option<Vec<f64>>) -> String {
    v.as_deref().map_or_else(|| "none".to_string(), vector)
}

pub fn describe_certificate(cert: &Certificate) -> String {
    match cert {
        Certificate::Multiplier {
            mu,
            mu_plus,
            mu_minus,
            level,
        } => format!("Multiplier mu={mu} mu_plus={mu_plus} mu_minus={mu_minus} level={level}"),
        Certificate::ExceptionNu {
            nu,
            matrix_min_eig,
            level,
        } => format!("ExceptionNu nu={nu} matrix_min_eig={matrix_min_eig} level={level}"),
        Certificate::Counterexample {
            x,
            f_value,
            h_value,
        } => {
            format!("Counterexample x={} f={f_value} h={h_value}", vector(x))
        }
        Certificate::InfeasiblePrimal {} => "InfeasiblePrimal".to_string(),
        Certificate::UnboundedBelow {
            base,
            direction_hint,
        } => format!(
            "UnboundedBelow base={} direction={}",
            opt_vector(base),
            opt_vector(direction_hint)
        ),
    }
}

fn assumptions_text(a: &Assumptions) -> String {
    let mut s = String::new();
    s += &format!("b_nonzero: {}\n", a.b_nonzero);
    s += &format!(
        "feasible: {} point={}\n",
        a.feasible,
        opt_vector(&a.feasible_point)
    );
    s += &format!(
        "ricq: {} x_hat={} epsilon={} slater_witness={}\n",
        a.ricq,
        opt_vector(&a.ricq_x_hat),
        opt(&a.ricq_epsilon),
        opt_vector(&a.slater_witness)
    );
    s += &format!("bounded_below: {}\n", a.bounded_below);
    s += &format!("dual_feasible: {}\n", a.dual_feasible);
    s += &format!("boundary_ambiguous: {}\n", a.boundary_ambiguous);
    s
}

pub fn solve_report_text(r: &SolveReport) -> String {
    let mut s = String::new();
    s += &format!("seed: {}\n", r.seed);
    s += &format!("route: {}\n", r.route.name());
    s += &format!("value: {}\n", r.value);
    s += &format!("x_star: {}\n", opt_vector(&r.x_star));
    s += &format!("mu_star: {}\n", opt(&r.mu_star));
    s += &format!(
        "dual: {:?} value={} hard_case={}\n",
        r.dual.status, r.dual.value, r.dual.hard_case
    );
    for c in &r.certificates {
        s += &format!("certificate: {}\n", describe_certificate(c));
    }
    if let Some(note) = &r.gap_note {
        s += &format!("gap_note: {note}\n");
    }
    if let Some(v) = r.cross_value {
        s += &format!("cross_value: {v}\n");
    }
    for d in &r.diagnostics {
        s += &format!("diagnostic: {d}\n");
    }
    s += &assumptions_text(&r.assumptions);
    s
}

fn verdict_text(v: &SlemmaVerdict, seed: u64) -> String {
    let detail = describe_certificate(v.certificate());
    let detail = detail
        .split_once(' ')
        .map_or(String::new(), |(_, rest)| rest.to_string());
    let mut s = format!("{} {detail}\n", v.name());
    if let SlemmaVerdict::S2Holds { lambda, .. } = v {
        s += &format!("lambda: {lambda}\n");
    }
    s += &format!("certificate: {}\n", v.certificate().kind());
    s += &format!("seed: {seed}\n");
    s
}

fn run_slemma(
    inst: &GtrsInstance,
    kind: Kind,
    opts: &SearchOptions,
) -> Result<SlemmaVerdict, Failure> {
    let (f, h) = (&inst.f, &inst.h);
    let (alpha, beta) = (inst.alpha, inst.beta);
    let verdict = match kind {
        Kind::Interval => slemma_interval(inst, opts)?,
        Kind::Eq => {
            if !(alpha == beta && alpha.is_finite()) {
                return Err(GtrsError::from(Precondition::KindBounds {
                    kind: "eq",
                    requirement: "finite alpha = beta",
                })
                .into());
            }
            slemma_eq(f, &h.shifted(alpha), opts)?
        }
        Kind::Ineq => {
            if alpha == f64::NEG_INFINITY && beta.is_finite() {
                slemma_ineq(f, &h.shifted(beta), opts)?
            } else if beta == f64::INFINITY && alpha.is_finite() {
                slemma_ineq(f, &h.negated().shifted(-alpha), opts)?
            } else {
                return Err(GtrsError::from(Precondition::KindBounds {
                    kind: "ineq",
                    requirement: "exactly one infinite bound",
                })
                .into());
            }
        }
    };
    Ok(verdict)
}

#[derive(Serialize)]
struct Comparison {
    seed: u64,
    budget: usize,
    route: &'static str,
    #[serde(with = "ext_f64")]
    solver_value: f64,
    #[serde(with = "ext_f64")]
    oracle_value: f64,
    #[serde(with = "ext_f64")]
    abs_gap: f64,
    #[serde(with = "ext_f64")]
    rel_gap: f64,
    oracle_unbounded_suspected: bool,
}

#[derive(Serialize)]
struct CertifyReport {
    kind: &'static str,
    valid: bool,
}

fn dispatch(cli: Cli, out: &mut dyn Write) -> Result<i32, Failure> {
    let mut emit = |s: String| {
        let _ = out.write_all(s.as_bytes());
        if !s.ends_with('\n') {
            let _ = out.write_all(b"\n");
        }
    };
    match cli.command {
        Command::Solve {
            file,
            json: as_json,
            search,
        } => {
            let inst = load_instance(&file)?;
            let r = solve(&inst, &options(&search)?);
            emit(if as_json {
                json(&r)
            } else {
                solve_report_text(&r)
            });
            Ok(if r.numerical_failure {
                EXIT_NUMERICAL
            } else {
                EXIT_OK
            })
        }
        Command::Slemma {
            file,
            kind,
            json: as_json,
            search,
        } => {
            let inst = load_instance(&file)?;
            let opts = options(&search)?;
            let v = run_slemma(&inst, kind, &opts)?;
            emit(if as_json {
                json(&v)
            } else {
                verdict_text(&v, opts.seed)
            });
            Ok(EXIT_OK)
        }
        Command::Assumptions {
            file,
            json: as_json,
            search,
        } => {
            let inst = load_instance(&file)?;
            let opts = options(&search)?;
            let r = solve(&inst, &opts);
            emit(if as_json {
                json(&r.assumptions)
            } else {
                format!("seed: {}\n{}", opts.seed, assumptions_text(&r.assumptions))
            });
            Ok(EXIT_OK)
        }
        Command::OracleCompare {
            file,
            json: as_json,
            search,
        } => {
            let inst = load_instance(&file)?;
            let opts = options(&search)?;
            let r = solve(&inst, &opts);
            let o = oracle_min_gtrs(&inst, opts.seed, opts.budget);
            let (oracle_value, suspected) = match &o {
                Ok(o) => (o.best_value, o.unbounded_suspected),
                Err(GtrsError::Precondition(Precondition::Infeasible)) => (f64::INFINITY, false),
                Err(e) => return Err(e.clone().into()),
            };
            let abs_gap = if r.value == oracle_value {
                0.0
            } else {
                (r.value - oracle_value).abs()
            };
            let c = Comparison {
                seed: opts.seed,
                budget: opts.budget,
                route: r.route.name(),
                solver_value: r.value,
                oracle_value,
                abs_gap,
                rel_gap: abs_gap / (1.0 + r.value.abs()),
                oracle_unbounded_suspected: suspected,
            };
            emit(if as_json {
                json(&c)
            } else {
                format!(
                    "seed: {}\nbudget: {}\nroute: {}\nsolver: {}\noracle: {}\nabs_gap: {}\nrel_gap: {}\noracle_unbounded_suspected: {}\n",
                    c.seed, c.budget, c.route, c.solver_value, c.oracle_value, c.abs_gap, c.rel_gap, suspected
                )
            });
            Ok(EXIT_OK)
        }
        Command::Certify {
            file,
            certificate,
            json: as_json,
        } => {
            let inst = load_instance(&file)?;
            let cert = load_certificate(&certificate)?;
            let r = CertifyReport {
                kind: cert.kind(),
                valid: verify_certificate(&inst, &cert),
            };
            emit(if as_json {
                json(&r)
            } else {
                format!(
                    "{}: {}\n",
                    r.kind,
                    if r.valid { "valid" } else { "invalid" }
                )
            });
            Ok(EXIT_OK)
        }
    }
}

/// Runs one invocation; returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_PARSE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match dispatch(cli, out) {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message());
            f.code()
        }
    }
}
