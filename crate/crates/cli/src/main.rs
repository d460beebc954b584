//! `charlin` command-line front end.
//!
//! Exit codes: 0 success, 1 code does not solve the network, 2 malformed
//! input or refused parameters, 3 search exhausted without a solution,
//! 4 inequality violated, 5 search budget exceeded.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use charlin::codes::{explicit_n1_code, explicit_n2_code, lift_joined_code};
use charlin::families::{gen_butterfly, gen_n1, gen_n1_prime, gen_n2, gen_n2_prime};
use charlin::ineq::{
    bound_n1, bound_n2, bound_n2_alt, build_eq0, build_thmeq1, eval, sample_slacks, witness_eq0, witness_thmeq1,
    RankInequality, SubspaceAssignment,
};
use charlin::netmodel::{verify, NetworkSpec};
use charlin::solver::{search_scalar, SearchBudget, SearchMode, SearchStatus, DEFAULT_BUDGET};
use charlin::{FpCode, PrimeField};

const EXIT_NOT_SOLVED: u8 = 1;
const EXIT_MALFORMED: u8 = 2;
const EXIT_EXHAUSTED: u8 = 3;
const EXIT_VIOLATED: u8 = 4;
const EXIT_BUDGET: u8 = 5;

#[derive(Parser)]
#[command(name = "charlin", version, about = "Characteristic-dependent linear network coding toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a network as JSON.
    Gen {
        #[arg(long, value_enum)]
        family: NetFamily,
        #[arg(long, default_value_t = 2)]
        q: usize,
        #[arg(long, default_value_t = 1)]
        n: usize,
        /// Number of joined copies (n1, n2 only).
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Emit the explicit fractional code for a family over F_p.
    Code {
        #[arg(long, value_enum)]
        family: CodeFamily,
        #[arg(long)]
        q: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check that a code solves a network; exit 0 iff it does.
    Verify {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        code: PathBuf,
    },
    /// Exhaustive scalar linear search over F_p.
    Search {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long)]
        no_prune: bool,
        #[arg(long)]
        count_all: bool,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Evaluate an inequality on a subspace assignment; exit 4 if violated.
    IneqEval {
        #[arg(long, value_enum)]
        family: IneqFamily,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        assignment: PathBuf,
        /// Print the evaluation as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Print an inequality's term list as JSON.
    IneqShow {
        #[arg(long, value_enum)]
        family: IneqFamily,
        #[arg(long)]
        q: u64,
    },
    /// Emit the violating witness assignment for an inequality.
    Witness {
        #[arg(long, value_enum)]
        family: IneqFamily,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        p: u64,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Evaluate an inequality on seeded random assignments; exit 4 on any violation.
    IneqSample {
        #[arg(long, value_enum)]
        family: IneqFamily,
        #[arg(long)]
        q: u64,
        #[arg(long)]
        p: u64,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Print a linear capacity bound as a reduced fraction.
    Bound {
        #[arg(long, value_enum)]
        network: BoundKind,
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 1)]
        k: u64,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
    /// Render a network as Graphviz DOT.
    ExportDot {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum NetFamily {
    N1p,
    N2p,
    N1,
    N2,
    Butterfly,
}

#[derive(Clone, Copy, ValueEnum)]
enum CodeFamily {
    N1p,
    N2p,
    N1,
    N2,
}

#[derive(Clone, Copy, ValueEnum)]
enum IneqFamily {
    Eq0,
    Thmeq1,
}

#[derive(Clone, Copy, ValueEnum)]
enum BoundKind {
    N1,
    N2,
    N2alt,
}

struct Failure {
    code: u8,
    message: String,
}

fn malformed(message: impl ToString) -> Failure {
    Failure { code: EXIT_MALFORMED, message: message.to_string() }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn read_spec(path: &Path) -> Result<NetworkSpec, Failure> {
    serde_json::from_str(&read(path)?).map_err(|e| malformed(format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| malformed(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

fn build_ineq(family: IneqFamily, q: u64) -> Result<RankInequality, Failure> {
    match family {
        IneqFamily::Eq0 => build_eq0(q),
        IneqFamily::Thmeq1 => build_thmeq1(q),
    }
    .map_err(malformed)
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Gen { family, q, n, k, out } => {
            let spec = match family {
                NetFamily::N1p => gen_n1_prime(q, n),
                NetFamily::N2p => gen_n2_prime(q, n),
                NetFamily::N1 => gen_n1(q, k, n),
                NetFamily::N2 => gen_n2(q, k, n),
                NetFamily::Butterfly => Ok(gen_butterfly()),
            }
            .map_err(malformed)?;
            emit(&spec.to_json(), out.as_deref())?;
            Ok(0)
        }
        Command::Code { family, q, n, p, k, out } => {
            let code = match family {
                CodeFamily::N1p => explicit_n1_code(q, n, p),
                CodeFamily::N2p => explicit_n2_code(q, n, p),
                CodeFamily::N1 => explicit_n1_code(q, n, p).and_then(|c| lift_joined_code(&gen_n1_prime(q, n)?, &c, k)),
                CodeFamily::N2 => explicit_n2_code(q, n, p).and_then(|c| lift_joined_code(&gen_n2_prime(q, n)?, &c, k)),
            }
            .map_err(malformed)?;
            emit(&code.to_json(), out.as_deref())?;
            Ok(0)
        }
        Command::Verify { spec, code } => {
            let spec = read_spec(&spec)?;
            let code = FpCode::from_json(&read(&code)?).map_err(|e| malformed(format!("{}: {e}", code.display())))?;
            let report = verify(&spec, &code);
            let demands: Vec<Value> = report
                .decode
                .iter()
                .flat_map(|d| &d.demands)
                .map(|d| json!({ "terminal": d.terminal, "message": d.message, "satisfied": d.satisfied }))
                .collect();
            let out = json!({
                "solved": report.solved,
                "violations": report.violations,
                "error": report.error.as_ref().map(|e| e.to_string()),
                "decoders_valid": report.decoders_valid,
                "satisfied": report.decode.as_ref().map(|d| d.satisfied_count()),
                "demands": demands,
            });
            print!("{}", pretty(&out));
            if let Some(e) = &report.error {
                return Err(malformed(e));
            }
            Ok(if report.solved { 0 } else { EXIT_NOT_SOLVED })
        }
        Command::Search { spec, p, budget, no_prune, count_all, threads } => {
            let spec = read_spec(&spec)?;
            let field = PrimeField::new(p).map_err(malformed)?;
            let budget = SearchBudget {
                max_assignments: budget,
                mode: if count_all { SearchMode::CountAll } else { SearchMode::FirstSolution },
                prune: !no_prune,
                threads,
            };
            let start = Instant::now();
            let outcome = search_scalar(&spec, &field, &budget).map_err(malformed)?;
            eprintln!(
                "free coefficients {}, enumerated {}, pruned {}, {:.3}s",
                outcome.free_coefficients,
                outcome.enumerated,
                outcome.pruned,
                start.elapsed().as_secs_f64()
            );
            print!("{}", outcome.to_json());
            Ok(match outcome.status {
                SearchStatus::Found => 0,
                SearchStatus::ExhaustedNone => EXIT_EXHAUSTED,
                SearchStatus::BudgetExceeded => EXIT_BUDGET,
            })
        }
        Command::IneqEval { family, q, assignment, json } => {
            let ineq = build_ineq(family, q)?;
            let asg = SubspaceAssignment::from_json(&read(&assignment)?).map_err(malformed)?;
            let ev = eval(&ineq, &asg).map_err(malformed)?;
            if json {
                print!("{}", pretty(&serde_json::to_value(&ev).expect("evaluation serializes")));
            } else {
                print!("{}", ev.table());
            }
            Ok(if ev.holds() { 0 } else { EXIT_VIOLATED })
        }
        Command::IneqShow { family, q } => {
            print!("{}", build_ineq(family, q)?.to_json());
            Ok(0)
        }
        Command::Witness { family, q, p, out } => {
            let asg = match family {
                IneqFamily::Eq0 => witness_eq0(q, p),
                IneqFamily::Thmeq1 => witness_thmeq1(q, p),
            }
            .map_err(malformed)?;
            emit(&asg.to_json(), out.as_deref())?;
            Ok(0)
        }
        Command::IneqSample { family, q, p, m, trials, seed } => {
            let ineq = build_ineq(family, q)?;
            let field = PrimeField::new(p).map_err(malformed)?;
            if m == 0 {
                return Err(malformed("--m must be positive"));
            }
            let r = sample_slacks(&ineq, &field, m, trials, seed).map_err(malformed)?;
            let out = json!({
                "trials": r.trials,
                "seed": seed,
                "m": m,
                "p": p,
                "min_slack": r.min_slack,
                "violations": r.violations,
                "first_violation": r.first_violation.as_ref().map(|(trial, slack, asg)| json!({
                    "trial": trial,
                    "slack": slack,
                    "assignment": asg.to_json_value(),
                })),
            });
            print!("{}", pretty(&out));
            Ok(if r.violations == 0 { 0 } else { EXIT_VIOLATED })
        }
        Command::Bound { network, q, k, n } => {
            if q < 2 || k == 0 || n == 0 {
                return Err(malformed(format!("need q >= 2 and k, n >= 1 (got q={q}, k={k}, n={n})")));
            }
            let b = match network {
                BoundKind::N1 => bound_n1(q, k, n),
                BoundKind::N2 => bound_n2(q, k, n),
                BoundKind::N2alt => bound_n2_alt(q, k, n),
            };
            println!("{}/{}", b.numer(), b.denom());
            Ok(0)
        }
        Command::ExportDot { spec, out } => {
            let spec = read_spec(&spec)?;
            emit(&spec.to_dot(), out.as_deref())?;
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
