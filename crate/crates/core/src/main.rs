use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use opineq::catalog::{list_registry, Variant, Verdict};
use opineq::harness::{
    eval_single, export_range, run_campaign, search, with_thread_cap, CampaignConfig,
    HarnessError, ParamOverrides, SearchStatus, EXIT_CORRECTED_VIOLATION, EXIT_IO, EXIT_OK,
};

#[derive(Parser)]
#[command(name = "opineq", version, about = "Certified checks of numerical-radius inequalities")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a campaign described by a JSON config and write its report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        /// Report path; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate one inequality on a matrix file (or a witness bundle).
    Eval {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        ineq: String,
        #[arg(long, default_value = "corrected")]
        variant: Variant,
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long)]
        m: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Search for a counterexample (or the smallest slack).
    Search {
        #[arg(long)]
        ineq: String,
        #[arg(long, default_value = "corrected")]
        variant: Variant,
        #[arg(long, value_delimiter = ',', default_value = "2,3")]
        dims: Vec<usize>,
        #[arg(long, default_value_t = 1000)]
        budget: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write the boundary of the numerical range as CSV.
    Range {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 360)]
        points: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the inequality registry as JSON.
    List,
}

fn fail(e: HarnessError) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(e.exit_code() as u8)
}

fn code(c: i32) -> ExitCode {
    ExitCode::from(c as u8)
}

fn json<T: serde::Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable output")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Verify { config, out } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => return fail(e.into()),
            };
            let cfg: CampaignConfig = match serde_json::from_str(&text) {
                Ok(c) => c,
                Err(e) => return fail(HarnessError::ConfigInvalid(e.to_string())),
            };
            let report = match with_thread_cap(|| run_campaign(&cfg)) {
                Ok(r) => r,
                Err(e) => return fail(e),
            };
            let body = report.to_json();
            match out.or(cfg.output.clone()) {
                Some(path) => {
                    if let Err(e) = std::fs::write(&path, body + "\n") {
                        eprintln!("error: {e}");
                        return code(EXIT_IO);
                    }
                }
                None => println!("{body}"),
            }
            let s = &report.summary;
            eprintln!(
                "{} evaluations: {} holds, {} violated ({} corrected), {} inconclusive, {} errors",
                s.evaluations, s.holds, s.violated, s.corrected_violations, s.inconclusive, s.errors
            );
            code(if report.has_corrected_violation() {
                EXIT_CORRECTED_VIOLATION
            } else {
                EXIT_OK
            })
        }
        Command::Eval {
            matrix,
            ineq,
            variant,
            alpha,
            beta,
            gamma,
            delta,
            m,
            r,
            s,
            p,
        } => {
            let o = ParamOverrides {
                alpha,
                beta,
                gamma,
                delta,
                m,
                r,
                s,
                p,
            };
            match eval_single(&matrix, &ineq, variant, &o) {
                Ok(res) => {
                    println!("{}", json(&res));
                    let bad = res.verdict == Verdict::Violated && res.variant == Variant::Corrected;
                    code(if bad { EXIT_CORRECTED_VIOLATION } else { EXIT_OK })
                }
                Err(e) => fail(e),
            }
        }
        Command::Search {
            ineq,
            variant,
            dims,
            budget,
            seed,
        } => match search(&ineq, variant, &dims, budget, seed) {
            Ok(rep) => {
                println!("{}", json(&rep));
                let bad = rep.status == SearchStatus::ConfirmedViolation && rep.variant == Variant::Corrected;
                code(if bad { EXIT_CORRECTED_VIOLATION } else { EXIT_OK })
            }
            Err(e) => fail(e),
        },
        Command::Range { matrix, points, out } => match export_range(&matrix, points, &out) {
            Ok(n) => {
                eprintln!("wrote {n} boundary points to {}", out.display());
                code(EXIT_OK)
            }
            Err(e) => fail(e),
        },
        Command::List => {
            println!("{}", json(&list_registry()));
            code(EXIT_OK)
        }
    }
}
