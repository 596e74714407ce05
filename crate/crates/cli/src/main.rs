//! `vcs-irreps`: generate, verify and compare irrep matrices.
//!
//! Exit codes are 0 on success, 1 when a verification fails and 2 for
//! usage errors (bad flags, invalid weights, unreadable files).

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use vcs_irreps::document::{generate, verify, Document, IrrepRequest};
use vcs_irreps::su3::{branching_oracle, RotorIrrep, Su3Label};
use vcs_irreps::Precision;

#[derive(Parser)]
#[command(name = "vcs-irreps", version, about = "Unitary irreps of su(1,1), u(3) and su(3) ⊃ so(3)")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print basis, generator matrices and reduced matrix elements.
    Gen {
        algebra: Algebra,
        #[command(flatten)]
        irrep: IrrepArgs,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
    },
    /// Verify commutators, Hermiticity and Casimir constancy.
    Check {
        /// Required unless --replay is given.
        algebra: Option<Algebra>,
        #[command(flatten)]
        irrep: IrrepArgs,
        #[arg(long, env = "VCS_IRREPS_TOL", default_value_t = 1e-10)]
        tol: f64,
        /// Verify a previously generated JSON document instead.
        #[arg(long, conflicts_with = "algebra")]
        replay: Option<PathBuf>,
    },
    /// Compare so(3) content of an su(3) irrep from both constructions.
    Branch {
        #[arg(long, value_name = "LAMBDA,MU")]
        lm: Su3Label,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Algebra {
    Su11,
    U3,
    #[value(name = "su3-so3")]
    Su3So3,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Exact,
    Float,
}

#[derive(Args)]
struct IrrepArgs {
    /// su(1,1) lowest weight, e.g. 3 or 5/2.
    #[arg(long)]
    lambda: Option<String>,
    /// su(1,1) truncation; the basis is n = 0..=nmax.
    #[arg(long)]
    nmax: Option<usize>,
    /// u(3) highest weight l1,l2,l3.
    #[arg(long)]
    weight: Option<String>,
    /// su(3) label lambda,mu.
    #[arg(long, value_name = "LAMBDA,MU")]
    lm: Option<Su3Label>,
    /// Defaults to exact, except for su3-so3 which is float only.
    #[arg(long, value_enum)]
    mode: Option<Mode>,
}

impl IrrepArgs {
    fn request(&self, algebra: Algebra) -> anyhow::Result<(IrrepRequest, Precision)> {
        let request = match algebra {
            Algebra::Su11 => IrrepRequest::Su11 {
                lambda: self.lambda.clone().context("su11 needs --lambda")?,
                n_max: self.nmax.context("su11 needs --nmax")?,
            },
            Algebra::U3 => IrrepRequest::U3 {
                weight: self.weight.clone().context("u3 needs --weight")?,
            },
            Algebra::Su3So3 => {
                let lm = self.lm.context("su3-so3 needs --lm")?;
                IrrepRequest::Su3So3 { lam: lm.lam, mu: lm.mu }
            }
        };
        let precision = match (self.mode, algebra) {
            (Some(Mode::Exact), _) => Precision::Exact,
            (Some(Mode::Float), _) | (None, Algebra::Su3So3) => Precision::Float,
            (None, _) => Precision::Exact,
        };
        Ok((request, precision))
    }
}

/// Failures that are the caller's fault rather than a failed check.
fn usage(err: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {err:#}");
    ExitCode::from(2)
}

fn run_gen(algebra: Algebra, irrep: &IrrepArgs, format: Format) -> anyhow::Result<()> {
    let (request, precision) = irrep.request(algebra)?;
    let doc = generate(&request, precision)?;
    match format {
        Format::Json => println!("{}", doc.to_json()?),
        Format::Csv => {
            let mut out = csv::Writer::from_writer(std::io::stdout().lock());
            out.write_record(["weight", "bra-label", "ket-label", "value"])?;
            for row in doc.reduced_rows() {
                out.write_record(&row)?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

fn load_replay(path: &PathBuf) -> anyhow::Result<Document> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(Document::from_json(&text)?)
}

fn run_check(doc: &Document, tol: f64) -> ExitCode {
    let report = match verify(doc, tol) {
        Ok(r) => r,
        Err(e) => {
            println!("FAIL document      {e}");
            return ExitCode::from(1);
        }
    };
    for r in &report {
        println!("{r}");
    }
    if report.iter().all(|r| r.passed) {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run_branch(lm: Su3Label) -> anyhow::Result<bool> {
    let rotor = RotorIrrep::build(lm)?.multiplicities();
    let canonical = branching_oracle(lm)?;
    println!("{lm}  dim {}", lm.dim());
    println!("{:>4} {:>7} {:>10}", "L", "rotor", "canonical");
    let ls: std::collections::BTreeSet<u32> = rotor.keys().chain(canonical.keys()).copied().collect();
    for l in ls {
        let a = rotor.get(&l).copied().unwrap_or(0);
        let b = canonical.get(&l).copied().unwrap_or(0);
        let flag = if a == b { "" } else { "  MISMATCH" };
        println!("{l:>4} {a:>7} {b:>10}{flag}");
    }
    Ok(rotor == canonical)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match cli.command {
        Command::Gen { algebra, irrep, format } => match run_gen(algebra, &irrep, format) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => usage(e),
        },
        Command::Check {
            algebra,
            irrep,
            tol,
            replay,
        } => {
            if !(tol.is_finite() && tol >= 0.0) {
                return usage(format!("tolerance must be a non-negative number, got {tol}"));
            }
            let doc = match (replay, algebra) {
                (Some(path), _) => match load_replay(&path) {
                    Ok(doc) => doc,
                    Err(e) => {
                        // A replay that does not parse is a failed check, not a usage error.
                        println!("FAIL document      {e:#}");
                        return ExitCode::from(1);
                    }
                },
                (None, Some(algebra)) => {
                    let built = irrep.request(algebra).and_then(|(req, p)| Ok(generate(&req, p)?));
                    match built {
                        Ok(doc) => doc,
                        Err(e) => return usage(e),
                    }
                }
                (None, None) => return usage("check needs an algebra or --replay"),
            };
            run_check(&doc, tol)
        }
        Command::Branch { lm } => match run_branch(lm) {
            Ok(true) => ExitCode::SUCCESS,
            Ok(false) => ExitCode::from(1),
            Err(e) => usage(e),
        },
    }
}
