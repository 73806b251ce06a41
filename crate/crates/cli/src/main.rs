use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod report;

use report::{Outcome, RunReport, Timing};

#[derive(Debug, Parser)]
#[command(
    name = "hmkit",
    version,
    about = "Finite structures, polymorphisms, free algebras and interpretability tests"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputMode {
    Text,
    Json,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = OutputMode::Text)]
    output: OutputMode,
    /// Maximum number of results to search for (0 = all).
    #[arg(long, global = true, default_value_t = 0)]
    limit: usize,
    /// Seed for randomized suites.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Override the bound on generated tuples and elements.
    #[arg(long, global = true)]
    max_tuples: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Relational structures.
    #[command(subcommand)]
    Structure(StructureCmd),
    /// Homomorphisms between structures.
    #[command(subcommand)]
    Hom(HomCmd),
    /// Polymorphisms of a structure.
    #[command(subcommand)]
    Pol(PolCmd),
    /// Partial semilattices.
    #[command(subcommand)]
    Psl(PslCmd),
    /// Free structures of finite algebras.
    #[command(subcommand)]
    Free(FreeCmd),
    /// The semilattice gadget transform.
    #[command(subcommand)]
    Gadget(GadgetCmd),
    /// Identity systems.
    #[command(subcommand)]
    Ident(IdentCmd),
    /// Finite algebras.
    #[command(subcommand)]
    Alg(AlgCmd),
}

#[derive(Debug, Args)]
pub struct WriteTo {
    /// Write the resulting structure to this file.
    #[arg(long)]
    pub write: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum StructureCmd {
    /// Check a structure file.
    Validate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Connected components.
    Components {
        #[arg(long)]
        input: PathBuf,
    },
    /// Direct product of the inputs, in order.
    Product {
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        write: WriteTo,
    },
    /// `n`-th direct power.
    Power {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        n: usize,
        #[command(flatten)]
        write: WriteTo,
    },
    /// Disjoint union of the inputs.
    Union {
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[command(flatten)]
        write: WriteTo,
    },
    /// Induced substructure on a comma-separated list of ids.
    Induced {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',')]
        subset: Vec<usize>,
        #[command(flatten)]
        write: WriteTo,
    },
    /// Isomorphism test.
    Iso {
        #[arg(long)]
        left: PathBuf,
        #[arg(long)]
        right: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct HomArgs {
    #[arg(long)]
    pub from: PathBuf,
    #[arg(long)]
    pub to: PathBuf,
    /// Skip constant maps.
    #[arg(long)]
    pub nonconstant: bool,
    /// Only injective maps.
    #[arg(long)]
    pub injective: bool,
    /// Fix source element `a` to target element `b` (`a=b`, repeatable).
    #[arg(long = "pin", value_parser = parse_pin)]
    pub pins: Vec<(usize, usize)>,
    /// Explore branches in parallel (results are still in canonical order).
    #[arg(long)]
    pub parallel: bool,
}

fn parse_pin(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('=').ok_or_else(|| format!("expected a=b, got `{s}`"))?;
    let num = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"));
    Ok((num(a)?, num(b)?))
}

#[derive(Debug, Subcommand)]
pub enum HomCmd {
    /// List homomorphisms.
    Find(HomArgs),
    /// Count homomorphisms.
    Count(HomArgs),
    /// Find a retraction of `--from` onto `--to`.
    Retract {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
    },
    /// Check a map given as comma-separated target ids.
    Check {
        #[arg(long)]
        from: PathBuf,
        #[arg(long)]
        to: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        map: Vec<usize>,
    },
}

#[derive(Debug, Subcommand)]
pub enum PolCmd {
    /// All polymorphisms of one arity.
    Enumerate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        arity: usize,
        /// Classify each table as constant or a meet of coordinates.
        #[arg(long)]
        classify: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum PslCmd {
    /// Decide whether a ternary structure is a partial semilattice.
    Check {
        #[arg(long)]
        input: PathBuf,
    },
    /// Largest element, if any.
    Largest {
        #[arg(long)]
        input: PathBuf,
    },
    /// Left-associated meet of a comma-separated sequence.
    Meet {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        elements: Vec<usize>,
    },
    /// Split a homomorphism from a product of partial semilattices.
    Decompose {
        /// Factors, in product order.
        #[arg(long = "factor", required = true, num_args = 1..)]
        factors: Vec<PathBuf>,
        /// Target structure (default: the two-element semilattice).
        #[arg(long)]
        target: Option<PathBuf>,
        /// The map as comma-separated target ids, in product order.
        #[arg(long, value_delimiter = ',', required = true)]
        map: Vec<usize>,
    },
    /// Seeded random run of the product-decomposition property.
    LemmaSuite {
        #[arg(long, default_value_t = 200)]
        instances: usize,
    },
}

#[derive(Debug, Subcommand)]
pub enum FreeCmd {
    /// Build the free structure, its collapse and optional checks.
    Build {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        verify_lemma22: bool,
        /// Check the polymorphism claims up to this arity.
        #[arg(long)]
        verify_claims: Option<usize>,
        /// Check the component and retraction properties.
        #[arg(long)]
        verify_lemma21: bool,
        /// Export `Fstruct.json`, `K.json` and `manifest.json` here.
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GadgetCmd {
    /// Transform a structure.
    Apply {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        write: WriteTo,
    },
    /// Transform a disjoint union of powers and match the components.
    Analyze {
        #[arg(long)]
        input: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum IdentCmd {
    /// Parse and print a system.
    Parse {
        #[arg(long)]
        system: PathBuf,
    },
    /// Report which identities are linear.
    Linear {
        #[arg(long)]
        system: PathBuf,
    },
    /// Saturate the linear two-variable fragment.
    Saturate {
        #[arg(long)]
        system: PathBuf,
    },
    /// Look for subset witnesses for one symbol.
    HmCheck {
        #[arg(long)]
        system: PathBuf,
        #[arg(long)]
        term: String,
    },
    /// Search for a semilattice interpretation.
    SlInterp {
        #[arg(long)]
        system: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
pub enum AlgCmd {
    /// Labeling evidence for an idempotent algebra.
    HmEvidence {
        #[arg(long)]
        algebra: PathBuf,
        #[arg(long)]
        max_arity: Option<usize>,
    },
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    let start = Instant::now();
    let outcome = commands::run(&cli.command, &cli.global);
    let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    // a closed pipe (e.g. `| head`) is not an error worth reporting
    let _ = print_outcome(&outcome, &cli.global, &argv[1..], elapsed_ms);
    if outcome.failed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn print_outcome(outcome: &Outcome, g: &Global, command: &[String], elapsed_ms: f64) -> io::Result<()> {
    let mut out = io::stdout().lock();
    match g.output {
        OutputMode::Text => {
            write!(out, "{}", outcome.text)?;
            if !outcome.text.is_empty() && !outcome.text.ends_with('\n') {
                writeln!(out)?;
            }
            for c in &outcome.checks {
                match (&c.verdict, &c.witness) {
                    (report::CheckVerdict::Pass, _) | (_, serde_json::Value::Null) => {
                        writeln!(out, "{}: {}", c.verdict.as_str(), c.name)?
                    }
                    (_, serde_json::Value::String(why)) => writeln!(out, "{}: {} ({why})", c.verdict.as_str(), c.name)?,
                    (_, w) => writeln!(out, "{}: {} ({w})", c.verdict.as_str(), c.name)?,
                }
            }
        }
        OutputMode::Json => {
            let report = RunReport {
                command,
                checks: &outcome.checks,
                seed: outcome.seed.or(g.seed),
                output: &outcome.text,
                timing: Timing { elapsed_ms },
            };
            writeln!(out, "{}", serde_json::to_string_pretty(&report).expect("serializable"))?;
        }
    }
    out.flush()
}
