//! Command-line front end for `reductio-core`: file formats, JSON reports,
//! the corpus generator and the `reductio` subcommands.
//!
//! Exit codes: 0 when every check passes, 1 when a verification failed (the
//! report is still written), 2 for usage and input errors.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub mod commands;
pub mod corpus;
pub mod formats;
pub mod report;

use report::{Inputs, Report};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    /// A core verifier refused the input as a mathematical failure; reported
    /// as a failed check with exit status 1.
    #[error("{0}")]
    Verification(String),
    #[error("internal error: {0}")]
    Internal(String),
}

impl CliError {
    pub fn context(self, path: &std::path::Path) -> Self {
        match self {
            CliError::Input(m) => CliError::Input(format!("{}: {m}", path.display())),
            other => other,
        }
    }
}

impl From<reductio_core::Error> for CliError {
    fn from(e: reductio_core::Error) -> Self {
        use reductio_core::Error as E;
        match e {
            E::GuaranteeViolation { .. } | E::Admissibility(_) | E::ProofInvalid(_) | E::Contract(_) => {
                CliError::Verification(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "reductio", version, about = "Exact slack matrices, reductions and uniform LPs on small instances")]
pub struct Cli {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Floating-point tolerance (eigenvalues, NMF residuals).
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Largest vertex count accepted for exhaustive enumeration.
    #[arg(long = "limit-n", global = true, default_value_t = 16)]
    pub limit_n: usize,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Record wall-clock time in the report (breaks byte stability).
    #[arg(long, global = true)]
    pub timing: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Build or verify reduction records.
    Reduce {
        #[command(subcommand)]
        action: ReduceCmd,
    },
    /// Slack matrices and their factorizations.
    Slack {
        #[command(subcommand)]
        action: SlackCmd,
    },
    /// The uniform LP over bounded-treewidth graphs.
    Twlp {
        #[command(subcommand)]
        action: TwlpCmd,
    },
    /// Conflict graphs and pseudoexpectations.
    Lasserre {
        #[command(subcommand)]
        action: LasserreCmd,
    },
    /// The acceptance suite.
    Suite {
        #[command(subcommand)]
        action: SuiteCmd,
    },
    /// Write or check the shipped instance corpus.
    Corpus(CorpusArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum ReductionName {
    Matching3reg,
    MaxxorMaxcut,
    Sparsest,
    Balsep,
    Ug1f,
    UgNoteq,
}

#[derive(Subcommand, Debug)]
pub enum ReduceCmd {
    Build(ReduceBuild),
    /// Verify a record written by `reduce build`.
    Verify { record: PathBuf },
}

#[derive(Args, Debug)]
pub struct ReduceBuild {
    pub name: ReductionName,
    /// Half the number of vertices of K_{2n} (matching3reg).
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    /// Defaults: 0 for matching3reg and maxxor-maxcut, 1/4 for balsep, 1/2 for the UG→CSP reductions.
    #[arg(long)]
    pub eps: Option<String>,
    #[arg(long, default_value = "0")]
    pub delta: String,
    /// Powering level (sparsest).
    #[arg(long, default_value_t = 2)]
    pub l: usize,
    /// Neighbourhood size (UG→CSP).
    #[arg(long, default_value_t = 1)]
    pub t: usize,
    /// Alphabet size Q of NotEqualCSP.
    #[arg(long, default_value_t = 2)]
    pub modulus: usize,
    #[arg(long, default_value = "0")]
    pub zeta: String,
    #[arg(long, default_value = "1")]
    pub c1: String,
    #[arg(long, default_value = "0")]
    pub s1: String,
    #[arg(long, default_value = "0")]
    pub s2: String,
    /// Source instances: CSP JSON, UG JSON or a graph file depending on the reduction.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Gadget template JSON (maxxor-maxcut).
    #[arg(long)]
    pub template: Option<PathBuf>,
    /// Where to write the record.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Source,
    Target,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum SlackProblem {
    Matching,
    IndependentSet,
    VertexCover,
    Maxcut,
}

#[derive(Subcommand, Debug)]
pub enum SlackCmd {
    /// Exact-guarantee slack of a small problem, or the slack of one side of a record.
    Build {
        #[arg(long, conflicts_with = "record")]
        problem: Option<SlackProblem>,
        /// Host graph for Matching (default K_4).
        #[arg(long)]
        host: Option<PathBuf>,
        /// Universe size for the graph problems.
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long)]
        record: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Side::Source)]
        side: Side,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a factorization against a matrix exactly.
    Verify { matrix: PathBuf, factorization: PathBuf },
    /// Seeded multiplicative-update NMF with exact certification.
    Nmf {
        matrix: PathBuf,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 1500)]
        iters: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ProblemArg {
    /// IndependentSet, VertexCover, MaxCUT, UniqueGames2 or Matching (short forms is, vc, maxcut, ug accepted).
    #[arg(long)]
    pub problem: String,
}

#[derive(Subcommand, Debug)]
pub enum TwlpCmd {
    /// Build the model for all graphs on [n] with treewidth at most k.
    Build {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Solve the model for one graph and compare with brute force.
    Solve {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        model: Option<PathBuf>,
        /// UniqueGames2 edge labels in edge order, e.g. `0110` (1 = swap).
        #[arg(long)]
        swaps: Option<String>,
    },
    /// Compute and verify the α coefficients along an exact tree decomposition.
    Alpha {
        #[command(flatten)]
        problem: ProblemArg,
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, default_value_t = 0)]
        root: usize,
        #[arg(long)]
        swaps: Option<String>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Sweep a graph family: LP = OPT, admissibility, α identity, size bound.
    Verify {
        #[command(flatten)]
        problem: ProblemArg,
        /// Connected graphs up to this many vertices (ignored with --graphs).
        #[arg(long, default_value_t = 5)]
        max_n: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        graphs: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
pub enum LasserreCmd {
    /// Push a distribution pseudoexpectation of a CSP onto its conflict graph.
    Compose {
        #[arg(long)]
        csp: PathBuf,
        #[arg(long, default_value_t = 4)]
        degree: usize,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Check a pseudoexpectation file.
    Verify { pe: PathBuf },
}

#[derive(Subcommand, Debug)]
pub enum SuiteCmd {
    Run {
        /// Criterion key (or part of it) or number.
        #[arg(long, default_value = "")]
        filter: String,
    },
}

#[derive(Args, Debug)]
pub struct CorpusArgs {
    #[arg(long, default_value = "corpus")]
    pub out: PathBuf,
    /// Compare against an existing directory instead of writing.
    #[arg(long)]
    pub check: Option<PathBuf>,
}

/// Shared state of one invocation.
pub struct Session {
    pub seed: u64,
    pub tol: f64,
    pub limit_n: usize,
    pub inputs: Inputs,
    pub report: Report,
    /// Failed checks with these names do not change the exit status.
    pub tolerated: Vec<String>,
}

impl Session {
    pub fn enumeration_limit(&self, what: &str, size: usize) -> Result<(), CliError> {
        if size > self.limit_n {
            return Err(CliError::Input(format!("{what} has {size} vertices; --limit-n is {}", self.limit_n)));
        }
        Ok(())
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Reduce { action: ReduceCmd::Build(_) } => "reduce build",
        Command::Reduce { action: ReduceCmd::Verify { .. } } => "reduce verify",
        Command::Slack { action: SlackCmd::Build { .. } } => "slack build",
        Command::Slack { action: SlackCmd::Verify { .. } } => "slack verify",
        Command::Slack { action: SlackCmd::Nmf { .. } } => "slack nmf",
        Command::Twlp { action: TwlpCmd::Build { .. } } => "twlp build",
        Command::Twlp { action: TwlpCmd::Solve { .. } } => "twlp solve",
        Command::Twlp { action: TwlpCmd::Alpha { .. } } => "twlp alpha",
        Command::Twlp { action: TwlpCmd::Verify { .. } } => "twlp verify",
        Command::Lasserre { action: LasserreCmd::Compose { .. } } => "lasserre compose",
        Command::Lasserre { action: LasserreCmd::Verify { .. } } => "lasserre verify",
        Command::Suite { .. } => "suite run",
        Command::Corpus(_) => "corpus",
    }
}

/// Parses `argv` (program name first), runs the command and writes the
/// report. Returns the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = command_name(&cli.command);
    let mut inputs = Inputs::default();
    inputs.param("seed", cli.seed);
    inputs.param("tol", cli.tol);
    inputs.param("limit-n", cli.limit_n);
    let mut session = Session {
        seed: cli.seed,
        tol: cli.tol,
        limit_n: cli.limit_n,
        inputs,
        report: Report::new(name, Inputs::default()),
        tolerated: Vec::new(),
    };
    let start = Instant::now();
    match commands::dispatch(&cli.command, &mut session) {
        Ok(()) => {}
        Err(CliError::Verification(msg)) => session.report.check("error", Some(msg)),
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    }
    let Session { inputs, mut report, tolerated, .. } = session;
    report.inputs_digest = inputs.digest();
    if cli.timing {
        report.timing_ms = Some(start.elapsed().as_millis() as u64);
    }
    let text = match report.render() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    match &cli.report {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                return 2;
            }
        }
        None => print!("{text}"),
    }
    let unexpected = report.verdicts.iter().any(|c| !c.passed && !tolerated.contains(&c.check));
    i32::from(unexpected)
}
