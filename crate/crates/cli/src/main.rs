//! `bestprox` command-line front end.
//!
//! Exit codes: 0 when everything checked holds, 1 when a violation was found
//! (a witness file is written), 2 for input errors.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::Failure;

#[derive(Parser, Debug)]
#[command(name = "bestprox", version, about = "Cyclic contractions on metric spaces with a graph")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Reject unknown JSON fields instead of warning about them.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Where to write the report; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Where to write the witness on a violation.
    #[arg(long, global = true, default_value = "witness.json")]
    pub witness: PathBuf,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the standing hypotheses and the contraction inequalities.
    Verify(VerifyArgs),
    /// Follow the even orbit to a best proximity point.
    SolveBpp(BppArgs),
    /// Alternate a map pair to a common fixed point.
    SolveFixedPoint(FixedPointArgs),
    /// Picard iteration for a periodic boundary value problem.
    SolvePbvp(PbvpArgs),
    /// Rebuild a worked example and compare against its expected results.
    Reproduce(ReproduceArgs),
    /// Write a worked example's input files.
    Export(ExportArgs),
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiModeArg {
    Basic,
    Strengthened,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Cyclic map; checked against `phi1`/`phi2` from the gauges file.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Map pair `{t1, t2}`; checked against `psi` from the gauges file.
    #[arg(long)]
    pub pair: Option<PathBuf>,
    #[arg(long)]
    pub gauges: Option<PathBuf>,
    /// Check every pair, ignoring the graph.
    #[arg(long)]
    pub all_pairs: bool,
    #[arg(long, value_enum, default_value_t = PsiModeArg::Basic)]
    pub psi_mode: PsiModeArg,
    /// Slack on the inequalities.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Count excesses within `tol` as violations too.
    #[arg(long)]
    pub strict_inequality: bool,
    /// Label whose pairs are skipped, e.g. a cut-off level; repeatable.
    #[arg(long)]
    pub exclude: Vec<String>,
    /// Report failed hypotheses without failing on them.
    #[arg(long)]
    pub no_check_hypotheses: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct BppArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub map: PathBuf,
    /// When given, the contraction is verified before solving.
    #[arg(long)]
    pub gauges: Option<PathBuf>,
    /// Start label in `A`.
    #[arg(long)]
    pub x0: String,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Label skipped by the contraction check; repeatable.
    #[arg(long)]
    pub exclude: Vec<String>,
    #[arg(long)]
    pub no_check_hypotheses: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct FixedPointArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Map pair `{t1, t2}`; alternatively `--t1` and `--t2`.
    #[arg(long, conflicts_with_all = ["t1", "t2"])]
    pub pair: Option<PathBuf>,
    #[arg(long, requires = "t2")]
    pub t1: Option<PathBuf>,
    #[arg(long, requires = "t1")]
    pub t2: Option<PathBuf>,
    /// Gauges file with a `psi` entry.
    #[arg(long, alias = "gauges")]
    pub psi: PathBuf,
    #[arg(long)]
    pub x0: String,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum, default_value_t = PsiModeArg::Basic)]
    pub psi_mode: PsiModeArg,
    #[arg(long)]
    pub no_check_hypotheses: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct PbvpArgs {
    /// Problem file; the inline flags below override its fields.
    #[arg(long)]
    pub problem: Option<PathBuf>,
    /// Right-hand side as JSON, e.g. `{"kind":"exp_linear","c":-1.0}`.
    #[arg(long)]
    pub rhs: Option<String>,
    /// Second right-hand side; switches to the common-solution solver.
    #[arg(long)]
    pub rhs2: Option<String>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Comparison function as JSON, e.g. `{"kind":"exp_gap"}`.
    #[arg(long)]
    pub h: Option<String>,
    #[arg(long = "T")]
    pub period: Option<f64>,
    #[arg(long = "N")]
    pub nodes: Option<usize>,
    /// `const:<value>` or a JSON array of node values.
    #[arg(long, allow_hyphen_values = true)]
    pub w0: Option<String>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    /// Where to write the report when `--out` receives the CSV.
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub no_check_hypotheses: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ReproduceArgs {
    /// One of ex22_kappa, ex33_dyadic_l1, ex35_not_bpo, ex41_fixed_point, ex53_pbvp.
    pub example: String,
    /// `key=value` overrides: truncation, depth, nodes.
    #[arg(long, num_args = 1..)]
    pub params: Vec<String>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Args, Debug)]
pub struct ExportArgs {
    pub example: String,
    #[arg(long, num_args = 1..)]
    pub params: Vec<String>,
    /// Output directory, created if needed.
    #[arg(long)]
    pub dir: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let (result, common) = match &cli.command {
        Command::Verify(a) => (commands::verify(a), &a.common),
        Command::SolveBpp(a) => (commands::solve_bpp(a), &a.common),
        Command::SolveFixedPoint(a) => (commands::solve_fixed_point(a), &a.common),
        Command::SolvePbvp(a) => (commands::solve_pbvp(a), &a.common),
        Command::Reproduce(a) => (commands::reproduce(a), &a.common),
        Command::Export(a) => (commands::export(a), &a.common),
    };
    output::finish(result, common)
}

pub type Outcome = Result<output::Success, Failure>;
