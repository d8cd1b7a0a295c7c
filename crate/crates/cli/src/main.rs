mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use report::{Format, Status};
use wplab::perms::AlphaLayout;

#[derive(Parser, Debug)]
#[command(name = "wplab", version, about = "Word problems of groups of computable permutations")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,
    /// Seed for randomized sweeps; recorded in every report.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce, invert, or take exponent sums of a word.
    Word {
        #[command(subcommand)]
        op: WordOp,
    },
    /// Decide whether a word over {b, s, t} is the identity.
    Decide(DecideArgs),
    /// Check the coding equation for a pair x, y.
    VerifyCode(VerifyArgs),
    /// Abelian invariants, isomorphism of abelianizations, strong diagonal.
    Abelian {
        #[command(subcommand)]
        op: AbelianOp,
    },
    /// Randomized and exhaustive property sweeps.
    Sweep {
        #[command(subcommand)]
        kind: SweepKind,
    },
}

#[derive(Subcommand, Debug)]
enum WordOp {
    Reduce {
        #[arg(allow_hyphen_values = true)]
        word: String,
    },
    Invert {
        #[arg(allow_hyphen_values = true)]
        word: String,
    },
    Expsum {
        /// Generator, e.g. `v` or `b[3]`.
        #[arg(long = "gen")]
        generator: String,
        #[arg(allow_hyphen_values = true)]
        word: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecideMode {
    Tt,
    Brute,
    Both,
}

#[derive(Args, Debug)]
struct DecideArgs {
    #[arg(allow_hyphen_values = true)]
    word: String,
    /// Emission schedule of the coded set; the empty schedule if omitted.
    #[arg(long)]
    schedule: Option<PathBuf>,
    /// Oracle answers `m 0|1` for tt mode; the schedule answers if omitted.
    #[arg(long)]
    oracle: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DecideMode::Tt)]
    mode: DecideMode,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct FunctionSource {
    /// `identity`, `trivial`, or `mod:K`.
    #[arg(long)]
    builtin: Option<String>,
    /// Table file: lines `x n value` and a `default` line.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    function: FunctionSource,
    x: u64,
    y: u64,
    #[arg(long, default_value_t = 64)]
    bound: u64,
    #[arg(long, value_enum, default_value_t = LayoutArg::Blocked)]
    layout: LayoutArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LayoutArg {
    Blocked,
    Packed,
}

impl From<LayoutArg> for AlphaLayout {
    fn from(l: LayoutArg) -> Self {
        match l {
            LayoutArg::Blocked => AlphaLayout::Blocked,
            LayoutArg::Packed => AlphaLayout::Packed,
        }
    }
}

#[derive(Subcommand, Debug)]
enum AbelianOp {
    Invariants { file: PathBuf },
    Iso { left: PathBuf, right: PathBuf },
    /// Strong diagonal of the given presentations, with its check.
    Diagonal { files: Vec<PathBuf> },
}

#[derive(Args, Debug, Clone)]
struct SweepCommon {
    /// Run cases one after another.
    #[arg(long)]
    sequential: bool,
    /// Write the first counterexample here.
    #[arg(long)]
    dump: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum SweepKind {
    /// decide against brute force on random words.
    Differential {
        #[arg(long, default_value_t = 1000)]
        cases: u64,
        /// One schedule; the three reference schedules if omitted.
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        max_len: usize,
        #[arg(long, default_value_t = 0.5)]
        zero_sigma: f64,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// m-reduction words against set membership.
    Mreduction {
        #[arg(long, default_value_t = 0)]
        lo: i64,
        #[arg(long, default_value_t = 200)]
        hi: i64,
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// The oracle is asked exactly the query set, whatever it answers.
    Queryset {
        #[arg(long, default_value_t = 500)]
        cases: u64,
        #[arg(long)]
        schedule: Option<PathBuf>,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// The coding equation on all pairs x, y <= max.
    Coding {
        #[command(flatten)]
        function: FunctionSource,
        #[arg(long, default_value_t = 30)]
        max: u64,
        #[arg(long, default_value_t = 64)]
        bound: u64,
        #[arg(long, value_enum, default_value_t = LayoutArg::Blocked)]
        layout: LayoutArg,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// Smith normal form invariants on random matrices.
    Snf {
        #[arg(long, default_value_t = 200)]
        cases: u64,
        #[arg(long, default_value_t = 6)]
        max_dim: usize,
        #[arg(long, default_value_t = 20)]
        max_entry: i64,
        #[command(flatten)]
        common: SweepCommon,
    },
    /// The strong diagonal check on random presentation sets.
    Diagonal {
        #[arg(long, default_value_t = 100)]
        cases: u64,
        #[command(flatten)]
        common: SweepCommon,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let report = match commands::run(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    if let Err(e) = report.emit(cli.format, cli.seed, cli.out.as_deref()) {
        eprintln!("error: {e:#}");
        return ExitCode::from(1);
    }
    match report.status {
        Status::Ok => ExitCode::SUCCESS,
        Status::Violation => ExitCode::from(2),
    }
}
