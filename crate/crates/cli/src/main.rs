use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qmon_cli::{InputError, Outcome, RunOverrides};
use qmon_core::check::{CheckConfig, Suite};
use qmon_core::compose::Mode;

#[derive(Parser)]
#[command(name = "qmon", version, about = "Quantitative LTLf reward monitors")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Boolean,
    Quantitative,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Boolean => Mode::Boolean,
            ModeArg::Quantitative => Mode::Quantitative,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Oracle,
    Linearity,
    Crisp,
    Veto,
    All,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a monitor and write it as JSON and Graphviz DOT.
    Compile {
        formula: String,
        #[arg(long, value_enum, default_value = "quantitative")]
        mode: ModeArg,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Run a monitor over a JSONL trace next to the reference semantics.
    Eval {
        formula: String,
        trace: PathBuf,
        #[arg(long, value_enum, default_value = "quantitative")]
        mode: ModeArg,
    },
    /// Train agents as described by a TOML experiment file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, allow_hyphen_values = true)]
        zeta: Option<f64>,
    },
    /// Run randomised property suites over synthesised monitors.
    Check {
        #[arg(value_enum, default_value = "all")]
        suite: SuiteArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        cases: Option<usize>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    let res = match cli.cmd {
        Cmd::Compile { formula, mode, out: dir } => qmon_cli::compile(&formula, mode.into(), &dir, &mut out),
        Cmd::Eval { formula, trace, mode } => qmon_cli::eval(&formula, &trace, mode.into(), &mut out),
        Cmd::Run { config, out: dir, workers, seed, zeta } => {
            let over = RunOverrides { out: dir, workers, seed, zeta };
            qmon_cli::run(&config, &over, &mut out)
        }
        Cmd::Check { suite, seed, cases } => {
            let suites = match suite {
                SuiteArg::Oracle => vec![Suite::Oracle],
                SuiteArg::Linearity => vec![Suite::Linearity],
                SuiteArg::Crisp => vec![Suite::Crisp],
                SuiteArg::Veto => vec![Suite::Veto],
                SuiteArg::All => Suite::ALL.to_vec(),
            };
            let mut cfg = CheckConfig { seed, ..CheckConfig::default() };
            if let Some(n) = cases {
                cfg.cases = n;
            }
            qmon_cli::check(&suites, &cfg, &mut out)
        }
    };
    match res {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::PropertyFailure) => ExitCode::from(1),
        Err(e) => {
            if e.downcast_ref::<InputError>().is_some() {
                eprintln!("error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(2)
        }
    }
}
