use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use mergo::{run, CliError, Command, Format, Options, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "mergo", about = "Heralded molecule assembly on a real-space grid")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Run configuration (JSON). Optional for `lz` and `cost`.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory [default: config `output.dir`, else `out`].
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Table format [default: config `output.format`, else csv].
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,

    /// `tree` only: repeat over this many consecutive seeds.
    #[arg(long, global = true)]
    sweep: Option<usize>,
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>, CliError> {
    let cfg = cli.config.as_deref().map(RunConfig::load).transpose()?;
    let output = cfg.as_ref().and_then(|c| c.output.clone());
    let config_dir = cli
        .config
        .as_ref()
        .and_then(|p| p.parent().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    let opts = Options {
        seed: cli.seed.or(cfg.as_ref().map(|c| c.seed)).unwrap_or(0),
        out: cli
            .out
            .clone()
            .or_else(|| output.as_ref().and_then(|o| o.dir.as_ref()).map(|d| config_dir.join(d)))
            .unwrap_or_else(|| PathBuf::from("out")),
        format: cli.format.or(output.and_then(|o| o.format)).unwrap_or(Format::Csv),
        config_dir,
        sweep: cli.sweep,
    };
    run(cli.command, cfg.as_ref(), &opts)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.record());
            ExitCode::from(e.exit_code())
        }
    }
}
