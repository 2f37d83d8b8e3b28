use aht_lab::commands::{run, Command};
use aht_lab::ExperimentConfig;
use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;

/// Numerical laboratory for the AHT transport equation.
///
/// Exit status: 0 all gates pass, 1 a gate failed, 2 bad configuration,
/// 3 numerical error, 4 output error.
#[derive(Parser, Debug)]
#[command(name = "aht", version = aht_lab::VERSION)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// Experiment file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config's `output.dir`, then
    /// `out/<command>`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the seed of a random preset.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = ExperimentConfig::load(&cli.config).and_then(|mut cfg| {
        if let Some(s) = cli.seed {
            cfg.override_seed(s);
        }
        let out = cli.out.clone().or(cfg.output.dir.clone()).unwrap_or_else(|| PathBuf::from("out").join(cli.command.name()));
        run(cli.command, &cfg, &out).map(|r| (r, out))
    });
    match result {
        Ok((rep, out)) => {
            if !cli.quiet {
                print!("{}", rep.summary());
                println!("wrote {} files to {}", rep.files.len(), out.display());
            }
            ExitCode::from(if rep.passed() { 0 } else { 1 })
        }
        Err(e) => {
            eprintln!("aht: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
