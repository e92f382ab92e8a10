use std::process::ExitCode;

use clap::Parser;

use holodecode_bench::config::{Cli, Command};
use holodecode_bench::{emit_csv, run_sweep};

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Sweep(args) => {
            let (cfg, out) = args.resolve()?;
            if !cfg.ebn0s.is_empty() && !cfg.kappas.is_empty() {
                eprintln!("warning: noise combined with clipping is experimental (clip, rescale, then noise)");
            }
            let records = run_sweep(&cfg)?;
            emit_csv(&records, &out)?;
            eprintln!("wrote {} rows to {}", records.len(), out.display());
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
