use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ergopart_cli::runner::{self, LogBase, RunOptions};
use ergopart_cli::{plot, CliError, ExperimentConfig};

#[derive(Parser)]
#[command(name = "ergopart", version, about = "Entropy and complexity profiles of partitions under group actions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Overrides the config seed.
    #[arg(long, env = "ERGOPART_SEED")]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "ERGOPART_OUT", default_value = "out")]
    out: PathBuf,
    /// Display base for entropy values.
    #[arg(long, value_enum, default_value_t = LogBase::Nat)]
    log_base: LogBase,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    /// Fill the wall_time_ms column (outputs are then no longer byte-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and write its CSV and JSON files.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run two experiments and print their verdicts side by side.
    Compare {
        config_a: PathBuf,
        config_b: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Merge profile CSV files into one long-format table.
    EmitPlotData {
        files: Vec<PathBuf>,
        /// Output file (default: OUT/plot_data.csv).
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, env = "ERGOPART_OUT", default_value = "out")]
        out: PathBuf,
    },
    /// Parse and check a config without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

impl Common {
    fn options(&self) -> Result<RunOptions, CliError> {
        if let Some(t) = self.threads {
            rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build_global()
                .map_err(|e| CliError::config(format!("--threads: {e}")))?;
        }
        Ok(RunOptions { seed: self.seed, out_dir: self.out.clone(), log_base: self.log_base, timing: self.timing })
    }
}

fn write(path: &PathBuf, text: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, text).map_err(|e| CliError::io(format!("{}: {e}", path.display())))
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, common } => {
            let opts = common.options()?;
            let cfg = ExperimentConfig::load(&config)?;
            let (out, csv, json) = runner::run(&cfg, &opts)?;
            println!("{}: {} rows, verdict {}", out.name, out.records.len(), out.verdict);
            println!("wrote {} and {}", csv.display(), json.display());
        }
        Command::Compare { config_a, config_b, common } => {
            let opts = common.options()?;
            let a = ExperimentConfig::load(&config_a)?;
            let b = ExperimentConfig::load(&config_b)?;
            let cmp = runner::compare(&a, &b, &opts)?;
            print!("{}", cmp.table());
            println!("same verdict: {}", cmp.same_verdict());
            let path = opts.out_dir.join(format!("compare_{}_{}.csv", a.name, b.name));
            write(&path, &cmp.csv())?;
            println!("wrote {}", path.display());
        }
        Command::EmitPlotData { files, output, out } => {
            let table = plot::emit_plot_data(&files)?;
            let path = output.unwrap_or_else(|| out.join("plot_data.csv"));
            write(&path, &table)?;
            println!("wrote {}", path.display());
        }
        Command::Validate { config } => {
            let cfg = ExperimentConfig::load(&config)?;
            println!("{}: ok ({})", cfg.name, cfg.quantity.as_str());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
