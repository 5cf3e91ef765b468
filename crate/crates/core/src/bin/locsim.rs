use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use locsim::aggregation::{Format, Mode};
use locsim::cli::{self, AttackArgs, LengthRange};
use locsim::Error;

#[derive(Parser)]
#[command(name = "locsim", version, about = "Simulate memory-scan attacks on encoded game resources")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a game and write a dump archive.
    Generate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run one pruning logic over selected scan sequences of an archive.
    Attack {
        #[arg(long)]
        archive: PathBuf,
        #[arg(long)]
        logic: String,
        #[arg(long)]
        mode: String,
        /// Selection policy as a JSON file or inline JSON.
        #[arg(long)]
        policy: String,
        /// Scan counts, e.g. `1..8`.
        #[arg(long)]
        n: String,
        #[arg(long, default_value_t = 1000)]
        cap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Statistical criteria, e.g. `top_k=100,threshold=0.9,score_drop=0.2`.
        #[arg(long)]
        criteria: Option<String>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a full attack matrix and write reports.
    Campaign {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Aggregate trace files into reports.
    Report {
        #[arg(long)]
        traces: PathBuf,
        #[arg(long, default_value = "csv,json,svg")]
        formats: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Generate { config, out, seed } => {
            let summary = cli::cmd_generate(&config, &out, seed)?;
            println!("archive: {}", out.display());
            print!("{summary}");
        }
        Command::Attack { archive, logic, mode, policy, n, cap, seed, criteria, out } => {
            let args = AttackArgs {
                archive,
                logic: cli::parse_logic(&logic)?,
                mode: mode.parse::<Mode>()?,
                policy: cli::parse_policy(&policy)?,
                lengths: n.parse::<LengthRange>()?,
                cap,
                seed,
                criteria: criteria.as_deref().map(cli::parse_criteria).transpose()?.unwrap_or_default(),
                threads: cli::thread_count(1)?,
                out_dir: out,
            };
            let count = cli::cmd_attack(&args)?;
            println!("{count} traces written to {}", args.out_dir.join(cli::TRACES_FILE).display());
        }
        Command::Campaign { config, out } => {
            let outcome = cli::cmd_campaign(&config, out.as_deref())?;
            for cell in &outcome.empty_cells {
                eprintln!("warning: no conforming subsequence for {cell}; row omitted");
            }
            for f in &outcome.files {
                println!("{}", f.display());
            }
            if !outcome.empty_cells.is_empty() {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Report { traces, formats, out } => {
            let formats = Format::parse_list(&formats)?;
            for f in cli::cmd_report(&traces, &formats, &out)? {
                println!("{}", f.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_config() { 2 } else { 3 })
        }
    }
}
