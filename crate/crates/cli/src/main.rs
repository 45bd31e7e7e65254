use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fbsim_cli::{CliError, CliResult, PresetOptions, ResultRow, PRESETS};

#[derive(Parser)]
#[command(name = "fbsim", version, about = "MU-MIMO limited-feedback simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a named experiment bundle.
    Preset {
        /// Preset name; `fbsim list` shows them.
        name: String,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = fbsim_cli::config::DEFAULT_TRIALS)]
        trials: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run an experiment file; `--key value` pairs override its fields.
    Run {
        config: PathBuf,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        overrides: Vec<String>,
    },
    /// List the presets.
    List,
}

fn init_threads() -> CliResult<()> {
    let Ok(value) = std::env::var("FBSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = value.parse().map_err(|_| {
        CliError::Config(format!(
            "FBSIM_THREADS must be a positive integer, got '{value}'"
        ))
    })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Config(format!("cannot start {n} worker threads: {e}")))
}

fn print_rows(rows: &[ResultRow]) {
    println!(
        "{:<28} {:>3} {:>6} {:>5} {:>4} {:>5} {:>9} {:>8}",
        "scheme", "nt", "snr_db", "tfb", "b", "users", "rate", "se"
    );
    for r in rows {
        println!(
            "{:<28} {:>3} {:>6} {:>5} {:>4} {:>5} {:>9.4} {:>8.4}",
            r.scheme, r.nt, r.snr_db, r.tfb, r.b, r.users, r.mean_rate, r.std_error
        );
    }
}

fn run(cli: Cli) -> CliResult<()> {
    init_threads()?;
    match cli.command {
        Command::List => {
            for p in PRESETS {
                println!("{:<20} {}", p.name, p.description);
            }
        }
        Command::Preset {
            name,
            seed,
            trials,
            out,
        } => {
            if trials == 0 {
                return Err(CliError::Config("--trials must be >= 1".into()));
            }
            let (rows, written) =
                fbsim_cli::run_preset(&name, &PresetOptions { seed, trials }, &out)?;
            print_rows(&rows);
            println!(
                "wrote {} and {}",
                written.csv.display(),
                written.svg.display()
            );
        }
        Command::Run { config, overrides } => {
            let (cfg, rows, written) = fbsim_cli::run_file(&config, &overrides)?;
            let e = &cfg.experiment;
            println!(
                "scheme={} nt={} snr_db={} tfb={} trials={} seed={} quantizer={} cqi={}",
                e.scheme, e.nt, cfg.snr_db, e.tfb, e.trials, e.seed, e.quantizer, e.cqi_kind
            );
            print_rows(&rows);
            println!(
                "wrote {} and {}",
                written.csv.display(),
                written.svg.display()
            );
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
