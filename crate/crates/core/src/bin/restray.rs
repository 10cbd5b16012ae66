use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use restray::harness::commands::{self, exit_code, DOPPLER_FILE, FS_FILE, MOMENT_FILE};
use restray::harness::PipelineConfig;
use restray::Result;

#[derive(Parser)]
#[command(name = "restray", version, about = "Vector field tomography from Doppler and moment data on a curve")]
struct Cli {
    /// TOML configuration; defaults are used when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (also where inputs are looked up).
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Write intermediate fields of the full reconstruction.
    #[arg(long, global = true)]
    dump_stages: bool,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sample the configured phantom.
    Phantom,
    /// Doppler and moment sinograms of the phantom or of a field file.
    Forward {
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Solenoidal part from the Doppler sinogram.
    ReconSol {
        #[arg(long)]
        doppler: Option<PathBuf>,
    },
    /// Whole field from the solenoidal part and the moment sinogram.
    ReconFull {
        #[arg(long)]
        fs: Option<PathBuf>,
        #[arg(long)]
        moment: Option<PathBuf>,
    },
    /// Monte-Carlo check of the curve condition.
    CheckKt,
    /// Run the invariant suite; exit code 1 when a gating check fails.
    Verify,
    /// Summarize reports in the output directory.
    Report {
        /// Refinement levels of a convergence study (0 = none).
        #[arg(long, default_value_t = 0)]
        levels: usize,
    },
}

fn or_default(p: &Option<PathBuf>, out: &Path, name: &str) -> PathBuf {
    p.clone().unwrap_or_else(|| out.join(name))
}

fn run(cli: &Cli) -> Result<bool> {
    let mut cfg = match &cli.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::from_toml_str("")?,
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    cfg.dump_stages |= cli.dump_stages;
    let out = &cli.out;
    std::fs::create_dir_all(out)?;
    std::fs::write(out.join("config.toml"), cfg.to_toml_string()?)?;
    match &cli.command {
        Command::Phantom => {
            for p in commands::cmd_phantom(&cfg, out)? {
                println!("{}", p.display());
            }
        }
        Command::Forward { input } => {
            commands::cmd_forward(&cfg, input.as_deref(), out)?;
        }
        Command::ReconSol { doppler } => {
            let (_, rep) = commands::cmd_recon_sol(&cfg, &or_default(doppler, out, DOPPLER_FILE), out)?;
            print!("{}", rep.to_text());
        }
        Command::ReconFull { fs, moment } => {
            let (_, rep) =
                commands::cmd_recon_full(&cfg, &or_default(fs, out, FS_FILE), &or_default(moment, out, MOMENT_FILE), out)?;
            print!("{}", rep.to_text());
        }
        Command::CheckKt => {
            let rep = commands::cmd_check_kt(&cfg, out)?;
            println!("{}", serde_json::to_string_pretty(&rep)?);
        }
        Command::Verify => {
            let rep = commands::cmd_verify(&cfg, out)?;
            print!("{}", rep.to_text());
            return Ok(rep.passed);
        }
        Command::Report { levels } => {
            let (summary, _) = commands::cmd_report(&cfg, out, *levels)?;
            print!("{summary}");
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e) as u8)
        }
    }
}
