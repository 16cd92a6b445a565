use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use matwave::config::ExperimentConfig;
use matwave::harness;

/// Exit codes: 0 success, 1 tolerance failure, 2 usage or config error.
#[derive(Parser)]
#[command(name = "matwave", version, about = "Matrix-space wavelet, Riesz and Radon experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.dir` of the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Print the constants of the configured setup.
    Constants {
        #[command(flatten)]
        common: Common,
    },
    /// Run identity suites (all of them without --suite) and emit assertion CSV.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: Option<String>,
    },
    /// Apply a forward or dual transform to the configured phantom.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long, alias = "transform")]
        method: String,
    },
    /// Run a reconstruction over the configured truncation schedule.
    Invert {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: String,
    },
}

fn load(common: &Common) -> Result<(ExperimentConfig, PathBuf), matwave::Error> {
    let cfg = ExperimentConfig::load(&common.config)?;
    let out = common.out.clone().unwrap_or_else(|| cfg.out_dir.clone());
    Ok((cfg, out))
}

fn run(cli: Cli) -> Result<bool, matwave::Error> {
    match cli.command {
        Command::Constants { common } => {
            let (cfg, _) = load(&common)?;
            print!("{}", harness::render_constants(&cfg));
            if let Some(p) = harness::store_wavelet_constants(&cfg)? {
                println!("constants stored in {}", p.display());
            }
            Ok(true)
        }
        Command::Verify { common, suite } => {
            let (cfg, out) = load(&common)?;
            let rows = harness::verify(&cfg, suite.as_deref())?;
            let mut csv = Vec::new();
            harness::write_assertions_csv(&rows, &mut csv)?;
            std::fs::create_dir_all(&out)?;
            std::fs::write(out.join(format!("verify_{}.csv", suite.as_deref().unwrap_or("all"))), &csv)?;
            print!("{}", String::from_utf8_lossy(&csv));
            Ok(harness::all_pass(&rows))
        }
        Command::Transform { common, method } => {
            let (cfg, out) = load(&common)?;
            let t = harness::transform(&cfg, &method, &out)?;
            for f in &t.files {
                println!("wrote {}", f.display());
            }
            println!("l2_norm {:.17e}", t.summary.l2_norm);
            println!("max_abs {:.17e}", t.summary.max_abs);
            if let Some(d) = t.closed_form_deviation {
                println!("closed_form_max_deviation {d:.3e}");
            }
            Ok(true)
        }
        Command::Invert { common, method } => {
            let (cfg, out) = load(&common)?;
            let r = harness::invert(&cfg, &method, &out)?;
            for f in &r.files {
                println!("wrote {}", f.display());
            }
            println!("{}", r.summary_line(&method));
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
