mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use commands::Outcome;

#[derive(Parser, Debug)]
#[command(name = "sphdesign", version, about = "Exact verification of spherical designs of minimal type")]
struct Cli {
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Write a run manifest (arguments, input digests, verdict, witnesses).
    #[arg(long, global = true, value_name = "FILE")]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Input {
    /// Built-in configuration.
    #[arg(long, value_name = "NAME", conflicts_with = "config", required_unless_present = "config")]
    pub catalog: Option<String>,
    /// Configuration file.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design strength, tightness and packing bounds.
    Verify {
        #[command(flatten)]
        input: Input,
        /// Highest degree checked.
        #[arg(long, default_value_t = 8)]
        t_max: usize,
        /// Exit 1 when the strength is below this.
        #[arg(long)]
        min_strength: Option<usize>,
    },
    /// Derived codes along a certificate vector.
    Derive {
        #[command(flatten)]
        input: Input,
        /// Certificate file; the stored one is used otherwise.
        #[arg(long, value_name = "FILE")]
        certificate: Option<PathBuf>,
        /// `minimal` (levels 0, ±1) or `unit` (any direction).
        #[arg(long, default_value = "minimal")]
        mode: String,
        /// Directory for one config file per level.
        #[arg(long, value_name = "DIR")]
        out: Option<PathBuf>,
    },
    /// Minimal-type pipeline: filters, certificates, searches.
    Certify {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "FILE")]
        certificate: Option<PathBuf>,
        /// Enumerate integer vectors of this squared norm.
        #[arg(long, value_name = "NORM2")]
        exhaustive_grid: Option<u32>,
        #[arg(long, default_value_t = sphdesign::minimaltype::DEFAULT_GRID_BUDGET)]
        budget: u64,
        #[arg(long)]
        skip_structured: bool,
        /// Save a found certificate.
        #[arg(long, value_name = "FILE")]
        save_certificate: Option<PathBuf>,
    },
    /// List the built-in configurations, or print one.
    Catalog {
        name: Option<String>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Decomposition, lift, packing, graph and coherent configuration.
    Structure {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_name = "FILE")]
        certificate: Option<PathBuf>,
    },
    /// Dimension filter table for d = (2m+1)^2 - 2.
    Dims {
        #[arg(long)]
        max_m: u64,
        #[arg(long, default_value = "thm37")]
        variant: String,
    },
    /// Count of admissible m up to x against the predicted density.
    Density {
        #[arg(long)]
        max_x: u64,
        #[arg(long, default_value = "thm38")]
        variant: String,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let args: Vec<String> = std::env::args().skip(1).collect();
    let start = Instant::now();
    let mut digests = Vec::new();
    let result = match &cli.command {
        Command::Verify { input, t_max, min_strength } => commands::verify(input, *t_max, *min_strength, &mut digests),
        Command::Derive { input, certificate, mode, out } => {
            commands::derive(input, certificate.as_deref(), mode, out.as_deref(), &mut digests)
        }
        Command::Certify { input, certificate, exhaustive_grid, budget, skip_structured, save_certificate } => {
            commands::certify(
                input,
                certificate.as_deref(),
                exhaustive_grid.map(|n| (n, *budget)),
                *skip_structured,
                save_certificate.as_deref(),
                &mut digests,
            )
        }
        Command::Catalog { name, out } => commands::catalog(name.as_deref(), out.as_deref()),
        Command::Structure { input, certificate } => commands::structure(input, certificate.as_deref(), &mut digests),
        Command::Dims { max_m, variant } => commands::dims(*max_m, variant),
        Command::Density { max_x, variant } => commands::density(*max_x, variant),
    };
    let outcome = match result {
        Ok(o) => o,
        Err(e) => Outcome::input_error(format!("{e:#}")),
    };
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&outcome.json).expect("reports serialize"));
    } else {
        print!("{}", outcome.text);
    }
    if outcome.exit == 3 {
        eprintln!("error: {}", outcome.verdict);
    }
    if let Some(path) = &cli.manifest {
        let m = manifest::RunManifest::new(&cli_name(&cli.command), args, digests, &outcome, start.elapsed());
        if let Err(e) = m.write(path) {
            eprintln!("error: cannot write manifest {}: {e}", path.display());
            return ExitCode::from(3);
        }
    }
    ExitCode::from(outcome.exit as u8)
}

fn cli_name(c: &Command) -> String {
    match c {
        Command::Verify { .. } => "verify",
        Command::Derive { .. } => "derive",
        Command::Certify { .. } => "certify",
        Command::Catalog { .. } => "catalog",
        Command::Structure { .. } => "structure",
        Command::Dims { .. } => "dims",
        Command::Density { .. } => "density",
    }
    .to_string()
}
