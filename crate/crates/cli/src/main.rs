use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use multislit::grid::Convention;
use multislit::validate::DEFAULT_SEED;
use multislit_cli::{cmd_eigenstate, cmd_simulate, cmd_sweep, cmd_validate, Failure, EXIT_CONFIG, EXIT_OK};

#[derive(Parser)]
#[command(name = "multislit", version, about = "Multi-slit, wire grating and lens interferometer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment pipeline and write stage tables.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Build a joint eigenstate and write it with its residuals.
    Eigenstate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Run the invariant suite; exit 1 if any check fails.
    Validate {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Deliberately break the Fourier kernel to confirm the suite notices.
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Rerun the pipeline over a list of values of one parameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// n_wires, wire_width, L, tprime or n_points
        #[arg(long)]
        param: String,
        /// Comma-separated numbers or ranges like 0..10 and 0..1:0.25
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Fault {
    FlippedKernel,
}

fn report(result: Result<(), Failure>) -> ExitCode {
    match result {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(f) => {
            eprintln!("multislit: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_CONFIG) } else { ExitCode::from(EXIT_OK) };
        }
    };
    match cli.command {
        Command::Simulate { config, out } => report(cmd_simulate(&config, &out).map(|s| {
            println!(
                "transmitted {:.6}  image leakage {:.6}  image distance {:.4}  eigenstate-model leakage {}",
                s.transmitted,
                s.image_leakage,
                s.image_distance,
                s.eigenstate_leakage.map_or("n/a".to_string(), |v| format!("{v:.6}"))
            );
            println!("wrote {}", out.display());
        })),
        Command::Eigenstate { config, out } => report(cmd_eigenstate(&config, &out).map(|s| {
            println!(
                "position residual {:.3e}  momentum residual {:.3e}  copies {}  tail {:.3e}",
                s.position_residual, s.momentum_residual, s.replicas, s.tail_fraction
            );
            println!("wrote {}", out.display());
        })),
        Command::Validate { seed, out, inject_fault } => {
            let convention = match inject_fault {
                Some(Fault::FlippedKernel) => Convention::FlippedKernel,
                None => Convention::Standard,
            };
            let (rep, status) = cmd_validate(seed, convention, out.as_deref());
            print!("{}", rep.table());
            println!("seed {seed}, {} checks in {:.2}s", rep.checks.len(), rep.seconds);
            report(status)
        }
        Command::Sweep { config, param, values, out } => report(cmd_sweep(&config, &param, &values, &out).map(|n| {
            println!("{n} runs, wrote {}", out.join("sweep.csv").display());
        })),
    }
}
