use clap::{Args, Parser, Subcommand};
use rydsim_cli::{parse_config, run, verify, CliError, Command};
use std::path::PathBuf;
use std::process::ExitCode;

/// Rydberg-EIT nonlinear and quantum optics simulator.
#[derive(Parser)]
#[command(name = "rydsim", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    config: PathBuf,
    /// Output directory (overrides `output` in the config).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Seed (overrides `seed` in the config).
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Linear susceptibility and transmission spectrum.
    Spectrum(RunArgs),
    /// Monte Carlo blockade scaling over densities.
    Mc(RunArgs),
    /// Split-step propagation of a transverse beam.
    Propagate(RunArgs),
    /// Two-photon relative-coordinate evolution.
    TwoPhoton(RunArgs),
    /// Single-photon source density matrix.
    Source(RunArgs),
    /// Single-photon switch transmission.
    Switch(RunArgs),
    /// Photon-photon gate phase and fidelity.
    Gate(RunArgs),
    /// Run the acceptance suite twice and compare the manifests.
    Verify {
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value = "rydsim-out/verify")]
        out: PathBuf,
    },
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("RYDSIM_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("RYDSIM_THREADS = {v:?} must be a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn job(cmd: Command, args: RunArgs) -> Result<(), CliError> {
    let mut cfg = parse_config(&args.config, cmd)?;
    if let Some(out) = args.out {
        cfg.output = out;
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let m = run(&cfg)?;
    println!("{}: wrote {} files to {}", cmd, m.files.len() + 1, cfg.output.display());
    Ok(())
}

fn main() -> ExitCode {
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Spectrum(a) => job(Command::Spectrum, a),
        Cmd::Mc(a) => job(Command::Mc, a),
        Cmd::Propagate(a) => job(Command::Propagate, a),
        Cmd::TwoPhoton(a) => job(Command::TwoPhoton, a),
        Cmd::Source(a) => job(Command::Source, a),
        Cmd::Switch(a) => job(Command::Switch, a),
        Cmd::Gate(a) => job(Command::Gate, a),
        Cmd::Verify { seed, out } => verify(seed, &out, |r| println!("{}", r.line())).and_then(|o| {
            println!(
                "determinism: manifests of {} and {} {}",
                out.join("run1").display(),
                out.join("run2").display(),
                if o.identical { "identical" } else { "DIFFER" }
            );
            let failed = o.reports.iter().filter(|r| !r.passed()).count();
            if o.passed() {
                Ok(())
            } else {
                Err(CliError::Verify(format!(
                    "{failed} of {} criteria failed{}; details in {}",
                    o.reports.len(),
                    if o.identical { "" } else { " and the two runs differ" },
                    out.join("summary.txt").display()
                )))
            }
        }),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
