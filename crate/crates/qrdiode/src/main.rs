//! Command-line front end for the nonreciprocal heat transport solver.
//!
//! Exit codes: 0 on success, 1 when some grid points failed (partial
//! results were still written), 2 on configuration or validation
//! errors.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qrdiode::runner::{
    convergence_check, run_figure, run_point, RunConfig, SweepGrid, SweepParam, CONVERGENCE_TOL,
};
use qrdiode::Error;

#[derive(Parser)]
#[command(
    name = "qrdiode",
    version,
    about = "Steady-state heat transport and photon detection for a \
             two-photon-coupled qubit-resonator diode and its two-qubit rivals"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a single steady-state point and print its observables.
    Steady {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
    },
    /// Sweep one parameter over an inclusive range, writing CSV + manifest.
    Sweep {
        /// TOML run configuration (base point for the unswept axes).
        #[arg(long)]
        config: PathBuf,
        /// Axis to sweep: T_L, T_R, theta, g, or omega_R.
        #[arg(long)]
        param: String,
        /// start:stop:count, strictly increasing, count >= 2.
        #[arg(long)]
        range: String,
    },
    /// Reproduce one figure's full data set (fig2 .. fig11).
    Figure {
        /// Figure id, e.g. fig2.
        #[arg(long)]
        id: String,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the heat current up a Fock-truncation ladder.
    Convergence {
        /// TOML run configuration.
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated truncations, strictly increasing.
        #[arg(long = "n-list")]
        n_list: String,
    },
    /// Rectification vs coupling for all four mechanisms (the fig10 set).
    CompareModels {
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if is_validation(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Configuration and input errors exit 2; runtime failures exit 1.
fn is_validation(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::InvalidParams(_)
            | Error::SpectralCollapse { .. }
            | Error::TruncationTooSmall { .. }
            | Error::UnknownUnitKind(_)
    )
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Steady { config } => steady(&config),
        Command::Sweep {
            config,
            param,
            range,
        } => sweep(&config, &param, &range),
        Command::Figure { id, out } => figure(&id, &out),
        Command::Convergence { config, n_list } => convergence(&config, &n_list),
        Command::CompareModels { out } => figure("fig10", &out),
    }
}

fn steady(config_path: &PathBuf) -> Result<ExitCode, Error> {
    let config = RunConfig::from_path(config_path)?;
    let out = run_point(&config)?;
    let rec = &out.record;
    println!("model      : {}", rec.params.kind_name());
    if let Some(n) = rec.n_fock {
        println!("n_fock     : {n}");
    }
    println!("T_L, T_R   : {}, {}", rec.t_l, rec.t_r);
    println!("q_L        : {:+.12e}", rec.q_l);
    println!("q_R        : {:+.12e}", rec.q_r);
    println!("q_f        : {:+.12e}", rec.q_f);
    println!("q_r        : {:+.12e}", rec.q_rev);
    match rec.rectification {
        Some(r) => println!("R          : {r:.12e}"),
        None => println!("R          : nan (forward and reverse currents cancel)"),
    }
    println!("D_f        : {:.12e}", rec.d_f);
    println!("D_r        : {:.12e}", rec.d_r);
    println!("gammaD_f   : {:.12e}", rec.gamma * rec.d_f);
    println!("gammaD_r   : {:.12e}", rec.gamma * rec.d_r);
    match rec.photon_asymmetry {
        Some(r) => println!("R_n        : {r:.12e}"),
        None => println!("R_n        : nan (detection rates cancel)"),
    }
    println!("residual   : {:.3e}", rec.residual);
    if let Some(oracle) = &out.oracle {
        println!(
            "oracle     : population L-inf {:.3e}, max offdiag {:.3e}",
            oracle.population_l_inf, oracle.max_offdiag
        );
    }
    if let Some(conv) = &out.convergence {
        match conv.converged_at {
            Some(n) => println!("auto n_fock: converged at {n}"),
            None => println!("auto n_fock: ladder did not settle; using the largest rung"),
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sweep(config_path: &PathBuf, param: &str, range: &str) -> Result<ExitCode, Error> {
    let config = RunConfig::from_path(config_path)?;
    let param = SweepParam::parse(param)?;
    let grid = SweepGrid::from_range(param, range)?;
    let dir = config.output.directory.clone();
    let (csv_path, failures) = qrdiode::runner::write_sweep(&config, &grid, &dir)?;
    println!("wrote {}", csv_path.display());
    if failures > 0 {
        eprintln!("{failures} of {} grid points failed; see the error column", grid.values.len());
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn figure(id: &str, out: &PathBuf) -> Result<ExitCode, Error> {
    let report = run_figure(id, out)?;
    for f in &report.files {
        println!("wrote {}", f.display());
    }
    if report.failures > 0 {
        eprintln!(
            "{} grid points failed across the set; see the error columns",
            report.failures
        );
        return Ok(ExitCode::from(1));
    }
    Ok(ExitCode::SUCCESS)
}

fn convergence(config_path: &PathBuf, n_list: &str) -> Result<ExitCode, Error> {
    let config = RunConfig::from_path(config_path)?;
    let ns: Result<Vec<usize>, Error> = n_list
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("bad truncation \"{s}\" in n-list")))
        })
        .collect();
    let report = convergence_check(&config, &ns?)?;
    println!("{:>8} {:>22} {:>14}", "n_fock", "q_L", "rel_change");
    for row in &report.rows {
        match row.relative_change {
            Some(rel) => println!("{:>8} {:>22.12e} {:>14.3e}", row.n_fock, row.q_l, rel),
            None => println!("{:>8} {:>22.12e} {:>14}", row.n_fock, row.q_l, "-"),
        }
    }
    match report.converged_at {
        Some(n) => {
            println!("converged at n_fock = {n} (threshold {CONVERGENCE_TOL:.0e})");
            Ok(ExitCode::SUCCESS)
        }
        None => {
            eprintln!(
                "not converged within the given ladder (threshold {CONVERGENCE_TOL:.0e})"
            );
            Ok(ExitCode::from(1))
        }
    }
}
