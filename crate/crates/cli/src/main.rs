//! `cp-spectra`: sweeps, single-point evaluations and the validation suite.
//!
//! Exit status: 0 on success, 1 when `validate` finds a failing check,
//! 2 for unreadable or invalid configs and any other error.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cp_spectra::scenario::{detuning_reference, evaluate_point, parse_config, run_sweep, ScenarioConfig};
use cp_spectra::validate::validate;

#[derive(Parser)]
#[command(name = "cp-spectra", version, about = "Casimir-Polder rates and shifts of an atom moving between two plates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described in a config and write it as CSV
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Evaluate the configured transition once and print the result
    Point {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the invariant suite
    Validate,
}

const VALIDATION_FAILED: u8 = 1;
const CONFIG_ERROR: u8 = 2;

fn load(path: &Path) -> Result<ScenarioConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    parse_config(&text).map_err(|e| format!("{}:\n{e}", path.display()))
}

fn sweep(config: &Path, out: &Path) -> Result<(), String> {
    let cfg = load(config)?;
    let table = run_sweep(&cfg).map_err(|e| e.to_string())?;
    let file = File::create(out).map_err(|e| format!("cannot create {}: {e}", out.display()))?;
    let mut w = BufWriter::new(file);
    table
        .write_csv(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| format!("writing {}: {e}", out.display()))?;
    let failed = table.rows.iter().filter(|r| r.failed()).count();
    eprintln!(
        "{} sweep: {} rows -> {} (cfg={})",
        table.kind.name(),
        table.rows.len(),
        out.display(),
        table.config_hash
    );
    if failed > 0 {
        eprintln!("warning: {failed} rows failed; see the error= token in their flags column");
    }
    Ok(())
}

fn point(config: &Path) -> Result<(), String> {
    let cfg = load(config)?;
    let r = evaluate_point(&cfg).map_err(|e| e.to_string())?;
    println!("config hash        {}", cfg.hash());
    println!("omega_mn           {:.6e} rad/s", r.transition.omega_mn);
    println!("omega_tilde        {:.6e} rad/s", r.transition.omega_tilde);
    if let Ok(w) = detuning_reference(&cfg) {
        println!("detuning           {:.6e} rad/s (from {:.6e})", r.transition.omega_tilde - w, w);
    }
    println!("plate separation   {:.6e} m", r.setup.separation);
    println!("velocity           {:.6e} m/s", r.setup.velocity);
    println!("gamma induced      {:.6e} 1/s", r.gamma_induced);
    println!("gamma free space   {:.6e} 1/s", r.gamma_free);
    println!("enhancement        {:.6e}", r.enhancement);
    println!("resonant shift     {:.6e} rad/s", r.shift_res);
    let flags: Vec<&str> = r.flags.iter().map(|f| f.token()).collect();
    println!("flags              {}", if flags.is_empty() { "-".into() } else { flags.join(";") });
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep { config, out } => sweep(config, out),
        Command::Point { config } => point(config),
        Command::Validate => {
            let report = validate();
            println!("{report}");
            return if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(VALIDATION_FAILED)
            };
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(CONFIG_ERROR)
        }
    }
}
