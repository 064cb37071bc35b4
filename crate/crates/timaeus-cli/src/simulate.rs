//! Simulation runs: per-step CSV, manifests, and the conservation audit.

use std::fmt::Write as _;
use std::path::Path;

use timaeus::{init_grid, CosmosGrid, SimConfig, StepReport};

use crate::manifest::{manifest_path, now_rfc3339, RunManifest};

pub const HEADER: &str = "step,fire,air,water,earth,shattered,reassembled,\
                          max_slack_fraction,mean_rho_fire,mean_rho_air,mean_rho_water,mean_rho_earth";

/// Why a command failed; each variant maps to one documented exit code.
pub enum RunFailure {
    /// Bad arguments, unreadable config, unwritable output. Exit 2.
    Usage(String),
    /// The void fixpoint left too many cells flagged. Exit 3.
    Diverged(String),
    /// The audit caught a broken triangle ledger. Exit 4.
    Conservation(String),
}

/// Reals carry nine significant digits so golden files survive refactors:
/// one leading digit plus eight fractional, round half to even.
pub fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

fn csv_row(report: &StepReport) -> String {
    let mut row = String::new();
    let inv = &report.populations;
    let _ = write!(
        row,
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        report.step,
        inv.fire,
        inv.air,
        inv.water,
        inv.earth,
        report.shattered,
        report.reassembled,
        sig9(report.max_slack_fraction),
        sig9(report.mean_rho[0]),
        sig9(report.mean_rho[1]),
        sig9(report.mean_rho[2]),
        sig9(report.mean_rho[3]),
    );
    row
}

/// Seed precedence: command line, then the TIMAEUS_SEED environment
/// variable, then whatever the config file says.
pub fn resolve_seed(cli_seed: Option<u64>) -> Result<Option<u64>, RunFailure> {
    if cli_seed.is_some() {
        return Ok(cli_seed);
    }
    match std::env::var("TIMAEUS_SEED") {
        Ok(raw) => raw.trim().parse::<u64>().map(Some).map_err(|_| {
            RunFailure::Usage(format!(
                "TIMAEUS_SEED must be an unsigned integer, got {raw:?}"
            ))
        }),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(RunFailure::Usage(format!("TIMAEUS_SEED is unreadable: {e}"))),
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<SimConfig, RunFailure> {
    let mut config = SimConfig::from_path(path)
        .map_err(|e| RunFailure::Usage(format!("config {}: {e}", path.display())))?;
    if let Some(seed) = seed {
        config.dynamics.rng_seed = seed;
    }
    Ok(config)
}

fn build_grid(config: &SimConfig) -> Result<CosmosGrid, RunFailure> {
    init_grid(config).map_err(|e| RunFailure::Usage(e.to_string()))
}

fn divergence_dump(grid: &CosmosGrid, err: impl std::fmt::Display) -> String {
    let mut dump = format!("{err}\n");
    let eps = grid.config().dynamics.slack_tolerance;
    for (idx, cell) in grid.cells().iter().enumerate() {
        let slack = grid.slack_fraction(idx);
        if slack > eps {
            let _ = writeln!(
                dump,
                "  flagged cell (rho {}, z {}): slack {} of capacity {}",
                cell.rho_index,
                cell.z_index,
                sig9(slack),
                sig9(cell.capacity),
            );
        }
    }
    dump
}

/// Steps the grid `steps` times, collecting CSV rows. On failure the rows
/// so far are kept so the caller can still write a truncated series.
fn drive(
    grid: &mut CosmosGrid,
    steps: u64,
    mut on_step: impl FnMut(&mut CosmosGrid, &StepReport) -> Result<(), RunFailure>,
) -> (Vec<String>, Option<RunFailure>) {
    let mut rows = Vec::new();
    for _ in 0..steps {
        match grid.step() {
            Ok(report) => {
                rows.push(csv_row(&report));
                if let Err(failure) = on_step(grid, &report) {
                    return (rows, Some(failure));
                }
            }
            Err(err) => {
                let message = divergence_dump(grid, &err);
                return (rows, Some(RunFailure::Diverged(message)));
            }
        }
    }
    (rows, None)
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunFailure> {
    std::fs::write(path, contents)
        .map_err(|e| RunFailure::Usage(format!("cannot write {}: {e}", path.display())))
}

pub fn run(
    config_path: &Path,
    steps: u64,
    out: &Path,
    cli_seed: Option<u64>,
) -> Result<(), RunFailure> {
    let started_at = now_rfc3339();
    let seed = resolve_seed(cli_seed)?;
    let config = load_config(config_path, seed)?;
    let mut grid = build_grid(&config)?;

    let (rows, failure) = drive(&mut grid, steps, |_, _| Ok(()));
    let mut csv = String::from(HEADER);
    csv.push('\n');
    for row in &rows {
        csv.push_str(row);
        csv.push('\n');
    }
    write_file(out, &csv)?;

    let manifest_file = manifest_path(out);
    let manifest = RunManifest {
        command: format!(
            "simulate --config {} --steps {steps} --out {}",
            config_path.display(),
            out.display(),
        ),
        config_path: config_path.display().to_string(),
        seed: config.dynamics.rng_seed,
        version: env!("CARGO_PKG_VERSION").to_string(),
        started_at,
        finished_at: now_rfc3339(),
        outputs: vec![
            out.display().to_string(),
            manifest_file.display().to_string(),
        ],
        config,
    };
    write_file(&manifest_file, &manifest.to_toml_string())?;

    match failure {
        None => {
            crate::emit(&format!(
                "wrote {} rows to {} (manifest {})\n",
                rows.len(),
                out.display(),
                manifest_file.display(),
            ));
            Ok(())
        }
        Some(f) => Err(f),
    }
}

/// Re-runs the simulation recomputing the global triangle ledger from the
/// cells every step. Fails at the first per-species deviation.
pub fn audit(
    config_path: &Path,
    steps: u64,
    cli_seed: Option<u64>,
    inject_fault_step: Option<u64>,
) -> Result<(), RunFailure> {
    let seed = resolve_seed(cli_seed)?;
    let config = load_config(config_path, seed)?;
    let mut grid = build_grid(&config)?;
    let expected = grid.global_ledger();

    let (rows, failure) = drive(&mut grid, steps, |grid, report| {
        if Some(report.step) == inject_fault_step {
            // Deliberate corruption, reachable only through the hidden
            // flag: proves the audit detects a broken ledger.
            grid.cell_mut(0, 0).population.fire += 1;
        }
        let ledger = grid.global_ledger();
        if ledger != expected {
            let he = ledger.half_equilateral as i128 - expected.half_equilateral as i128;
            let ir = ledger.isosceles_right as i128 - expected.isosceles_right as i128;
            return Err(RunFailure::Conservation(format!(
                "conservation violated at step {}: \
                 half-equilateral delta {he}, isosceles-right delta {ir}",
                report.step,
            )));
        }
        Ok(())
    });

    match failure {
        None => {
            crate::emit(&format!("ledger intact over {} steps\n", rows.len()));
            Ok(())
        }
        Some(f) => Err(f),
    }
}
