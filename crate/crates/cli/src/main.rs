//! `beamsim`: runs scenarios, convergence sweeps and the verification suites.

mod output;

use beamcontact::benchmarks::shipped;
use beamcontact::checks::{balance_suites, projection_suite, shape_suite, symmetry_suite, tangent_suites, CheckReport};
use beamcontact::error::ConfigError;
use beamcontact::scenario::{convergence, fitted_order, ConvergenceError, ReferenceRun, Scenario};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Convergence(#[from] ConvergenceError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("unknown preset `{0}` (see `beamsim preset --list`)")]
    UnknownPreset(String),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn io(path: &Path, source: std::io::Error) -> Self {
        Self::Io { path: path.to_path_buf(), source }
    }
}

#[derive(Parser)]
#[command(name = "beamsim", version, about = "Kirchhoff beam contact simulations")]
struct Cli {
    /// Worker threads for element and contact evaluation (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its report.
    Run {
        scenario: PathBuf,
        /// Output directory.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Override the element count of every beam.
        #[arg(long)]
        elements: Option<usize>,
    },
    /// Mesh-convergence sweep against the analytical or a refined numerical solution.
    Convergence(ConvergenceArgs),
    /// Run the randomized verification suites.
    Check(CheckArgs),
    /// Print or export the shipped scenarios.
    Preset {
        /// Scenario name.
        name: Option<String>,
        /// List the available names.
        #[arg(long)]
        list: bool,
        /// Write every shipped scenario as `<name>.json` into this directory.
        #[arg(long, value_name = "DIR")]
        export: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ConvergenceArgs {
    scenario: PathBuf,
    /// Element counts per beam.
    #[arg(long, value_delimiter = ',', required = true)]
    elements: Vec<usize>,
    /// Beam whose centerline error is measured.
    #[arg(long, default_value_t = 0)]
    beam: usize,
    /// Refinement of the numerical reference relative to the finest mesh.
    #[arg(long, default_value_t = 4)]
    reference_factor: usize,
    /// Scenario solved for the numerical reference instead of the base scenario.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Directory for `convergence.csv` and `convergence.json`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    /// Finite-difference checks of the element and contact tangents, with force balance
    /// and stiffness symmetry on the same configurations.
    #[arg(long)]
    tangents: bool,
    /// Closest-point projections against a brute-force grid search.
    #[arg(long)]
    projections: bool,
    /// Shape-function identities.
    #[arg(long)]
    shape: bool,
    /// Random trials per suite (default: 200 for tangents and shape functions, 1000 for projections).
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write `check.json` into this directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_scenario(path: &Path) -> Result<Scenario, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    Ok(Scenario::from_json(&text)?)
}

fn run(path: &Path, out: &Path, elements: Option<usize>) -> Result<bool, CliError> {
    let mut sc = read_scenario(path)?;
    if let Some(n) = elements {
        sc.set_elements(n);
        sc.validate()?;
    }
    log::info!("running `{}`", sc.name);
    let outcome = sc.run(|s| {
        log::info!("step {} converged: {} iterations, {} halvings, {} active line points", s.step, s.iterations, s.halvings, s.active_line_points);
    })?;
    let report = &outcome.report;
    output::write_run(out, report)?;
    if let Some(e) = &report.helix_l2_error {
        println!("helix L2 error: {}", e.iter().map(|v| format!("{v:.4e}")).collect::<Vec<_>>().join(", "));
    }
    match &report.failure {
        None => {
            println!("{}: converged in {} steps ({} halvings), output in {}", report.scenario, report.steps.len(), report.total_halvings, out.display());
            Ok(true)
        }
        Some(f) => {
            eprintln!("{}: failed after {} steps: {f}", report.scenario, report.steps.len());
            Ok(false)
        }
    }
}

fn sweep(a: &ConvergenceArgs) -> Result<bool, CliError> {
    let sc = read_scenario(&a.scenario)?;
    if a.beam >= sc.beams.len() {
        return Err(CliError::Usage(format!("beam {} does not exist", a.beam)));
    }
    let reference = ReferenceRun {
        factor: a.reference_factor,
        scenario: a.reference.as_deref().map(read_scenario).transpose()?,
        ..ReferenceRun::default()
    };
    let rows = convergence(&sc, &a.elements, a.beam, &reference)?;
    let fitted = fitted_order(&rows);
    println!("{:>8}  {:>12}  {:>6}", "elements", "L2 error", "order");
    for r in &rows {
        let order = r.order.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into());
        println!("{:>8}  {:>12.4e}  {:>6}", r.elements, r.error, order);
    }
    if let Some(p) = fitted {
        println!("fitted order {p:.3}");
    }
    if let Some(dir) = &a.out {
        output::write_convergence(dir, &sc.name, a.beam, &rows, fitted)?;
    }
    Ok(true)
}

fn check(a: &CheckArgs) -> Result<bool, CliError> {
    let all = !(a.tangents || a.projections || a.shape);
    let mut reports: Vec<CheckReport> = Vec::new();
    if all || a.tangents {
        let n = a.trials.unwrap_or(200);
        reports.extend(tangent_suites(n, a.seed));
        reports.extend(balance_suites(n, a.seed));
        reports.push(symmetry_suite(n, a.seed));
    }
    if all || a.projections {
        reports.push(projection_suite(a.trials.unwrap_or(1000), a.seed));
    }
    if all || a.shape {
        reports.push(shape_suite(a.trials.unwrap_or(200), a.seed));
    }
    for r in &reports {
        let status = if r.passed() { "PASS" } else { "FAIL" };
        let at = r.worst_location.as_deref().map(|l| format!(" at {l}")).unwrap_or_default();
        eprintln!(
            "{status} {}: {}/{} within {:e}, worst {:.3e} (trial {:?}{at})",
            r.name,
            r.evaluated() - r.failures,
            r.evaluated(),
            r.tolerance,
            r.worst_error,
            r.worst_trial
        );
    }
    let json = serde_json::to_string_pretty(&reports)?;
    println!("{json}");
    if let Some(dir) = &a.out {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let path = dir.join("check.json");
        std::fs::write(&path, &json).map_err(|e| CliError::io(&path, e))?;
    }
    Ok(reports.iter().all(CheckReport::passed))
}

fn preset(name: Option<&str>, list: bool, export: Option<&Path>) -> Result<bool, CliError> {
    let all = shipped();
    if list {
        for (n, sc) in &all {
            println!("{n}\t{}", sc.description.as_deref().unwrap_or(""));
        }
    }
    if let Some(dir) = export {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        for (n, sc) in &all {
            let path = dir.join(format!("{n}.json"));
            std::fs::write(&path, sc.to_json() + "\n").map_err(|e| CliError::io(&path, e))?;
        }
    }
    match name {
        Some(n) => {
            let sc = all.iter().find(|(k, _)| *k == n).ok_or_else(|| CliError::UnknownPreset(n.into()))?;
            println!("{}", sc.1.to_json());
        }
        None if !list && export.is_none() => return Err(CliError::Usage("give a preset name, --list or --export".into())),
        None => {}
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("BEAMSIM_LOG")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match &cli.command {
        Command::Run { scenario, out, elements } => run(scenario, out, *elements),
        Command::Convergence(a) => sweep(a),
        Command::Check(a) => check(a),
        Command::Preset { name, list, export } => preset(name.as_deref(), *list, export.as_deref()),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
