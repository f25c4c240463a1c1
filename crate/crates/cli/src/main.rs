//! Batch front end: parse a JSON run configuration, dispatch to the library,
//! and emit plot-ready CSV/JSON plus a manifest that reproduces the run.

mod config;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use ndarray::Array2;
use num_complex::Complex64 as C64;
use serde_json::json;

use config::{Command, MeanFieldKind, RunConfig};
use spinstar::dynamics::{
    evolve, evolve_lindblad, polarized_dicke_state, EvolveOptions, StateSpace,
};
use spinstar::export;
use spinstar::liouville::{build_superoperator, classify_stripes, eigendecompose, SuperOp};
use spinstar::meanfield::{
    fixed_points, integrate_meanfield, limit_cycle_frequency, MeanFieldOptions, MeanFieldState,
    MeanFieldSystem, ReducedParams,
};
use spinstar::operators::{central_lowering, identity, kron, spin_star_hamiltonian, GROUND};
use spinstar::params::SpinStarParams;
use spinstar::phase::scan_grid;
use spinstar::zeno::effective_lindbladian;
use spinstar::Error as CoreError;

#[derive(Parser)]
#[command(
    name = "spinstar",
    about = "Dissipative spin-star simulator: Liouvillian spectra, Zeno reduction, \
             trajectories, mean-field flows, and phase scans",
    version
)]
struct Cli {
    /// JSON run configuration (a previously emitted manifest also works)
    config: PathBuf,
    /// Directory for output files (created if missing)
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
    /// Worker threads; overrides the SPINSTAR_THREADS environment variable
    #[arg(long)]
    threads: Option<usize>,
    /// Integrator relative tolerance; overrides the config value
    #[arg(long)]
    tolerance: Option<f64>,
}

enum CliError {
    Config(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Config(_) => "config",
            CliError::Numerical(_) => "numerical",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Numerical(m) | CliError::Io(m) => m,
        }
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        match err {
            CoreError::InvalidParams(_) | CoreError::DimensionMismatch(_) => {
                CliError::Config(err.to_string())
            }
            CoreError::Io(_) => CliError::Io(err.to_string()),
            CoreError::Json(_) => CliError::Config(err.to_string()),
            other => CliError::Numerical(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let threads = cli
        .threads
        .or_else(|| std::env::var("SPINSTAR_THREADS").ok().and_then(|v| v.parse().ok()));
    if let Some(n) = threads {
        let n = n.max(1);
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        faer::set_global_parallelism(if n == 1 { faer::Par::Seq } else { faer::Par::rayon(n) });
    }

    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let payload = json!({
                "error": {
                    "kind": err.kind(),
                    "message": err.message(),
                    "exit_code": err.exit_code(),
                }
            });
            eprintln!("{payload}");
            ExitCode::from(err.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&cli.config)
        .map_err(|e| CliError::Config(format!("cannot read config {:?}: {e}", cli.config)))?;
    let parsed: RunConfig = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid config: {e}")))?;
    let config = parsed.resolved(cli.tolerance);

    std::fs::create_dir_all(&cli.output_dir)
        .map_err(|e| CliError::Io(format!("cannot create output dir: {e}")))?;

    match config.command {
        Command::Spectrum => cmd_spectrum(&config, &cli.output_dir),
        Command::Reduce => cmd_reduce(&config, &cli.output_dir),
        Command::Evolve => cmd_evolve(&config, &cli.output_dir, false),
        Command::EvolveEffective => cmd_evolve(&config, &cli.output_dir, true),
        Command::Meanfield => cmd_meanfield(&config, &cli.output_dir),
        Command::FixedPoints => cmd_fixed_points(&config, &cli.output_dir),
        Command::PhaseScan => cmd_phase_scan(&config, &cli.output_dir),
    }
}

fn require_params(config: &RunConfig) -> Result<&SpinStarParams, CliError> {
    config
        .params
        .as_ref()
        .ok_or_else(|| CliError::Config("this command needs a `params` section".into()))
}

fn prefix(config: &RunConfig) -> &str {
    config.output_prefix.as_deref().unwrap_or("run")
}

fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::write(dir.join(name), contents)
        .map_err(|e| CliError::Io(format!("writing {name}: {e}")))
}

fn write_manifest(
    config: &RunConfig,
    dir: &Path,
    extra: Option<serde_json::Value>,
) -> Result<(), CliError> {
    let mut value = serde_json::to_value(config)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    if let (Some(obj), Some(extra)) = (value.as_object_mut(), extra) {
        obj.insert("report".to_string(), extra);
    }
    let text = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Io(format!("manifest serialization: {e}")))?;
    write_file(dir, &format!("{}_manifest.json", prefix(config)), &(text + "\n"))
}

fn full_liouvillian(params: &SpinStarParams) -> Result<SuperOp, CliError> {
    let h = spin_star_hamiltonian(params)?;
    let d_anc = params.n_ancilla as usize + 1;
    let jump = kron(&central_lowering(), &identity(d_anc));
    Ok(build_superoperator(&h, &[(jump, params.gamma_big())])?)
}

fn cmd_spectrum(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let params = require_params(config)?;
    let gen = full_liouvillian(params)?;
    let mut spec = eigendecompose(&gen)?;
    classify_stripes(&mut spec, params.gamma_big())?;
    write_file(dir, &format!("{}_spectrum_full.csv", prefix(config)), &export::spectrum_csv(&spec))?;

    let mut report = json!({
        "stripe_classification_valid": spec.stripes.as_ref().map(|s| s.valid),
        "max_residual": spec.max_residual,
    });
    if config.include_effective.unwrap_or(true) {
        let model = effective_lindbladian(params)?;
        let eff_spec = eigendecompose(&model.superoperator()?)?;
        write_file(
            dir,
            &format!("{}_spectrum_effective.csv", prefix(config)),
            &export::spectrum_csv(&eff_spec),
        )?;
        report["validity_warning"] = json!(model.truncation.validity_warning);
    }
    write_manifest(config, dir, Some(report))
}

fn cmd_reduce(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let params = require_params(config)?;
    let model = effective_lindbladian(params)?;
    let text = serde_json::to_string_pretty(&export::effective_model_json(&model))
        .map_err(|e| CliError::Io(e.to_string()))?;
    write_file(dir, &format!("{}_effective_model.json", prefix(config)), &(text + "\n"))?;
    write_manifest(config, dir, None)
}

fn cmd_evolve(config: &RunConfig, dir: &Path, effective: bool) -> Result<(), CliError> {
    let params = require_params(config)?;
    let n = params.n_ancilla;
    let direction = config.initial_direction.unwrap_or([0.0, 0.0, 1.0]);
    let ancilla_state = polarized_dicke_state(n, direction)?;
    let grid = config.time_grid();
    let rtol = config.tolerance.unwrap_or(1e-8);
    let opts = EvolveOptions {
        rtol,
        atol: rtol * 1e-2,
        checkpoint_times: config.checkpoint_times.clone().unwrap_or_default(),
    };

    let traj = if effective {
        let model = effective_lindbladian(params)?;
        evolve_lindblad(
            &model.h_eff,
            &model.jump_terms,
            &ancilla_state,
            &grid,
            StateSpace::Ancilla { n_ancilla: n },
            &opts,
        )?
    } else {
        // central spin starts in its ground state
        let mut central = Array2::<C64>::zeros((2, 2));
        central[[GROUND, GROUND]] = C64::new(1.0, 0.0);
        let rho0 = kron(&central, &ancilla_state);
        let gen = full_liouvillian(params)?;
        evolve(&gen, &rho0, &grid, StateSpace::Full { n_ancilla: n }, &opts)?
    };

    write_file(dir, &format!("{}_trajectory.csv", prefix(config)), &export::trajectory_csv(&traj))?;
    let meta = json!({
        "schema": "spinstar-trajectory-meta/1",
        "effective": effective,
        "rtol": rtol,
        "atol": rtol * 1e-2,
        "integrator": traj.stats,
        "checkpoints_stored": traj.checkpoints.len(),
    });
    let text =
        serde_json::to_string_pretty(&meta).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(dir, &format!("{}_trajectory_meta.json", prefix(config)), &(text + "\n"))?;
    write_manifest(config, dir, None)
}

fn reduced_params_from(config: &RunConfig) -> Result<ReducedParams, CliError> {
    let section = config.meanfield.as_ref();
    let (omega, kappa) = match (section.and_then(|m| m.omega), section.and_then(|m| m.kappa)) {
        (Some(o), Some(k)) => (o, k),
        (o, k) => {
            let params = require_params(config)?;
            (o.unwrap_or_else(|| params.omega_drive()), k.unwrap_or_else(|| params.kappa()))
        }
    };
    Ok(ReducedParams::new(omega, kappa)?)
}

fn cmd_meanfield(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let section = config
        .meanfield
        .as_ref()
        .ok_or_else(|| CliError::Config("meanfield command needs a `meanfield` section".into()))?;
    let grid = config.time_grid();
    let opts = MeanFieldOptions {
        rtol: config.tolerance.unwrap_or(1e-10),
        ..Default::default()
    };
    let m0 = section.m0.unwrap_or([0.0, 0.0, 1.0]);

    let traj = match section.system {
        MeanFieldKind::Reduced => {
            let rp = reduced_params_from(config)?;
            integrate_meanfield(
                MeanFieldSystem::Reduced(&rp),
                &MeanFieldState::polarized(m0),
                &grid,
                &opts,
            )?
        }
        MeanFieldKind::Full => {
            let params = require_params(config)?;
            let s0 = section.s0.unwrap_or([0.0, 0.0, -0.5]);
            integrate_meanfield(
                MeanFieldSystem::Full(params),
                &MeanFieldState::new(m0, s0),
                &grid,
                &opts,
            )?
        }
    };

    write_file(dir, &format!("{}_meanfield.csv", prefix(config)), &export::trajectory_csv(&traj))?;

    let freq_of = |name: &str| -> serde_json::Value {
        match limit_cycle_frequency(&traj, name) {
            Ok(f) => json!(f),
            Err(_) => serde_json::Value::Null,
        }
    };
    let mut freqs = json!({
        "schema": "spinstar-frequencies/1",
        "m_z": freq_of("m_z"),
        "m_y": freq_of("m_y"),
    });
    if traj.central.is_some() {
        freqs["s_x"] = freq_of("s_x");
    }
    let text = serde_json::to_string_pretty(&freqs).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(dir, &format!("{}_frequencies.json", prefix(config)), &(text + "\n"))?;
    write_manifest(config, dir, None)
}

fn cmd_fixed_points(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let rp = reduced_params_from(config)?;
    let fps = fixed_points(&rp)?;
    let mut value = export::fixed_points_json(&fps);
    value["omega"] = json!(rp.omega);
    value["kappa"] = json!(rp.kappa);
    let text = serde_json::to_string_pretty(&value).map_err(|e| CliError::Io(e.to_string()))?;
    write_file(dir, &format!("{}_fixed_points.json", prefix(config)), &(text + "\n"))?;
    write_manifest(config, dir, None)
}

fn cmd_phase_scan(config: &RunConfig, dir: &Path) -> Result<(), CliError> {
    let scan = config
        .scan
        .as_ref()
        .ok_or_else(|| CliError::Config("phase-scan command needs a `scan` section".into()))?;
    let points = scan_grid(scan)?;
    write_file(dir, &format!("{}_scan.csv", prefix(config)), &export::phase_csv(&points))?;
    let errors: Vec<serde_json::Value> = points
        .iter()
        .filter_map(|p| {
            p.error.as_ref().map(|e| {
                json!({"gamma": p.gamma_reduced, "size": p.size, "error": e})
            })
        })
        .collect();
    write_manifest(config, dir, Some(json!({ "point_errors": errors })))
}
