//! The `run` subcommand: integrate, diagnose, write artifacts.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qk_core::diagnostics::{
    energy_drift, eom_residual, symplecticity_residual, symplecticity_sweep, DiagnosticsError, Thresholds,
};
use qk_core::dynamics::{integrate, DynamicsError, HamiltonianSystem, PhasePoint, Trajectory};
use qk_core::structure::{structure_triple, verify_quaternion_relations, Space};
use serde::Serialize;
use thiserror::Error;

use crate::config::SimulationConfig;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunOptions {
    /// Multiplies every pass/fail threshold.
    pub tolerance_scale: f64,
    /// Probe symplecticity at every step instead of only the first.
    pub full_sweep: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            tolerance_scale: 1.0,
            full_sweep: false,
        }
    }
}

/// The diagnostics file. Flat: every value is a scalar except the drift series.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsDocument {
    pub structure: String,
    pub n: usize,
    pub method: String,
    pub dt: f64,
    pub steps: usize,
    pub energy_drift_max: f64,
    pub energy_drift_series: Vec<f64>,
    /// `None` when the trajectory has fewer than three points.
    pub eom_residual_max: Option<f64>,
    pub symplecticity_residual: f64,
    pub symplecticity_probe: &'static str,
    pub algebra_f_squared: i64,
    pub algebra_g_squared: i64,
    pub algebra_h_squared: i64,
    pub algebra_fgh: i64,
    pub tolerance_scale: f64,
    pub threshold_energy_drift: f64,
    pub threshold_eom_residual: f64,
    pub threshold_symplecticity: f64,
    pub energy_ok: bool,
    pub eom_ok: bool,
    pub symplecticity_ok: bool,
    pub algebra_ok: bool,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub trajectory: PathBuf,
    pub diagnostics: PathBuf,
    pub plot: Option<PathBuf>,
}

#[derive(Debug)]
pub struct RunOutcome {
    pub document: DiagnosticsDocument,
    pub artifacts: Artifacts,
}

#[derive(Debug, Error)]
pub enum RunError {
    #[error("integration aborted at step {step}: {source}{}", partial_note(.partial))]
    Integration {
        step: usize,
        source: DynamicsError,
        partial: Option<PathBuf>,
    },
    #[error("diagnostics failed: {0}")]
    Diagnostics(#[from] DiagnosticsError),
    #[error("cannot write {path}: {source}{}", log_note(.error_log))]
    Io {
        path: PathBuf,
        source: std::io::Error,
        error_log: Option<PathBuf>,
    },
}

fn partial_note(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map(|p| format!(" (partial trajectory in {})", p.display()))
        .unwrap_or_default()
}

fn log_note(p: &Option<PathBuf>) -> String {
    p.as_ref()
        .map(|p| format!(" (details in {})", p.display()))
        .unwrap_or_default()
}

/// `<prefix><suffix>`, e.g. `out/run1` + `.trajectory.csv`.
pub fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

pub fn run(config: &SimulationConfig, options: RunOptions) -> Result<RunOutcome, RunError> {
    let system = HamiltonianSystem::new(config.structure, config.hamiltonian.clone());
    let start = PhasePoint::new(config.initial.clone(), 0.0).map_err(|source| RunError::Integration {
        step: 0,
        source,
        partial: None,
    })?;
    let trajectory = match integrate(&system, start, config.dt, config.steps, config.method) {
        Ok(t) => t,
        Err(e) => {
            let path = with_suffix(&config.output_prefix, ".trajectory.csv.partial");
            let written = write_files(&config.output_prefix, &[(&path, trajectory_csv(&e.partial, &system))]);
            return Err(RunError::Integration {
                step: e.step,
                source: e.source,
                partial: written.ok().map(|_| path),
            });
        }
    };
    let document = diagnose(config, &system, &trajectory, options)?;

    let artifacts = Artifacts {
        trajectory: with_suffix(&config.output_prefix, ".trajectory.csv"),
        diagnostics: with_suffix(&config.output_prefix, ".diagnostics.json"),
        plot: config.emit_plot.then(|| with_suffix(&config.output_prefix, ".plot.gp")),
    };
    let mut json = serde_json::to_string_pretty(&document).expect("document is plain data");
    json.push('\n');
    let mut files = vec![
        (&artifacts.trajectory, trajectory_csv(&trajectory, &system)),
        (&artifacts.diagnostics, json),
    ];
    if let Some(plot) = &artifacts.plot {
        files.push((plot, gnuplot_script(&artifacts.trajectory, config.dim.n())));
    }
    write_files(&config.output_prefix, &files)?;
    Ok(RunOutcome { document, artifacts })
}

fn diagnose(
    config: &SimulationConfig,
    system: &HamiltonianSystem,
    trajectory: &Trajectory,
    options: RunOptions,
) -> Result<DiagnosticsDocument, DiagnosticsError> {
    let drift = energy_drift(trajectory, system.hamiltonian())?;
    let eom = match eom_residual(trajectory, system) {
        Ok(r) => Some(r),
        Err(DiagnosticsError::TooShort(_)) => None,
        Err(e) => return Err(e),
    };
    let symplecticity = if options.full_sweep {
        symplecticity_sweep(trajectory, system, system.omega())?
    } else {
        symplecticity_residual(system, system.omega(), trajectory.first(), config.dt, config.method)
            .map_err(DiagnosticsError::Probe)?
    };
    let [f, g, h] = structure_triple(Space::Cotangent, config.dim);
    let algebra = verify_quaternion_relations(&f, &g, &h).expect("built-in triple is well formed");

    let thresholds = Thresholds::default().scaled(options.tolerance_scale);
    let eom_limit = thresholds.eom_residual(config.dt);
    let energy_ok = drift.max <= thresholds.energy_drift;
    let eom_ok = eom.is_none_or(|r| r <= eom_limit);
    let symplecticity_ok = symplecticity <= thresholds.symplecticity;
    let algebra_ok = algebra.is_exact();
    Ok(DiagnosticsDocument {
        structure: config.structure.to_string(),
        n: config.dim.n(),
        method: config.method.to_string(),
        dt: config.dt,
        steps: config.steps,
        energy_drift_max: drift.max,
        energy_drift_series: drift.series,
        eom_residual_max: eom,
        symplecticity_residual: symplecticity,
        symplecticity_probe: if options.full_sweep { "all_steps" } else { "first_step" },
        algebra_f_squared: algebra.f_squared,
        algebra_g_squared: algebra.g_squared,
        algebra_h_squared: algebra.h_squared,
        algebra_fgh: algebra.fgh,
        tolerance_scale: options.tolerance_scale,
        threshold_energy_drift: thresholds.energy_drift,
        threshold_eom_residual: eom_limit,
        threshold_symplecticity: thresholds.symplecticity,
        energy_ok,
        eom_ok,
        symplecticity_ok,
        algebra_ok,
        passed: energy_ok && eom_ok && symplecticity_ok && algebra_ok,
    })
}

/// `t,x1,...,x{4n},energy`, every value with 17 significant digits.
pub fn trajectory_csv(trajectory: &Trajectory, system: &HamiltonianSystem) -> String {
    let size = system.dim().total();
    let mut out = String::from("t");
    for a in 1..=size {
        write!(out, ",x{a}").unwrap();
    }
    out.push_str(",energy\n");
    for p in trajectory.points() {
        write!(out, "{:.16e}", p.time()).unwrap();
        for x in p.coordinates() {
            write!(out, ",{x:.16e}").unwrap();
        }
        let energy = system.energy(p.coordinates()).unwrap_or(f64::NAN);
        writeln!(out, ",{energy:.16e}").unwrap();
    }
    out
}

/// Phase portrait of `x1` against `x{n+1}`. The CSV is referenced by file
/// name, so gnuplot should be started from the output directory.
pub fn gnuplot_script(csv: &Path, n: usize) -> String {
    let name = csv
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    format!(
        "set datafile separator ','\n\
         set xlabel 'x1'\n\
         set ylabel 'x{y}'\n\
         set size square\n\
         set grid\n\
         set key autotitle columnhead\n\
         plot '{name}' using 2:{col} with lines title 'x1 vs x{y}'\n",
        y = n + 1,
        col = n + 2,
    )
}

/// Writes every file or none of them. On failure, removes what was written
/// and tries to leave `<prefix>.error.log` behind.
fn write_files(prefix: &Path, files: &[(&PathBuf, String)]) -> Result<(), RunError> {
    let mut written: Vec<&Path> = Vec::new();
    let mut attempt = || -> Result<(), (PathBuf, std::io::Error)> {
        for (path, contents) in files {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                fs::create_dir_all(parent).map_err(|e| (parent.to_path_buf(), e))?;
            }
            fs::write(path, contents).map_err(|e| (path.to_path_buf(), e))?;
            written.push(path);
        }
        Ok(())
    };
    let Err((path, source)) = attempt() else {
        return Ok(());
    };
    for p in written {
        let _ = fs::remove_file(p);
    }
    let log = with_suffix(prefix, ".error.log");
    let error_log = fs::write(&log, format!("cannot write {}: {source}\n", path.display()))
        .ok()
        .map(|_| log);
    Err(RunError::Io {
        path,
        source,
        error_log,
    })
}
