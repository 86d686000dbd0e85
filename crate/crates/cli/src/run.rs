//! `run_solve`: build, solve, and write the artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use quathess::solver::{
    b_from_integral, continuity_solve, newton_solve, ContinuityOptions, DiagnosticRow,
    NewtonOptions, SolverError, SolverState, StepRecord,
};
use quathess::torus::write_field;

use crate::config::{ConfigError, RunConfig};
use crate::SCHEMA_VERSION;

pub const PHI_FILE: &str = "phi.qht";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const DIAGNOSTICS_FILE: &str = "diagnostics.csv";

pub const CSV_COLUMNS: [&str; 9] = [
    "t",
    "iter",
    "residual_sup",
    "b",
    "c0",
    "grad_sup",
    "lap_sup",
    "ratio",
    "margin",
];

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// The solver failed; artifacts of the last accepted state were written
    /// when one existed.
    Solver(SolverError),
    Io(String),
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RunError::Config(e) => write!(f, "{e}"),
            RunError::Solver(e) => write!(f, "solver failure: {e}"),
            RunError::Io(e) => write!(f, "output error: {e}"),
        }
    }
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => crate::EXIT_CONFIG,
            RunError::Solver(_) => crate::EXIT_SOLVER,
            RunError::Io(_) => crate::EXIT_SOLVER,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ManufacturedReport {
    pub phi_sup_error: f64,
    pub b_error: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub schema_version: u32,
    pub status: String,
    pub error: Option<String>,
    pub family: String,
    pub k: Option<usize>,
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    pub scheme: String,
    pub steps: usize,
    pub continuity: Vec<StepRecord>,
    pub iterations: Vec<usize>,
    pub residual_history: Vec<f64>,
    pub b: Option<f64>,
    pub b_integral: Option<f64>,
    pub residual_sup: Option<f64>,
    pub sup_shift: Option<f64>,
    pub manufactured: Option<ManufacturedReport>,
    pub diagnostics: Vec<DiagnosticRow>,
    pub seed: u64,
    pub config: RunConfig,
}

fn io(path: &Path, e: impl std::fmt::Display) -> RunError {
    RunError::Io(format!("{}: {e}", path.display()))
}

fn write_csv(path: &Path, rows: &[DiagnosticRow]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io(path, e))?;
    w.write_record(CSV_COLUMNS).map_err(|e| io(path, e))?;
    for r in rows {
        w.write_record([
            r.t.to_string(),
            r.iter.to_string(),
            r.residual_sup.to_string(),
            r.b.to_string(),
            r.c0.to_string(),
            r.grad_sup.to_string(),
            r.lap_sup.to_string(),
            r.ratio.to_string(),
            r.margin.to_string(),
        ])
        .map_err(|e| io(path, e))?;
    }
    w.flush().map_err(|e| io(path, e))
}

/// What a run produced: the manifest and the directory holding the artifacts.
pub struct RunOutput {
    pub manifest: Manifest,
    pub dir: PathBuf,
}

/// Solves the configured equation and writes `phi.qht` (+ sidecar),
/// `manifest.json` and `diagnostics.csv` into `cfg.out`.
pub fn run_solve(cfg: &RunConfig) -> Result<RunOutput, RunError> {
    let built = cfg.build().map_err(RunError::Config)?;
    let spec = &built.spec;
    let newton = NewtonOptions {
        tol: cfg.tolerances.residual,
        max_iter: cfg.tolerances.max_newton_iterations,
        ..NewtonOptions::default()
    };

    let mut continuity = Vec::new();
    let mut history = Vec::new();
    let mut rows = Vec::new();
    let result: Result<SolverState, SolverError> = if cfg.steps == 0 {
        newton_solve(spec, None, None, &newton).inspect(|s| {
            history = s.residual_history.clone();
            rows = s.diagnostics.clone();
            continuity.push(StepRecord {
                t: 1.0,
                iterations: s.iterations,
                residual_sup: s.residual_sup,
                b: s.b,
            });
        })
    } else {
        let opts = ContinuityOptions {
            steps: cfg.steps,
            max_steps: cfg.tolerances.max_continuity_steps.max(cfg.steps),
            newton,
        };
        continuity_solve(spec, &opts).map(|out| {
            continuity = out.path;
            history = out.residual_history;
            rows = out.diagnostics;
            out.state
        })
    };

    let (state, error) = match &result {
        Ok(s) => (Some(s), None),
        Err(e) => (e.last_state(), Some(e.to_string())),
    };
    if result.is_err() {
        if let Some(s) = state {
            history = s.residual_history.clone();
            rows = s.diagnostics.clone();
        }
    }

    let dir = cfg.out.clone();
    fs::create_dir_all(&dir).map_err(|e| io(&dir, e))?;
    if let Some(s) = state {
        let sup_zero = s.sup_normalized_phi();
        write_field(
            &dir.join(PHI_FILE),
            &spec.grid,
            &["phi_mean_zero", "phi_sup_zero"],
            &[&s.phi, &sup_zero],
        )
        .map_err(|e| io(&dir.join(PHI_FILE), e))?;
    }
    write_csv(&dir.join(DIAGNOSTICS_FILE), &rows)?;

    let manufactured = match (&built.manufactured, &result) {
        (Some((star, b)), Ok(s)) => Some(ManufacturedReport {
            phi_sup_error: s.phi.iter().zip(star).fold(0.0, |m, (x, y)| m.max((x - y).abs())),
            b_error: (s.b - b).abs(),
        }),
        _ => None,
    };
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        status: if result.is_ok() { "converged" } else { "failed" }.into(),
        error,
        family: spec.op.family.name().into(),
        k: spec.op.family.k(),
        n: cfg.n,
        points: cfg.points,
        scheme: spec.grid.scheme().name().into(),
        steps: cfg.steps,
        iterations: continuity.iter().map(|r| r.iterations).collect(),
        continuity,
        residual_history: history,
        b: state.map(|s| s.b),
        b_integral: result.as_ref().ok().and_then(|s| b_from_integral(spec, &s.phi).ok()),
        residual_sup: state.map(|s| s.residual_sup),
        sup_shift: state.map(|s| s.sup_shift),
        manufactured,
        diagnostics: rows,
        seed: cfg.seed,
        config: cfg.clone(),
    };
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    fs::write(dir.join(MANIFEST_FILE), text).map_err(|e| io(&dir.join(MANIFEST_FILE), e))?;
    match result {
        Ok(_) => Ok(RunOutput { manifest, dir }),
        Err(e) => Err(RunError::Solver(e)),
    }
}
