//! Newton-Krylov solver with continuity for `f(lambda(A)) = H + log b + offset`,
//! where `A = g^{-1/2} (Omega + Hess_H phi) g^{-1/2}` on the discrete torus.
//!
//! Newton works on the homogeneous form
//! `G = exp(f / m) - beta exp((H + offset) / m)` with `beta = b^{1/m}` and `m`
//! the degree of the symmetric function, together with `mean(phi) = 0`.
//! Both forms share their roots; the homogeneous one is linear in `(phi, beta)`
//! when `n = 1`. Reported residuals always use the logarithmic form.

mod assemble;
mod continuity;
pub mod gmres;
mod newton;

pub use continuity::{continuity_solve, ContinuityOptions, ContinuityOutcome, StepRecord};
pub use newton::{
    apply_linearization, b_from_integral, diagnostics, newton_solve, newton_solve_at, residual,
    solve_n1_linear,
};

use serde::Serialize;
use thiserror::Error;

use crate::cones::{ConeError, ConeFunction, ConeOperator};
use crate::quatlin::{self, HypMatrix, QuatLinError};
use crate::torus::{TorusError, TorusGrid};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid equation: {0}")]
    Spec(String),
    #[error("iterate leaves the admissible cone at grid point {point}")]
    Admissibility { point: usize },
    #[error("line search found no admissible decrease down to step {min_step:e} at Newton iteration {iteration}")]
    LineSearch {
        iteration: usize,
        min_step: f64,
        last: Box<SolverState>,
    },
    #[error("no convergence in {iterations} Newton iterations (residual {residual:e})")]
    MaxIter {
        iterations: usize,
        residual: f64,
        last: Box<SolverState>,
    },
    #[error("Krylov solve stagnated at relative residual {rel_residual:e} in Newton iteration {iteration}")]
    Krylov {
        iteration: usize,
        rel_residual: f64,
        last: Box<SolverState>,
    },
    #[error("continuity step to t = {t} failed: {source}")]
    StepFailure {
        t: f64,
        source: Box<SolverError>,
        last: Box<SolverState>,
    },
    #[error(transparent)]
    Algebra(#[from] QuatLinError),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Cone(#[from] ConeError),
}

impl SolverError {
    /// The last accepted state, when the failure happened mid-solve.
    pub fn last_state(&self) -> Option<&SolverState> {
        match self {
            SolverError::LineSearch { last, .. }
            | SolverError::MaxIter { last, .. }
            | SolverError::Krylov { last, .. }
            | SolverError::StepFailure { last, .. } => Some(last),
            _ => None,
        }
    }
}

/// One row of the per-iterate monitor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DiagnosticRow {
    /// Continuity parameter of the equation being solved.
    pub t: f64,
    /// Newton iteration within that solve, 0 for the initial iterate.
    pub iter: usize,
    pub residual_sup: f64,
    pub b: f64,
    /// `max |phi|`.
    pub c0: f64,
    /// Sup of the Euclidean coordinate gradient of `phi`.
    pub grad_sup: f64,
    /// Sup of `|Re tr(g^{-1} Hess_H phi)|`.
    pub lap_sup: f64,
    /// `lap_sup / (grad_sup^2 + 1)`.
    pub ratio: f64,
    /// Min over points of the boundary shift `g0(lambda(A))`.
    pub margin: f64,
    /// Sup over points of `sum_i f_i(lambda) lambda_i`.
    pub sum_f_lambda: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverState {
    #[serde(skip)]
    pub phi: Vec<f64>,
    pub b: f64,
    #[serde(skip)]
    pub residual: Vec<f64>,
    pub residual_sup: f64,
    pub iterations: usize,
    pub residual_history: Vec<f64>,
    pub margin: f64,
    pub diagnostics: Vec<DiagnosticRow>,
    /// `max phi` of the mean-zero solution, i.e. the shift to `sup phi = 0`.
    pub sup_shift: f64,
}

impl SolverState {
    /// `phi - max phi`; `b` is left as solved.
    pub fn sup_normalized_phi(&self) -> Vec<f64> {
        self.phi.iter().map(|v| v - self.sup_shift).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NewtonOptions {
    /// Stop when `sup |residual| <= tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Relative Krylov tolerance far from the root.
    pub eta_coarse: f64,
    /// Relative Krylov tolerance once `sup |residual| <= fine_below`.
    pub eta_fine: f64,
    pub fine_below: f64,
    /// Required `g0(lambda)` at every point of an accepted iterate.
    pub margin: f64,
    pub armijo: f64,
    pub min_step: f64,
    pub gmres_restart: usize,
    pub gmres_max_iter: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 50,
            eta_coarse: 1e-3,
            eta_fine: 1e-8,
            fine_below: 1e-4,
            margin: 1e-12,
            armijo: 1e-4,
            min_step: (2.0f64).powi(-30),
            gmres_restart: 40,
            gmres_max_iter: 400,
        }
    }
}

/// Background, metric and datum of one equation.
#[derive(Debug, Clone)]
pub struct EquationSpec {
    pub grid: TorusGrid,
    pub op: ConeOperator,
    omega: Vec<HypMatrix>,
    metric: HypMatrix,
    pub datum: Vec<f64>,
}

impl EquationSpec {
    /// `omega` holds one matrix (constant background) or one per grid point.
    pub fn new(
        grid: TorusGrid,
        op: ConeOperator,
        omega: Vec<HypMatrix>,
        metric: HypMatrix,
        datum: Vec<f64>,
    ) -> Result<Self, SolverError> {
        let n = grid.n();
        if op.n != n {
            return Err(SolverError::Spec(format!(
                "operator dimension {} does not match grid dimension {n}",
                op.n
            )));
        }
        if omega.len() != 1 && omega.len() != grid.len() {
            return Err(SolverError::Spec(format!(
                "background must have 1 or {} entries, got {}",
                grid.len(),
                omega.len()
            )));
        }
        if datum.len() != grid.len() {
            return Err(SolverError::Spec(format!(
                "datum must have {} entries, got {}",
                grid.len(),
                datum.len()
            )));
        }
        if let Some(v) = datum.iter().find(|v| !v.is_finite()) {
            return Err(SolverError::Spec(format!("datum contains non-finite value {v}")));
        }
        if metric.n() != n || omega.iter().any(|o| o.n() != n) {
            return Err(SolverError::Spec("matrix sizes do not match n".into()));
        }
        let gmin = quatlin::eigenvalues_hyp(&metric)?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if gmin <= 0.0 {
            return Err(SolverError::Spec("metric must be positive definite".into()));
        }
        let spec = EquationSpec {
            grid,
            op,
            omega,
            metric,
            datum,
        };
        let s = spec.metric_inv_sqrt()?;
        for (i, o) in spec.omega.iter().enumerate() {
            let lambda = quatlin::eigenvalues_hyp(&o.congruence(s.as_qmatrix()))?;
            if !spec.op.contains(&lambda) {
                return Err(SolverError::Spec(format!(
                    "background is not admissible for {} at entry {i}: eigenvalues {lambda:?}",
                    spec.op.family
                )));
            }
        }
        Ok(spec)
    }

    /// Constant identity background and metric.
    pub fn flat(grid: TorusGrid, op: ConeOperator, datum: Vec<f64>) -> Result<Self, SolverError> {
        let n = grid.n();
        Self::new(grid, op, vec![HypMatrix::identity(n)], HypMatrix::identity(n), datum)
    }

    pub fn omega_at(&self, idx: usize) -> &HypMatrix {
        if self.omega.len() == 1 {
            &self.omega[0]
        } else {
            &self.omega[idx]
        }
    }

    pub fn metric(&self) -> &HypMatrix {
        &self.metric
    }

    pub fn with_datum(&self, datum: Vec<f64>) -> Result<Self, SolverError> {
        if datum.len() != self.grid.len() {
            return Err(SolverError::Spec("datum length mismatch".into()));
        }
        Ok(EquationSpec {
            datum,
            ..self.clone()
        })
    }

    pub(crate) fn metric_inv_sqrt(&self) -> Result<HypMatrix, SolverError> {
        Ok(quatlin::spectral_map(&self.metric, |v| 1.0 / v.sqrt())?)
    }

    pub(crate) fn metric_is_identity(&self) -> bool {
        self.metric == HypMatrix::identity(self.grid.n())
    }
}

/// Datum `f(lambda(A(phi))) - offset - log b` for which `(phi, b)` solves the
/// equation exactly on the grid.
pub fn manufactured_datum(spec: &EquationSpec, phi: &[f64], b: f64) -> Result<Vec<f64>, SolverError> {
    let zero = spec.with_datum(vec![0.0; spec.grid.len()])?;
    residual(&zero, phi, b)
}

/// Background of the `(n-1)` family from `Omega_1`: `Re tr(g^{-1} Omega_1) g - (n-1) Omega_1`.
pub fn nm1_background(omega1: &HypMatrix, g: &HypMatrix) -> Result<HypMatrix, SolverError> {
    let n = omega1.n();
    let ginv = quatlin::inverse(g)?;
    let tr = crate::torus::re_trace_product(&ginv, omega1);
    Ok(g.scale(tr).sub(&omega1.scale((n.max(1) - 1) as f64)))
}
