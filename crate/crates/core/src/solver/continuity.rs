//! Continuity method from the datum solved by `(phi, b) = (0, 1)`.

use rayon::prelude::*;
use serde::Serialize;

use super::assemble::Context;
use super::{newton_solve_at, EquationSpec, NewtonOptions, SolverError, SolverState};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContinuityOptions {
    pub steps: usize,
    /// Finest allowed subdivision after repeated step halving.
    pub max_steps: usize,
    pub newton: NewtonOptions,
}

impl Default for ContinuityOptions {
    fn default() -> Self {
        ContinuityOptions {
            steps: 4,
            max_steps: 64,
            newton: NewtonOptions::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StepRecord {
    pub t: f64,
    pub iterations: usize,
    pub residual_sup: f64,
    pub b: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuityOutcome {
    pub state: SolverState,
    pub path: Vec<StepRecord>,
    /// Concatenated residual histories of all steps.
    pub residual_history: Vec<f64>,
    pub diagnostics: Vec<super::DiagnosticRow>,
}

/// Solves the family with datum `t H + (1 - t) H_0`, where
/// `H_0 = f(lambda(g^{-1} Omega)) - offset`, marching `t` from 0 to 1.
pub fn continuity_solve(spec: &EquationSpec, opts: &ContinuityOptions) -> Result<ContinuityOutcome, SolverError> {
    let len = spec.grid.len();
    let h0: Vec<f64> = {
        let ctx = Context::new(spec)?;
        let asm = ctx.assemble(&vec![0.0; len], false, 0.0)?;
        if let Some(point) = asm.first_bad {
            return Err(SolverError::Admissibility { point });
        }
        asm.f.iter().map(|f| f - ctx.offset).collect()
    };
    let datum_at = |t: f64| -> Vec<f64> {
        spec.datum
            .par_iter()
            .zip(h0.par_iter())
            .map(|(h, z)| t * h + (1.0 - t) * z)
            .collect()
    };

    let start = newton_solve_at(&spec.with_datum(datum_at(0.0))?, None, Some(1.0), &opts.newton, 0.0)?;
    let mut path = vec![StepRecord {
        t: 0.0,
        iterations: start.iterations,
        residual_sup: start.residual_sup,
        b: start.b,
    }];
    let mut history = start.residual_history.clone();
    let mut rows = start.diagnostics.clone();
    let mut state = start;

    let steps = opts.steps.max(1);
    let finest = 1.0 / opts.max_steps.max(steps) as f64;
    let mut t = 0.0;
    let mut dt = 1.0 / steps as f64;
    while t < 1.0 {
        let t_next = if t + dt > 1.0 - 1e-12 { 1.0 } else { t + dt };
        let step_spec = spec.with_datum(datum_at(t_next))?;
        match newton_solve_at(&step_spec, Some(&state.phi), Some(state.b), &opts.newton, t_next) {
            Ok(next) => {
                path.push(StepRecord {
                    t: t_next,
                    iterations: next.iterations,
                    residual_sup: next.residual_sup,
                    b: next.b,
                });
                history.extend(&next.residual_history);
                rows.extend(&next.diagnostics);
                state = next;
                t = t_next;
            }
            Err(e) => {
                if dt * 0.5 < finest - 1e-15 {
                    return Err(SolverError::StepFailure {
                        t: t_next,
                        source: Box::new(e),
                        last: Box::new(state),
                    });
                }
                dt *= 0.5;
            }
        }
    }
    Ok(ContinuityOutcome {
        state,
        path,
        residual_history: history,
        diagnostics: rows,
    })
}
