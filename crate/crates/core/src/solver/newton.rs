//! Damped inexact Newton on `(phi, beta)` with FFT-preconditioned GMRES.

use rayon::prelude::*;

use super::assemble::{apply_coefficients, unpack, Assembly, Context};
use super::gmres::gmres;
use super::{DiagnosticRow, EquationSpec, NewtonOptions, SolverError, SolverState};
use crate::cones::ConeFunction;
use crate::torus::ConstantCoefficientSolver;

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn project_mean_zero(v: &mut [f64]) {
    let m = mean(v);
    v.par_iter_mut().for_each(|x| *x -= m);
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `f(lambda(A)) - H - log b - offset`.
pub fn residual(spec: &EquationSpec, phi: &[f64], b: f64) -> Result<Vec<f64>, SolverError> {
    let ctx = Context::new(spec)?;
    let asm = ctx.assemble(phi, false, 0.0)?;
    if let Some(point) = asm.first_bad {
        return Err(SolverError::Admissibility { point });
    }
    Ok(log_residual(&ctx, &asm, b))
}

fn log_residual(ctx: &Context, asm: &Assembly, b: f64) -> Vec<f64> {
    let shift = b.ln() + ctx.offset;
    asm.f
        .par_iter()
        .zip(ctx.spec.datum.par_iter())
        .map(|(f, h)| f - h - shift)
        .collect()
}

/// `L psi = Re tr(g^{-1/2} F g^{-1/2} Hess_H psi)` at `phi`, with
/// `F = sum_i f_i(lambda) P_i`.
pub fn apply_linearization(spec: &EquationSpec, phi: &[f64], psi: &[f64]) -> Result<Vec<f64>, SolverError> {
    let ctx = Context::new(spec)?;
    let asm = ctx.assemble(phi, true, 0.0)?;
    if let Some(point) = asm.first_bad {
        return Err(SolverError::Admissibility { point });
    }
    apply_coefficients(spec, asm.coef.as_ref().expect("coefficients"), psi, None)
}

/// Quadrature of the normalizing constant:
/// `mean(sigma_k(lambda) / C(n,k)) / mean(exp H)`, with `sigma_n(T lambda)` for
/// the `(n-1)` family.
pub fn b_from_integral(spec: &EquationSpec, phi: &[f64]) -> Result<f64, SolverError> {
    let ctx = Context::new(spec)?;
    let asm = ctx.assemble(phi, false, 0.0)?;
    if let Some(point) = asm.first_bad {
        return Err(SolverError::Admissibility { point });
    }
    let n = spec.grid.n();
    let num: Vec<f64> = asm
        .lambda
        .par_chunks(n)
        .map(|l| spec.op.normalized_sigma(l))
        .collect();
    let den: Vec<f64> = spec.datum.par_iter().map(|h| h.exp()).collect();
    Ok(mean(&num) / mean(&den))
}

fn diagnostic_row(ctx: &Context, phi: &[f64], asm: &Assembly, t: f64, iter: usize, residual_sup: f64, b: f64) -> DiagnosticRow {
    let grid = &ctx.spec.grid;
    let n = grid.n();
    let op = &ctx.spec.op;
    let margin = asm
        .lambda
        .par_chunks(n)
        .map(|l| op.g0(l).unwrap_or(f64::NAN))
        .reduce(|| f64::INFINITY, f64::min);
    let grad_sup = grid.grad_supnorm(phi);
    let lap_sup = sup(&asm.lap);
    DiagnosticRow {
        t,
        iter,
        residual_sup,
        b,
        c0: grid.c0_norm(phi),
        grad_sup,
        lap_sup,
        ratio: lap_sup / (grad_sup * grad_sup + 1.0),
        margin,
        sum_f_lambda: asm.sum_f_lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    }
}

/// Monitor row for a given `phi` and `b`.
pub fn diagnostics(spec: &EquationSpec, phi: &[f64], b: f64, t: f64) -> Result<DiagnosticRow, SolverError> {
    let ctx = Context::new(spec)?;
    let asm = ctx.assemble(phi, true, 0.0)?;
    if let Some(point) = asm.first_bad {
        return Err(SolverError::Admissibility { point });
    }
    let r = sup(&log_residual(&ctx, &asm, b));
    Ok(diagnostic_row(&ctx, phi, &asm, t, 0, r, b))
}

/// Newton solve at continuity parameter `t = 1`.
pub fn newton_solve(
    spec: &EquationSpec,
    phi0: Option<&[f64]>,
    b0: Option<f64>,
    opts: &NewtonOptions,
) -> Result<SolverState, SolverError> {
    newton_solve_at(spec, phi0, b0, opts, 1.0)
}

/// Newton solve from `phi0` (default 0, projected to mean zero) and `b0`
/// (default: the `b` making the homogeneous residual mean-zero). `t` only
/// labels the diagnostic rows.
pub fn newton_solve_at(
    spec: &EquationSpec,
    phi0: Option<&[f64]>,
    b0: Option<f64>,
    opts: &NewtonOptions,
    t: f64,
) -> Result<SolverState, SolverError> {
    let ctx = Context::new(spec)?;
    let grid = &spec.grid;
    let len = grid.len();
    let m = ctx.m;
    let mut phi = match phi0 {
        Some(p) if p.len() == len => p.to_vec(),
        Some(p) => {
            return Err(SolverError::Spec(format!(
                "initial phi has {} values, grid has {len}",
                p.len()
            )))
        }
        None => vec![0.0; len],
    };
    project_mean_zero(&mut phi);
    let w: Vec<f64> = spec.datum.par_iter().map(|h| ((h + ctx.offset) / m).exp()).collect();
    let w_mean = mean(&w);

    let mut asm = ctx.assemble(&phi, true, opts.margin)?;
    if let Some(point) = asm.first_bad {
        return Err(SolverError::Admissibility { point });
    }
    let mut beta = match b0 {
        Some(b) if b > 0.0 => b.powf(1.0 / m),
        Some(b) => return Err(SolverError::Spec(format!("initial b must be positive, got {b}"))),
        None => {
            let e: Vec<f64> = asm.f.par_iter().map(|f| (f / m).exp()).collect();
            mean(&e) / w_mean
        }
    };

    let homogeneous = |asm: &Assembly, beta: f64| -> Vec<f64> {
        asm.f
            .par_iter()
            .zip(w.par_iter())
            .map(|(f, wi)| (f / m).exp() - beta * wi)
            .collect()
    };

    let mut history = Vec::new();
    let mut rows = Vec::new();
    let mut iter = 0;
    loop {
        let b = beta.powf(m);
        let r = log_residual(&ctx, &asm, b);
        let rsup = sup(&r);
        history.push(rsup);
        let row = diagnostic_row(&ctx, &phi, &asm, t, iter, rsup, b);
        rows.push(row);
        let state = |phi: &Vec<f64>, r: Vec<f64>, history: &Vec<f64>, rows: &Vec<DiagnosticRow>| SolverState {
            sup_shift: phi.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            phi: phi.clone(),
            b,
            residual: r,
            residual_sup: rsup,
            iterations: iter,
            residual_history: history.clone(),
            margin: row.margin,
            diagnostics: rows.clone(),
        };
        if rsup <= opts.tol {
            return Ok(state(&phi, r, &history, &rows));
        }
        if iter >= opts.max_iter {
            return Err(SolverError::MaxIter {
                iterations: iter,
                residual: rsup,
                last: Box::new(state(&phi, r, &history, &rows)),
            });
        }

        let g = homogeneous(&asm, beta);
        let g_norm = l2(&g);
        let scale: Vec<f64> = asm.f.par_iter().map(|f| (f / m).exp() / m).collect();
        let coef = asm.coef.as_ref().expect("coefficients of an admissible iterate");
        let dims = grid.dims();
        let npairs = coef.len();
        let avg: Vec<f64> = (0..npairs)
            .into_par_iter()
            .map(|p| coef[p].iter().zip(&scale).map(|(c, s)| c * s).sum::<f64>() / len as f64)
            .collect();
        let pre = ConstantCoefficientSolver::new(grid, &unpack(dims, &avg));

        let jac = |z: &[f64]| -> Vec<f64> {
            let (dphi, dbeta) = (&z[..len], z[len]);
            let mut out = apply_coefficients(spec, coef, dphi, Some(&scale)).expect("grid-sized field");
            out.par_iter_mut().zip(w.par_iter()).for_each(|(o, wi)| *o -= dbeta * wi);
            out.push(mean(dphi));
            out
        };
        let precond = |y: &[f64]| -> Vec<f64> {
            let field = &y[..len];
            let ybar = mean(field);
            let mut out = pre.solve(field);
            let shift = y[len];
            out.par_iter_mut().for_each(|v| *v += shift);
            out.push(-ybar / w_mean);
            out
        };
        let mut rhs: Vec<f64> = g.iter().map(|v| -v).collect();
        rhs.push(0.0);
        let eta = if rsup <= opts.fine_below { opts.eta_fine } else { opts.eta_coarse };
        let sol = gmres(jac, precond, &rhs, eta, opts.gmres_restart, opts.gmres_max_iter);
        if !(sol.rel_residual <= 0.5) {
            return Err(SolverError::Krylov {
                iteration: iter,
                rel_residual: sol.rel_residual,
                last: Box::new(state(&phi, r, &history, &rows)),
            });
        }
        let (dphi, dbeta) = (&sol.x[..len], sol.x[len]);

        let mut alpha = 1.0;
        let accepted = loop {
            if alpha < opts.min_step {
                break None;
            }
            let beta_try = beta + alpha * dbeta;
            if beta_try > 0.0 {
                let mut phi_try: Vec<f64> = phi
                    .par_iter()
                    .zip(dphi.par_iter())
                    .map(|(p, d)| p + alpha * d)
                    .collect();
                project_mean_zero(&mut phi_try);
                let asm_try = ctx.assemble(&phi_try, true, opts.margin)?;
                if asm_try.first_bad.is_none() {
                    let g_try = l2(&homogeneous(&asm_try, beta_try));
                    if g_try <= (1.0 - opts.armijo * alpha) * g_norm {
                        break Some((phi_try, beta_try, asm_try));
                    }
                }
            }
            alpha *= 0.5;
        };
        match accepted {
            Some((p, bt, a)) => {
                phi = p;
                beta = bt;
                asm = a;
                iter += 1;
            }
            None => {
                return Err(SolverError::LineSearch {
                    iteration: iter,
                    min_step: opts.min_step,
                    last: Box::new(state(&phi, r, &history, &rows)),
                })
            }
        }
    }
}

/// Direct solve of the `n = 1` equation, which is linear:
/// `Hess_H phi = g b e^H - Omega` with `b = mean(Omega) / (g mean(e^H))`.
/// Returns the mean-zero `phi` and `b`.
pub fn solve_n1_linear(spec: &EquationSpec) -> Result<(Vec<f64>, f64), SolverError> {
    let grid = &spec.grid;
    if grid.n() != 1 {
        return Err(SolverError::Spec("the direct solve needs n = 1".into()));
    }
    let gamma = spec.metric().get(0, 0).w;
    let omega: Vec<f64> = (0..grid.len()).map(|i| spec.omega_at(i).get(0, 0).w).collect();
    let eh: Vec<f64> = spec.datum.iter().map(|h| h.exp()).collect();
    let b = mean(&omega) / (gamma * mean(&eh));
    let rhs: Vec<f64> = eh.iter().zip(&omega).map(|(e, o)| gamma * b * e - o).collect();
    let quarter = nalgebra::DMatrix::identity(4, 4) * 0.25;
    let mut phi = ConstantCoefficientSolver::new(grid, &quarter).solve(&rhs);
    project_mean_zero(&mut phi);
    Ok((phi, b))
}
