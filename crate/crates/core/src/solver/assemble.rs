//! Pointwise assembly of `A`, `f(lambda(A))` and the linearization coefficients.

use rayon::prelude::*;

use super::{EquationSpec, SolverError};
use crate::cones::ConeFunction;
use crate::quatlin::{self, HypMatrix};
use crate::torus::{re_trace_product, RealDerivatives};

/// Per-point data of one iterate.
pub(crate) struct Assembly {
    /// `f(lambda(A))`; NaN where the point is not admissible.
    pub f: Vec<f64>,
    /// Eigenvalues of `A`, `n` per point.
    pub lambda: Vec<f64>,
    /// `Re tr(g^{-1} Hess_H phi)`.
    pub lap: Vec<f64>,
    /// First point failing the admissibility margin, if any.
    pub first_bad: Option<usize>,
    /// Coefficients `c_ab` of `L psi = sum_{a <= b} c_ab D_ab psi`, stored per
    /// pair `(a, b)` in row order of the upper triangle.
    pub coef: Option<Vec<Vec<f64>>>,
    /// `sum_i f_i lambda_i` per point, filled together with `coef`.
    pub sum_f_lambda: Vec<f64>,
}

pub(crate) struct Context<'a> {
    pub spec: &'a EquationSpec,
    inv_sqrt: Option<HypMatrix>,
    ginv: Option<HypMatrix>,
    /// Degree of homogeneity of `exp(f)`.
    pub m: f64,
    pub offset: f64,
}

struct PointOut {
    f: f64,
    lambda: Vec<f64>,
    lap: f64,
    ok: bool,
    coef: Vec<f64>,
    sum_f_lambda: f64,
}

impl<'a> Context<'a> {
    pub fn new(spec: &'a EquationSpec) -> Result<Self, SolverError> {
        let identity = spec.metric_is_identity();
        Ok(Context {
            spec,
            inv_sqrt: if identity { None } else { Some(spec.metric_inv_sqrt()?) },
            ginv: if identity { None } else { Some(quatlin::inverse(spec.metric())?) },
            m: spec.op.order() as f64,
            offset: spec.op.offset(),
        })
    }

    fn a_matrix(&self, idx: usize, hess: &HypMatrix) -> HypMatrix {
        let x = self.spec.omega_at(idx).add(hess);
        match &self.inv_sqrt {
            Some(s) => x.congruence(s.as_qmatrix()),
            None => x,
        }
    }

    pub fn assemble(&self, phi: &[f64], with_coef: bool, margin: f64) -> Result<Assembly, SolverError> {
        let grid = &self.spec.grid;
        let der = grid.real_derivatives(phi)?;
        let outs: Vec<PointOut> = (0..grid.len())
            .into_par_iter()
            .map(|idx| self.point(&der, idx, with_coef, margin))
            .collect::<Result<_, _>>()?;
        let dims = grid.dims();
        let npairs = dims * (dims + 1) / 2;
        let first_bad = outs.iter().position(|o| !o.ok);
        let coef = (with_coef && first_bad.is_none()).then(|| {
            (0..npairs)
                .into_par_iter()
                .map(|p| outs.iter().map(|o| o.coef[p]).collect())
                .collect()
        });
        Ok(Assembly {
            f: outs.iter().map(|o| o.f).collect(),
            lambda: outs.iter().flat_map(|o| o.lambda.iter().copied()).collect(),
            lap: outs.iter().map(|o| o.lap).collect(),
            first_bad,
            coef,
            sum_f_lambda: outs.iter().map(|o| o.sum_f_lambda).collect(),
        })
    }

    fn point(&self, der: &RealDerivatives, idx: usize, with_coef: bool, margin: f64) -> Result<PointOut, SolverError> {
        let op = &self.spec.op;
        let hess = der.hess_q_at(idx)?;
        let lap = match &self.ginv {
            Some(gi) => re_trace_product(gi, &hess),
            None => hess.re_trace(),
        };
        let a = self.a_matrix(idx, &hess);
        let bad = |lambda: Vec<f64>| PointOut {
            f: f64::NAN,
            lambda,
            lap,
            ok: false,
            coef: Vec::new(),
            sum_f_lambda: f64::NAN,
        };
        if !with_coef {
            let lambda = quatlin::eigenvalues_hyp(&a)?;
            let shifted: Vec<f64> = lambda.iter().map(|l| l - margin).collect();
            if !op.contains(&shifted) {
                return Ok(bad(lambda));
            }
            return Ok(PointOut {
                f: op.eval(&lambda),
                lambda,
                lap,
                ok: true,
                coef: Vec::new(),
                sum_f_lambda: f64::NAN,
            });
        }
        let spec = quatlin::spectrum(&a)?;
        let lambda = spec.eigenvalues.clone();
        let shifted: Vec<f64> = lambda.iter().map(|l| l - margin).collect();
        if !op.contains(&shifted) {
            return Ok(bad(lambda));
        }
        let (f, grad) = op.eval_grad(&lambda);
        let weights: Vec<f64> = spec.group_offsets().iter().map(|&o| grad[o]).collect();
        let mut g = spec.combine(&weights);
        if let Some(s) = &self.inv_sqrt {
            g = g.congruence(s.as_qmatrix());
        }
        Ok(PointOut {
            f,
            sum_f_lambda: grad.iter().zip(&lambda).map(|(gi, li)| gi * li).sum(),
            lambda,
            lap,
            ok: true,
            coef: linearization_coefficients(&g),
        })
    }
}

/// Packed `c_ab` with `Re tr(G Hess_H psi) = sum_{a <= b} c_ab D_ab psi`.
///
/// The full coefficient matrix is `(1/4) R iota(G) R` with
/// `R = diag(1, -1, -1, -1)` blockwise; off-diagonal entries are doubled.
pub(crate) fn linearization_coefficients(g: &HypMatrix) -> Vec<f64> {
    let n = g.n();
    let dims = 4 * n;
    let real = quatlin::iota(g.as_qmatrix());
    let sign = |a: usize| if a < n { 1.0 } else { -1.0 };
    let mut out = Vec::with_capacity(dims * (dims + 1) / 2);
    for a in 0..dims {
        for b in a..dims {
            let v = 0.25 * sign(a) * sign(b) * real[(a, b)];
            out.push(if a == b { v } else { 2.0 * v });
        }
    }
    out
}

/// Full symmetric matrix from packed coefficients (undoing the doubling).
pub(crate) fn unpack(dims: usize, packed: &[f64]) -> nalgebra::DMatrix<f64> {
    let mut m = nalgebra::DMatrix::zeros(dims, dims);
    let mut k = 0;
    for a in 0..dims {
        for b in a..dims {
            if a == b {
                m[(a, a)] = packed[k];
            } else {
                m[(a, b)] = 0.5 * packed[k];
                m[(b, a)] = 0.5 * packed[k];
            }
            k += 1;
        }
    }
    m
}

/// `sum_{a <= b} c_ab(x) D_ab psi(x)`, optionally scaled pointwise.
pub(crate) fn apply_coefficients(
    spec: &EquationSpec,
    coef: &[Vec<f64>],
    psi: &[f64],
    scale: Option<&[f64]>,
) -> Result<Vec<f64>, SolverError> {
    let grid = &spec.grid;
    let dims = grid.dims();
    let der = grid.real_derivatives(psi)?;
    let mut out = vec![0.0; grid.len()];
    let mut k = 0;
    for a in 0..dims {
        for b in a..dims {
            let d = der.second_field(a, b);
            let c = &coef[k];
            out.par_iter_mut()
                .zip(d.par_iter().zip(c.par_iter()))
                .for_each(|(o, (dv, cv))| *o += cv * dv);
            k += 1;
        }
    }
    if let Some(s) = scale {
        out.par_iter_mut().zip(s.par_iter()).for_each(|(o, si)| *o *= si);
    }
    Ok(out)
}
