//! The discrete flat torus `R^{4n} / (2 pi Z)^{4n}` and quaternionic derivatives.
//!
//! Real coordinates are `x_p^r` with `p = 0..4` (the `1, i, j, k` slot) and
//! `r = 0..n` (the quaternionic coordinate). Axis `a = p * n + r`, so the axis
//! order is `x_0^1, ..., x_0^n, x_1^1, ...`. Fields are stored row-major with
//! axis 0 slowest: point `(j_0, ..., j_{4n-1})` sits at `sum_a j_a N^{4n-1-a}`.

mod expr;
mod io;
mod spectral;

pub use expr::{Factor, Term, TrigExpr, TrigKind};
pub use io::{read_field, sidecar_path, write_field, FieldFile, FIELD_MAGIC};
pub use spectral::{ConstantCoefficientSolver, FftNd};

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quat::Quat;
use crate::quatlin::{self, HypMatrix, QMatrix, QuatLinError};

#[derive(Debug, Error)]
pub enum TorusError {
    #[error("invalid grid: {0}")]
    Grid(String),
    #[error("quaternionic Hessian is not hyperhermitian at point {point}: deviation {deviation:e}")]
    Symmetry { point: usize, deviation: f64 },
    #[error("field has {found} values, grid has {expected} points")]
    Length { expected: usize, found: usize },
    #[error(transparent)]
    Algebra(#[from] QuatLinError),
    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Tolerance of the hyperhermitian check on assembled Hessians.
pub const HESS_SYM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Second-order central differences.
    Central2,
    /// Trigonometric interpolation; the Nyquist mode has zero first derivative.
    Spectral,
}

impl Scheme {
    pub fn tag(self) -> u32 {
        match self {
            Scheme::Central2 => 0,
            Scheme::Spectral => 1,
        }
    }

    pub fn from_tag(tag: u32) -> Option<Scheme> {
        match tag {
            0 => Some(Scheme::Central2),
            1 => Some(Scheme::Spectral),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Central2 => "central2",
            Scheme::Spectral => "spectral",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "central2" => Ok(Scheme::Central2),
            "spectral" => Ok(Scheme::Spectral),
            _ => Err(format!("unknown scheme {s:?}, expected central2 or spectral")),
        }
    }
}

/// Sparse rows of a circulant differentiation matrix.
type Stencil = Vec<Vec<(usize, f64)>>;

#[derive(Debug, Clone)]
pub struct TorusGrid {
    n: usize,
    points: usize,
    scheme: Scheme,
    len: usize,
    d1: Stencil,
    d2: Stencil,
}

impl TorusGrid {
    pub fn new(n: usize, points: usize, scheme: Scheme) -> Result<Self, TorusError> {
        if n == 0 {
            return Err(TorusError::Grid("n must be positive".into()));
        }
        let min_points = match scheme {
            Scheme::Central2 => 3,
            Scheme::Spectral => 2,
        };
        if points < min_points {
            return Err(TorusError::Grid(format!(
                "{scheme} needs at least {min_points} points per axis, got {points}"
            )));
        }
        let len = (points as u64)
            .checked_pow(4 * n as u32)
            .filter(|&l| l <= 1 << 32)
            .ok_or_else(|| TorusError::Grid(format!("{points}^{} points is too many", 4 * n)))?
            as usize;
        let (d1, d2) = stencils(points, scheme);
        Ok(TorusGrid {
            n,
            points,
            scheme,
            len,
            d1,
            d2,
        })
    }

    /// Quaternionic dimension.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Points per real axis.
    pub fn points(&self) -> usize {
        self.points
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.points as f64
    }

    /// Number of real axes, `4n`.
    pub fn dims(&self) -> usize {
        4 * self.n
    }

    /// Total number of grid points, `N^{4n}`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Axis of `x_p^r`, with `r` zero-based.
    pub fn axis(&self, p: usize, r: usize) -> usize {
        p * self.n + r
    }

    pub fn stride(&self, axis: usize) -> usize {
        self.points.pow((self.dims() - 1 - axis) as u32)
    }

    /// Torus volume `(2 pi)^{4n}`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dims() as i32)
    }

    pub fn multi_index(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims()];
        for a in (0..self.dims()).rev() {
            out[a] = idx % self.points;
            idx /= self.points;
        }
        out
    }

    pub fn coords(&self, idx: usize) -> Vec<f64> {
        let h = self.spacing();
        self.multi_index(idx).into_iter().map(|j| j as f64 * h).collect()
    }

    /// Samples `f` at every grid point.
    pub fn sample(&self, f: impl Fn(&[f64]) -> f64 + Sync) -> Vec<f64> {
        (0..self.len)
            .into_par_iter()
            .map(|i| f(&self.coords(i)))
            .collect()
    }

    fn check(&self, u: &[f64]) -> Result<(), TorusError> {
        if u.len() == self.len {
            Ok(())
        } else {
            Err(TorusError::Length {
                expected: self.len,
                found: u.len(),
            })
        }
    }

    fn apply_stencil(&self, st: &Stencil, u: &[f64], axis: usize) -> Vec<f64> {
        assert_eq!(u.len(), self.len, "field length does not match grid");
        let s = self.stride(axis);
        let np = self.points;
        let mut out = vec![0.0; self.len];
        out.par_iter_mut().enumerate().for_each(|(idx, o)| {
            let j = (idx / s) % np;
            let base = idx - j * s;
            *o = st[j].iter().map(|&(l, c)| c * u[base + l * s]).sum();
        });
        out
    }

    /// First derivative along `axis`.
    pub fn d1(&self, u: &[f64], axis: usize) -> Vec<f64> {
        self.apply_stencil(&self.d1, u, axis)
    }

    /// Pure second derivative along `axis`.
    pub fn d2(&self, u: &[f64], axis: usize) -> Vec<f64> {
        self.apply_stencil(&self.d2, u, axis)
    }

    /// Second derivative along `(a, b)`: `d2` on the diagonal, `d1 d1` off it.
    pub fn d_ab(&self, u: &[f64], a: usize, b: usize) -> Vec<f64> {
        if a == b {
            self.d2(u, a)
        } else {
            self.d1(&self.d1(u, b), a)
        }
    }

    /// Eigenvalue of `d1` on the mode `e^{i k x}` with `k` the signed
    /// frequency of index `j`, divided by `i`.
    pub fn symbol_d1(&self, j: usize) -> f64 {
        let np = self.points;
        let k = signed_frequency(j, np) as f64;
        match self.scheme {
            Scheme::Spectral if np % 2 == 0 && j == np / 2 => 0.0,
            Scheme::Spectral => k,
            Scheme::Central2 => (k * self.spacing()).sin() / self.spacing(),
        }
    }

    /// Eigenvalue of `d2` on the mode of index `j`.
    pub fn symbol_d2(&self, j: usize) -> f64 {
        let k = signed_frequency(j, self.points) as f64;
        match self.scheme {
            Scheme::Spectral => -k * k,
            Scheme::Central2 => {
                let h = self.spacing();
                let s = (0.5 * k * h).sin();
                -4.0 * s * s / (h * h)
            }
        }
    }

    /// All first and second real derivatives of `u`.
    pub fn real_derivatives(&self, u: &[f64]) -> Result<RealDerivatives, TorusError> {
        self.check(u)?;
        let d = self.dims();
        let first: Vec<Vec<f64>> = (0..d).map(|a| self.d1(u, a)).collect();
        let mut second = Vec::with_capacity(d * (d + 1) / 2);
        for a in 0..d {
            for b in a..d {
                second.push(if a == b {
                    self.d2(u, a)
                } else {
                    self.d1(&first[b], a)
                });
            }
        }
        Ok(RealDerivatives {
            n: self.n,
            dims: d,
            first,
            second,
        })
    }

    /// Quaternionic derivative `dq^r u = d_0 u - sum_i (d_i u) e_i` along `r`.
    pub fn dq(&self, u: &[f64], r: usize) -> Result<Vec<Quat>, TorusError> {
        self.check(u)?;
        let parts: Vec<Vec<f64>> = (0..4).map(|p| self.d1(u, self.axis(p, r))).collect();
        Ok((0..self.len)
            .map(|i| Quat::new(parts[0][i], -parts[1][i], -parts[2][i], -parts[3][i]))
            .collect())
    }

    /// Conjugate quaternionic derivative `sum_i e_i d_i u` along `r`.
    pub fn dqbar(&self, u: &[f64], r: usize) -> Result<Vec<Quat>, TorusError> {
        self.check(u)?;
        let parts: Vec<Vec<f64>> = (0..4).map(|p| self.d1(u, self.axis(p, r))).collect();
        Ok((0..self.len)
            .map(|i| Quat::new(parts[0][i], parts[1][i], parts[2][i], parts[3][i]))
            .collect())
    }

    /// `dq^r F = sum_p (d_p F) conj(e_p)` for a quaternion-valued field.
    pub fn dq_quat(&self, f: &[Quat], r: usize) -> Vec<Quat> {
        self.quat_derivative(f, r, |p, d| d * Quat::UNITS[p].conj())
    }

    /// `dqbar^r F = sum_p e_p (d_p F)` for a quaternion-valued field.
    pub fn dqbar_quat(&self, f: &[Quat], r: usize) -> Vec<Quat> {
        self.quat_derivative(f, r, |p, d| Quat::UNITS[p] * d)
    }

    fn quat_derivative(&self, f: &[Quat], r: usize, combine: impl Fn(usize, Quat) -> Quat) -> Vec<Quat> {
        let comps: Vec<Vec<f64>> = (0..4)
            .map(|c| f.iter().map(|q| q.component(c)).collect())
            .collect();
        let mut out = vec![Quat::ZERO; self.len];
        for p in 0..4 {
            let a = self.axis(p, r);
            let dc: Vec<Vec<f64>> = comps.iter().map(|c| self.d1(c, a)).collect();
            for (i, o) in out.iter_mut().enumerate() {
                *o += combine(p, Quat::new(dc[0][i], dc[1][i], dc[2][i], dc[3][i]));
            }
        }
        out
    }

    /// Quaternionic Hessian `(1/4) dqbar^r dq^s u` at every point.
    pub fn hess_q(&self, u: &[f64]) -> Result<Vec<HypMatrix>, TorusError> {
        let der = self.real_derivatives(u)?;
        (0..self.len)
            .into_par_iter()
            .map(|i| der.hess_q_at(i))
            .collect()
    }

    /// `Re tr(g^{-1} Hess_H u)`; with `g = 1` this is a quarter of the Euclidean Laplacian.
    pub fn laplacian_q(&self, u: &[f64], g: &HypMatrix) -> Result<Vec<f64>, TorusError> {
        let ginv = quatlin::inverse(g)?;
        let hess = self.hess_q(u)?;
        Ok(hess.par_iter().map(|h| re_trace_product(&ginv, h)).collect())
    }

    /// `max |u|`.
    pub fn c0_norm(&self, u: &[f64]) -> f64 {
        u.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Sup over the grid of the Euclidean gradient length.
    pub fn grad_supnorm(&self, u: &[f64]) -> f64 {
        let grads: Vec<Vec<f64>> = (0..self.dims()).map(|a| self.d1(u, a)).collect();
        (0..self.len)
            .map(|i| grads.iter().map(|g| g[i] * g[i]).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn mean(&self, u: &[f64]) -> f64 {
        u.iter().sum::<f64>() / u.len() as f64
    }

    /// Integral over the torus by the (uniform) trapezoidal rule.
    pub fn mean_integral(&self, u: &[f64]) -> f64 {
        self.mean(u) * self.volume()
    }
}

/// `Re tr(X Y) = sum_{r,s} Re(X_rs Y_sr)`.
pub fn re_trace_product(x: &HypMatrix, y: &HypMatrix) -> f64 {
    let n = x.n();
    let mut acc = 0.0;
    for r in 0..n {
        for s in 0..n {
            acc += (x.get(r, s) * y.get(s, r)).w;
        }
    }
    acc
}

fn signed_frequency(j: usize, np: usize) -> i64 {
    if 2 * j <= np {
        j as i64
    } else {
        j as i64 - np as i64
    }
}

fn stencils(np: usize, scheme: Scheme) -> (Stencil, Stencil) {
    let h = 2.0 * PI / np as f64;
    match scheme {
        Scheme::Central2 => {
            let d1 = (0..np)
                .map(|j| vec![((j + 1) % np, 0.5 / h), ((j + np - 1) % np, -0.5 / h)])
                .collect();
            let d2 = (0..np)
                .map(|j| {
                    vec![
                        ((j + 1) % np, 1.0 / (h * h)),
                        (j, -2.0 / (h * h)),
                        ((j + np - 1) % np, 1.0 / (h * h)),
                    ]
                })
                .collect();
            (d1, d2)
        }
        Scheme::Spectral => {
            // Circulant kernels of the trigonometric interpolant.
            let kmax = (np - 1) / 2;
            let nyquist = np % 2 == 0;
            let kernel1 = |m: usize| -> f64 {
                let t = m as f64 * h;
                (1..=kmax).map(|k| -2.0 * k as f64 * (k as f64 * t).sin()).sum::<f64>() / np as f64
            };
            let kernel2 = |m: usize| -> f64 {
                let t = m as f64 * h;
                let mut s: f64 = (1..=kmax)
                    .map(|k| -2.0 * (k * k) as f64 * (k as f64 * t).cos())
                    .sum();
                if nyquist {
                    let kn = (np / 2) as f64;
                    s -= kn * kn * (kn * t).cos();
                }
                s / np as f64
            };
            let build = |kern: &dyn Fn(usize) -> f64| -> Stencil {
                (0..np)
                    .map(|j| {
                        (0..np)
                            .map(|l| (l, kern((j + np - l) % np)))
                            .filter(|(_, c)| c.abs() > 1e-15)
                            .collect()
                    })
                    .collect()
            };
            (build(&kernel1), build(&kernel2))
        }
    }
}

/// Products `e_i conj(e_p)` indexed `[i][p]`.
fn unit_products() -> [[Quat; 4]; 4] {
    let mut t = [[Quat::ZERO; 4]; 4];
    for (i, row) in t.iter_mut().enumerate() {
        for (p, e) in row.iter_mut().enumerate() {
            *e = Quat::UNITS[i] * Quat::UNITS[p].conj();
        }
    }
    t
}

/// `(1/4) sum_{i,p} e_i conj(e_p) D[(i,r),(p,s)]` for a real `4n x 4n` Hessian.
pub fn hess_q_from_real(n: usize, d: impl Fn(usize, usize) -> f64) -> QMatrix {
    let units = unit_products();
    QMatrix::from_fn(n, |r, s| {
        let mut acc = Quat::ZERO;
        for (i, row) in units.iter().enumerate() {
            for (p, e) in row.iter().enumerate() {
                acc += e.scale(d(i * n + r, p * n + s));
            }
        }
        acc.scale(0.25)
    })
}

/// First and second real derivatives of a scalar field.
#[derive(Debug, Clone)]
pub struct RealDerivatives {
    n: usize,
    dims: usize,
    pub first: Vec<Vec<f64>>,
    second: Vec<Vec<f64>>,
}

impl RealDerivatives {
    fn pair(&self, a: usize, b: usize) -> usize {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        a * self.dims - a * (a + 1) / 2 + b
    }

    /// `D_ab u` at point `idx`.
    pub fn second(&self, a: usize, b: usize, idx: usize) -> f64 {
        self.second[self.pair(a, b)][idx]
    }

    /// The field `D_ab u`.
    pub fn second_field(&self, a: usize, b: usize) -> &[f64] {
        &self.second[self.pair(a, b)]
    }

    pub fn real_hessian_at(&self, idx: usize) -> nalgebra::DMatrix<f64> {
        nalgebra::DMatrix::from_fn(self.dims, self.dims, |a, b| self.second(a, b, idx))
    }

    /// Quaternionic Hessian at `idx`, checked to be hyperhermitian.
    pub fn hess_q_at(&self, idx: usize) -> Result<HypMatrix, TorusError> {
        let q = hess_q_from_real(self.n, |a, b| self.second(a, b, idx));
        let deviation = q.hyperhermitian_deviation();
        if deviation > HESS_SYM_TOL * (1.0 + q.max_abs()) {
            return Err(TorusError::Symmetry {
                point: idx,
                deviation,
            });
        }
        Ok(HypMatrix::symmetrize(&q))
    }
}
