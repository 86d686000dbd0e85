//! Quaternionic and hyperhermitian matrix algebra.
//!
//! Every computation that needs a spectrum goes through the real
//! representation `iota`, which maps an `n x n` quaternionic matrix
//! `A + iB + jC + kD` to the `4n x 4n` block matrix
//!
//! ```text
//!  A  B  C  D
//! -B  A -D  C
//! -C  D  A -B
//! -D -C  B  A
//! ```
//!
//! `iota` is an injective homomorphism of real algebras onto the commutant
//! `V` of the standard structure `(I0, J0, K0)`, and it sends hyperhermitian
//! matrices to symmetric ones. Each eigenvalue of a hyperhermitian matrix
//! shows up four times in the spectrum of its image.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::quat::Quat;

/// Relative tolerance of the hyperhermitian predicate.
pub const HYP_TOL: f64 = 1e-10;
/// Relative tolerance used to group the real spectrum into quadruples.
pub const GROUP_TOL: f64 = 1e-7;

pub type RealMatrix = DMatrix<f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuatLinError {
    #[error("matrix is not hyperhermitian: deviation {deviation:e} exceeds tolerance {tolerance:e}")]
    NotHyperhermitian { deviation: f64, tolerance: f64 },
    #[error(
        "real spectrum does not split into equal quadruples: group {group} has spread {spread:e} > {tolerance:e}"
    )]
    Grouping {
        group: usize,
        spread: f64,
        tolerance: f64,
    },
    #[error("matrix is singular: eigenvalue {value:e} is below {tolerance:e} in magnitude")]
    Singular { value: f64, tolerance: f64 },
    #[error("matrix is not positive definite: smallest eigenvalue {min:e}")]
    NotPositive { min: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    Dimension { expected: usize, found: usize },
}

/// A general `n x n` quaternionic matrix, stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Quat>>", into = "Vec<Vec<Quat>>")]
pub struct QMatrix {
    n: usize,
    data: Vec<Quat>,
}

impl QMatrix {
    pub fn zeros(n: usize) -> Self {
        QMatrix {
            n,
            data: vec![Quat::ZERO; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |r, s| if r == s { Quat::ONE } else { Quat::ZERO })
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Quat) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for r in 0..n {
            for s in 0..n {
                data.push(f(r, s));
            }
        }
        QMatrix { n, data }
    }

    pub fn from_real_diagonal(d: &[f64]) -> Self {
        Self::from_fn(d.len(), |r, s| if r == s { Quat::real(d[r]) } else { Quat::ZERO })
    }

    pub fn from_rows(rows: Vec<Vec<Quat>>) -> Result<Self, QuatLinError> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(QuatLinError::Dimension {
                    expected: n,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(QMatrix { n, data })
    }

    pub fn rows(&self) -> Vec<Vec<Quat>> {
        self.data.chunks(self.n.max(1)).map(|c| c.to_vec()).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, r: usize, s: usize) -> Quat {
        self.data[r * self.n + s]
    }

    pub fn set(&mut self, r: usize, s: usize, q: Quat) {
        self.data[r * self.n + s] = q;
    }

    pub fn entries(&self) -> &[Quat] {
        &self.data
    }

    /// Quaternionic conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.n, |r, s| self.get(s, r).conj())
    }

    pub fn matmul(&self, other: &QMatrix) -> Self {
        assert_eq!(self.n, other.n, "matmul dimension mismatch");
        let n = self.n;
        Self::from_fn(n, |r, s| {
            (0..n).fold(Quat::ZERO, |acc, t| acc + self.get(r, t) * other.get(t, s))
        })
    }

    pub fn add(&self, other: &QMatrix) -> Self {
        assert_eq!(self.n, other.n, "add dimension mismatch");
        QMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a + *b).collect(),
        }
    }

    pub fn sub(&self, other: &QMatrix) -> Self {
        assert_eq!(self.n, other.n, "sub dimension mismatch");
        QMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| *a - *b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        QMatrix {
            n: self.n,
            data: self.data.iter().map(|q| q.scale(s)).collect(),
        }
    }

    /// Largest absolute real component over all entries.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, q| m.max(q.max_abs()))
    }

    /// `max |H - H*|` over all real components.
    pub fn hyperhermitian_deviation(&self) -> f64 {
        self.sub(&self.adjoint()).max_abs()
    }

    /// Real part of the trace.
    pub fn re_trace(&self) -> f64 {
        (0..self.n).map(|r| self.get(r, r).w).sum()
    }
}

impl TryFrom<Vec<Vec<Quat>>> for QMatrix {
    type Error = QuatLinError;
    fn try_from(rows: Vec<Vec<Quat>>) -> Result<Self, Self::Error> {
        QMatrix::from_rows(rows)
    }
}

impl From<QMatrix> for Vec<Vec<Quat>> {
    fn from(m: QMatrix) -> Self {
        m.rows()
    }
}

/// A quaternionic matrix with `H = H*`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "QMatrix", into = "QMatrix")]
pub struct HypMatrix(QMatrix);

impl HypMatrix {
    /// Accepts `m` if `|m - m*|_max <= HYP_TOL (1 + |m|_max)` and stores the
    /// exactly symmetrized matrix `(m + m*) / 2`.
    pub fn new(m: QMatrix) -> Result<Self, QuatLinError> {
        let deviation = m.hyperhermitian_deviation();
        let tolerance = HYP_TOL * (1.0 + m.max_abs());
        if deviation > tolerance {
            return Err(QuatLinError::NotHyperhermitian {
                deviation,
                tolerance,
            });
        }
        Ok(Self::symmetrize(&m))
    }

    /// `(m + m*) / 2`, without any tolerance check.
    pub fn symmetrize(m: &QMatrix) -> Self {
        HypMatrix(m.add(&m.adjoint()).scale(0.5))
    }

    pub fn identity(n: usize) -> Self {
        HypMatrix(QMatrix::identity(n))
    }

    pub fn zeros(n: usize) -> Self {
        HypMatrix(QMatrix::zeros(n))
    }

    pub fn diagonal(d: &[f64]) -> Self {
        HypMatrix(QMatrix::from_real_diagonal(d))
    }

    pub fn n(&self) -> usize {
        self.0.n
    }

    pub fn get(&self, r: usize, s: usize) -> Quat {
        self.0.get(r, s)
    }

    pub fn as_qmatrix(&self) -> &QMatrix {
        &self.0
    }

    pub fn into_qmatrix(self) -> QMatrix {
        self.0
    }

    /// Real diagonal entries.
    pub fn diag(&self) -> Vec<f64> {
        (0..self.n()).map(|r| self.get(r, r).w).collect()
    }

    pub fn re_trace(&self) -> f64 {
        self.0.re_trace()
    }

    pub fn add(&self, other: &HypMatrix) -> Self {
        HypMatrix(self.0.add(&other.0))
    }

    pub fn sub(&self, other: &HypMatrix) -> Self {
        HypMatrix(self.0.sub(&other.0))
    }

    pub fn scale(&self, s: f64) -> Self {
        HypMatrix(self.0.scale(s))
    }

    /// `U* H U`, which stays hyperhermitian for any `U`.
    pub fn congruence(&self, u: &QMatrix) -> Self {
        HypMatrix::symmetrize(&u.adjoint().matmul(&self.0).matmul(u))
    }
}

impl TryFrom<QMatrix> for HypMatrix {
    type Error = QuatLinError;
    fn try_from(m: QMatrix) -> Result<Self, Self::Error> {
        HypMatrix::new(m)
    }
}

impl From<HypMatrix> for QMatrix {
    fn from(h: HypMatrix) -> Self {
        h.0
    }
}

/// Real representation of a quaternionic matrix.
pub fn iota(m: &QMatrix) -> RealMatrix {
    let n = m.n();
    let mut out = RealMatrix::zeros(4 * n, 4 * n);
    // Row block b, column block c holds sign * component.
    const LAYOUT: [[(f64, usize); 4]; 4] = [
        [(1.0, 0), (1.0, 1), (1.0, 2), (1.0, 3)],
        [(-1.0, 1), (1.0, 0), (-1.0, 3), (1.0, 2)],
        [(-1.0, 2), (1.0, 3), (1.0, 0), (-1.0, 1)],
        [(-1.0, 3), (-1.0, 2), (1.0, 1), (1.0, 0)],
    ];
    for r in 0..n {
        for s in 0..n {
            let q = m.get(r, s);
            for (b, row) in LAYOUT.iter().enumerate() {
                for (c, &(sign, comp)) in row.iter().enumerate() {
                    out[(b * n + r, c * n + s)] = sign * q.component(comp);
                }
            }
        }
    }
    out
}

/// Inverse of [`iota`] on `V`: reads the components off the first block row.
pub fn iota_inverse(h: &RealMatrix) -> QMatrix {
    let n = h.nrows() / 4;
    QMatrix::from_fn(n, |r, s| {
        Quat::new(h[(r, s)], h[(r, n + s)], h[(r, 2 * n + s)], h[(r, 3 * n + s)])
    })
}

/// The standard hypercomplex structure `(I0, J0, K0)` on `R^{4n}`.
pub fn structure_matrices(n: usize) -> [RealMatrix; 3] {
    // (row block, col block, sign) for the nonzero identity blocks.
    let blocks: [[(usize, usize, f64); 4]; 3] = [
        [(0, 1, -1.0), (1, 0, 1.0), (2, 3, -1.0), (3, 2, 1.0)],
        [(0, 2, -1.0), (1, 3, 1.0), (2, 0, 1.0), (3, 1, -1.0)],
        [(0, 3, -1.0), (1, 2, -1.0), (2, 1, 1.0), (3, 0, 1.0)],
    ];
    blocks.map(|spec| {
        let mut m = RealMatrix::zeros(4 * n, 4 * n);
        for (b, c, sign) in spec {
            for r in 0..n {
                m[(b * n + r, c * n + r)] = sign;
            }
        }
        m
    })
}

/// `p(H) = (H - I0 H I0 - J0 H J0 - K0 H K0) / 4`, the projection onto `V`.
pub fn proj_p(h: &RealMatrix) -> RealMatrix {
    let n = h.nrows() / 4;
    let [i0, j0, k0] = structure_matrices(n);
    (h - &i0 * h * &i0 - &j0 * h * &j0 - &k0 * h * &k0) * 0.25
}

/// One eigenvalue cluster of a hyperhermitian matrix.
#[derive(Debug, Clone)]
pub struct SpectralGroup {
    pub value: f64,
    /// Number of quaternionic eigenvalues merged into this group.
    pub multiplicity: usize,
    pub projector: HypMatrix,
}

/// Eigenvalues (descending, one per quadruple) and merged spectral projectors.
#[derive(Debug, Clone)]
pub struct HypSpectrum {
    pub eigenvalues: Vec<f64>,
    pub groups: Vec<SpectralGroup>,
}

impl HypSpectrum {
    /// `sum_g f(value_g) P_g`.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> HypMatrix {
        let n = self.eigenvalues.len();
        let mut acc = QMatrix::zeros(n);
        for g in &self.groups {
            acc = acc.add(&g.projector.as_qmatrix().scale(f(g.value)));
        }
        HypMatrix::symmetrize(&acc)
    }

    /// `sum_g w_g P_g` for per-group weights.
    pub fn combine(&self, weights: &[f64]) -> HypMatrix {
        let n = self.eigenvalues.len();
        let mut acc = QMatrix::zeros(n);
        for (g, w) in self.groups.iter().zip(weights) {
            acc = acc.add(&g.projector.as_qmatrix().scale(*w));
        }
        HypMatrix::symmetrize(&acc)
    }

    /// For each group, the index in `eigenvalues` of its first member.
    pub fn group_offsets(&self) -> Vec<usize> {
        let mut offs = Vec::with_capacity(self.groups.len());
        let mut at = 0;
        for g in &self.groups {
            offs.push(at);
            at += g.multiplicity;
        }
        offs
    }
}

/// Full spectral decomposition. Sizes 1 and 2 use closed forms, larger
/// sizes go through [`spectrum_via_real`].
pub fn spectrum(h: &HypMatrix) -> Result<HypSpectrum, QuatLinError> {
    match h.n() {
        2 => Ok(spectrum_2x2(h)),
        _ => spectrum_via_real(h),
    }
}

/// `(larger, smaller)` eigenvalue of a `2 x 2` hyperhermitian matrix.
fn eigenvalues_2x2(h: &HypMatrix) -> (f64, f64) {
    let (a, c, q) = (h.get(0, 0).w, h.get(1, 1).w, h.get(0, 1));
    let mean = 0.5 * (a + c);
    let rad = (0.25 * (a - c) * (a - c) + q.norm_sqr()).sqrt();
    let det = a * c - q.norm_sqr();
    // Recover the smaller-magnitude root from the product to avoid cancellation.
    if mean >= 0.0 {
        let hi = mean + rad;
        (hi, if hi != 0.0 { det / hi } else { mean - rad })
    } else {
        let lo = mean - rad;
        (det / lo, lo)
    }
}

fn spectrum_2x2(h: &HypMatrix) -> HypSpectrum {
    let (hi, lo) = eigenvalues_2x2(h);
    let tolerance = GROUP_TOL * (1.0 + hi.abs().max(lo.abs()));
    let groups = if hi - lo < tolerance {
        vec![SpectralGroup {
            value: 0.5 * (hi + lo),
            multiplicity: 2,
            projector: HypMatrix::identity(2),
        }]
    } else {
        let gap = hi - lo;
        let upper = HypMatrix::symmetrize(
            &h.as_qmatrix().sub(&QMatrix::identity(2).scale(lo)).scale(1.0 / gap),
        );
        let lower = HypMatrix::symmetrize(
            &QMatrix::identity(2).scale(hi).sub(h.as_qmatrix()).scale(1.0 / gap),
        );
        vec![
            SpectralGroup {
                value: hi,
                multiplicity: 1,
                projector: upper,
            },
            SpectralGroup {
                value: lo,
                multiplicity: 1,
                projector: lower,
            },
        ]
    };
    HypSpectrum {
        eigenvalues: vec![hi, lo],
        groups,
    }
}

/// Spectral decomposition through the symmetric real representation.
pub fn spectrum_via_real(h: &HypMatrix) -> Result<HypSpectrum, QuatLinError> {
    let n = h.n();
    if n == 1 {
        let value = h.get(0, 0).w;
        return Ok(HypSpectrum {
            eigenvalues: vec![value],
            groups: vec![SpectralGroup {
                value,
                multiplicity: 1,
                projector: HypMatrix::identity(1),
            }],
        });
    }
    let real = iota(h.as_qmatrix());
    let eig = SymmetricEigen::new(real);
    let mut order: Vec<usize> = (0..4 * n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let radius = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = GROUP_TOL * (1.0 + radius);

    let mut eigenvalues = Vec::with_capacity(n);
    for q in 0..n {
        let vals: Vec<f64> = order[4 * q..4 * q + 4]
            .iter()
            .map(|&i| eig.eigenvalues[i])
            .collect();
        let spread = vals[0] - vals[3];
        if spread > tolerance {
            return Err(QuatLinError::Grouping {
                group: q,
                spread,
                tolerance,
            });
        }
        eigenvalues.push(vals.iter().sum::<f64>() / 4.0);
    }

    // Merge neighbouring quadruples closer than the grouping tolerance.
    let mut bounds: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for q in 1..=n {
        if q == n || eigenvalues[q - 1] - eigenvalues[q] >= tolerance {
            bounds.push((start, q));
            start = q;
        }
    }

    let groups = bounds
        .into_iter()
        .map(|(lo, hi)| {
            let mut proj = RealMatrix::zeros(4 * n, 4 * n);
            for &col in &order[4 * lo..4 * hi] {
                let v = eig.eigenvectors.column(col);
                proj += &v * v.transpose();
            }
            let projector = HypMatrix::symmetrize(&iota_inverse(&proj_p(&proj)));
            let value = eigenvalues[lo..hi].iter().sum::<f64>() / (hi - lo) as f64;
            SpectralGroup {
                value,
                multiplicity: hi - lo,
                projector,
            }
        })
        .collect();

    Ok(HypSpectrum {
        eigenvalues,
        groups,
    })
}

/// Eigenvalues in descending order.
pub fn eigenvalues_hyp(h: &HypMatrix) -> Result<Vec<f64>, QuatLinError> {
    match h.n() {
        1 => Ok(vec![h.get(0, 0).w]),
        2 => {
            let (hi, lo) = eigenvalues_2x2(h);
            Ok(vec![hi, lo])
        }
        _ => eigenvalues_via_real(h),
    }
}

/// Eigenvalues in descending order, always through the real representation.
pub fn eigenvalues_via_real(h: &HypMatrix) -> Result<Vec<f64>, QuatLinError> {
    let real = iota(h.as_qmatrix());
    let mut vals: Vec<f64> = real.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| b.total_cmp(a));
    let radius = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = GROUP_TOL * (1.0 + radius);
    vals.chunks(4)
        .enumerate()
        .map(|(group, c)| {
            let spread = c[0] - c[3];
            if spread > tolerance {
                Err(QuatLinError::Grouping {
                    group,
                    spread,
                    tolerance,
                })
            } else {
                Ok(c.iter().sum::<f64>() / 4.0)
            }
        })
        .collect()
}

/// `(eigenvalue, projector)` pairs; repeated eigenvalues share one projector.
pub fn spectral_projectors(h: &HypMatrix) -> Result<Vec<(f64, HypMatrix)>, QuatLinError> {
    Ok(spectrum(h)?
        .groups
        .into_iter()
        .map(|g| (g.value, g.projector))
        .collect())
}

/// Moore determinant, the product of the eigenvalues.
pub fn moore_det(h: &HypMatrix) -> Result<f64, QuatLinError> {
    Ok(eigenvalues_hyp(h)?.iter().product())
}

/// `det` of a real square matrix via LU.
pub fn real_det(m: &RealMatrix) -> f64 {
    m.clone().lu().determinant()
}

/// Products of all eigenvalues but one copy of `values[i]`, for each `i`.
pub fn complement_products(values: &[f64]) -> Vec<f64> {
    (0..values.len())
        .map(|i| {
            values
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, v)| v)
                .product()
        })
        .collect()
}

/// Eigenvalue-level adjugate `sum_i (prod_{j != i} lambda_j) P_i`.
///
/// Equals `moore_det(H) H^{-1}` for invertible `H`, but is evaluated without
/// any division.
pub fn adjugate(h: &HypMatrix) -> Result<HypMatrix, QuatLinError> {
    let spec = spectrum(h)?;
    let comp = complement_products(&spec.eigenvalues);
    let offs = spec.group_offsets();
    let weights: Vec<f64> = offs.iter().map(|&o| comp[o]).collect();
    Ok(spec.combine(&weights))
}

/// Inverse through the spectral decomposition.
pub fn inverse(h: &HypMatrix) -> Result<HypMatrix, QuatLinError> {
    let spec = spectrum(h)?;
    let radius = spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tolerance = GROUP_TOL * (1.0 + radius);
    if let Some(&value) = spec.eigenvalues.iter().find(|v| v.abs() < tolerance) {
        return Err(QuatLinError::Singular { value, tolerance });
    }
    Ok(spec.map(|v| 1.0 / v))
}

/// The unique positive `Q` with `adjugate(Q) = H`, for positive `H` and `n >= 2`.
///
/// Eigenvalues are `mu_i = (prod_j lambda_j)^{1/(n-1)} / lambda_i`.
pub fn adjugate_root(h: &HypMatrix) -> Result<HypMatrix, QuatLinError> {
    let n = h.n();
    if n < 2 {
        return Err(QuatLinError::Dimension {
            expected: 2,
            found: n,
        });
    }
    let spec = spectrum(h)?;
    let min = spec.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        return Err(QuatLinError::NotPositive { min });
    }
    let log_det: f64 = spec.eigenvalues.iter().map(|v| v.ln()).sum();
    let scale = (log_det / (n - 1) as f64).exp();
    Ok(spec.map(|v| scale / v))
}

/// `sum_g f(lambda_g) P_g` for a scalar function of the spectrum.
pub fn spectral_map(h: &HypMatrix, f: impl FnMut(f64) -> f64) -> Result<HypMatrix, QuatLinError> {
    Ok(spectrum(h)?.map(f))
}

/// Schur-Horn predicate: `mu` lies in the permutation hull of `lambda`.
///
/// Both vectors are sorted descending internally; the check is that every
/// partial sum of `mu` is at most the matching partial sum of `lambda` and
/// the totals agree, within `1e-9 (1 + sum |lambda_i|)`.
pub fn majorizes(mu: &[f64], lambda: &[f64]) -> bool {
    if mu.len() != lambda.len() {
        return false;
    }
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (mu, lambda) = (sorted(mu), sorted(lambda));
    let tol = 1e-9 * (1.0 + lambda.iter().map(|v| v.abs()).sum::<f64>());
    let (mut pm, mut pl) = (0.0, 0.0);
    for (m, l) in mu.iter().zip(&lambda) {
        pm += m;
        pl += l;
        if pm > pl + tol {
            return false;
        }
    }
    (pm - pl).abs() <= tol
}

/// Seeded random generators for tests and verification sweeps.
pub mod random {
    use super::*;

    pub fn quat<R: Rng + ?Sized>(rng: &mut R) -> Quat {
        Quat::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        )
    }

    pub fn qmatrix<R: Rng + ?Sized>(n: usize, rng: &mut R) -> QMatrix {
        QMatrix::from_fn(n, |_, _| quat(rng))
    }

    pub fn hyp<R: Rng + ?Sized>(n: usize, rng: &mut R) -> HypMatrix {
        HypMatrix::symmetrize(&qmatrix(n, rng))
    }

    /// `A A* + shift I`, positive definite for `shift > 0`.
    pub fn positive_hyp<R: Rng + ?Sized>(n: usize, shift: f64, rng: &mut R) -> HypMatrix {
        let a = qmatrix(n, rng);
        HypMatrix::symmetrize(&a.matmul(&a.adjoint()).add(&QMatrix::identity(n).scale(shift)))
    }

    /// A random element of `Sp(n)` by Gram-Schmidt on random columns.
    pub fn symplectic<R: Rng + ?Sized>(n: usize, rng: &mut R) -> QMatrix {
        let mut cols: Vec<Vec<Quat>> = Vec::with_capacity(n);
        while cols.len() < n {
            let mut v: Vec<Quat> = (0..n).map(|_| quat(rng)).collect();
            for u in &cols {
                // v <- v - u <u, v>, with <u, v> = sum conj(u_i) v_i
                let ip = u
                    .iter()
                    .zip(&v)
                    .fold(Quat::ZERO, |acc, (a, b)| acc + a.conj() * *b);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= *ui * ip;
                }
            }
            let norm = v.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-6 {
                continue;
            }
            cols.push(v.into_iter().map(|q| q.scale(1.0 / norm)).collect());
        }
        QMatrix::from_fn(n, |r, s| cols[s][r])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    fn assert_qmat_close(a: &QMatrix, b: &QMatrix, tol: f64) {
        let d = a.sub(b).max_abs();
        assert!(d <= tol, "matrices differ by {d:e}");
    }

    fn example_2x2() -> HypMatrix {
        // [[1, j], [-j, 2]]
        HypMatrix::new(
            QMatrix::from_rows(vec![
                vec![Quat::ONE, Quat::J],
                vec![-Quat::J, Quat::real(2.0)],
            ])
            .unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn iota_identity() {
        let m = iota(&QMatrix::identity(3));
        assert_eq!(m, RealMatrix::identity(12, 12));
    }

    #[test]
    fn iota_of_i_block_layout() {
        let m = iota(&QMatrix::from_rows(vec![vec![Quat::I]]).unwrap());
        #[rustfmt::skip]
        let expected = RealMatrix::from_row_slice(4, 4, &[
            0.0, 1.0, 0.0, 0.0,
            -1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, -1.0,
            0.0, 0.0, 1.0, 0.0,
        ]);
        assert_eq!(m, expected);
        // It lies in V (commutes with I0) but is not I0 itself.
        let [i0, _, _] = structure_matrices(1);
        assert_eq!(&i0 * &m, &m * &i0);
        assert_ne!(m, i0);
    }

    #[test]
    fn iota_is_homomorphism() {
        let mut rng = rng();
        for n in 1..=4 {
            let a = random::qmatrix(n, &mut rng);
            let b = random::qmatrix(n, &mut rng);
            let lhs = iota(&a.matmul(&b));
            let rhs = iota(&a) * iota(&b);
            assert!((lhs - rhs).amax() < 1e-12);
            assert!((iota(&a.adjoint()) - iota(&a).transpose()).amax() == 0.0);
            assert_qmat_close(&iota_inverse(&iota(&a)), &a, 0.0);
        }
    }

    #[test]
    fn proj_p_properties() {
        let mut rng = rng();
        let n = 3;
        assert_eq!(proj_p(&RealMatrix::identity(12, 12)), RealMatrix::identity(12, 12));
        let in_v = iota(&random::qmatrix(n, &mut rng));
        assert!((proj_p(&in_v) - &in_v).amax() < 1e-15);
        let mut h = RealMatrix::from_fn(12, 12, |_, _| rng.random_range(-1.0..1.0));
        h = &h + h.transpose();
        let once = proj_p(&h);
        assert!((proj_p(&once) - &once).amax() < 1e-13);
        let [i0, j0, k0] = structure_matrices(n);
        for s in [i0, j0, k0] {
            assert!((&s * &once * &s + &once).amax() < 1e-13);
        }
    }

    #[test]
    fn hyperhermitian_predicate() {
        let mut q = QMatrix::identity(2);
        q.set(0, 1, Quat::J);
        assert!(matches!(
            HypMatrix::new(q.clone()),
            Err(QuatLinError::NotHyperhermitian { .. })
        ));
        q.set(1, 0, -Quat::J);
        assert!(HypMatrix::new(q).is_ok());
    }

    #[test]
    fn diagonal_eigenvalues() {
        let h = HypMatrix::diagonal(&[1.0, 3.0]);
        let ev = eigenvalues_hyp(&h).unwrap();
        assert_abs_diff_eq!(ev[0], 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(ev[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn two_by_two_example() {
        let ev = eigenvalues_hyp(&example_2x2()).unwrap();
        assert_abs_diff_eq!(ev[0] * ev[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ev[0] + ev[1], 3.0, epsilon = 1e-12);
        let det = moore_det(&example_2x2()).unwrap();
        assert_abs_diff_eq!(det, 1.0, epsilon = 1e-12);
        let real = real_det(&iota(example_2x2().as_qmatrix()));
        assert_abs_diff_eq!(real.powf(0.25), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigenvalues_invariant_under_symplectic_conjugation() {
        let mut rng = rng();
        for n in 2..=5 {
            let h = random::hyp(n, &mut rng);
            let u = random::symplectic(n, &mut rng);
            assert_qmat_close(&u.adjoint().matmul(&u), &QMatrix::identity(n), 1e-12);
            let a = eigenvalues_hyp(&h).unwrap();
            let b = eigenvalues_hyp(&h.congruence(&u)).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn grouping_error_on_non_hyperhermitian_real_image() {
        // Bypass the predicate to feed a matrix whose image is not symmetric.
        let mut q = QMatrix::zeros(2);
        q.set(1, 0, Quat::new(0.0, 1.0, 0.0, 0.0));
        let bogus = HypMatrix(q);
        assert!(matches!(
            eigenvalues_via_real(&bogus),
            Err(QuatLinError::Grouping { .. })
        ));
    }

    #[test]
    fn projectors_of_diagonal() {
        let p = spectral_projectors(&HypMatrix::diagonal(&[2.0, 5.0])).unwrap();
        assert_eq!(p.len(), 2);
        assert_abs_diff_eq!(p[0].0, 5.0, epsilon = 1e-14);
        assert_qmat_close(p[0].1.as_qmatrix(), HypMatrix::diagonal(&[0.0, 1.0]).as_qmatrix(), 1e-14);
        assert_qmat_close(p[1].1.as_qmatrix(), HypMatrix::diagonal(&[1.0, 0.0]).as_qmatrix(), 1e-14);
    }

    #[test]
    fn projectors_reconstruct_and_are_orthogonal() {
        let mut rng = rng();
        for n in 2..=5 {
            let h = random::hyp(n, &mut rng);
            let proj = spectral_projectors(&h).unwrap();
            let mut sum = QMatrix::zeros(n);
            let mut recon = QMatrix::zeros(n);
            for (i, (v, p)) in proj.iter().enumerate() {
                sum = sum.add(p.as_qmatrix());
                recon = recon.add(&p.as_qmatrix().scale(*v));
                for (j, (_, q)) in proj.iter().enumerate() {
                    let prod = p.as_qmatrix().matmul(q.as_qmatrix());
                    let expected = if i == j { p.as_qmatrix().clone() } else { QMatrix::zeros(n) };
                    assert_qmat_close(&prod, &expected, 1e-10);
                }
            }
            assert_qmat_close(&sum, &QMatrix::identity(n), 1e-10);
            assert_qmat_close(&recon, h.as_qmatrix(), 1e-10);
        }
    }

    #[test]
    fn closed_form_2x2_matches_real_route() {
        let mut rng = rng();
        for _ in 0..200 {
            let h = random::hyp(2, &mut rng);
            let a = spectrum(&h).unwrap();
            let b = spectrum_via_real(&h).unwrap();
            for (x, y) in a.eigenvalues.iter().zip(&b.eigenvalues) {
                assert_abs_diff_eq!(x, y, epsilon = 1e-12);
            }
            for (g, r) in a.groups.iter().zip(&b.groups) {
                assert_qmat_close(g.projector.as_qmatrix(), r.projector.as_qmatrix(), 1e-10);
            }
            let via_real = eigenvalues_via_real(&h).unwrap();
            assert_abs_diff_eq!(eigenvalues_hyp(&h).unwrap()[1], via_real[1], epsilon = 1e-12);
        }
        let merged = spectrum(&HypMatrix::diagonal(&[3.0, 3.0])).unwrap();
        assert_eq!(merged.groups.len(), 1);
    }

    #[test]
    fn repeated_eigenvalues_merge() {
        let mut rng = rng();
        let u = random::symplectic(3, &mut rng);
        let h = HypMatrix::diagonal(&[2.0, 2.0, -1.0]).congruence(&u);
        let spec = spectrum(&h).unwrap();
        assert_eq!(spec.groups.len(), 2);
        assert_eq!(spec.groups[0].multiplicity, 2);
        assert_abs_diff_eq!(spec.groups[0].projector.re_trace(), 2.0, epsilon = 1e-10);
    }

    #[test]
    fn moore_det_examples() {
        assert_abs_diff_eq!(moore_det(&HypMatrix::identity(2)).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(moore_det(&HypMatrix::diagonal(&[2.0, 3.0])).unwrap(), 6.0, epsilon = 1e-13);
    }

    #[test]
    fn moore_det_fourth_power_is_real_det() {
        let mut rng = rng();
        for n in 1..=5 {
            for _ in 0..10 {
                let h = random::hyp(n, &mut rng);
                let m = moore_det(&h).unwrap();
                let r = real_det(&iota(h.as_qmatrix()));
                assert!((m.powi(4) - r).abs() <= 1e-9 * r.abs().max(1e-300) + 1e-14);
            }
        }
    }

    #[test]
    fn moore_det_homogeneous() {
        let mut rng = rng();
        let h = random::hyp(3, &mut rng);
        let a = moore_det(&h.scale(-2.5)).unwrap();
        let b = (-2.5f64).powi(3) * moore_det(&h).unwrap();
        assert!((a - b).abs() < 1e-10 * b.abs().max(1.0));
    }

    #[test]
    fn adjugate_examples() {
        let adj = adjugate(&HypMatrix::diagonal(&[1.0, 2.0, 3.0])).unwrap();
        assert_qmat_close(adj.as_qmatrix(), HypMatrix::diagonal(&[6.0, 3.0, 2.0]).as_qmatrix(), 1e-13);
        let id = adjugate(&HypMatrix::identity(4)).unwrap();
        assert_qmat_close(id.as_qmatrix(), &QMatrix::identity(4), 1e-13);
    }

    #[test]
    fn adjugate_matches_inverse_route() {
        let mut rng = rng();
        for n in 2..=5 {
            let h = random::positive_hyp(n, 0.5, &mut rng);
            let adj = adjugate(&h).unwrap();
            let via_inv = inverse(&h).unwrap().scale(moore_det(&h).unwrap());
            let scale = via_inv.as_qmatrix().max_abs();
            assert_qmat_close(adj.as_qmatrix(), via_inv.as_qmatrix(), 1e-10 * scale.max(1.0));
        }
    }

    #[test]
    fn adjugate_root_inverts_adjugate() {
        let mut rng = rng();
        for n in 2..=4 {
            let h = random::positive_hyp(n, 0.5, &mut rng);
            let q = adjugate_root(&h).unwrap();
            let back = adjugate(&q).unwrap();
            assert_qmat_close(back.as_qmatrix(), h.as_qmatrix(), 1e-10 * h.as_qmatrix().max_abs());
        }
        assert!(matches!(
            adjugate_root(&HypMatrix::diagonal(&[1.0, -1.0])),
            Err(QuatLinError::NotPositive { .. })
        ));
    }

    #[test]
    fn singular_inverse_is_reported() {
        assert!(matches!(
            inverse(&HypMatrix::diagonal(&[1.0, 0.0])),
            Err(QuatLinError::Singular { .. })
        ));
    }

    #[test]
    fn majorization_examples() {
        assert!(majorizes(&[3.0, 1.0], &[3.0, 1.0]));
        assert!(majorizes(&[2.0, 2.0], &[3.0, 1.0]));
        assert!(!majorizes(&[3.5, 0.5], &[3.0, 1.0]));
        assert!(!majorizes(&[2.0, 1.0], &[3.0, 1.0]));
    }

    #[test]
    fn schur_direction_holds_for_random_matrices() {
        let mut rng = rng();
        for n in 1..=6 {
            for _ in 0..20 {
                let h = random::hyp(n, &mut rng);
                assert!(majorizes(&h.diag(), &eigenvalues_hyp(&h).unwrap()));
            }
        }
    }

    #[test]
    fn json_fixture_format() {
        let h = example_2x2();
        let s = serde_json::to_string(&h).unwrap();
        let v: Vec<Vec<[f64; 4]>> = serde_json::from_str(&s).unwrap();
        assert_eq!(v, vec![vec![[1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 1.0, 0.0]], vec![[0.0, 0.0, -1.0, 0.0], [2.0, 0.0, 0.0, 0.0]]]);
        let back: HypMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, h);
        let bad = "[[[1,0,0,0],[0,0,1,0]],[[0,0,1,0],[2,0,0,0]]]";
        assert!(serde_json::from_str::<HypMatrix>(bad).is_err());
    }
}
