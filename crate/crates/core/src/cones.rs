//! Symmetric functions of eigenvalues and their admissible cones.
//!
//! Three families are provided:
//! - `hessian` with parameter `k`: `f = log sigma_k` on `Gamma_k`,
//! - `ma`: `f = log sigma_n` on the positive orthant `Gamma_n`,
//! - `nm1-ma`: `f = log sigma_n(T lambda)` on `T^{-1}(Gamma_n)`, where
//!   `T(lambda)_k = (1/(n-1)) sum_{i != k} lambda_i`.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConeError {
    #[error("eigenvalue vector {lambda:?} lies outside the admissible cone")]
    Domain { lambda: Vec<f64> },
    #[error("bisection bracket for the boundary shift could not be established")]
    Convergence,
    #[error("invalid family {name:?} (k = {k:?}, n = {n}): {reason}")]
    Family {
        name: String,
        k: Option<usize>,
        n: usize,
        reason: String,
    },
}

/// `sigma_r(lambda)` by the product recurrence; `sigma_0 = 1` and
/// `sigma_r = 0` for `r > n`.
pub fn sigma(r: usize, lambda: &[f64]) -> f64 {
    if r > lambda.len() {
        return 0.0;
    }
    sigma_all(lambda)[r]
}

/// `[sigma_0, ..., sigma_n]` of `lambda`.
pub fn sigma_all(lambda: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; lambda.len() + 1];
    e[0] = 1.0;
    for (m, &x) in lambda.iter().enumerate() {
        for j in (1..=m + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `sigma_r` by explicit enumeration of all `r`-subsets.
pub fn sigma_subsets(r: usize, lambda: &[f64]) -> f64 {
    let n = lambda.len();
    assert!(n < 32, "subset enumeration limited to n < 32");
    (0u32..1 << n)
        .filter(|m| m.count_ones() as usize == r)
        .map(|m| {
            (0..n)
                .filter(|i| m >> i & 1 == 1)
                .map(|i| lambda[i])
                .product::<f64>()
        })
        .sum()
}

/// `sigma_r` of `lambda` with the entries at `skip` removed.
pub fn sigma_without(r: usize, lambda: &[f64], skip: &[usize]) -> f64 {
    let rest: Vec<f64> = lambda
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, v)| *v)
        .collect();
    sigma(r, &rest)
}

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `sigma_r(lambda) > 0` for `r = 1..=k`.
pub fn gamma_k_contains(k: usize, lambda: &[f64]) -> bool {
    let e = sigma_all(lambda);
    (1..=k.min(lambda.len())).all(|r| e[r] > 0.0)
}

/// `T(lambda)_k = (1/(n-1)) sum_{i != k} lambda_i`; the identity when `n = 1`.
pub fn nm1_transform(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    if n < 2 {
        return lambda.to_vec();
    }
    let total: f64 = lambda.iter().sum();
    let c = 1.0 / (n - 1) as f64;
    lambda.iter().map(|l| c * (total - l)).collect()
}

/// Matrix of [`nm1_transform`].
pub fn nm1_matrix(n: usize) -> DMatrix<f64> {
    if n < 2 {
        return DMatrix::identity(n, n);
    }
    let c = 1.0 / (n - 1) as f64;
    DMatrix::from_fn(n, n, |r, s| if r == s { 0.0 } else { c })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    Hessian { k: usize },
    MongeAmpere,
    Nm1MongeAmpere,
}

impl Family {
    /// Parses the config spelling: `"hessian"` (needs `k`), `"ma"`, `"nm1-ma"`.
    pub fn parse(name: &str, k: Option<usize>, n: usize) -> Result<Family, ConeError> {
        let err = |reason: &str| ConeError::Family {
            name: name.to_string(),
            k,
            n,
            reason: reason.to_string(),
        };
        match name {
            "hessian" => match k {
                Some(k) if (1..=n).contains(&k) => Ok(Family::Hessian { k }),
                Some(_) => Err(err("k must satisfy 1 <= k <= n")),
                None => Err(err("the hessian family needs k")),
            },
            "ma" => Ok(Family::MongeAmpere),
            "nm1-ma" => Ok(Family::Nm1MongeAmpere),
            _ => Err(err("expected one of hessian, ma, nm1-ma")),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::Hessian { .. } => "hessian",
            Family::MongeAmpere => "ma",
            Family::Nm1MongeAmpere => "nm1-ma",
        }
    }

    pub fn k(&self) -> Option<usize> {
        match self {
            Family::Hessian { k } => Some(*k),
            _ => None,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Hessian { k } => write!(f, "hessian(k={k})"),
            other => f.write_str(other.name()),
        }
    }
}

/// A concave, increasing function of eigenvalues on an open symmetric cone.
///
/// `eval`, `grad` and `hess` may assume `contains(lambda)`.
pub trait ConeFunction: Send + Sync {
    fn dim(&self) -> usize;
    fn contains(&self, lambda: &[f64]) -> bool;
    fn eval(&self, lambda: &[f64]) -> f64;
    fn grad(&self, lambda: &[f64]) -> Vec<f64>;
    fn hess(&self, lambda: &[f64]) -> DMatrix<f64>;

    /// The shift `s` with `lambda - s 1` on the cone boundary, by bisection.
    fn g0(&self, lambda: &[f64]) -> Result<f64, ConeError> {
        g0_bisect(|l| self.contains(l), lambda)
    }
}

/// Bisection for the boundary shift of a cone containing the positive orthant.
pub fn g0_bisect(contains: impl Fn(&[f64]) -> bool, lambda: &[f64]) -> Result<f64, ConeError> {
    let shifted = |s: f64| -> Vec<f64> { lambda.iter().map(|l| l - s).collect() };
    let min = lambda.iter().copied().fold(f64::INFINITY, f64::min);
    let max = lambda.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (mut lo, mut hi) = (min - 1.0, max + 1.0);
    let mut iters = 0;
    let mut width = 1.0;
    while !contains(&shifted(lo)) {
        width *= 2.0;
        lo = min - width;
        iters += 1;
        if iters >= 200 {
            return Err(ConeError::Convergence);
        }
    }
    width = 1.0;
    while contains(&shifted(hi)) {
        width *= 2.0;
        hi = max + width;
        iters += 1;
        if iters >= 200 {
            return Err(ConeError::Convergence);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if contains(&shifted(mid)) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

/// The three built-in families as a [`ConeFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeOperator {
    pub family: Family,
    pub n: usize,
}

impl ConeOperator {
    pub fn new(family: Family, n: usize) -> Result<Self, ConeError> {
        if n == 0 {
            return Err(ConeError::Family {
                name: family.name().into(),
                k: family.k(),
                n,
                reason: "n must be positive".into(),
            });
        }
        if let Family::Hessian { k } = family {
            Family::parse("hessian", Some(k), n)?;
        }
        Ok(ConeOperator { family, n })
    }

    pub fn hessian(k: usize, n: usize) -> Result<Self, ConeError> {
        Self::new(Family::Hessian { k }, n)
    }

    pub fn monge_ampere(n: usize) -> Self {
        ConeOperator {
            family: Family::MongeAmpere,
            n,
        }
    }

    pub fn nm1_monge_ampere(n: usize) -> Self {
        ConeOperator {
            family: Family::Nm1MongeAmpere,
            n,
        }
    }

    /// Order of the underlying symmetric function: `k` for `hessian`, `n` otherwise.
    pub fn order(&self) -> usize {
        match self.family {
            Family::Hessian { k } => k,
            _ => self.n,
        }
    }

    /// `log C(n, k)` for `hessian`, so that `f(1) - offset = 0`; zero otherwise.
    pub fn offset(&self) -> f64 {
        match self.family {
            Family::Hessian { k } => binomial(self.n, k).ln(),
            _ => 0.0,
        }
    }

    /// Normalized symmetric function, `exp(f - offset)`.
    pub fn normalized_sigma(&self, lambda: &[f64]) -> f64 {
        match self.family {
            Family::Hessian { k } => sigma(k, lambda) / binomial(self.n, k),
            Family::MongeAmpere => lambda.iter().product(),
            Family::Nm1MongeAmpere => nm1_transform(lambda).iter().product(),
        }
    }

    pub fn f_eval(&self, lambda: &[f64]) -> Result<f64, ConeError> {
        self.check(lambda)?;
        Ok(self.eval(lambda))
    }

    pub fn f_grad(&self, lambda: &[f64]) -> Result<Vec<f64>, ConeError> {
        self.check(lambda)?;
        Ok(self.grad(lambda))
    }

    pub fn f_hess(&self, lambda: &[f64]) -> Result<DMatrix<f64>, ConeError> {
        self.check(lambda)?;
        Ok(self.hess(lambda))
    }

    /// `(f, grad f)` in one pass, without the domain check.
    pub fn eval_grad(&self, lambda: &[f64]) -> (f64, Vec<f64>) {
        match self.family {
            Family::Hessian { k } => {
                let sk = sigma(k, lambda);
                let g = (0..self.n)
                    .map(|i| sigma_without(k - 1, lambda, &[i]) / sk)
                    .collect();
                (sk.ln(), g)
            }
            Family::MongeAmpere => (
                lambda.iter().map(|l| l.ln()).sum(),
                lambda.iter().map(|l| 1.0 / l).collect(),
            ),
            Family::Nm1MongeAmpere => {
                let t = nm1_transform(lambda);
                let f = t.iter().map(|l| l.ln()).sum();
                let inv: Vec<f64> = t.iter().map(|l| 1.0 / l).collect();
                (f, nm1_transform(&inv))
            }
        }
    }

    fn check(&self, lambda: &[f64]) -> Result<(), ConeError> {
        if lambda.len() == self.n && self.contains(lambda) {
            Ok(())
        } else {
            Err(ConeError::Domain {
                lambda: lambda.to_vec(),
            })
        }
    }
}

impl ConeFunction for ConeOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn contains(&self, lambda: &[f64]) -> bool {
        match self.family {
            Family::Hessian { k } => gamma_k_contains(k, lambda),
            Family::MongeAmpere => lambda.iter().all(|&l| l > 0.0),
            Family::Nm1MongeAmpere => nm1_transform(lambda).iter().all(|&l| l > 0.0),
        }
    }

    fn eval(&self, lambda: &[f64]) -> f64 {
        match self.family {
            Family::Hessian { k } => sigma(k, lambda).ln(),
            Family::MongeAmpere => lambda.iter().map(|l| l.ln()).sum(),
            Family::Nm1MongeAmpere => nm1_transform(lambda).iter().map(|l| l.ln()).sum(),
        }
    }

    fn grad(&self, lambda: &[f64]) -> Vec<f64> {
        self.eval_grad(lambda).1
    }

    fn hess(&self, lambda: &[f64]) -> DMatrix<f64> {
        let n = self.n;
        match self.family {
            Family::Hessian { k } => {
                let sk = sigma(k, lambda);
                let g = self.grad(lambda);
                DMatrix::from_fn(n, n, |i, j| {
                    let second = if i == j || k < 2 {
                        0.0
                    } else {
                        sigma_without(k - 2, lambda, &[i, j]) / sk
                    };
                    second - g[i] * g[j]
                })
            }
            Family::MongeAmpere => {
                DMatrix::from_fn(n, n, |i, j| if i == j { -1.0 / (lambda[i] * lambda[i]) } else { 0.0 })
            }
            Family::Nm1MongeAmpere => {
                let tm = nm1_matrix(n);
                let t = nm1_transform(lambda);
                let d = DMatrix::from_fn(n, n, |i, j| if i == j { -1.0 / (t[i] * t[i]) } else { 0.0 });
                tm.transpose() * d * tm
            }
        }
    }

    fn g0(&self, lambda: &[f64]) -> Result<f64, ConeError> {
        match self.family {
            Family::MongeAmpere => Ok(lambda.iter().copied().fold(f64::INFINITY, f64::min)),
            Family::Hessian { k } if k == self.n => {
                Ok(lambda.iter().copied().fold(f64::INFINITY, f64::min))
            }
            _ => g0_bisect(|l| self.contains(l), lambda),
        }
    }
}

/// Axis-direction surrogate of the C-subsolution condition at one point:
/// for every `j`, `f(lambda_B + t e_j) > sigma` at `t = t_probe` and `f` is
/// still increasing there (compared with `t = t_probe / 2`).
pub fn is_c_subsolution_point<F: ConeFunction + ?Sized>(
    op: &F,
    lambda_b: &[f64],
    sigma: f64,
    t_probe: f64,
) -> Result<bool, ConeError> {
    if !op.contains(lambda_b) {
        return Err(ConeError::Domain {
            lambda: lambda_b.to_vec(),
        });
    }
    let probe = |j: usize, t: f64| {
        let mut l = lambda_b.to_vec();
        l[j] += t;
        op.eval(&l)
    };
    Ok((0..op.dim()).all(|j| {
        let far = probe(j, t_probe);
        far > sigma && far > probe(j, 0.5 * t_probe)
    }))
}

/// Default probe distance for [`is_c_subsolution_point`].
pub const DEFAULT_T_PROBE: f64 = 1e6;
