//! Exterior algebra of `(p,0)`-forms on `C^{2n}` with real coefficients.
//!
//! Forms are dense coefficient vectors indexed by bitmasks of
//! `dz^1, ..., dz^{2n}` (bit `i` is `dz^{i+1}`), which keeps every operation
//! exact up to rounding for the small dimensions used here. The standard
//! form is `Omega_0 = sum_i dz^{2i-1} ^ dz^{2i}`, and a diagonal form with
//! eigenvalues `lambda` is `sum_i lambda_i dz^{2i-1} ^ dz^{2i}`.
//!
//! The star operator is the one of the flat metric: `*dz^I = s dz^{I^c}`
//! where `dz^I ^ dz^{I^c} = s Z` and `Z = dz^1 ^ ... ^ dz^{2n}`.

use rand::Rng;
use serde::Serialize;

use crate::cones::{binomial, nm1_transform, sigma};
use crate::quatlin::{self, random, HypMatrix};

/// Largest supported quaternionic dimension.
pub const MAX_N: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Form {
    dim: usize,
    coeffs: Vec<f64>,
}

fn factorial(m: usize) -> f64 {
    (1..=m).map(|i| i as f64).product()
}

/// Sign of `dz^A ^ dz^B` relative to `dz^{A | B}` for disjoint `A`, `B`.
fn wedge_sign(a: u32, b: u32) -> f64 {
    // Count pairs (i in A, j in B) with i > j.
    let mut inversions = 0;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        inversions += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Bitmask of `dz^{2i-1} ^ dz^{2i}` for zero-based `i`.
pub fn pair_mask(i: usize) -> u32 {
    0b11 << (2 * i)
}

impl Form {
    /// The zero form on `C^{2n}`.
    pub fn zero(n: usize) -> Self {
        assert!((1..=MAX_N).contains(&n), "forms support 1 <= n <= {MAX_N}");
        Form {
            dim: 2 * n,
            coeffs: vec![0.0; 1 << (2 * n)],
        }
    }

    /// The constant function 1 as a 0-form.
    pub fn one(n: usize) -> Self {
        let mut f = Self::zero(n);
        f.coeffs[0] = 1.0;
        f
    }

    pub fn monomial(n: usize, mask: u32, coeff: f64) -> Self {
        let mut f = Self::zero(n);
        f.coeffs[mask as usize] = coeff;
        f
    }

    /// `sum_i lambda_i dz^{2i-1} ^ dz^{2i}`.
    pub fn diagonal(lambda: &[f64]) -> Self {
        let mut f = Self::zero(lambda.len());
        for (i, l) in lambda.iter().enumerate() {
            f.coeffs[pair_mask(i) as usize] = *l;
        }
        f
    }

    pub fn omega0(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn n(&self) -> usize {
        self.dim / 2
    }

    pub fn coeff(&self, mask: u32) -> f64 {
        self.coeffs[mask as usize]
    }

    fn full(&self) -> u32 {
        ((1u64 << self.dim) - 1) as u32
    }

    /// Coefficient of `Z`.
    pub fn top(&self) -> f64 {
        self.coeffs[self.full() as usize]
    }

    pub fn add(&self, other: &Form) -> Form {
        Form {
            dim: self.dim,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Form {
        Form {
            dim: self.dim,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn nonzero(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != 0.0)
            .map(|(m, c)| (m as u32, *c))
    }

    pub fn wedge(&self, other: &Form) -> Form {
        assert_eq!(self.dim, other.dim, "wedge dimension mismatch");
        let mut out = Form {
            dim: self.dim,
            coeffs: vec![0.0; self.coeffs.len()],
        };
        let rhs: Vec<(u32, f64)> = other.nonzero().collect();
        for (a, ca) in self.nonzero() {
            for &(b, cb) in &rhs {
                if a & b == 0 {
                    out.coeffs[(a | b) as usize] += wedge_sign(a, b) * ca * cb;
                }
            }
        }
        out
    }

    /// `self^k`, with `self^0 = 1`.
    pub fn power(&self, k: usize) -> Form {
        (0..k).fold(Form::one(self.n()), |acc, _| acc.wedge(self))
    }

    /// Star of the flat metric, extended linearly.
    pub fn star(&self) -> Form {
        let full = self.full();
        let mut out = Form {
            dim: self.dim,
            coeffs: vec![0.0; self.coeffs.len()],
        };
        for (m, c) in self.nonzero() {
            let comp = full ^ m;
            out.coeffs[comp as usize] += wedge_sign(m, comp) * c;
        }
        out
    }

    /// Coefficients on `dz^{2i-1} ^ dz^{2i}`.
    pub fn pair_coefficients(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.coeff(pair_mask(i))).collect()
    }

    /// Largest coefficient of a degree-2 monomial that is not a pair.
    pub fn off_pair_magnitude(&self) -> f64 {
        let pairs: Vec<u32> = (0..self.n()).map(pair_mask).collect();
        self.nonzero()
            .filter(|(m, _)| m.count_ones() == 2 && !pairs.contains(m))
            .map(|(_, c)| c.abs())
            .fold(0.0, f64::max)
    }
}

/// Determinant of a `(2,0)`-form, `Omega^n / Omega_0^n`.
pub fn det2(form: &Form) -> f64 {
    let n = form.n();
    form.power(n).top() / Form::omega0(n).power(n).top()
}

/// Determinant of a `(2n-2,0)`-form, `det((1/(n-1)!) * Phi)`.
pub fn det_2n2(phi: &Form) -> f64 {
    let n = phi.n();
    det2(&phi.star().scale(1.0 / factorial(n - 1)))
}

/// `(chi^k ^ Omega_0^{n-k}) / Omega_0^n` by explicit expansion.
pub fn wedge_ratio(chi_lambda: &[f64], k: usize) -> f64 {
    let n = chi_lambda.len();
    assert!((1..=n).contains(&k), "wedge_ratio needs 1 <= k <= n");
    let chi = Form::diagonal(chi_lambda);
    let o = Form::omega0(n);
    chi.power(k).wedge(&o.power(n - k)).top() / o.power(n).top()
}

/// Eigenvalues of `(1/(n-1)!) * (Omega^{n-1})`: the complement products.
pub fn hodge_star_eigs(lambda: &[f64]) -> Vec<f64> {
    quatlin::complement_products(lambda)
}

/// [`hodge_star_eigs`] computed through explicit wedge powers and star.
pub fn hodge_star_eigs_explicit(lambda: &[f64]) -> Vec<f64> {
    let n = lambda.len();
    Form::diagonal(lambda)
        .power(n - 1)
        .star()
        .scale(1.0 / factorial(n - 1))
        .pair_coefficients()
}

/// Eigenvalues of `(1/(n-1)!) * (M ^ Omega_0^{n-2})` by explicit expansion.
pub fn hodge3_eigs_explicit(mu: &[f64]) -> Vec<f64> {
    let n = mu.len();
    assert!(n >= 2, "needs n >= 2");
    Form::diagonal(mu)
        .wedge(&Form::omega0(n).power(n - 2))
        .star()
        .scale(1.0 / factorial(n - 1))
        .pair_coefficients()
}

/// Left side of the `(n-1)`-form equation over `det(Omega_0^{n-1})`:
/// `det(Omega_2^{n-1} + M ^ Omega_0^{n-2}) / det(Omega_0^{n-1})`.
pub fn nm1_form_ratio(omega2: &[f64], mu: &[f64]) -> f64 {
    let n = mu.len();
    let o = Form::omega0(n);
    let phi = Form::diagonal(omega2)
        .power(n - 1)
        .add(&Form::diagonal(mu).wedge(&o.power(n - 2)));
    det_2n2(&phi) / det_2n2(&o.power(n - 1))
}

/// Eigenvalue-level ratio for the same equation: `prod_i (w_i + T(mu)_i)`
/// with `w = hodge_star_eigs(omega2)`.
pub fn nm1_eigen_ratio(omega2: &[f64], mu: &[f64]) -> f64 {
    let w = hodge_star_eigs(omega2);
    w.iter().zip(nm1_transform(mu)).map(|(a, b)| a + b).product()
}

/// One instance that violated an identity.
#[derive(Debug, Clone, Serialize)]
pub struct Failure {
    pub trial: usize,
    pub instance: serde_json::Value,
    pub error: f64,
}

/// Outcome of a randomized identity check.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub identity: String,
    pub n: usize,
    pub trials: usize,
    pub max_abs_error: f64,
    pub failures: Vec<Failure>,
}

impl IdentityReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Failure threshold of the identity checks.
pub const IDENTITY_TOL: f64 = 1e-10;

fn positive_vec<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.5..2.0)).collect()
}

fn run_identity<R: Rng + ?Sized>(
    identity: &str,
    n: usize,
    trials: usize,
    rng: &mut R,
    mut check: impl FnMut(&mut R) -> (f64, serde_json::Value),
) -> IdentityReport {
    let mut report = IdentityReport {
        identity: identity.into(),
        n,
        trials,
        max_abs_error: 0.0,
        failures: Vec::new(),
    };
    for trial in 0..trials {
        let (error, instance) = check(rng);
        report.max_abs_error = report.max_abs_error.max(error);
        if !(error <= IDENTITY_TOL) {
            report.failures.push(Failure {
                trial,
                instance,
                error,
            });
        }
    }
    report
}

/// `det(Omega^{n-1}) = det(Omega)^{n-1}` on random positive diagonal forms.
pub fn verify_hodge1<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> IdentityReport {
    run_identity("hodge1", n, trials, rng, |rng| {
        let lambda = positive_vec(n, rng);
        let omega = Form::diagonal(&lambda);
        let lhs = det_2n2(&omega.power(n - 1));
        let rhs = det2(&omega).powi(n as i32 - 1);
        ((lhs - rhs).abs(), serde_json::json!({ "lambda": lambda }))
    })
}

/// `chi^n / Omega^n = det(chi)/det(Omega) = det(*chi)/det(*Omega)` on random
/// positive pairs, with `det` also evaluated as a Moore determinant of a
/// randomly rotated hyperhermitian representative.
pub fn verify_hodge2<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> IdentityReport {
    run_identity("hodge2", n, trials, rng, |rng| {
        let chi_l = positive_vec(n, rng);
        let omega_l = positive_vec(n, rng);
        let (chi, omega) = (Form::diagonal(&chi_l), Form::diagonal(&omega_l));
        let ratio = chi.power(n).top() / omega.power(n).top();
        let u = random::symplectic(n, rng);
        let moore = |l: &[f64]| {
            quatlin::moore_det(&HypMatrix::diagonal(l).congruence(&u)).unwrap_or(f64::NAN)
        };
        let via_moore = moore(&chi_l) / moore(&omega_l);
        let via_star = det_2n2(&chi.star()) / det_2n2(&omega.star());
        let error = (ratio - via_moore).abs().max((ratio - via_star).abs());
        (
            error,
            serde_json::json!({ "chi": chi_l, "omega": omega_l }),
        )
    })
}

/// `(1/(n-1)!) * (M ^ Omega_0^{n-2}) = (1/(n-1)) (tr(M) Omega_0 - M)`, and its
/// eigenvalues equal `nm1_transform(lambda(M))`.
pub fn verify_hodge3<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> IdentityReport {
    run_identity("hodge3", n, trials, rng, |rng| {
        let mu: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let o = Form::omega0(n);
        let lhs = Form::diagonal(&mu)
            .wedge(&o.power(n - 2))
            .star()
            .scale(1.0 / factorial(n - 1));
        let trace: f64 = mu.iter().sum();
        let rhs = o
            .scale(trace)
            .add(&Form::diagonal(&mu).scale(-1.0))
            .scale(1.0 / (n - 1) as f64);
        let form_err = lhs
            .coeffs
            .iter()
            .zip(&rhs.coeffs)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let eig_err = lhs
            .pair_coefficients()
            .iter()
            .zip(nm1_transform(&mu))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (form_err.max(eig_err), serde_json::json!({ "mu": mu }))
    })
}

/// `wedge_ratio(lambda, k) = sigma_k(lambda) / C(n,k)` for every `k`.
pub fn verify_wedge_ratio<R: Rng + ?Sized>(n: usize, trials: usize, rng: &mut R) -> IdentityReport {
    run_identity("wedge_ratio", n, trials, rng, |rng| {
        let lambda: Vec<f64> = (0..n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let error = (1..=n)
            .map(|k| (wedge_ratio(&lambda, k) - sigma(k, &lambda) / binomial(n, k)).abs())
            .fold(0.0, f64::max);
        (error, serde_json::json!({ "lambda": lambda }))
    })
}
