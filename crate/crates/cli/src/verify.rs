//! `run_verify`: seeded property sweeps over the algebra, cone and form layers.

use std::fmt;
use std::str::FromStr;

use nalgebra::SymmetricEigen;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use quathess::cones::{is_c_subsolution_point, ConeFunction, ConeOperator, Family, DEFAULT_T_PROBE};
use quathess::forms::{self, IdentityReport};
use quathess::quatlin::{self, random, QMatrix, RealMatrix};

use crate::SCHEMA_VERSION;

/// Failing instances kept per property in the report.
pub const MAX_DUMPS: usize = 10;

/// The representation under test; [`quatlin::iota`] unless a fault is injected.
pub type Iota = dyn Fn(&QMatrix) -> RealMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Algebra,
    Cones,
    Forms,
    All,
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "algebra" => Ok(Suite::Algebra),
            "cones" => Ok(Suite::Cones),
            "forms" => Ok(Suite::Forms),
            "all" => Ok(Suite::All),
            _ => Err(format!("unknown suite {s:?}; expected algebra, cones, forms or all")),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Suite::Algebra => "algebra",
            Suite::Cones => "cones",
            Suite::Forms => "forms",
            Suite::All => "all",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FailureDump {
    pub trial: usize,
    pub error: f64,
    pub instance: Value,
}

#[derive(Debug, Clone, Serialize)]
pub struct PropertyReport {
    pub suite: String,
    pub property: String,
    pub checked: usize,
    pub tolerance: f64,
    pub max_error: f64,
    pub failure_count: usize,
    pub failures: Vec<FailureDump>,
}

impl PropertyReport {
    fn new(suite: &str, property: &str, tolerance: f64) -> Self {
        PropertyReport {
            suite: suite.into(),
            property: property.into(),
            checked: 0,
            tolerance,
            max_error: 0.0,
            failure_count: 0,
            failures: Vec::new(),
        }
    }

    /// Records one check; NaN errors count as failures.
    fn record(&mut self, trial: usize, error: f64, instance: impl FnOnce() -> Value) {
        self.checked += 1;
        if error.is_nan() {
            self.max_error = f64::NAN;
        } else if !self.max_error.is_nan() {
            self.max_error = self.max_error.max(error);
        }
        if !(error <= self.tolerance) {
            self.failure_count += 1;
            if self.failures.len() < MAX_DUMPS {
                self.failures.push(FailureDump {
                    trial,
                    error,
                    instance: instance(),
                });
            }
        }
    }

    /// Records a yes/no check as error 0 or 1.
    fn check(&mut self, trial: usize, ok: bool, instance: impl FnOnce() -> Value) {
        self.record(trial, if ok { 0.0 } else { 1.0 }, instance);
    }

    fn from_identity(suite: &str, r: IdentityReport) -> Self {
        PropertyReport {
            suite: suite.into(),
            property: format!("{}-n{}", r.identity.replace('_', "-"), r.n),
            checked: r.trials,
            tolerance: forms::IDENTITY_TOL,
            max_error: r.max_abs_error,
            failure_count: r.failures.len(),
            failures: r
                .failures
                .into_iter()
                .take(MAX_DUMPS)
                .map(|f| FailureDump {
                    trial: f.trial,
                    error: f.error,
                    instance: f.instance,
                })
                .collect(),
        }
    }

    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub suite: Suite,
    pub trials: usize,
    pub seed: u64,
    pub passed: bool,
    pub properties: Vec<PropertyReport>,
}

fn rows(m: &QMatrix) -> Value {
    serde_json::to_value(m).unwrap_or(Value::Null)
}

fn algebra(trials: usize, rng: &mut ChaCha8Rng, iota: &Iota) -> Vec<PropertyReport> {
    let s = "algebra";
    let mut hom = PropertyReport::new(s, "iota-homomorphism", 1e-12);
    let mut commutant = PropertyReport::new(s, "iota-commutant", 1e-12);
    let mut det = PropertyReport::new(s, "moore-det-fourth-power", 1e-9);
    let mut quad = PropertyReport::new(s, "spectrum-quadrupling", 0.0);
    let mut schur = PropertyReport::new(s, "schur-majorization", 0.0);
    for trial in 0..trials {
        let n = 1 + trial % 5;
        let (a, b) = (random::qmatrix(n, rng), random::qmatrix(n, rng));
        let (ia, ib) = (iota(&a), iota(&b));
        let scale = 4.0 * n as f64;
        let err = (iota(&a.matmul(&b)) - &ia * &ib)
            .amax()
            .max((iota(&a.add(&b)) - (&ia + &ib)).amax())
            .max((iota(&a.adjoint()) - ia.transpose()).amax());
        hom.record(trial, err / scale, || json!({ "a": rows(&a), "b": rows(&b) }));

        let comm = quatlin::structure_matrices(n)
            .iter()
            .map(|x| (x * &ia - &ia * x).amax())
            .fold(0.0, f64::max);
        commutant.record(trial, comm, || json!({ "a": rows(&a) }));

        let h = random::hyp(n, rng);
        let moore = quatlin::moore_det(&h).unwrap_or(f64::NAN);
        let real = quatlin::real_det(&iota(h.as_qmatrix()));
        let rel = (moore.powi(4) - real).abs() / real.abs().max(1e-300);
        det.record(trial, rel, || json!({ "h": rows(h.as_qmatrix()), "moore": moore, "det_iota": real }));

        match quatlin::eigenvalues_via_real(&h) {
            Ok(lambda) => {
                quad.check(trial, true, || Value::Null);
                let diag = h.diag();
                schur.check(trial, quatlin::majorizes(&diag, &lambda), || {
                    json!({ "diagonal": diag, "spectrum": lambda })
                });
            }
            Err(e) => quad.check(trial, false, || json!({ "h": rows(h.as_qmatrix()), "error": e.to_string() })),
        }
    }
    vec![hom, commutant, det, quad, schur]
}

fn interior<R: Rng>(op: &ConeOperator, rng: &mut R) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..op.n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let Ok(shift) = op.g0(&raw) else { continue };
        let delta = 10f64.powf(rng.random_range(-2.0..1.0));
        let lambda: Vec<f64> = raw.iter().map(|v| v - shift + delta).collect();
        if op.contains(&lambda) {
            return lambda;
        }
    }
}

fn cones(trials: usize, rng: &mut ChaCha8Rng) -> Vec<PropertyReport> {
    let s = "cones";
    let mut grad = PropertyReport::new(s, "gradient-positive", 0.0);
    let mut concave = PropertyReport::new(s, "concavity", 1e-8);
    let mut fd = PropertyReport::new(s, "gradient-finite-difference", 1e-6);
    let mut radial = PropertyReport::new(s, "radial-growth", 0.0);
    let mut csub = PropertyReport::new(s, "admissible-is-c-subsolution", 0.0);
    for trial in 0..trials {
        let n = 1 + trial % 6;
        let family = match rng.random_range(0..3) {
            0 => Family::Hessian {
                k: rng.random_range(1..=n),
            },
            1 => Family::MongeAmpere,
            _ => Family::Nm1MongeAmpere,
        };
        let op = ConeOperator::new(family, n).expect("valid family");
        let lambda = interior(&op, rng);
        let inst = || json!({ "family": family.to_string(), "lambda": lambda });

        let g = op.grad(&lambda);
        grad.check(trial, g.iter().all(|v| *v > 0.0), inst);

        let hess = op.hess(&lambda);
        let scale = hess.amax().max(1.0);
        let top = SymmetricEigen::new(hess).eigenvalues.max();
        concave.record(trial, (top / scale).max(0.0), inst);

        let h = 1e-5 * lambda.iter().map(|v| v.abs()).fold(1e-2, f64::min).max(1e-4);
        let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let err = (0..n)
            .map(|i| {
                let (mut p, mut m) = (lambda.clone(), lambda.clone());
                p[i] += h;
                m[i] -= h;
                let d = (op.eval(&p) - op.eval(&m)) / (2.0 * h);
                (d - g[i]).abs()
            })
            .fold(0.0, f64::max);
        fd.record(trial, err / gmax, inst);

        let f1 = op.eval(&lambda);
        let along: Vec<f64> = [1e3, 1e6]
            .iter()
            .map(|t| op.eval(&lambda.iter().map(|v| v * t).collect::<Vec<_>>()))
            .collect();
        radial.check(trial, f1 < along[0] && along[0] < along[1] && along[1] > f1 + 10.0, inst);

        let ok = is_c_subsolution_point(&op, &lambda, f1 + 1.0, DEFAULT_T_PROBE).unwrap_or(false);
        csub.check(trial, ok, inst);
    }
    vec![grad, concave, fd, radial, csub]
}

fn forms_suite(trials: usize, rng: &mut ChaCha8Rng) -> Vec<PropertyReport> {
    let mut out = Vec::new();
    for n in 1..=3 {
        out.push(PropertyReport::from_identity("forms", forms::verify_wedge_ratio(n, trials, rng)));
    }
    for n in 2..=3 {
        out.push(PropertyReport::from_identity("forms", forms::verify_hodge1(n, trials, rng)));
        out.push(PropertyReport::from_identity("forms", forms::verify_hodge2(n, trials, rng)));
        out.push(PropertyReport::from_identity("forms", forms::verify_hodge3(n, trials, rng)));
    }
    out
}

/// Runs `suite` with one seeded generator; `trials = 0` yields no properties.
pub fn run_verify_with(suite: Suite, trials: usize, seed: u64, iota: &Iota) -> VerifyReport {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut properties = Vec::new();
    if trials > 0 {
        if matches!(suite, Suite::Algebra | Suite::All) {
            properties.extend(algebra(trials, &mut rng, iota));
        }
        if matches!(suite, Suite::Cones | Suite::All) {
            properties.extend(cones(trials, &mut rng));
        }
        if matches!(suite, Suite::Forms | Suite::All) {
            properties.extend(forms_suite(trials, &mut rng));
        }
    }
    VerifyReport {
        schema_version: SCHEMA_VERSION,
        suite,
        trials,
        seed,
        passed: properties.iter().all(|p| p.passed()),
        properties,
    }
}

pub fn run_verify(suite: Suite, trials: usize, seed: u64) -> VerifyReport {
    run_verify_with(suite, trials, seed, &quatlin::iota)
}

impl VerifyReport {
    pub fn failing(&self) -> impl Iterator<Item = &PropertyReport> {
        self.properties.iter().filter(|p| !p.passed())
    }

    /// 0 when every property held, [`crate::EXIT_VERIFY`] otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            crate::EXIT_VERIFY
        }
    }

    /// One line per failing property.
    pub fn failure_lines(&self) -> Vec<String> {
        self.failing()
            .map(|p| {
                format!(
                    "property {} ({}) failed on {} of {} instances, max error {:e}",
                    p.property, p.suite, p.failure_count, p.checked, p.max_error
                )
            })
            .collect()
    }
}
