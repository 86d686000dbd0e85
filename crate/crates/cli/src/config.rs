//! JSON run configuration and its translation into an equation.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use quathess::cones::{ConeOperator, Family};
use quathess::quatlin::QMatrix;
use quathess::solver::{manufactured_datum, nm1_background, EquationSpec};
use quathess::torus::{read_field, Scheme, TorusGrid, TrigExpr};
use quathess::{HypMatrix, Quat};

use crate::SCHEMA_VERSION;

/// A configuration problem, tied to the offending field.
#[derive(Debug, Error)]
#[error("config field `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: &str, message: impl Into<String>) -> Self {
        ConfigError {
            field: field.to_string(),
            message: message.into(),
        }
    }
}

/// Source of the datum `H`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum DatumSpec {
    /// Trigonometric expression, e.g. `0.3*cos(x0_1) - 0.1*sin(2*x3_2)`.
    Expr { expr: TrigExpr },
    /// One-component field file.
    File { path: PathBuf },
    /// `H` chosen so that `(phi, b)` solves the equation exactly on the grid.
    Manufactured {
        phi: TrigExpr,
        #[serde(default = "one")]
        b: f64,
    },
}

/// Source of the background `Omega`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum BackgroundSpec {
    Identity,
    /// Constant hyperhermitian matrix, rows of `[w, x, y, z]` entries.
    Constant { matrix: QMatrix },
    /// Diagonal field `diag(e_1(x), ..., e_n(x))`.
    Eigenvalues { exprs: Vec<TrigExpr> },
    /// Field file with `n` components (diagonal) or `4 n^2` components
    /// (entries `(r, s)` row-major, each as `w, x, y, z`).
    File { path: PathBuf },
    /// `nm1-ma` only: constant `Omega_1`, turned into
    /// `Re tr(g^{-1} Omega_1) g - (n-1) Omega_1`.
    Omega1 { matrix: QMatrix },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Stop when `sup |residual| <= residual`.
    #[serde(default = "default_residual")]
    pub residual: f64,
    #[serde(default = "default_newton")]
    pub max_newton_iterations: usize,
    /// Finest continuity subdivision allowed by step halving.
    #[serde(default = "default_max_steps")]
    pub max_continuity_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            residual: default_residual(),
            max_newton_iterations: default_newton(),
            max_continuity_steps: default_max_steps(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "schema")]
    pub schema_version: u32,
    pub family: String,
    #[serde(default)]
    pub k: Option<usize>,
    pub n: usize,
    #[serde(rename = "N")]
    pub points: usize,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
    pub datum: DatumSpec,
    #[serde(default = "identity")]
    pub background: BackgroundSpec,
    /// Constant metric; identity when absent.
    #[serde(default)]
    pub metric: Option<QMatrix>,
    /// Continuity steps; 0 runs Newton directly from `phi = 0`.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}
fn schema() -> u32 {
    SCHEMA_VERSION
}
fn default_residual() -> f64 {
    1e-10
}
fn default_newton() -> usize {
    50
}
fn default_max_steps() -> usize {
    64
}
fn default_scheme() -> Scheme {
    Scheme::Central2
}
fn identity() -> BackgroundSpec {
    BackgroundSpec::Identity
}
fn default_steps() -> usize {
    4
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}

/// Pulls the field path out of a serde message such as
/// "missing field `n` at line 3".
fn serde_field(message: &str) -> String {
    for key in ["field `", "variant `"] {
        if let Some(start) = message.find(key) {
            let rest = &message[start + key.len()..];
            if let Some(end) = rest.find('`') {
                return rest[..end].to_string();
            }
        }
    }
    "<document>".to_string()
}

/// The equation described by a config, plus the manufactured solution if any.
pub struct Built {
    pub spec: EquationSpec,
    pub manufactured: Option<(Vec<f64>, f64)>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            ConfigError::new(&serde_field(&msg), msg)
        })?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema_version",
                format!("expected {SCHEMA_VERSION}, found {}", cfg.schema_version),
            ));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Canonical JSON form; `parse(emit(c)) == c`.
    pub fn emit(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn family(&self) -> Result<Family, ConfigError> {
        if self.k.is_some() && self.family != "hessian" {
            return Err(ConfigError::new("k", "only the hessian family takes k"));
        }
        Family::parse(&self.family, self.k, self.n).map_err(|e| {
            let field = if self.family == "hessian" { "k" } else { "family" };
            ConfigError::new(field, e.to_string())
        })
    }

    pub fn grid(&self) -> Result<TorusGrid, ConfigError> {
        if self.n == 0 {
            return Err(ConfigError::new("n", "must be at least 1"));
        }
        if self.n > 4 {
            return Err(ConfigError::new("n", "grids are limited to n <= 4"));
        }
        if self.tolerances.residual <= 0.0 || !self.tolerances.residual.is_finite() {
            return Err(ConfigError::new("tolerances.residual", "must be positive"));
        }
        let total = (self.points as f64).powi(4 * self.n as i32);
        if total > 2e7 {
            return Err(ConfigError::new("N", format!("N^(4n) = {total:e} grid points is too many")));
        }
        TorusGrid::new(self.n, self.points, self.scheme).map_err(|e| ConfigError::new("N", e.to_string()))
    }

    fn expr_field(&self, field: &str, e: &TrigExpr, grid: &TorusGrid) -> Result<Vec<f64>, ConfigError> {
        e.sample(grid).map_err(|err| ConfigError::new(field, err.to_string()))
    }

    fn file_components(&self, field: &str, path: &Path, grid: &TorusGrid) -> Result<Vec<Vec<f64>>, ConfigError> {
        let f = read_field(path).map_err(|e| ConfigError::new(field, format!("{}: {e}", path.display())))?;
        if f.n != grid.n() || f.points != grid.points() {
            return Err(ConfigError::new(
                field,
                format!("file grid n={} N={} does not match config", f.n, f.points),
            ));
        }
        Ok(f.components)
    }

    fn hyp(&self, field: &str, m: &QMatrix) -> Result<HypMatrix, ConfigError> {
        if m.n() != self.n {
            return Err(ConfigError::new(field, format!("matrix must be {0}x{0}", self.n)));
        }
        HypMatrix::new(m.clone()).map_err(|e| ConfigError::new(field, e.to_string()))
    }

    fn background(&self, grid: &TorusGrid, metric: &HypMatrix) -> Result<Vec<HypMatrix>, ConfigError> {
        let n = self.n;
        let field = "background";
        match &self.background {
            BackgroundSpec::Identity => Ok(vec![HypMatrix::identity(n)]),
            BackgroundSpec::Constant { matrix } => Ok(vec![self.hyp(field, matrix)?]),
            BackgroundSpec::Omega1 { matrix } => {
                if self.family != "nm1-ma" {
                    return Err(ConfigError::new(field, "kind omega1 needs family nm1-ma"));
                }
                let o1 = self.hyp(field, matrix)?;
                Ok(vec![nm1_background(&o1, metric).map_err(|e| ConfigError::new(field, e.to_string()))?])
            }
            BackgroundSpec::Eigenvalues { exprs } => {
                if exprs.len() != n {
                    return Err(ConfigError::new(field, format!("needs {n} expressions")));
                }
                let fields = exprs
                    .iter()
                    .map(|e| self.expr_field(field, e, grid))
                    .collect::<Result<Vec<_>, _>>()?;
                Ok((0..grid.len())
                    .map(|i| HypMatrix::diagonal(&fields.iter().map(|f| f[i]).collect::<Vec<_>>()))
                    .collect())
            }
            BackgroundSpec::File { path } => {
                let comps = self.file_components(field, path, grid)?;
                if comps.len() == n {
                    Ok((0..grid.len())
                        .map(|i| HypMatrix::diagonal(&comps.iter().map(|c| c[i]).collect::<Vec<_>>()))
                        .collect())
                } else if comps.len() == 4 * n * n {
                    (0..grid.len())
                        .map(|i| {
                            let m = QMatrix::from_fn(n, |r, s| {
                                let base = 4 * (r * n + s);
                                Quat::new(comps[base][i], comps[base + 1][i], comps[base + 2][i], comps[base + 3][i])
                            });
                            self.hyp(field, &m)
                        })
                        .collect()
                } else {
                    Err(ConfigError::new(
                        field,
                        format!("file has {} components, expected {n} or {}", comps.len(), 4 * n * n),
                    ))
                }
            }
        }
    }

    /// Validates everything and assembles the equation.
    pub fn build(&self) -> Result<Built, ConfigError> {
        let family = self.family()?;
        let grid = self.grid()?;
        let op = ConeOperator::new(family, self.n).map_err(|e| ConfigError::new("family", e.to_string()))?;
        let metric = match &self.metric {
            Some(m) => self.hyp("metric", m)?,
            None => HypMatrix::identity(self.n),
        };
        let omega = self.background(&grid, &metric)?;
        let placeholder = vec![0.0; grid.len()];
        let base = EquationSpec::new(grid.clone(), op, omega, metric, placeholder).map_err(|e| {
            let field = if self.metric.is_some() && e.to_string().contains("metric") {
                "metric"
            } else {
                "background"
            };
            ConfigError::new(field, e.to_string())
        })?;
        let (datum, manufactured) = match &self.datum {
            DatumSpec::Expr { expr } => (self.expr_field("datum", expr, &grid)?, None),
            DatumSpec::File { path } => {
                let mut comps = self.file_components("datum", path, &grid)?;
                if comps.len() != 1 {
                    return Err(ConfigError::new("datum", "field file must have exactly one component"));
                }
                let values = comps.remove(0);
                if values.iter().any(|v| !v.is_finite()) {
                    return Err(ConfigError::new("datum", "field file contains non-finite values"));
                }
                (values, None)
            }
            DatumSpec::Manufactured { phi, b } => {
                if !(*b > 0.0) || !b.is_finite() {
                    return Err(ConfigError::new("datum.b", "must be positive"));
                }
                let mut star = self.expr_field("datum.phi", phi, &grid)?;
                let mean = grid.mean(&star);
                star.iter_mut().for_each(|v| *v -= mean);
                let datum = manufactured_datum(&base, &star, *b)
                    .map_err(|e| ConfigError::new("datum.phi", e.to_string()))?;
                (datum, Some((star, *b)))
            }
        };
        let spec = base
            .with_datum(datum)
            .map_err(|e| ConfigError::new("datum", e.to_string()))?;
        Ok(Built { spec, manufactured })
    }
}
