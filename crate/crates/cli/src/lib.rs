//! Driver for `quathess`: JSON-configured solves and seeded verification sweeps.

pub mod config;
pub mod run;
pub mod verify;

/// Version stamped into configs, manifests, field sidecars and reports.
pub const SCHEMA_VERSION: u32 = 1;

pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

/// Reference for every input and output field, printed by `--help`.
pub const FIELD_REFERENCE: &str = r#"EXIT STATUS
  0  success
  1  a verification property failed (failing instances are dumped in the report)
  2  configuration error; the message names the offending field
  3  solver failure; artifacts of the last accepted iterate are still written

CONFIG (JSON, schema_version 1)
  schema_version   integer, must be 1 (default 1)
  family           "hessian" | "ma" | "nm1-ma"
  k                hessian order, 1 <= k <= n (hessian only)
  n                quaternionic dimension, 1..4
  N                grid points per real axis; the grid has N^(4n) points
  scheme           "central2" (default) | "spectral"; --scheme overrides
  datum            the function H, one of
                     {"kind": "expr", "expr": "<trig expression>"}
                     {"kind": "file", "path": "<QHT1 file, 1 component>"}
                     {"kind": "manufactured", "phi": "<trig expression>", "b": 1.0}
                   "manufactured" sets H so that (phi - mean phi, b) is the exact
                   discrete solution and reports the recovery error
  background       Omega, one of (default identity)
                     {"kind": "identity"}
                     {"kind": "constant", "matrix": [[[w,x,y,z], ...], ...]}
                     {"kind": "eigenvalues", "exprs": ["<expr>", ...]}  (n diagonal entries)
                     {"kind": "file", "path": "<QHT1, n or 4n^2 components>"}
                     {"kind": "omega1", "matrix": ...}  (nm1-ma: Omega_1, converted
                      to Re tr(g^-1 Omega_1) g - (n-1) Omega_1)
  metric           constant positive hyperhermitian matrix g (default identity)
  steps            continuity steps from t=0 to t=1; 0 runs Newton directly (default 4)
  tolerances       {"residual": 1e-10, "max_newton_iterations": 50,
                    "max_continuity_steps": 64}
  out              output directory (default "out"); --out overrides
  seed             integer (default 0); --seed overrides

  Expressions are sums of c*prod trig(m*x<p>_<r>) terms, p in 0..3 the unit
  (1, i, j, k) and r in 1..n the quaternionic coordinate, for example
  "0.3*cos(x0_1) - 0.1*sin(2*x3_2)*cos(x1_1) + 0.5".

OUTPUTS OF A SOLVE (in the output directory)
  phi.qht          QHT1 binary: "QHT1", then u32 LE n, N, scheme tag
                   (0 central2, 1 spectral), component count, then f64 LE values
                   component by component in grid order (first axis slowest).
                   Components: phi_mean_zero, phi_sup_zero.
  phi.qht.json     sidecar: schema_version, format, n, points_per_axis, scheme,
                   components, total_points, names, index_order
  manifest.json    schema_version, status ("converged" | "failed"), error,
                   family, k, n, N, scheme, steps,
                   continuity [{t, iterations, residual_sup, b}],
                   iterations (Newton iterations per continuity step),
                   residual_history (sup residual of every iterate, all steps),
                   b, b_integral (quadrature formula for b at the solution),
                   residual_sup, sup_shift (max of the mean-zero phi),
                   manufactured {phi_sup_error, b_error} or null,
                   diagnostics (rows as in the CSV plus sum_f_lambda),
                   seed, config (normalized input)
  diagnostics.csv  one row per accepted iterate:
                   t             continuity parameter
                   iter          Newton iteration within that step (0 = start)
                   residual_sup  sup |f(lambda(A)) - H - log b - offset|
                   b             current constant
                   c0            sup |phi|
                   grad_sup      sup of the Euclidean gradient norm of phi
                   lap_sup       sup |Re tr(g^-1 Hess_H phi)|
                   ratio         lap_sup / (grad_sup^2 + 1)
                   margin        min over points of the boundary shift of lambda(A)

VERIFY REPORT (JSON on stdout, also verify_report.json under --out)
  schema_version, suite, trials, seed, passed,
  properties [{suite, property, checked, tolerance, max_error, failure_count,
               failures [{trial, error, instance}] (first 10)}]
  Properties: algebra: iota-homomorphism, iota-commutant,
  moore-det-fourth-power, spectrum-quadrupling, schur-majorization;
  cones: gradient-positive, concavity, gradient-finite-difference,
  radial-growth, admissible-is-c-subsolution; forms: wedge-ratio-n{1,2,3},
  hodge1/2/3-n{2,3}. trials = 0 gives an empty property list.
"#;
