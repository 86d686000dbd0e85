//! Acceptance suite: one PASS/FAIL line per criterion.

use std::time::Instant;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use quathess::cones::{ConeFunction, ConeOperator, Family};
use quathess::forms;
use quathess::quatlin::{self, random, HypMatrix, RealMatrix};
use quathess::solver::{
    b_from_integral, continuity_solve, manufactured_datum, newton_solve, solve_n1_linear,
    ContinuityOptions, EquationSpec, NewtonOptions, SolverState,
};
use quathess::torus::{hess_q_from_real, Scheme, TorusGrid, TrigExpr};

struct Outcome {
    pass: bool,
    soft: bool,
    detail: String,
}

impl Outcome {
    fn hard(pass: bool, detail: String) -> Self {
        Outcome {
            pass,
            soft: false,
            detail,
        }
    }
}

fn sup_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// `diag(1, -1, -1, -1)` blockwise on the `4n` real axes.
fn reflection(n: usize) -> RealMatrix {
    DMatrix::from_fn(4 * n, 4 * n, |a, b| {
        if a != b {
            0.0
        } else if a < n {
            1.0
        } else {
            -1.0
        }
    })
}

fn random_trig<R: Rng>(n: usize, terms: usize, max_freq: u32, amp: f64, rng: &mut R) -> TrigExpr {
    let mut parts = Vec::new();
    for _ in 0..terms {
        let c: f64 = rng.random_range(-amp..amp);
        let mut s = format!("{c:.6}");
        for _ in 0..rng.random_range(1..=2) {
            let kind = if rng.random_bool(0.5) { "cos" } else { "sin" };
            let freq = rng.random_range(1..=max_freq);
            let p = rng.random_range(0..4);
            let r = rng.random_range(1..=n);
            s.push_str(&format!("*{kind}({freq}*x{p}_{r})"));
        }
        parts.push(s);
    }
    parts.join(" + ").replace("+ -", "- ").parse().unwrap()
}

// ---------------------------------------------------------------- criterion 1

fn permutations(v: &[f64]) -> Vec<Vec<f64>> {
    if v.len() <= 1 {
        return vec![v.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..v.len() {
        let mut rest = v.to_vec();
        let head = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, head);
            out.push(p);
        }
    }
    out
}

fn combinations(m: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if m < k {
        return Vec::new();
    }
    let mut out = combinations(m - 1, k);
    for mut c in combinations(m - 1, k - 1) {
        c.push(m - 1);
        out.push(c);
    }
    out
}

/// Membership of `x` in the convex hull of all permutations of `y`, by
/// searching every affinely independent `n`-subset of vertices for
/// nonnegative barycentric weights.
fn in_permutation_hull(x: &[f64], y: &[f64]) -> bool {
    let n = x.len();
    if (x.iter().sum::<f64>() - y.iter().sum::<f64>()).abs() > 1e-9 {
        return false;
    }
    let verts = permutations(y);
    let scale = 1.0 + y.iter().map(|v| v.abs()).sum::<f64>();
    for subset in combinations(verts.len(), n) {
        let a = DMatrix::from_fn(n + 1, n, |row, col| {
            if row < n {
                verts[subset[col]][row]
            } else {
                1.0
            }
        });
        let svd = a.clone().svd(true, true);
        if svd.singular_values.min() < 1e-9 * scale {
            continue;
        }
        let rhs = DVector::from_fn(n + 1, |row, _| if row < n { x[row] } else { 1.0 });
        let w = svd.solve(&rhs, 1e-14).unwrap();
        if (&a * &w - &rhs).amax() < 1e-9 * scale && w.iter().all(|v| *v >= -1e-12) {
            return true;
        }
    }
    false
}

fn criterion1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut det_err: f64 = 0.0;
    let mut hom_err: f64 = 0.0;
    let mut grouping_failures = 0;
    let mut schur_failures = 0;
    for n in 1..=5 {
        for _ in 0..1000 {
            let h = random::hyp(n, &mut rng);
            let moore = quatlin::moore_det(&h).unwrap();
            let real = quatlin::real_det(&quatlin::iota(h.as_qmatrix()));
            det_err = det_err.max((moore.powi(4) - real).abs() / real.abs().max(1e-300));

            let (a, b) = (random::qmatrix(n, &mut rng), random::qmatrix(n, &mut rng));
            let lhs = quatlin::iota(&a.matmul(&b));
            let rhs = quatlin::iota(&a) * quatlin::iota(&b);
            hom_err = hom_err.max((lhs - rhs).amax());
            let sum = quatlin::iota(&a.add(&b)) - (quatlin::iota(&a) + quatlin::iota(&b));
            let adj = quatlin::iota(&a.adjoint()) - quatlin::iota(&a).transpose();
            hom_err = hom_err.max(sum.amax()).max(adj.amax());

            match quatlin::eigenvalues_via_real(&h) {
                Ok(lambda) => {
                    if !quatlin::majorizes(&h.diag(), &lambda) {
                        schur_failures += 1;
                    }
                }
                Err(_) => grouping_failures += 1,
            }
        }
    }

    let mut hull_mismatch = 0;
    let mut inside_cases = 0;
    for trial in 0..500 {
        let n = 1 + trial % 4;
        let y: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let x: Vec<f64> = if trial % 2 == 0 {
            let perms = permutations(&y);
            let w: Vec<f64> = perms.iter().map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = w.iter().sum();
            (0..n)
                .map(|i| perms.iter().zip(&w).map(|(p, wi)| p[i] * wi).sum::<f64>() / total)
                .collect()
        } else {
            let raw: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
            let shift = (y.iter().sum::<f64>() - raw.iter().sum::<f64>()) / n as f64;
            raw.iter().map(|v| v + shift).collect()
        };
        let brute = in_permutation_hull(&x, &y);
        inside_cases += brute as usize;
        if brute != quatlin::majorizes(&x, &y) {
            hull_mismatch += 1;
        }
    }

    let pass = det_err < 1e-9
        && hom_err <= 1e-12
        && grouping_failures == 0
        && schur_failures == 0
        && hull_mismatch == 0;
    Outcome::hard(
        pass,
        format!(
            "moore^4 vs det(iota) max rel err {det_err:.2e}; iota homomorphism max err {hom_err:.2e}; \
             quadrupling failures {grouping_failures}; Schur failures {schur_failures}; \
             hull mismatches {hull_mismatch}/500 ({inside_cases} inside)"
        ),
    )
}

// ---------------------------------------------------------------- criterion 2

fn identity_error(n: usize, d2: &RealMatrix, hess: &HypMatrix, factor: f64, reflect: bool) -> f64 {
    let m = if reflect {
        let r = reflection(n);
        &r * d2 * &r
    } else {
        d2.clone()
    };
    (quatlin::iota(hess.as_qmatrix()) - quatlin::proj_p(&m) * factor).amax()
}

fn criterion2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut quad_err: f64 = 0.0;
    let mut literal_err: f64 = 0.0;
    for n in 1..=2 {
        for _ in 0..50 {
            let a = DMatrix::from_fn(4 * n, 4 * n, |_, _| rng.random_range(-1.0..1.0));
            let q = &a + a.transpose();
            let hess = HypMatrix::symmetrize(&hess_q_from_real(n, |x, y| q[(x, y)]));
            quad_err = quad_err.max(identity_error(n, &q, &hess, 1.0, true));
            literal_err = literal_err.max(identity_error(n, &q, &hess, 16.0, false));
        }
    }
    let mut field_err: f64 = 0.0;
    for n in 1..=2 {
        let grid = TorusGrid::new(n, if n == 1 { 8 } else { 4 }, Scheme::Spectral).unwrap();
        for _ in 0..50 {
            let u = random_trig(n, 4, if n == 1 { 3 } else { 1 }, 1.0, &mut rng)
                .sample(&grid)
                .unwrap();
            let der = grid.real_derivatives(&u).unwrap();
            let stride = if n == 1 { 1 } else { 7 };
            for idx in (0..grid.len()).step_by(stride) {
                let hess = der.hess_q_at(idx).unwrap();
                field_err = field_err.max(identity_error(n, &der.real_hessian_at(idx), &hess, 1.0, true));
            }
        }
    }
    Outcome::hard(
        quad_err <= 1e-12 && field_err <= 1e-10,
        format!(
            "iota(Hess_H u) = p(R D2u R), R = diag(1,-1,-1,-1): quadratic modes max err {quad_err:.2e}, \
             spectral fields max err {field_err:.2e}; literal factor 16 without R deviates by {literal_err:.2e}"
        ),
    )
}

// ---------------------------------------------------------------- criterion 3

fn criterion3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut violations = 0;
    let mut sharp_violations = 0;
    let mut min_ratio = f64::INFINITY;
    let mut samples = 0;
    for n in 1..=2 {
        let dims = 4 * n;
        let mut taken = 0;
        while taken < 10_000 {
            let a = DMatrix::from_fn(dims, dims, |_, _| rng.random_range(-1.0..1.0));
            let quad = &a * a.transpose() / dims as f64 + DMatrix::identity(dims, dims) * 0.05;
            let field = random_trig(n, 3, 2, 0.3, &mut rng);
            let x: Vec<f64> = (0..dims).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            let d2 = DMatrix::from_fn(dims, dims, |i, j| {
                let (pi, ri, pj, rj) = (i / n, i % n, j / n, j % n);
                quad[(i, j)] + field.derivative(pi, ri).derivative(pj, rj).eval(&x, n)
            });
            if SymmetricEigen::new(d2.clone()).eigenvalues.min() <= 1e-3 {
                continue;
            }
            taken += 1;
            let hess = HypMatrix::symmetrize(&hess_q_from_real(n, |i, j| d2[(i, j)]));
            let lhs = d2.determinant();
            let moore4 = quatlin::moore_det(&hess).unwrap().powi(4);
            if lhs > 2f64.powi(4 * n as i32) * moore4 {
                violations += 1;
            }
            if lhs > moore4 * (1.0 + 1e-10) {
                sharp_violations += 1;
            }
            min_ratio = min_ratio.min(moore4 / lhs);
        }
        samples += taken;
    }
    Outcome::hard(
        violations == 0,
        format!(
            "{samples} convex points: {violations} violations of det D2v <= 2^(4n) moore^4; \
             {sharp_violations} of the constant-1 form; min moore^4/det {min_ratio:.4}"
        ),
    )
}

// ---------------------------------------------------------------- criterion 4

fn interior_sample<R: Rng>(op: &ConeOperator, rng: &mut R) -> Vec<f64> {
    loop {
        let raw: Vec<f64> = (0..op.n).map(|_| rng.random_range(-2.0..2.0)).collect();
        let shift = op.g0(&raw).unwrap();
        let delta = 10f64.powf(rng.random_range(-2.0..1.0));
        let lambda: Vec<f64> = raw.iter().map(|v| v - shift + delta).collect();
        if op.contains(&lambda) {
            return lambda;
        }
    }
}

fn criterion4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut grad_fail = 0;
    let mut concave_fail = 0;
    let mut fd_fail = 0;
    let mut c3_fail = 0;
    let mut worst_fd: f64 = 0.0;
    let mut worst_eig = f64::NEG_INFINITY;
    let mut operators = 0;
    for n in 1..=6 {
        let mut families: Vec<Family> = (1..=n).map(|k| Family::Hessian { k }).collect();
        families.push(Family::MongeAmpere);
        families.push(Family::Nm1MongeAmpere);
        for family in families {
            operators += 1;
            let op = ConeOperator::new(family, n).unwrap();
            for _ in 0..10_000 {
                let lambda = interior_sample(&op, &mut rng);
                let grad = op.grad(&lambda);
                if grad.iter().any(|g| !(*g > 0.0)) {
                    grad_fail += 1;
                }
                let hess = op.hess(&lambda);
                let scale = hess.amax().max(1.0);
                let top = SymmetricEigen::new(hess).eigenvalues.max();
                worst_eig = worst_eig.max(top / scale);
                if top > 1e-8 * scale {
                    concave_fail += 1;
                }
                let h = 1e-5 * lambda.iter().map(|v| v.abs()).fold(1e-2, f64::min).max(1e-4);
                let fd: Vec<f64> = (0..n)
                    .map(|i| {
                        let mut p = lambda.clone();
                        let mut m = lambda.clone();
                        p[i] += h;
                        m[i] -= h;
                        (op.eval(&p) - op.eval(&m)) / (2.0 * h)
                    })
                    .collect();
                let gmax = grad.iter().fold(0.0f64, |a, b| a.max(b.abs()));
                let rel = sup_diff(&grad, &fd) / gmax;
                worst_fd = worst_fd.max(rel);
                if !(rel < 1e-6) {
                    fd_fail += 1;
                }
                let f1 = op.eval(&lambda);
                let along: Vec<f64> = [10.0, 1e3, 1e6]
                    .iter()
                    .map(|t| op.eval(&lambda.iter().map(|v| v * t).collect::<Vec<_>>()))
                    .collect();
                let increasing = f1 < along[0] && along[0] < along[1] && along[1] < along[2];
                if !increasing || !(along[2] > f1 + 10.0) {
                    c3_fail += 1;
                }
            }
        }
    }
    Outcome::hard(
        grad_fail + concave_fail + fd_fail + c3_fail == 0,
        format!(
            "{operators} operators x 10000 samples: gradient sign failures {grad_fail}, \
             concavity failures {concave_fail} (max top eigenvalue/scale {worst_eig:.2e}), \
             finite-difference failures {fd_fail} (max rel err {worst_fd:.2e}), radial failures {c3_fail}"
        ),
    )
}

// ---------------------------------------------------------------- criterion 5

fn criterion5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut wedge_err: f64 = 0.0;
    for n in 1..=3 {
        wedge_err = wedge_err.max(forms::verify_wedge_ratio(n, 100, &mut rng).max_abs_error);
    }
    let mut hodge = [0.0f64; 3];
    let mut failures = 0;
    for n in 2..=3 {
        let reports = [
            forms::verify_hodge1(n, 100, &mut rng),
            forms::verify_hodge2(n, 100, &mut rng),
            forms::verify_hodge3(n, 100, &mut rng),
        ];
        for (slot, r) in hodge.iter_mut().zip(&reports) {
            *slot = slot.max(r.max_abs_error);
            failures += r.failures.len();
        }
    }
    Outcome::hard(
        wedge_err <= 1e-12 && failures == 0 && hodge.iter().all(|e| *e < 1e-10),
        format!(
            "wedge ratio max err {wedge_err:.2e}; hodge1/2/3 max err {:.2e}/{:.2e}/{:.2e} \
             (hodge3 includes the nm1 transform eigenvalues)",
            hodge[0], hodge[1], hodge[2]
        ),
    )
}

// ------------------------------------------------------------ solver instances

/// Converged `(b_integral, b)` pairs collected for criterion 11.
type BLog = Vec<(String, f64, f64)>;

fn log_b(log: &mut BLog, label: &str, spec: &EquationSpec, state: &SolverState) {
    let bq = b_from_integral(spec, &state.phi).unwrap_or(f64::NAN);
    log.push((label.to_string(), bq, state.b));
}

fn phi_star(grid: &TorusGrid) -> Vec<f64> {
    let e: TrigExpr = "0.3*cos(x0_1) + 0.2*cos(x1_2)".parse().unwrap();
    let mut v = e.sample(grid).unwrap();
    let m = grid.mean(&v);
    v.iter_mut().for_each(|x| *x -= m);
    v
}

fn families_n2() -> Vec<(&'static str, ConeOperator)> {
    vec![
        ("sigma1", ConeOperator::hessian(1, 2).unwrap()),
        ("sigma2", ConeOperator::hessian(2, 2).unwrap()),
        ("nm1-ma", ConeOperator::nm1_monge_ampere(2)),
    ]
}

fn instance7(op: ConeOperator) -> (EquationSpec, Vec<f64>) {
    let grid = TorusGrid::new(2, 4, Scheme::Spectral).unwrap();
    let star = phi_star(&grid);
    let flat = EquationSpec::flat(grid, op, vec![0.0; star.len()]).unwrap();
    let datum = manufactured_datum(&flat, &star, 1.0).unwrap();
    (flat.with_datum(datum).unwrap(), star)
}

fn criterion6(blog: &mut BLog) -> Outcome {
    let grid = TorusGrid::new(1, 16, Scheme::Spectral).unwrap();
    let datum: TrigExpr = "0.4*cos(x0_1)*cos(x2_1) - 0.3*sin(x1_1) + 0.2*cos(2*x3_1)".parse().unwrap();
    let datum = datum.sample(&grid).unwrap();
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, op) in [
        ("hessian1", ConeOperator::hessian(1, 1).unwrap()),
        ("ma", ConeOperator::monge_ampere(1)),
        ("nm1-ma", ConeOperator::nm1_monge_ampere(1)),
    ] {
        let spec = EquationSpec::flat(grid.clone(), op, datum.clone()).unwrap();
        let (phi_direct, b_direct) = solve_n1_linear(&spec).unwrap();
        match newton_solve(&spec, None, None, &NewtonOptions::default()) {
            Ok(state) => {
                let err = sup_diff(&state.phi, &phi_direct);
                let berr = (state.b - b_direct).abs();
                pass &= err <= 1e-10 && berr <= 1e-10 && state.iterations <= 2;
                parts.push(format!("{name}: {} its, phi err {err:.2e}, b err {berr:.2e}", state.iterations));
                log_b(blog, &format!("c6 {name}"), &spec, &state);
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome::hard(pass, parts.join("; "))
}

fn criterion7(blog: &mut BLog) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, op) in families_n2() {
        let start = Instant::now();
        let (spec, star) = instance7(op);
        match newton_solve(&spec, None, None, &NewtonOptions::default()) {
            Ok(state) => {
                let err = sup_diff(&state.phi, &star);
                let berr = (state.b - 1.0).abs();
                let secs = start.elapsed().as_secs_f64();
                pass &= err <= 1e-8
                    && berr <= 1e-9
                    && state.iterations <= 20
                    && state.residual_sup <= 1e-10
                    && secs < 300.0;
                parts.push(format!(
                    "{name}: {} its, residual {:.1e}, phi err {err:.2e}, b err {berr:.2e}, {secs:.1}s",
                    state.iterations, state.residual_sup
                ));
                log_b(blog, &format!("c7 {name}"), &spec, &state);
            }
            Err(e) => {
                pass = false;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    Outcome::hard(pass, parts.join("; "))
}

fn criterion8(blog: &mut BLog) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, op) in families_n2() {
        let (spec, _) = instance7(op);
        let run = |steps| {
            continuity_solve(
                &spec,
                &ContinuityOptions {
                    steps,
                    max_steps: 64,
                    newton: NewtonOptions::default(),
                },
            )
        };
        match (run(1), run(8)) {
            (Ok(one), Ok(eight)) => {
                let start = &eight.path[0];
                let start_ok = start.t == 0.0 && start.iterations == 0 && start.b == 1.0;
                let dphi = sup_diff(&one.state.phi, &eight.state.phi);
                let db = (one.state.b - eight.state.b).abs();
                pass &= start_ok && dphi <= 1e-8 && db <= 1e-8;
                parts.push(format!(
                    "{name}: t=0 iterations {} b {}, 1-step vs 8-step phi diff {dphi:.2e}, b diff {db:.2e}",
                    start.iterations, start.b
                ));
                log_b(blog, &format!("c8 {name} 1-step"), &spec, &one.state);
                log_b(blog, &format!("c8 {name} 8-step"), &spec, &eight.state);
            }
            (a, b) => {
                pass = false;
                let msg = a.err().or(b.err()).map(|e| e.to_string()).unwrap_or_default();
                parts.push(format!("{name}: {msg}"));
            }
        }
    }
    Outcome::hard(pass, parts.join("; "))
}

fn criterion9(blog: &mut BLog) -> Outcome {
    let mut pass = true;
    let mut parts = Vec::new();
    for (name, op) in families_n2() {
        let (spec, star) = instance7(op);
        let bump: TrigExpr = "0.05*sin(x2_1)*cos(x3_2) + 0.03*cos(x1_1)".parse().unwrap();
        let bump = bump.sample(&spec.grid).unwrap();
        let perturbed: Vec<f64> = star.iter().zip(&bump).map(|(a, b)| a + b).collect();
        let opts = NewtonOptions::default();
        match (
            newton_solve(&spec, None, None, &opts),
            newton_solve(&spec, Some(&perturbed), Some(1.3), &opts),
        ) {
            (Ok(a), Ok(b)) => {
                let dphi = sup_diff(&a.phi, &b.phi);
                let db = (a.b - b.b).abs();
                pass &= dphi <= 1e-7 && db <= 1e-7;
                parts.push(format!("{name}: phi diff {dphi:.2e}, b diff {db:.2e}"));
                log_b(blog, &format!("c9 {name} perturbed start"), &spec, &b);
            }
            (a, b) => {
                pass = false;
                let msg = a.err().or(b.err()).map(|e| e.to_string()).unwrap_or_default();
                parts.push(format!("{name}: {msg}"));
            }
        }
    }
    Outcome::hard(pass, parts.join("; "))
}

fn criterion10(blog: &mut BLog) -> Outcome {
    let (spec, _) = instance7(ConeOperator::monge_ampere(2));
    let mut table = Vec::new();
    let mut ratios = Vec::new();
    let mut finite = true;
    for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let scaled = spec.with_datum(spec.datum.iter().map(|h| t * h).collect()).unwrap();
        match newton_solve(&scaled, None, None, &NewtonOptions::default()) {
            Ok(state) => {
                let row = state.diagnostics.last().unwrap();
                finite &= row.ratio.is_finite();
                table.push(format!("t={t}: {:.4e}", row.ratio));
                if t > 0.0 {
                    ratios.push(row.ratio);
                }
                log_b(blog, &format!("c10 t={t}"), &scaled, &state);
            }
            Err(e) => {
                finite = false;
                table.push(format!("t={t}: {e}"));
            }
        }
    }
    let hi = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = hi / lo;
    Outcome {
        pass: finite && spread < 10.0,
        soft: true,
        detail: format!(
            "ratio |Lap phi|/(|grad phi|^2+1) on MA instance {}; spread over t>0 {spread:.3}; \
             t=0 excluded from the spread because its solution is phi=0, so the ratio is exactly 0",
            table.join(", ")
        ),
    }
}

fn criterion11(blog: &BLog) -> Outcome {
    let worst = blog
        .iter()
        .map(|(_, bq, b)| (bq - b).abs())
        .fold(0.0f64, |a, e| if e.is_nan() { f64::INFINITY } else { a.max(e) });
    Outcome::hard(
        !blog.is_empty() && worst <= 1e-8,
        format!("{} converged instances, max |b_integral - b| {worst:.2e}", blog.len()),
    )
}

fn main() {
    let mut blog = BLog::new();
    let mut failed = false;
    let mut report = |id: usize, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let o = run();
        let status = match (o.pass, o.soft) {
            (true, _) => "PASS",
            (false, false) => "FAIL",
            (false, true) => "SOFT-FAIL",
        };
        failed |= !o.pass && !o.soft;
        println!(
            "criterion {id:>2} {status} ({:.1}s): {}",
            start.elapsed().as_secs_f64(),
            o.detail
        );
    };
    report(1, &mut criterion1);
    report(2, &mut criterion2);
    report(3, &mut criterion3);
    report(4, &mut criterion4);
    report(5, &mut criterion5);
    report(6, &mut || criterion6(&mut blog));
    report(7, &mut || criterion7(&mut blog));
    report(8, &mut || criterion8(&mut blog));
    report(9, &mut || criterion9(&mut blog));
    report(10, &mut || criterion10(&mut blog));
    report(11, &mut || criterion11(&blog));
    if failed {
        std::process::exit(1);
    }
}
