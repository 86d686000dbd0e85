//! Restarted GMRES with right preconditioning.

use rayon::prelude::*;

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `|b - A x| / |b|`, recomputed from the returned `x`.
    pub rel_residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], alpha: f64, x: &[f64]) {
    y.par_iter_mut().zip(x.par_iter()).for_each(|(yi, xi)| *yi += alpha * xi);
}

/// Solves `A x = b` to relative residual `tol`, or stops after `max_iter`
/// inner iterations and returns the best iterate.
pub fn gmres(
    apply: impl Fn(&[f64]) -> Vec<f64>,
    precond: impl Fn(&[f64]) -> Vec<f64>,
    b: &[f64],
    tol: f64,
    restart: usize,
    max_iter: usize,
) -> GmresOutcome {
    let len = b.len();
    let bnorm = norm(b);
    let mut x = vec![0.0; len];
    if bnorm == 0.0 {
        return GmresOutcome {
            x,
            iterations: 0,
            rel_residual: 0.0,
        };
    }
    let mut total = 0;
    let mut r = b.to_vec();
    loop {
        let beta = norm(&r);
        if beta <= tol * bnorm || total >= max_iter {
            return GmresOutcome {
                x,
                iterations: total,
                rel_residual: beta / bnorm,
            };
        }
        let mut v: Vec<Vec<f64>> = vec![r.iter().map(|ri| ri / beta).collect()];
        let mut z: Vec<Vec<f64>> = Vec::with_capacity(restart);
        let mut h = vec![vec![0.0; restart]; restart + 1];
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut g = vec![0.0; restart + 1];
        g[0] = beta;
        let mut k = 0;
        for j in 0..restart {
            z.push(precond(&v[j]));
            let mut w = apply(&z[j]);
            for i in 0..=j {
                h[i][j] = dot(&w, &v[i]);
                axpy(&mut w, -h[i][j], &v[i]);
            }
            let hn = norm(&w);
            h[j + 1][j] = hn;
            for i in 0..j {
                let t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let d = h[j][j].hypot(h[j + 1][j]);
            if d == 0.0 {
                cs[j] = 1.0;
                sn[j] = 0.0;
            } else {
                cs[j] = h[j][j] / d;
                sn[j] = h[j + 1][j] / d;
            }
            h[j][j] = d;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            total += 1;
            k = j + 1;
            if g[j + 1].abs() <= tol * bnorm || total >= max_iter || hn == 0.0 {
                break;
            }
            v.push(w.iter().map(|wi| wi / hn).collect());
        }
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let s: f64 = (i + 1..k).map(|l| h[i][l] * y[l]).sum();
            y[i] = if h[i][i] != 0.0 { (g[i] - s) / h[i][i] } else { 0.0 };
        }
        for (yi, zi) in y.iter().zip(&z) {
            axpy(&mut x, *yi, zi);
        }
        let ax = apply(&x);
        r = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonsymmetric_system() {
        let n = 30;
        let a = |x: &[f64]| -> Vec<f64> {
            (0..n)
                .map(|i| {
                    let left = if i > 0 { x[i - 1] } else { 0.0 };
                    let right = if i + 1 < n { x[i + 1] } else { 0.0 };
                    3.0 * x[i] - left + 0.5 * right
                })
                .collect()
        };
        let truth: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let b = a(&truth);
        let out = gmres(a, |v| v.to_vec(), &b, 1e-12, 8, 500);
        assert!(out.rel_residual < 1e-12);
        let err = out.x.iter().zip(&truth).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn exact_preconditioner_converges_in_one_step() {
        let b = vec![2.0, -4.0, 6.0];
        let out = gmres(
            |x| x.iter().map(|v| 2.0 * v).collect(),
            |v| v.iter().map(|x| 0.5 * x).collect(),
            &b,
            1e-14,
            5,
            10,
        );
        assert_eq!(out.iterations, 1);
        assert_eq!(out.x, vec![1.0, -2.0, 3.0]);
    }
}
