//! FFT-based inversion of constant-coefficient second-order operators.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::TorusGrid;

/// Multi-dimensional FFT over the grid, one axis at a time.
#[derive(Clone)]
pub struct FftNd {
    dims: usize,
    points: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftNd {
    pub fn new(grid: &TorusGrid) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            dims: grid.dims(),
            points: grid.points(),
            forward: planner.plan_fft_forward(grid.points()),
            inverse: planner.plan_fft_inverse(grid.points()),
        }
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let np = self.points;
        for axis in 0..self.dims {
            let stride = np.pow((self.dims - 1 - axis) as u32);
            let block = stride * np;
            data.par_chunks_mut(block).for_each(|chunk| {
                let mut line = vec![Complex64::new(0.0, 0.0); np];
                for inner in 0..stride {
                    for (j, l) in line.iter_mut().enumerate() {
                        *l = chunk[inner + j * stride];
                    }
                    fft.process(&mut line);
                    for (j, l) in line.iter().enumerate() {
                        chunk[inner + j * stride] = *l;
                    }
                }
            });
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, &self.forward);
    }

    /// Inverse transform, normalized so that `inverse(forward(u)) = u`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, &self.inverse);
        let scale = 1.0 / data.len() as f64;
        data.par_iter_mut().for_each(|v| *v *= scale);
    }
}

/// Solves `sum_ab c_ab D_ab u = f` on mean-zero fields for a constant,
/// positive definite coefficient matrix `c`, using the scheme's symbols.
#[derive(Clone)]
pub struct ConstantCoefficientSolver {
    fft: FftNd,
    /// Reciprocal symbol at each frequency; zero at the constant mode and
    /// wherever the symbol vanishes.
    inv_symbol: Vec<f64>,
}

impl ConstantCoefficientSolver {
    pub fn new(grid: &TorusGrid, coeff: &nalgebra::DMatrix<f64>) -> Self {
        let d = grid.dims();
        let s1: Vec<f64> = (0..grid.points()).map(|j| grid.symbol_d1(j)).collect();
        let s2: Vec<f64> = (0..grid.points()).map(|j| grid.symbol_d2(j)).collect();
        let inv_symbol = (0..grid.len())
            .into_par_iter()
            .map(|idx| {
                let m = grid.multi_index(idx);
                let mut sym = 0.0;
                for a in 0..d {
                    sym += coeff[(a, a)] * s2[m[a]];
                    for b in 0..d {
                        if a != b {
                            sym -= coeff[(a, b)] * s1[m[a]] * s1[m[b]];
                        }
                    }
                }
                if sym.abs() > 1e-12 {
                    1.0 / sym
                } else {
                    0.0
                }
            })
            .collect();
        ConstantCoefficientSolver {
            fft: FftNd::new(grid),
            inv_symbol,
        }
    }

    /// Mean-zero solution `u`; the mean of `f` is ignored.
    pub fn solve(&self, f: &[f64]) -> Vec<f64> {
        let mut data: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.fft.forward(&mut data);
        data.par_iter_mut()
            .zip(self.inv_symbol.par_iter())
            .for_each(|(v, s)| *v *= *s);
        self.fft.inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }
}
