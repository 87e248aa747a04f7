use std::f64::consts::PI;
use std::sync::Arc;

use super::{check_min_size, heat_solution, kernel_operator, TestProblem};
use crate::error::{invalid, Result};
use crate::linalg::{jacobi_svd, DenseMatrix};
use crate::operators::{from_dense, gaussian_blur_2d, gaussian_weight, Boundary};

/// Symmetric Gaussian Toeplitz matrix `a_ij = exp(−(i−j)²/(2ς²)) / (ς√(2π))`.
pub fn spectra(n: usize, sigma: f64) -> Result<TestProblem> {
    check_min_size("n", n, 8)?;
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("sigma", format!("must be positive, got {sigma}")));
    }
    let entry = move |i: usize, j: usize| gaussian_weight(i as f64 - j as f64, sigma);
    TestProblem::new("spectra", kernel_operator(n, entry), spectrum_signal(n))
}

/// Synthetic spectrum: baseline `0.2 sin²(πt)` plus Gaussian peaks at 0.25, 0.5
/// and 0.72 of the domain with widths 1.5, 1.0, 2.0 cells and heights 1.0, 0.6, 0.8.
pub fn spectrum_signal(n: usize) -> Vec<f64> {
    const PEAKS: [(f64, f64, f64); 3] = [(0.25, 1.5, 1.0), (0.5, 1.0, 0.6), (0.72, 2.0, 0.8)];
    let nf = n as f64;
    (0..n)
        .map(|i| {
            let p = i as f64 + 0.5;
            let base = 0.2 * (PI * p / nf).sin().powi(2);
            PEAKS.iter().fold(base, |acc, &(c, w, a)| {
                let d = p - c * nf;
                acc + a * (-d * d / (2.0 * w * w)).exp()
            })
        })
        .collect()
}

/// `U diag(e^{c k}) Vᵀ`, `k = 1..n`, with `U`, `V` the singular vectors of
/// the Spectra matrix (`ς = 2`). The singular values are stored on the problem.
pub fn modified_spectra(n: usize, c: f64) -> Result<TestProblem> {
    check_min_size("n", n, 8)?;
    if n > super::DENSE_LIMIT {
        return Err(crate::Error::TooLarge {
            n,
            limit: super::DENSE_LIMIT,
        });
    }
    if !(c < 0.0 && c.is_finite()) {
        return Err(invalid("c", format!("must be negative, got {c}")));
    }
    let base = DenseMatrix::from_fn(n, n, |i, j| gaussian_weight(i as f64 - j as f64, 2.0));
    let svd = jacobi_svd(&base)?;
    let sigma: Vec<f64> = (1..=n).map(|k| (c * k as f64).exp()).collect();
    let mut us = svd.u.clone();
    for (j, &s) in sigma.iter().enumerate() {
        us.col_mut(j).iter_mut().for_each(|e| *e *= s);
    }
    let a = us.matmul(&svd.v.transpose())?;
    let mut p = TestProblem::new("modified_spectra", Arc::new(from_dense(a)?), spectrum_signal(n))?;
    p.singular_values = Some(sigma);
    Ok(p)
}

/// Diagonals `(c, d, e)` of the Dorr matrix: sub-, main and superdiagonal, all of
/// length `n`, with `c[0]` and `e[n−1]` outside the matrix. `d = −(c + e)`.
pub fn dorr_diagonals(n: usize, theta: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = 1.0 / (n as f64 + 1.0);
    let m = n.div_ceil(2);
    let mut c = vec![0.0; n];
    let mut e = vec![0.0; n];
    for idx in 0..n {
        let i = idx + 1;
        let drift = (0.5 - i as f64 * h) / h;
        if i <= m {
            c[idx] = -theta / (h * h);
            e[idx] = c[idx] - drift;
        } else {
            e[idx] = -theta / (h * h);
            c[idx] = e[idx] + drift;
        }
    }
    let d = c.iter().zip(&e).map(|(ci, ei)| -(ci + ei)).collect();
    (c, d, e)
}

/// Nonsymmetric, diagonally dominant tridiagonal Dorr matrix, paired with the
/// heat solution of the same size.
pub fn dorr(n: usize, theta: f64) -> Result<TestProblem> {
    check_min_size("n", n, 8)?;
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(invalid("theta", format!("must be positive, got {theta}")));
    }
    let (c, d, e) = dorr_diagonals(n, theta);
    let entry = move |i: usize, j: usize| {
        if i == j {
            d[i]
        } else if i == j + 1 {
            c[i]
        } else if j == i + 1 {
            e[i]
        } else {
            0.0
        }
    };
    TestProblem::new("dorr", kernel_operator(n, entry), heat_solution(n))
}

/// Piecewise-constant phantom on the unit square, stored as `vec(X)` (column major):
/// a rectangle (0.6), a disk (1.0) and a square (0.8); overlaps take the maximum.
pub fn phantom(side: usize) -> Vec<f64> {
    let s = side as f64;
    let mut x = vec![0.0; side * side];
    for col in 0..side {
        for row in 0..side {
            let u = (col as f64 + 0.5) / s;
            let v = (row as f64 + 0.5) / s;
            let mut val: f64 = 0.0;
            if (0.15..=0.45).contains(&u) && (0.2..=0.7).contains(&v) {
                val = val.max(0.6);
            }
            if (u - 0.68).powi(2) + (v - 0.35).powi(2) <= 0.18 * 0.18 {
                val = val.max(1.0);
            }
            if (0.55..=0.85).contains(&u) && (0.62..=0.9).contains(&v) {
                val = val.max(0.8);
            }
            x[row + col * side] = val;
        }
    }
    x
}

/// Separable Gaussian blur of [`phantom`] with noise level `nl`.
pub fn deblur_2d(side: usize, sigma: f64, nl: f64, seed: u64, boundary: Boundary) -> Result<TestProblem> {
    check_min_size("side", side, 8)?;
    let op = gaussian_blur_2d(side, sigma, boundary)?;
    TestProblem::new("deblur_2d", Arc::new(op), phantom(side))?.with_noise(nl, seed)
}
