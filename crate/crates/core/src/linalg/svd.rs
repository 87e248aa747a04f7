use super::{vector, DenseMatrix};
use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 60;

/// Thin singular value decomposition `M = U diag(σ) Vᵀ`.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: DenseMatrix,
    /// Nonincreasing, nonnegative.
    pub singular_values: Vec<f64>,
    pub v: DenseMatrix,
    /// Number of Jacobi sweeps performed.
    pub sweeps: usize,
}

impl Svd {
    pub fn sigma_max(&self) -> f64 {
        self.singular_values.first().copied().unwrap_or(0.0)
    }

    pub fn sigma_min(&self) -> f64 {
        self.singular_values.last().copied().unwrap_or(0.0)
    }

    /// `U diag(σ) Vᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix {
        let mut us = self.u.clone();
        for (j, &s) in self.singular_values.iter().enumerate() {
            us.col_mut(j).iter_mut().for_each(|e| *e *= s);
        }
        us.matmul(&self.v.transpose())
            .expect("svd factors have consistent shapes")
    }
}

/// One-sided (Hestenes) Jacobi SVD with cyclic sweeps.
///
/// A pair of columns is rotated while `|a_pᵀa_q| > tol·‖a_p‖‖a_q‖` with
/// `tol = √m·ε`; at most 60 sweeps. Wide inputs are handled through the transpose.
pub fn jacobi_svd(m: &DenseMatrix) -> Result<Svd> {
    m.ensure_finite("jacobi_svd input")?;
    if m.rows() < m.cols() {
        let t = jacobi_svd(&m.transpose())?;
        return Ok(Svd {
            u: t.v,
            singular_values: t.singular_values,
            v: t.u,
            sweeps: t.sweeps,
        });
    }
    let (rows, cols) = (m.rows(), m.cols());
    let scale = m.max_abs();
    if scale == 0.0 {
        return Ok(Svd {
            u: complete_basis(DenseMatrix::zeros(rows, cols), &vec![0.0; cols]),
            singular_values: vec![0.0; cols],
            v: DenseMatrix::identity(cols),
            sweeps: 0,
        });
    }

    let mut a = m.scaled(1.0 / scale);
    let mut v = DenseMatrix::identity(cols);
    let tol = (rows as f64).sqrt() * f64::EPSILON;
    let mut sweeps = 0;
    while sweeps < MAX_SWEEPS {
        sweeps += 1;
        let mut rotated = false;
        for p in 0..cols.saturating_sub(1) {
            for q in p + 1..cols {
                let (alpha, beta, gamma) = {
                    let (cp, cq) = (a.col(p), a.col(q));
                    (vector::dot(cp, cp), vector::dot(cq, cq), vector::dot(cp, cq))
                };
                if gamma == 0.0 || gamma.abs() <= tol * alpha.sqrt() * beta.sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + zeta.hypot(1.0));
                let c = 1.0 / t.hypot(1.0);
                let s = c * t;
                rotate_columns(&mut a, p, q, c, s);
                rotate_columns(&mut v, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..cols).map(|j| vector::norm2(a.col(j))).collect();
    let mut order: Vec<usize> = (0..cols).collect();
    order.sort_by(|&i, &j| norms[j].total_cmp(&norms[i]));

    let mut u = DenseMatrix::zeros(rows, cols);
    let mut vs = DenseMatrix::zeros(cols, cols);
    let mut sigma = Vec::with_capacity(cols);
    for (dst, &src) in order.iter().enumerate() {
        let s = norms[src];
        if s > 0.0 {
            for (ui, ai) in u.col_mut(dst).iter_mut().zip(a.col(src)) {
                *ui = ai / s;
            }
        }
        vs.col_mut(dst).copy_from_slice(v.col(src));
        sigma.push(s * scale);
    }
    let u = complete_basis(u, &sigma);
    Ok(Svd {
        u,
        singular_values: sigma,
        v: vs,
        sweeps,
    })
}

/// `κ₂(M) = σ_max / σ_min`, infinite for singular `M`.
pub fn condition_number_2(m: &DenseMatrix) -> Result<f64> {
    let svd = jacobi_svd(m)?;
    let smax = svd.sigma_max();
    if smax == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let smin = svd.sigma_min();
    Ok(if smin == 0.0 { f64::INFINITY } else { smax / smin })
}

fn rotate_columns(m: &mut DenseMatrix, p: usize, q: usize, c: f64, s: f64) {
    let rows = m.rows();
    for i in 0..rows {
        let (xp, xq) = (m[(i, p)], m[(i, q)]);
        m[(i, p)] = c * xp - s * xq;
        m[(i, q)] = s * xp + c * xq;
    }
}

/// Fills the columns that belong to zero singular values with unit vectors
/// orthogonal to the rest.
fn complete_basis(mut u: DenseMatrix, sigma: &[f64]) -> DenseMatrix {
    let rows = u.rows();
    let mut candidate = 0;
    for j in 0..sigma.len() {
        if sigma[j] > 0.0 {
            continue;
        }
        while candidate < rows {
            let mut w = vec![0.0; rows];
            w[candidate] = 1.0;
            candidate += 1;
            // two passes of Gram-Schmidt against every filled column
            for _ in 0..2 {
                for c in (0..sigma.len()).filter(|&c| c != j && (sigma[c] > 0.0 || c < j)) {
                    let h = vector::dot(u.col(c), &w);
                    vector::axpy(-h, u.col(c), &mut w);
                }
            }
            let nw = vector::norm2(&w);
            if nw > 0.5 {
                for (ui, wi) in u.col_mut(j).iter_mut().zip(&w) {
                    *ui = wi / nw;
                }
                break;
            }
        }
    }
    u
}
