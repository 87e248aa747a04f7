use super::{vector, DenseMatrix};
use crate::error::{invalid, Result};

/// Thin QR factorization `M = Q R` with `diag(R) ≥ 0`.
#[derive(Debug, Clone)]
pub struct Qr {
    pub q: DenseMatrix,
    pub r: DenseMatrix,
}

impl Qr {
    /// True when some diagonal entry of `R` is exactly zero.
    pub fn is_rank_deficient(&self) -> bool {
        self.r.diag().contains(&0.0)
    }
}

/// Householder QR of a tall matrix (`rows ≥ cols`).
pub fn qr_factor(m: &DenseMatrix) -> Result<Qr> {
    let (rows, cols) = (m.rows(), m.cols());
    if rows < cols {
        return Err(invalid("qr_factor", "matrix must have rows >= cols"));
    }
    m.ensure_finite("qr_factor input")?;

    let mut a = m.clone();
    // Unit Householder vectors, stored from their pivot row downward.
    let mut reflectors: Vec<Option<Vec<f64>>> = Vec::with_capacity(cols);
    for j in 0..cols {
        let x = &a.col(j)[j..];
        let norm = vector::norm2(x);
        if norm == 0.0 {
            reflectors.push(None);
            continue;
        }
        let alpha = if x[0] >= 0.0 { -norm } else { norm };
        let mut v = x.to_vec();
        v[0] -= alpha;
        let vnorm = vector::norm2(&v);
        if vnorm == 0.0 {
            reflectors.push(None);
            continue;
        }
        v.iter_mut().for_each(|e| *e /= vnorm);
        for c in j..cols {
            let col = &mut a.col_mut(c)[j..];
            let s = 2.0 * vector::dot(&v, col);
            vector::axpy(-s, &v, col);
        }
        reflectors.push(Some(v));
    }

    let mut r = DenseMatrix::zeros(cols, cols);
    for j in 0..cols {
        for i in 0..=j {
            r[(i, j)] = a[(i, j)];
        }
    }

    let mut q = DenseMatrix::zeros(rows, cols);
    for j in 0..cols {
        q[(j, j)] = 1.0;
    }
    for (j, v) in reflectors.iter().enumerate().rev() {
        if let Some(v) = v {
            for c in 0..cols {
                let col = &mut q.col_mut(c)[j..];
                let s = 2.0 * vector::dot(v, col);
                vector::axpy(-s, v, col);
            }
        }
    }

    for j in 0..cols {
        if r[(j, j)] < 0.0 {
            for c in j..cols {
                r[(j, c)] = -r[(j, c)];
            }
            q.col_mut(j).iter_mut().for_each(|e| *e = -*e);
        }
    }
    Ok(Qr { q, r })
}
