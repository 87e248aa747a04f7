use super::vector;
use crate::error::{Error, Result};

/// Plane rotation `[c s; −s c]` mapping `(a, b)` to `(r, 0)` with `r ≥ 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Givens {
    pub c: f64,
    pub s: f64,
}

impl Givens {
    /// Returns the rotation and `r = hypot(a, b)`.
    pub fn new(a: f64, b: f64) -> (Self, f64) {
        if b == 0.0 {
            let c = if a < 0.0 { -1.0 } else { 1.0 };
            return (Givens { c, s: 0.0 }, a.abs());
        }
        let r = a.hypot(b);
        (Givens { c: a / r, s: b / r }, r)
    }

    #[inline]
    pub fn apply(&self, a: f64, b: f64) -> (f64, f64) {
        (self.c * a + self.s * b, -self.s * a + self.c * b)
    }
}

/// Incrementally updated QR factorization of an upper Hessenberg matrix,
/// solving `min ‖β e₁ − H y‖` one column at a time.
#[derive(Debug, Clone)]
pub struct GivensLeastSquares {
    rotations: Vec<Givens>,
    /// Column `j` of the triangular factor, entries `0..=j`.
    r_cols: Vec<Vec<f64>>,
    g: Vec<f64>,
}

impl GivensLeastSquares {
    pub fn new(beta: f64) -> Self {
        Self {
            rotations: Vec::new(),
            r_cols: Vec::new(),
            g: vec![beta],
        }
    }

    pub fn len(&self) -> usize {
        self.r_cols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.r_cols.is_empty()
    }

    /// Appends column `k` (0-based) of `H`, which has `k + 2` entries.
    pub fn push_column(&mut self, column: &[f64]) {
        let k = self.r_cols.len();
        assert_eq!(column.len(), k + 2, "Hessenberg column has wrong length");
        let mut col = column.to_vec();
        for (j, rot) in self.rotations.iter().enumerate() {
            let (a, b) = rot.apply(col[j], col[j + 1]);
            col[j] = a;
            col[j + 1] = b;
        }
        let (rot, r) = Givens::new(col[k], col[k + 1]);
        col[k] = r;
        col.truncate(k + 1);
        self.rotations.push(rot);
        self.r_cols.push(col);

        let gk = self.g[k];
        let (a, b) = rot.apply(gk, 0.0);
        self.g[k] = a;
        self.g.push(b);
    }

    /// `|g_{k+1}|`, the minimum of `‖β e₁ − H y‖`.
    pub fn residual(&self) -> f64 {
        self.g.last().map_or(0.0, |v| v.abs())
    }

    /// Product of the rotation sines, i.e. the last entry of `Qᵀ e₁` up to sign.
    pub fn tail_component(&self) -> f64 {
        self.rotations.iter().map(|r| r.s).product::<f64>().abs()
    }

    /// Back-substitutes the current triangular system.
    pub fn solve(&self) -> Result<Vec<f64>> {
        let k = self.r_cols.len();
        let mut y = self.g[..k].to_vec();
        for i in (0..k).rev() {
            let d = self.r_cols[i][i];
            if d == 0.0 {
                return Err(Error::Singular(i));
            }
            y[i] /= d;
            let yi = y[i];
            for (yj, rji) in y[..i].iter_mut().zip(&self.r_cols[i][..i]) {
                *yj -= rji * yi;
            }
        }
        Ok(y)
    }

    /// Diagonal of the triangular factor.
    pub fn r_diagonal(&self) -> Vec<f64> {
        self.r_cols.iter().enumerate().map(|(i, c)| c[i]).collect()
    }

    /// `‖g‖`, which equals `|β|` up to rounding.
    pub fn rhs_norm(&self) -> f64 {
        vector::norm2(&self.g)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{qr_factor, DenseMatrix};

    #[test]
    fn rotation_zeroes_second_component() {
        let (g, r) = Givens::new(3.0, 4.0);
        assert_eq!(r, 5.0);
        let (a, b) = g.apply(3.0, 4.0);
        assert!((a - 5.0).abs() < 1e-15 && b.abs() < 1e-15);
    }

    #[test]
    fn matches_dense_least_squares() {
        // 4x3 upper Hessenberg
        let h =
            DenseMatrix::from_rows(&[[2.0, 1.0, -1.0], [1.0, 3.0, 0.5], [0.0, -2.0, 1.0], [0.0, 0.0, 0.7]]).unwrap();
        let beta = 1.5;
        let mut ls = GivensLeastSquares::new(beta);
        for j in 0..3 {
            ls.push_column(&h.col(j)[..j + 2]);
        }
        let y = ls.solve().unwrap();

        let qr = qr_factor(&h).unwrap();
        let mut rhs = vec![0.0; 4];
        rhs[0] = beta;
        let qtb = qr.q.matvec_transpose(&rhs);
        let y_ref = crate::linalg::solve_upper_triangular(&qr.r, &qtb).unwrap();
        for (a, b) in y.iter().zip(&y_ref) {
            assert!((a - b).abs() < 1e-13);
        }
        let mut res = h.matvec(&y);
        res[0] -= beta;
        let true_res = crate::linalg::vector::norm2(&res);
        assert!((ls.residual() - true_res).abs() < 1e-13);
        assert!((ls.tail_component() * beta - true_res).abs() < 1e-13);
    }

    #[test]
    fn residual_is_nonincreasing() {
        let mut ls = GivensLeastSquares::new(1.0);
        let mut prev = ls.residual();
        for k in 0..6 {
            let mut col = vec![0.3; k + 2];
            col[k + 1] = 0.5 / (k + 1) as f64;
            ls.push_column(&col);
            assert!(ls.residual() <= prev + 1e-15);
            prev = ls.residual();
        }
    }
}
