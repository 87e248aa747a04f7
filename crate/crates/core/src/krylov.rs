//! Krylov decompositions `A B_k = B_{k+1} H_{k+1,k}`.
//!
//! Three processes share one state type:
//!
//! - the Hessenberg process without pivoting, where `β` is the first entry of
//!   `r₀` and the basis is unit lower triangular;
//! - the Hessenberg process with pivoting, where `β` is the entry of largest
//!   magnitude and the basis is unit lower triangular up to the row
//!   permutation `p`;
//! - the Arnoldi process (modified Gram–Schmidt, one pass), with `β = ‖r₀‖`.
//!
//! Neither Hessenberg variant computes an inner product. Basis columns are stored
//! densely; the structural zeros of the Hessenberg bases are not exploited.

use crate::error::{check_len, invalid, Error, Result};
use crate::linalg::{qr_factor, vector, DenseMatrix, Qr};
use crate::operators::LinearOperator;

/// Relative size below which the continuation scalar counts as zero.
pub const DEFAULT_BREAKDOWN_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecompositionKind {
    Hessenberg,
    HessenbergPivoted,
    Arnoldi,
}

impl DecompositionKind {
    pub fn name(self) -> &'static str {
        match self {
            DecompositionKind::Hessenberg => "hessenberg",
            DecompositionKind::HessenbergPivoted => "hessenberg_pivoted",
            DecompositionKind::Arnoldi => "arnoldi",
        }
    }
}

/// State of a Hessenberg or Arnoldi process after `k` steps.
#[derive(Debug, Clone)]
pub struct KrylovDecomposition {
    kind: DecompositionKind,
    n: usize,
    basis: Vec<Vec<f64>>,
    /// Column `j` of `H`, with `j + 2` entries.
    hess: Vec<Vec<f64>>,
    beta: f64,
    pivot: Vec<usize>,
    breakdown: bool,
    breakdown_tol: f64,
}

impl KrylovDecomposition {
    /// Starts a process from `r₀`, producing the first basis vector.
    ///
    /// An all-zero `r₀` is rejected. For the unpivoted Hessenberg process a zero
    /// first entry is a breakdown before the first step.
    pub fn start(kind: DecompositionKind, r0: &[f64]) -> Result<Self> {
        let n = r0.len();
        if n == 0 || r0.iter().all(|&v| v == 0.0) {
            return Err(invalid("r0", "initial vector must be nonzero"));
        }
        if r0.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("r0"));
        }
        let mut pivot: Vec<usize> = (0..n).collect();
        let beta = match kind {
            DecompositionKind::Hessenberg => r0[0],
            DecompositionKind::HessenbergPivoted => {
                let i0 = vector::argmax_abs(r0, 0..n).expect("n > 0");
                pivot.swap(0, i0);
                r0[i0]
            }
            DecompositionKind::Arnoldi => vector::norm2(r0),
        };
        let mut state = Self {
            kind,
            n,
            basis: Vec::new(),
            hess: Vec::new(),
            beta,
            pivot,
            breakdown: false,
            breakdown_tol: DEFAULT_BREAKDOWN_TOL,
        };
        if beta == 0.0 {
            state.breakdown = true;
        } else {
            state.basis.push(r0.iter().map(|v| v / beta).collect());
        }
        Ok(state)
    }

    /// Builds a decomposition with up to `steps` steps, stopping early on breakdown.
    pub fn build(kind: DecompositionKind, op: &dyn LinearOperator, r0: &[f64], steps: usize) -> Result<Self> {
        let mut d = Self::start(kind, r0)?;
        while d.steps() < steps && !d.breakdown {
            d.extend(op)?;
        }
        Ok(d)
    }

    /// Overrides the relative breakdown threshold (0 means exact zero only).
    pub fn with_breakdown_tol(mut self, tol: f64) -> Self {
        self.breakdown_tol = tol;
        self
    }

    /// Performs one more step of the process.
    pub fn extend(&mut self, op: &dyn LinearOperator) -> Result<()> {
        if self.breakdown {
            return Err(Error::AlreadyBrokenDown);
        }
        check_len("operator rows", self.n, op.nrows())?;
        check_len("operator cols", self.n, op.ncols())?;
        match self.kind {
            DecompositionKind::Hessenberg => self.hessenberg_step(op, false),
            DecompositionKind::HessenbergPivoted => self.hessenberg_step(op, true),
            DecompositionKind::Arnoldi => self.arnoldi_step(op),
        }
        Ok(())
    }

    fn hessenberg_step(&mut self, op: &dyn LinearOperator, pivoting: bool) {
        let k = self.hess.len();
        let mut u = op.apply(&self.basis[k]);
        let scale = vector::norm_inf(&u);
        let mut col = Vec::with_capacity(k + 2);
        for j in 0..=k {
            let h = u[self.pivot[j]];
            col.push(h);
            if h != 0.0 {
                vector::axpy(-h, &self.basis[j], &mut u);
            }
            // exact by construction; pinned so rounding cannot leak in
            u[self.pivot[j]] = 0.0;
        }
        let next = if k + 1 >= self.n {
            None
        } else if pivoting {
            // position in p of the first entry of maximal magnitude
            let mut best = k + 1;
            for pos in k + 2..self.n {
                if u[self.pivot[pos]].abs() > u[self.pivot[best]].abs() {
                    best = pos;
                }
            }
            Some(best)
        } else {
            Some(k + 1)
        };
        let h_next = next.map_or(0.0, |pos| u[self.pivot[pos]]);
        if h_next == 0.0 || h_next.abs() <= self.breakdown_tol * scale {
            col.push(0.0);
            self.hess.push(col);
            self.breakdown = true;
            return;
        }
        let pos = next.expect("h_next is nonzero");
        col.push(h_next);
        self.hess.push(col);
        self.pivot.swap(k + 1, pos);
        // division, not a reciprocal product, so the pivot entry is exactly 1
        self.basis.push(u.iter().map(|v| v / h_next).collect());
    }

    fn arnoldi_step(&mut self, op: &dyn LinearOperator) {
        let k = self.hess.len();
        let mut u = op.apply(&self.basis[k]);
        let scale = vector::norm2(&u);
        let mut col = Vec::with_capacity(k + 2);
        for j in 0..=k {
            let h = vector::dot(&self.basis[j], &u);
            vector::axpy(-h, &self.basis[j], &mut u);
            col.push(h);
        }
        let h_next = vector::norm2(&u);
        if k + 1 >= self.n || h_next == 0.0 || h_next <= self.breakdown_tol * scale {
            col.push(0.0);
            self.hess.push(col);
            self.breakdown = true;
            return;
        }
        col.push(h_next);
        self.hess.push(col);
        self.basis.push(vector::scale(1.0 / h_next, &u));
    }

    pub fn kind(&self) -> DecompositionKind {
        self.kind
    }

    /// Ambient dimension `n`.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of completed steps `k`.
    pub fn steps(&self) -> usize {
        self.hess.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn breakdown(&self) -> bool {
        self.breakdown
    }

    /// Zero-based pivot permutation `p`.
    pub fn pivot(&self) -> &[usize] {
        &self.pivot
    }

    /// Basis column `j` (zero-based).
    pub fn basis_vector(&self, j: usize) -> &[f64] {
        &self.basis[j]
    }

    /// Number of stored basis columns: `k + 1`, or `k` after breakdown.
    pub fn basis_len(&self) -> usize {
        self.basis.len()
    }

    /// Column `j` of `H` (zero-based), `j + 2` entries.
    pub fn hess_column(&self, j: usize) -> &[f64] {
        &self.hess[j]
    }

    /// First `cols` basis columns as an `n × cols` matrix.
    pub fn basis_matrix(&self, cols: usize) -> DenseMatrix {
        DenseMatrix::from_columns(self.n, &self.basis[..cols]).expect("basis columns have length n")
    }

    /// `H_{j+1,j}` for `j ≤ k`; nested decompositions share their leading blocks.
    pub fn hess_matrix_at(&self, j: usize) -> DenseMatrix {
        assert!(j <= self.steps(), "requested more steps than computed");
        let mut h = DenseMatrix::zeros(j + 1, j);
        for c in 0..j {
            for (r, &v) in self.hess[c].iter().enumerate() {
                h[(r, c)] = v;
            }
        }
        h
    }

    /// `H_{k+1,k}` for the current `k`.
    pub fn hess_matrix(&self) -> DenseMatrix {
        self.hess_matrix_at(self.steps())
    }

    /// `x₀ + B_k y`.
    pub fn combine(&self, x0: &[f64], y: &[f64]) -> Vec<f64> {
        let mut x = x0.to_vec();
        for (j, &yj) in y.iter().enumerate() {
            vector::axpy(yj, &self.basis[j], &mut x);
        }
        x
    }

    /// `‖A B_k − B_{k+1} H_{k+1,k}‖_F` and `‖B_{k+1}‖_F`.
    ///
    /// After breakdown the last row of `H` is zero and `B_k H_{k,k}` is used.
    pub fn relation_residual(&self, op: &dyn LinearOperator) -> (f64, f64) {
        let k = self.steps();
        let mut sq = 0.0;
        for j in 0..k {
            let mut r = op.apply(&self.basis[j]);
            for (i, &h) in self.hess[j].iter().enumerate() {
                if i < self.basis.len() {
                    vector::axpy(-h, &self.basis[i], &mut r);
                }
            }
            let nr = vector::norm2(&r);
            sq += nr * nr;
        }
        let bsq: f64 = self
            .basis
            .iter()
            .take(k + 1)
            .map(|b| {
                let v = vector::norm2(b);
                v * v
            })
            .sum();
        (sq.sqrt(), bsq.sqrt())
    }

    /// Sign-normalized triangular factor `R_{m}` of `B_m = Q_m R_m`.
    ///
    /// Row signs of the Householder `R` are flipped so that `Q_m` has the
    /// orientation of the Arnoldi basis of the same Krylov space (positive
    /// subdiagonal of `H^A`). Only meaningful for the Hessenberg kinds.
    pub fn oriented_r_factor(&self, m: usize) -> Result<DenseMatrix> {
        let Qr { r, .. } = qr_factor(&self.basis_matrix(m))?;
        let mut r = r;
        let mut sign = self.beta.signum();
        for i in 0..m {
            if i > 0 {
                sign *= self.hess[i - 1][i].signum();
            }
            if sign < 0.0 {
                for c in 0..m {
                    r[(i, c)] = -r[(i, c)];
                }
            }
        }
        Ok(r)
    }
}

/// Consuming single-step variants that check the decomposition kind.
pub fn hessenberg_extend(mut state: KrylovDecomposition, op: &dyn LinearOperator) -> Result<KrylovDecomposition> {
    if state.kind != DecompositionKind::Hessenberg {
        return Err(invalid("state", "expected an unpivoted Hessenberg decomposition"));
    }
    state.extend(op)?;
    Ok(state)
}

pub fn hessenberg_pivoted_extend(
    mut state: KrylovDecomposition,
    op: &dyn LinearOperator,
) -> Result<KrylovDecomposition> {
    if state.kind != DecompositionKind::HessenbergPivoted {
        return Err(invalid("state", "expected a pivoted Hessenberg decomposition"));
    }
    state.extend(op)?;
    Ok(state)
}

pub fn arnoldi_extend(mut state: KrylovDecomposition, op: &dyn LinearOperator) -> Result<KrylovDecomposition> {
    if state.kind != DecompositionKind::Arnoldi {
        return Err(invalid("state", "expected an Arnoldi decomposition"));
    }
    state.extend(op)?;
    Ok(state)
}

/// Outcome of comparing a Hessenberg and an Arnoldi decomposition.
#[derive(Debug, Clone)]
pub struct BasisChangeReport {
    pub k: usize,
    /// `‖H^A − R_{k+1} H R_k⁻¹‖_F / ‖H^A‖_F`.
    pub relative_residual: f64,
    /// `κ₂(R_{k+1})`.
    pub kappa_r: f64,
}

/// Checks `H^A_{k+1,k} = R_{k+1} H_{k+1,k} R_k⁻¹` with `L_{k+1} = Q_{k+1} R_{k+1}`.
pub fn verify_basis_change(hd: &KrylovDecomposition, ad: &KrylovDecomposition) -> Result<BasisChangeReport> {
    if ad.kind != DecompositionKind::Arnoldi || hd.kind == DecompositionKind::Arnoldi {
        return Err(invalid("decompositions", "expected (hessenberg, arnoldi)"));
    }
    check_len("decomposition dimension", hd.dim(), ad.dim())?;
    let k = hd.steps();
    check_len("decomposition steps", k, ad.steps())?;
    if k == 0 {
        return Err(invalid("decompositions", "need at least one step"));
    }
    if hd.basis_len() < k + 1 || ad.basis_len() < k + 1 {
        return Err(invalid("decompositions", "breakdown before step k"));
    }
    let r_next = hd.oriented_r_factor(k + 1)?;
    let r_k = r_next.leading(k, k);
    let h = hd.hess_matrix();
    let ha = ad.hess_matrix();

    // R_{k+1} H R_k^{-1}: solve Z R_k = R_{k+1} H row by row via R_kᵀ zᵀ = ...
    let rh = r_next.matmul(&h)?;
    let mut z = DenseMatrix::zeros(k + 1, k);
    for i in 0..k + 1 {
        // z_i R_k = rh_i  (forward substitution on columns)
        for c in 0..k {
            let mut s = rh[(i, c)];
            for t in 0..c {
                s -= z[(i, t)] * r_k[(t, c)];
            }
            let d = r_k[(c, c)];
            if d == 0.0 {
                return Err(Error::Singular(c));
            }
            z[(i, c)] = s / d;
        }
    }
    let relative_residual = z.sub(&ha)?.frobenius_norm() / ha.frobenius_norm();
    let kappa_r = crate::linalg::condition_number_2(&r_next)?;
    Ok(BasisChangeReport {
        k,
        relative_residual,
        kappa_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::from_dense;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(n: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0))
    }

    fn random_vec(n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn e(n: usize, i: usize) -> Vec<f64> {
        let mut v = vec![0.0; n];
        v[i] = 1.0;
        v
    }

    #[test]
    fn identity_breaks_down_after_one_step() {
        let op = from_dense(DenseMatrix::identity(4)).unwrap();
        let d = KrylovDecomposition::build(DecompositionKind::Hessenberg, &op, &e(4, 0), 3).unwrap();
        assert_eq!(d.steps(), 1);
        assert!(d.breakdown());
        assert_eq!(d.basis_vector(0), &e(4, 0)[..]);
        assert_eq!(d.hess_column(0), &[1.0, 0.0]);
    }

    #[test]
    fn shift_matrix_recurrence() {
        let n = 5;
        let shift = DenseMatrix::from_fn(n, n, |i, j| if i == j + 1 { 1.0 } else { 0.0 });
        let op = from_dense(shift).unwrap();
        let d = KrylovDecomposition::build(DecompositionKind::Hessenberg, &op, &e(n, 0), 3).unwrap();
        assert_eq!(d.steps(), 3);
        for j in 0..4 {
            assert_eq!(d.basis_vector(j), &e(n, j)[..]);
        }
        let h = d.hess_matrix();
        for c in 0..3 {
            for r in 0..4 {
                assert_eq!(h[(r, c)], if r == c + 1 { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn unpivoted_relation_on_random_matrix() {
        let a = random_matrix(6, 1);
        let op = from_dense(a.clone()).unwrap();
        let mut d = KrylovDecomposition::start(DecompositionKind::Hessenberg, &random_vec(6, 2)).unwrap();
        for _ in 0..5 {
            d = hessenberg_extend(d, &op).unwrap();
            let (res, _) = d.relation_residual(&op);
            assert!(res < 1e-12, "relation residual {res}");
        }
        // unit lower triangular basis
        for j in 0..d.basis_len() {
            assert_eq!(d.basis_vector(j)[j], 1.0);
            for i in 0..j {
                assert_eq!(d.basis_vector(j)[i], 0.0);
            }
        }
    }

    #[test]
    fn pivoted_start_uses_largest_entry() {
        let r0 = [0.5, -1.0, 3.0, 2.0];
        let d = KrylovDecomposition::start(DecompositionKind::HessenbergPivoted, &r0).unwrap();
        assert_eq!(d.beta(), 3.0);
        assert_eq!(d.pivot(), &[2, 1, 0, 3]);
        assert_eq!(d.basis_vector(0)[2], 1.0);
    }

    #[test]
    fn pivoted_identity_breaks_down() {
        let op = from_dense(DenseMatrix::identity(5)).unwrap();
        let d = KrylovDecomposition::build(DecompositionKind::HessenbergPivoted, &op, &random_vec(5, 3), 4).unwrap();
        assert_eq!(d.steps(), 1);
        assert!(d.breakdown());
    }

    #[test]
    fn pivoted_structure_and_relation() {
        let n = 8;
        let op = from_dense(random_matrix(n, 4)).unwrap();
        let mut d = KrylovDecomposition::start(DecompositionKind::HessenbergPivoted, &random_vec(n, 5)).unwrap();
        for _ in 0..7 {
            d = hessenberg_pivoted_extend(d, &op).unwrap();
            let (res, _) = d.relation_residual(&op);
            assert!(res < 1e-12, "relation residual {res}");
        }
        let p = d.pivot();
        for j in 0..d.basis_len() {
            let l = d.basis_vector(j);
            assert_eq!(l[p[j]], 1.0);
            for i in 0..j {
                assert_eq!(l[p[i]], 0.0);
            }
            for i in j + 1..n {
                assert!(l[p[i]].abs() <= 1.0);
            }
        }
    }

    #[test]
    fn arnoldi_identity_breakdown() {
        let op = from_dense(DenseMatrix::identity(4)).unwrap();
        let d = KrylovDecomposition::build(DecompositionKind::Arnoldi, &op, &random_vec(4, 6), 3).unwrap();
        assert_eq!(d.steps(), 1);
        assert!(d.breakdown());
        let h = d.hess_matrix();
        assert!((h[(0, 0)] - 1.0).abs() < 1e-15);
        assert_eq!(h[(1, 0)], 0.0);
    }

    #[test]
    fn arnoldi_symmetric_is_tridiagonal() {
        let n = 8;
        let a = random_matrix(n, 7);
        let sym = DenseMatrix::from_fn(n, n, |i, j| a[(i, j)] + a[(j, i)]);
        let op = from_dense(sym).unwrap();
        let d = KrylovDecomposition::build(DecompositionKind::Arnoldi, &op, &random_vec(n, 8), 6).unwrap();
        let h = d.hess_matrix();
        for c in 0..6usize {
            for r in 0..c.saturating_sub(1) {
                assert!(h[(r, c)].abs() < 1e-10, "H[{r},{c}] = {}", h[(r, c)]);
            }
        }
    }

    #[test]
    fn arnoldi_orthonormal_basis() {
        let n = 8;
        let op = from_dense(random_matrix(n, 9)).unwrap();
        let d = KrylovDecomposition::build(DecompositionKind::Arnoldi, &op, &random_vec(n, 10), 7).unwrap();
        let q = d.basis_matrix(d.basis_len());
        let g = q.transpose().matmul(&q).unwrap();
        assert!(g.sub(&DenseMatrix::identity(q.cols())).unwrap().frobenius_norm() < 1e-12);
        let (res, _) = d.relation_residual(&op);
        assert!(res < 1e-12);
    }

    #[test]
    fn extend_after_breakdown_is_an_error() {
        let op = from_dense(DenseMatrix::identity(3)).unwrap();
        let mut d = KrylovDecomposition::build(DecompositionKind::Arnoldi, &op, &e(3, 1), 2).unwrap();
        assert!(matches!(d.extend(&op), Err(Error::AlreadyBrokenDown)));
    }

    #[test]
    fn zero_start_vector_rejected() {
        assert!(KrylovDecomposition::start(DecompositionKind::Arnoldi, &[0.0, 0.0]).is_err());
        let d = KrylovDecomposition::start(DecompositionKind::Hessenberg, &[0.0, 1.0]).unwrap();
        assert!(d.breakdown());
        assert_eq!(d.steps(), 0);
    }

    #[test]
    fn basis_change_one_step() {
        let n = 6;
        let op = from_dense(random_matrix(n, 11)).unwrap();
        let r0 = random_vec(n, 12);
        let hd = KrylovDecomposition::build(DecompositionKind::HessenbergPivoted, &op, &r0, 1).unwrap();
        let ad = KrylovDecomposition::build(DecompositionKind::Arnoldi, &op, &r0, 1).unwrap();
        let rep = verify_basis_change(&hd, &ad).unwrap();
        assert!(rep.relative_residual < 1e-12, "{}", rep.relative_residual);
    }

    #[test]
    fn basis_change_random_well_conditioned() {
        let n = 16;
        let mut a = random_matrix(n, 13);
        for i in 0..n {
            a[(i, i)] += 4.0;
        }
        let op = from_dense(a).unwrap();
        let r0 = random_vec(n, 14);
        for kind in [DecompositionKind::Hessenberg, DecompositionKind::HessenbergPivoted] {
            let hd = KrylovDecomposition::build(kind, &op, &r0, 8).unwrap();
            let ad = KrylovDecomposition::build(DecompositionKind::Arnoldi, &op, &r0, 8).unwrap();
            let rep = verify_basis_change(&hd, &ad).unwrap();
            assert!(rep.relative_residual < 1e-10, "{kind:?}: {}", rep.relative_residual);
            assert!(rep.kappa_r >= 1.0);
        }
    }

    #[test]
    fn basis_change_dimension_mismatch() {
        let op4 = from_dense(random_matrix(4, 15)).unwrap();
        let op5 = from_dense(random_matrix(5, 16)).unwrap();
        let hd = KrylovDecomposition::build(DecompositionKind::HessenbergPivoted, &op4, &random_vec(4, 1), 2).unwrap();
        let ad = KrylovDecomposition::build(DecompositionKind::Arnoldi, &op5, &random_vec(5, 1), 2).unwrap();
        assert!(matches!(
            verify_basis_change(&hd, &ad),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
