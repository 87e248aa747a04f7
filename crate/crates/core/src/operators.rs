//! Linear operators: the forward map `A` seen by every solver.
//!
//! Images are flattened column-major: pixel `(row, col)` of a `side × side`
//! image lives at index `row + side * col`.

use std::fmt;
use std::sync::Arc;

use crate::error::{invalid, Error, Result};
use crate::linalg::{vector, DenseMatrix};

/// A linear map from `ncols`-vectors to `nrows`-vectors.
pub trait LinearOperator: Send + Sync {
    fn nrows(&self) -> usize;

    fn ncols(&self) -> usize;

    /// `A x`. Panics when `x.len() != ncols()`.
    fn apply(&self, x: &[f64]) -> Vec<f64>;

    /// `Aᵀ y`, when the operator supports it.
    fn apply_transpose(&self, _y: &[f64]) -> Result<Vec<f64>> {
        Err(Error::MissingTranspose)
    }

    fn has_transpose(&self) -> bool {
        false
    }

    /// The backing dense matrix, if there is one.
    fn as_dense(&self) -> Option<&DenseMatrix> {
        None
    }

    fn is_square(&self) -> bool {
        self.nrows() == self.ncols()
    }
}

impl fmt::Debug for dyn LinearOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LinearOperator({}x{})", self.nrows(), self.ncols())
    }
}

/// Dense matrix wrapped as an operator.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    matrix: DenseMatrix,
}

/// Wraps a dense matrix. Rejects non-finite entries.
pub fn from_dense(matrix: DenseMatrix) -> Result<DenseOperator> {
    matrix.ensure_finite("from_dense")?;
    Ok(DenseOperator { matrix })
}

impl DenseOperator {
    pub fn matrix(&self) -> &DenseMatrix {
        &self.matrix
    }
}

impl LinearOperator for DenseOperator {
    fn nrows(&self) -> usize {
        self.matrix.rows()
    }

    fn ncols(&self) -> usize {
        self.matrix.cols()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.matrix.matvec(x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.matrix.matvec_transpose(y))
    }

    fn has_transpose(&self) -> bool {
        true
    }

    fn as_dense(&self) -> Option<&DenseMatrix> {
        Some(&self.matrix)
    }
}

/// `x ↦ Aᵀ(A x)`.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    inner: Arc<dyn LinearOperator>,
}

pub fn normal_equations(op: Arc<dyn LinearOperator>) -> Result<NormalEquations> {
    if !op.has_transpose() {
        return Err(Error::MissingTranspose);
    }
    Ok(NormalEquations { inner: op })
}

impl LinearOperator for NormalEquations {
    fn nrows(&self) -> usize {
        self.inner.ncols()
    }

    fn ncols(&self) -> usize {
        self.inner.ncols()
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        let ax = self.inner.apply(x);
        self.inner
            .apply_transpose(&ax)
            .expect("normal_equations checks for a transpose")
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply(y))
    }

    fn has_transpose(&self) -> bool {
        true
    }
}

/// Operator defined by an entry function, never stored.
///
/// Used for kernels that are too large to keep dense (Shaw or Deriv2 at
/// `n` in the thousands).
pub struct EntryOperator {
    rows: usize,
    cols: usize,
    entry: Box<dyn Fn(usize, usize) -> f64 + Send + Sync>,
}

impl EntryOperator {
    pub fn new(rows: usize, cols: usize, entry: impl Fn(usize, usize) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            rows,
            cols,
            entry: Box::new(entry),
        }
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        (self.entry)(i, j)
    }
}

impl fmt::Debug for EntryOperator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "EntryOperator({}x{})", self.rows, self.cols)
    }
}

impl LinearOperator for EntryOperator {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "apply: dimension mismatch");
        parallel_map(self.rows, |i| {
            x.iter().enumerate().map(|(j, &xj)| (self.entry)(i, j) * xj).sum()
        })
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        assert_eq!(y.len(), self.rows, "apply_transpose: dimension mismatch");
        Ok(parallel_map(self.cols, |j| {
            y.iter().enumerate().map(|(i, &yi)| (self.entry)(i, j) * yi).sum()
        }))
    }

    fn has_transpose(&self) -> bool {
        true
    }
}

/// Evaluates `f(0..len)` on scoped threads in contiguous chunks. Each output
/// entry is computed by one thread, so results do not depend on the thread count.
fn parallel_map(len: usize, f: impl Fn(usize) -> f64 + Sync) -> Vec<f64> {
    let threads = std::thread::available_parallelism().map_or(1, |t| t.get());
    if len < 256 || threads == 1 {
        return (0..len).map(f).collect();
    }
    let chunk = len.div_ceil(threads);
    let mut out = vec![0.0; len];
    std::thread::scope(|scope| {
        for (c, slot) in out.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (off, v) in slot.iter_mut().enumerate() {
                    *v = f(c * chunk + off);
                }
            });
        }
    });
    out
}

/// Operator given only by a forward closure; no transpose.
pub struct FnOperator {
    rows: usize,
    cols: usize,
    f: Box<dyn Fn(&[f64]) -> Vec<f64> + Send + Sync>,
}

impl FnOperator {
    pub fn new(rows: usize, cols: usize, f: impl Fn(&[f64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        Self {
            rows,
            cols,
            f: Box::new(f),
        }
    }
}

impl LinearOperator for FnOperator {
    fn nrows(&self) -> usize {
        self.rows
    }

    fn ncols(&self) -> usize {
        self.cols
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols, "apply: dimension mismatch");
        (self.f)(x)
    }
}

/// Boundary handling for the 2-D blur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    /// Pure Toeplitz: pixels outside the image are zero.
    #[default]
    Zero,
    /// Half-sample symmetric extension of the image.
    Reflexive,
}

impl std::str::FromStr for Boundary {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" => Ok(Boundary::Zero),
            "reflexive" => Ok(Boundary::Reflexive),
            other => Err(invalid("boundary", format!("unknown boundary `{other}`"))),
        }
    }
}

/// Gaussian weight `exp(−d²/(2ς²)) / (ς√(2π))`.
pub fn gaussian_weight(offset: f64, sigma: f64) -> f64 {
    (-(offset * offset) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

/// One-dimensional Gaussian blur matrix on `n` samples.
pub fn gaussian_toeplitz(n: usize, sigma: f64, boundary: Boundary) -> DenseMatrix {
    match boundary {
        Boundary::Zero => DenseMatrix::from_fn(n, n, |i, j| gaussian_weight(i as f64 - j as f64, sigma)),
        Boundary::Reflexive => {
            // every row sums the same set of offsets, folded back into range
            let reach = (n as isize - 1).max((10.0 * sigma).ceil() as isize);
            let period = 2 * n as isize;
            let mut t = DenseMatrix::zeros(n, n);
            for i in 0..n {
                for d in -reach..=reach {
                    let mut idx = (i as isize + d).rem_euclid(period);
                    if idx >= n as isize {
                        idx = period - 1 - idx;
                    }
                    t[(i, idx as usize)] += gaussian_weight(d as f64, sigma);
                }
            }
            t
        }
    }
}

/// Separable Gaussian blur `T ⊗ T` on `side × side` images.
#[derive(Debug, Clone)]
pub struct GaussianBlur2d {
    side: usize,
    sigma: f64,
    boundary: Boundary,
    kernel: DenseMatrix,
}

pub fn gaussian_blur_2d(side: usize, sigma: f64, boundary: Boundary) -> Result<GaussianBlur2d> {
    if side < 2 {
        return Err(invalid("side", "must be at least 2"));
    }
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(invalid("sigma", "must be positive and finite"));
    }
    Ok(GaussianBlur2d {
        side,
        sigma,
        boundary,
        kernel: gaussian_toeplitz(side, sigma, boundary),
    })
}

impl GaussianBlur2d {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    /// The 1-D factor `T`.
    pub fn kernel(&self) -> &DenseMatrix {
        &self.kernel
    }

    /// `vec(L X Rᵀ)` for `x = vec(X)`.
    fn two_pass(&self, left: &DenseMatrix, right: &DenseMatrix, x: &[f64]) -> Vec<f64> {
        let s = self.side;
        assert_eq!(x.len(), s * s, "blur: dimension mismatch");
        // columns first
        let mut z = vec![0.0; s * s];
        for c in 0..s {
            let col = left.matvec(&x[c * s..(c + 1) * s]);
            z[c * s..(c + 1) * s].copy_from_slice(&col);
        }
        // then rows
        let mut out = vec![0.0; s * s];
        let mut row = vec![0.0; s];
        for r in 0..s {
            for c in 0..s {
                row[c] = z[r + c * s];
            }
            let blurred = right.matvec(&row);
            for c in 0..s {
                out[r + c * s] = blurred[c];
            }
        }
        out
    }
}

impl LinearOperator for GaussianBlur2d {
    fn nrows(&self) -> usize {
        self.side * self.side
    }

    fn ncols(&self) -> usize {
        self.side * self.side
    }

    fn apply(&self, x: &[f64]) -> Vec<f64> {
        self.two_pass(&self.kernel, &self.kernel, x)
    }

    fn apply_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        let t = self.kernel.transpose();
        Ok(self.two_pass(&t, &t, y))
    }

    fn has_transpose(&self) -> bool {
        true
    }
}

/// Materializes any operator column by column.
pub fn to_dense(op: &dyn LinearOperator) -> DenseMatrix {
    if let Some(m) = op.as_dense() {
        return m.clone();
    }
    let n = op.ncols();
    let mut m = DenseMatrix::zeros(op.nrows(), n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = op.apply(&e);
        m.col_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    m
}

/// `|⟨A x, y⟩ − ⟨x, Aᵀ y⟩| / (‖A x‖‖y‖)` for the given probes.
pub fn adjoint_defect(op: &dyn LinearOperator, x: &[f64], y: &[f64]) -> Result<f64> {
    let ax = op.apply(x);
    let aty = op.apply_transpose(y)?;
    let lhs = vector::dot(&ax, y);
    let rhs = vector::dot(x, &aty);
    let scale = vector::norm2(&ax) * vector::norm2(y) + vector::norm2(x) * vector::norm2(&aty);
    Ok(if scale == 0.0 { 0.0 } else { (lhs - rhs).abs() / scale })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_vec(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()
    }

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        DenseMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
    }

    /// Kronecker product `a ⊗ b` (test oracle).
    fn kron(a: &DenseMatrix, b: &DenseMatrix) -> DenseMatrix {
        DenseMatrix::from_fn(a.rows() * b.rows(), a.cols() * b.cols(), |i, j| {
            a[(i / b.rows(), j / b.cols())] * b[(i % b.rows(), j % b.cols())]
        })
    }

    #[test]
    fn dense_identity_and_diagonal() {
        let id = from_dense(DenseMatrix::identity(3)).unwrap();
        assert_eq!(id.apply(&[1.0, 2.0, 3.0]), vec![1.0, 2.0, 3.0]);
        let d = from_dense(DenseMatrix::from_diag(&[2.0, 3.0])).unwrap();
        assert_eq!(d.apply(&[1.0, 1.0]), vec![2.0, 3.0]);
    }

    #[test]
    fn dense_adjoint_probe() {
        let op = from_dense(random_matrix(5, 5, 1)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..5 {
            let (x, y) = (random_vec(5, &mut rng), random_vec(5, &mut rng));
            assert!(adjoint_defect(&op, &x, &y).unwrap() < 1e-12);
        }
    }

    #[test]
    fn dense_rejects_nan() {
        let mut m = DenseMatrix::identity(2);
        m[(1, 1)] = f64::INFINITY;
        assert!(from_dense(m).is_err());
    }

    #[test]
    fn normal_equations_small_cases() {
        let id: Arc<dyn LinearOperator> = Arc::new(from_dense(DenseMatrix::identity(3)).unwrap());
        let ne = normal_equations(id).unwrap();
        assert_eq!(ne.apply(&[1.0, -1.0, 2.0]), vec![1.0, -1.0, 2.0]);

        let d: Arc<dyn LinearOperator> = Arc::new(from_dense(DenseMatrix::from_diag(&[2.0, 3.0])).unwrap());
        let ne = normal_equations(d).unwrap();
        assert_eq!(to_dense(&ne), DenseMatrix::from_diag(&[4.0, 9.0]));
    }

    #[test]
    fn normal_equations_match_explicit_product() {
        let a = random_matrix(6, 4, 3);
        let ata = a.transpose().matmul(&a).unwrap();
        let ne = normal_equations(Arc::new(from_dense(a).unwrap())).unwrap();
        assert_eq!(ne.nrows(), 4);
        let diff = to_dense(&ne).sub(&ata).unwrap().frobenius_norm();
        assert!(diff < 1e-12 * ata.frobenius_norm());
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..5 {
            let x = random_vec(4, &mut rng);
            let y = random_vec(4, &mut rng);
            assert!(adjoint_defect(&ne, &x, &y).unwrap() < 1e-10);
            assert!(vector::dot(&x, &ne.apply(&x)) >= -1e-12 * vector::dot(&x, &x));
        }
    }

    #[test]
    fn normal_equations_need_transpose() {
        let op: Arc<dyn LinearOperator> = Arc::new(FnOperator::new(2, 2, |x| x.to_vec()));
        assert!(matches!(normal_equations(op), Err(Error::MissingTranspose)));
    }

    #[test]
    fn blur_matches_kronecker_oracle() {
        for boundary in [Boundary::Zero, Boundary::Reflexive] {
            for side in [4, 7, 8] {
                let blur = gaussian_blur_2d(side, 2.0, boundary).unwrap();
                let t = blur.kernel().clone();
                let dense = kron(&t, &t);
                let diff = to_dense(&blur).sub(&dense).unwrap().frobenius_norm();
                assert!(diff < 1e-12, "{boundary:?} side={side}: {diff}");
                let mut rng = ChaCha8Rng::seed_from_u64(side as u64);
                let x = random_vec(side * side, &mut rng);
                let y = random_vec(side * side, &mut rng);
                assert!(adjoint_defect(&blur, &x, &y).unwrap() < 1e-10);
            }
        }
    }

    #[test]
    fn blur_kernel_entries_follow_gaussian_formula() {
        let blur = gaussian_blur_2d(4, 2.0, Boundary::Zero).unwrap();
        let a0 = 1.0 / (2.0 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((blur.kernel()[(0, 0)] - a0).abs() < 1e-15);
        assert!((blur.kernel()[(0, 3)] - a0 * (-9.0f64 / 8.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn narrow_blur_is_scaled_identity() {
        let blur = gaussian_blur_2d(5, 1e-3, Boundary::Zero).unwrap();
        let a = gaussian_weight(0.0, 1e-3);
        let x: Vec<f64> = (0..25).map(|i| i as f64).collect();
        let y = blur.apply(&x);
        for (yi, xi) in y.iter().zip(&x) {
            assert!((yi - a * a * xi).abs() <= 1e-12 * a * a * xi.abs().max(1.0));
        }
    }

    #[test]
    fn reflexive_constant_image() {
        let side = 6;
        let blur = gaussian_blur_2d(side, 1.5, Boundary::Reflexive).unwrap();
        let sums: Vec<f64> = (0..side).map(|i| blur.kernel().row(i).iter().sum()).collect();
        let s = sums[0];
        assert!(sums.iter().all(|v| (v - s).abs() < 1e-14));
        let y = blur.apply(&vec![2.0; side * side]);
        for v in y {
            assert!((v - 2.0 * s * s).abs() < 1e-13);
        }
    }

    #[test]
    fn blur_rejects_bad_parameters() {
        assert!(gaussian_blur_2d(4, 0.0, Boundary::Zero).is_err());
        assert!(gaussian_blur_2d(4, -1.0, Boundary::Zero).is_err());
        assert!(gaussian_blur_2d(1, 1.0, Boundary::Zero).is_err());
    }

    #[test]
    fn entry_operator_transposes() {
        let op = EntryOperator::new(3, 2, |i, j| (i * 2 + j) as f64);
        let dense = to_dense(&op);
        assert_eq!(op.apply(&[1.0, 1.0]), dense.matvec(&[1.0, 1.0]));
        assert_eq!(
            op.apply_transpose(&[1.0, 0.0, 2.0]).unwrap(),
            dense.matvec_transpose(&[1.0, 0.0, 2.0])
        );
    }
}
