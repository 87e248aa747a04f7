//! Seeded test-problem generators and noise injection.
//!
//! Every generator recomputes `b_exact = A x_true`, so the problem invariants
//! hold to rounding even where a continuous right-hand side exists.

mod regtools;
mod spec;
mod synthetic;

pub use regtools::{deriv2, deriv2_continuous_rhs, heat, heat_solution, shaw};
pub use spec::ProblemSpec;
pub use synthetic::{deblur_2d, dorr, dorr_diagonals, modified_spectra, phantom, spectra, spectrum_signal};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{invalid, Error, Result};
use crate::linalg::{jacobi_svd, vector, DenseMatrix};
use crate::operators::{from_dense, to_dense, EntryOperator, LinearOperator};

/// Problems up to this size are stored densely; larger ones use an entry function.
pub const DENSE_LIMIT: usize = 2048;

pub const PROBLEM_NAMES: [&str; 7] = [
    "spectra",
    "modified_spectra",
    "shaw",
    "deriv2",
    "heat",
    "dorr",
    "deblur_2d",
];

/// One-line descriptions, in the order of [`PROBLEM_NAMES`].
pub const PROBLEM_DESCRIPTIONS: [&str; 7] = [
    "Gaussian Toeplitz blur of a synthetic x-ray spectrum (params: n, sigma)",
    "Spectra singular vectors with singular values exp(c k) (params: n, c)",
    "1-D image restoration, Fredholm first kind (params: n even)",
    "second derivative, Green's function kernel (params: n)",
    "inverse heat equation, Volterra kernel (params: n, kappa)",
    "tridiagonal Dorr matrix paired with the heat solution (params: n, theta)",
    "separable 2-D Gaussian blur of a geometric phantom (params: side, sigma, boundary)",
];

/// A linear inverse problem `b = A x_true + e`.
#[derive(Debug, Clone)]
pub struct TestProblem {
    pub name: String,
    pub operator: Arc<dyn LinearOperator>,
    pub x_true: Vec<f64>,
    pub b_exact: Vec<f64>,
    pub b: Vec<f64>,
    pub e: Vec<f64>,
    pub noise_level: f64,
    pub seed: u64,
    /// Singular values known by construction (modified Spectra), nonincreasing.
    pub singular_values: Option<Vec<f64>>,
}

impl TestProblem {
    /// Noise-free problem with `b = b_exact = A x_true`.
    pub fn new(name: impl Into<String>, operator: Arc<dyn LinearOperator>, x_true: Vec<f64>) -> Result<Self> {
        crate::error::check_len("x_true", operator.ncols(), x_true.len())?;
        let b_exact = operator.apply(&x_true);
        Ok(Self {
            name: name.into(),
            operator,
            e: vec![0.0; b_exact.len()],
            b: b_exact.clone(),
            b_exact,
            x_true,
            noise_level: 0.0,
            seed: 0,
            singular_values: None,
        })
    }

    /// Replaces the noise with `nl·‖b_exact‖·g/‖g‖`, `g` Gaussian from `seed`.
    pub fn with_noise(mut self, nl: f64, seed: u64) -> Result<Self> {
        let (b, e) = add_noise(&self.b_exact, nl, seed)?;
        self.b = b;
        self.e = e;
        self.noise_level = nl;
        self.seed = seed;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.x_true.len()
    }

    /// Dense copy of the operator, refused above [`DENSE_LIMIT`].
    pub fn dense_matrix(&self) -> Result<DenseMatrix> {
        let n = self.operator.nrows().max(self.operator.ncols());
        if n > DENSE_LIMIT {
            return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
        }
        Ok(to_dense(self.operator.as_ref()))
    }

    /// Singular values of `A`: the known ones if available, otherwise from a dense SVD.
    pub fn compute_singular_values(&self) -> Result<Vec<f64>> {
        if let Some(s) = &self.singular_values {
            return Ok(s.clone());
        }
        Ok(jacobi_svd(&self.dense_matrix()?)?.singular_values)
    }
}

/// `(b, e)` with `e = nl·‖b_exact‖·g/‖g‖`, so that `‖e‖/‖b_exact‖ = nl`.
pub fn add_noise(b_exact: &[f64], nl: f64, seed: u64) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(nl >= 0.0 && nl.is_finite()) {
        return Err(invalid("nl", format!("noise level must be finite and >= 0, got {nl}")));
    }
    if nl == 0.0 {
        return Ok((b_exact.to_vec(), vec![0.0; b_exact.len()]));
    }
    let bn = vector::norm2(b_exact);
    if bn == 0.0 {
        return Err(invalid(
            "b_exact",
            "cannot scale noise relative to a zero right-hand side",
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g: Vec<f64> = (0..b_exact.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let e = vector::scale(nl * bn / vector::norm2(&g), &g);
    Ok((vector::add(b_exact, &e), e))
}

/// Dense operator for small `n`, entry function beyond [`DENSE_LIMIT`].
pub(crate) fn kernel_operator(
    n: usize,
    entry: impl Fn(usize, usize) -> f64 + Send + Sync + 'static,
) -> Arc<dyn LinearOperator> {
    if n <= DENSE_LIMIT {
        let m = DenseMatrix::from_fn(n, n, &entry);
        Arc::new(from_dense(m).expect("kernel entries are finite"))
    } else {
        Arc::new(EntryOperator::new(n, n, entry))
    }
}

pub(crate) fn check_min_size(name: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(invalid(name, format!("must be at least {min}, got {n}")))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_noise_is_exact() {
        let b = vec![1.0, 2.0, 3.0];
        let (bn, e) = add_noise(&b, 0.0, 1).unwrap();
        assert_eq!(bn, b);
        assert!(e.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn noise_level_is_exact() {
        let b: Vec<f64> = (0..100).map(|i| (i as f64).sin()).collect();
        let (_, e) = add_noise(&b, 0.01, 42).unwrap();
        let ratio = vector::norm2(&e) / vector::norm2(&b);
        assert!((ratio - 0.01).abs() <= 1e-12 * 0.01);
    }

    #[test]
    fn noise_is_deterministic() {
        let b = vec![1.0; 50];
        let (_, e1) = add_noise(&b, 0.1, 7).unwrap();
        let (_, e2) = add_noise(&b, 0.1, 7).unwrap();
        let (_, e3) = add_noise(&b, 0.1, 8).unwrap();
        assert_eq!(e1, e2);
        assert_ne!(e1, e3);
    }

    #[test]
    fn noise_rejects_bad_input() {
        assert!(add_noise(&[0.0, 0.0], 0.1, 1).is_err());
        assert!(add_noise(&[1.0], -0.1, 1).is_err());
        assert!(add_noise(&[1.0], f64::NAN, 1).is_err());
    }

    #[test]
    fn dense_limit_enforced() {
        let p = TestProblem::new(
            "big",
            kernel_operator(3000, |i, j| if i == j { 1.0 } else { 0.0 }),
            vec![1.0; 3000],
        )
        .unwrap();
        assert!(matches!(p.dense_matrix(), Err(Error::TooLarge { .. })));
    }
}
