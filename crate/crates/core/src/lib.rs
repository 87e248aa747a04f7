//! Inner-product-free Krylov regularization for discrete ill-posed problems.
//!
//! The crate is organized bottom-up:
//!
//! - [`linalg`]: dense matrices, Householder QR, one-sided Jacobi SVD, Givens least squares.
//! - [`operators`]: the [`LinearOperator`](operators::LinearOperator) abstraction, dense and
//!   matrix-free operators, normal equations and a separable 2-D Gaussian blur.
//! - [`krylov`]: the Hessenberg process (with and without pivoting) and the Arnoldi process.
//! - [`solvers`]: CMRH, GMRES and the stationary Landweber / Richardson / Chebyshev iterations.
//! - [`hybrid`]: projected Tikhonov solves, GCV, the optimal parameter, the GCV stopping rule,
//!   hybrid CMRH (H-CMRH) and hybrid GMRES.
//! - [`problems`]: seeded test-problem generators (Spectra, Shaw, Deriv2, Heat, Dorr, 2-D blur).
//! - [`analysis`]: filter factors, projected singular values, residual-bound reports.
//! - [`chop`]: simulated low-precision arithmetic and chopped CMRH / GMRES.
//! - [`cli`]: the experiment runner behind the `hcmrh` binary.
//!
//! ```
//! use hcmrh::problems;
//! use hcmrh::solvers::{cmrh, SolveOptions};
//!
//! let problem = problems::shaw(32).unwrap().with_noise(1e-3, 7).unwrap();
//! let opts = SolveOptions::new(8).with_x_true(problem.x_true.clone());
//! let history = cmrh(problem.operator.as_ref(), &problem.b, &opts).unwrap();
//! assert_eq!(history.len(), 8);
//! ```

pub mod analysis;
pub mod chop;
pub mod cli;
pub mod error;
pub mod hybrid;
pub mod krylov;
pub mod linalg;
pub mod operators;
pub mod problems;
pub mod solvers;

pub use error::{Error, Result};
