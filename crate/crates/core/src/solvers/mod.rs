//! Non-hybrid iterative solvers and the iteration history they share with the
//! hybrid methods.

mod history;
mod krylov_solvers;
mod stationary;

pub use history::{IterationHistory, IterationRecord, StopReason};
pub use krylov_solvers::{cmrh, gmres, krylov_solve};
pub use stationary::{
    chebyshev_semi_iteration, landweber, landweber_step, richardson, richardson_step, ChebyshevInterval, SpectralBounds,
};

use crate::error::{check_len, invalid, Result};
use crate::linalg::vector;
use crate::operators::LinearOperator;

/// Options common to every solver.
#[derive(Debug, Clone)]
pub struct SolveOptions {
    pub max_iters: usize,
    /// Initial guess; zero when absent.
    pub x0: Option<Vec<f64>>,
    /// Reference solution for relative-error curves.
    pub x_true: Option<Vec<f64>>,
    /// Store every iterate `x_k`. When false, Krylov solvers keep only the
    /// coefficients `y_k` and the decomposition, and rebuild `x_k` on demand.
    pub store_solutions: bool,
}

impl SolveOptions {
    pub fn new(max_iters: usize) -> Self {
        Self {
            max_iters,
            x0: None,
            x_true: None,
            store_solutions: true,
        }
    }

    pub fn with_x0(mut self, x0: Vec<f64>) -> Self {
        self.x0 = Some(x0);
        self
    }

    pub fn with_x_true(mut self, x_true: Vec<f64>) -> Self {
        self.x_true = Some(x_true);
        self
    }

    /// Memory-lean mode: iterates are not materialized.
    pub fn lean(mut self) -> Self {
        self.store_solutions = false;
        self
    }

    /// Validates the options against an operator and right-hand side, returning `x₀`.
    pub(crate) fn prepare(&self, op: &dyn LinearOperator, b: &[f64]) -> Result<Vec<f64>> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters", "must be at least 1"));
        }
        if !op.is_square() {
            return Err(invalid("operator", "must be square"));
        }
        check_len("right-hand side", op.nrows(), b.len())?;
        if b.iter().any(|v| !v.is_finite()) {
            return Err(crate::Error::NonFinite("b"));
        }
        if let Some(xt) = &self.x_true {
            check_len("x_true", op.ncols(), xt.len())?;
        }
        match &self.x0 {
            Some(x0) => {
                check_len("x0", op.ncols(), x0.len())?;
                Ok(x0.clone())
            }
            None => Ok(vec![0.0; op.ncols()]),
        }
    }

    pub(crate) fn relative_error(&self, x: &[f64]) -> Option<f64> {
        self.x_true.as_ref().map(|xt| vector::relative_error(x, xt))
    }
}

/// `‖b − A x‖`.
pub fn residual_norm(op: &dyn LinearOperator, b: &[f64], x: &[f64]) -> f64 {
    vector::norm2(&vector::sub(b, &op.apply(x)))
}
