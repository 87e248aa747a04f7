use std::str::FromStr;

use super::{chopped_axpy, chopped_div, chopped_dot, chopped_matvec, chopped_norm2, ChopContext, PrecisionFormat};
use crate::error::{invalid, Error, Result};
use crate::krylov::{DecompositionKind, KrylovDecomposition, DEFAULT_BREAKDOWN_TOL};
use crate::linalg::{vector, GivensLeastSquares};
use crate::operators::LinearOperator;
use crate::problems::TestProblem;
use crate::solvers::{residual_norm, IterationHistory, IterationRecord, SolveOptions, StopReason};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChopSolver {
    Cmrh,
    Gmres,
}

impl ChopSolver {
    pub fn name(self) -> &'static str {
        match self {
            ChopSolver::Cmrh => "cmrh",
            ChopSolver::Gmres => "gmres",
        }
    }
}

impl FromStr for ChopSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cmrh" => Ok(ChopSolver::Cmrh),
            "gmres" => Ok(ChopSolver::Gmres),
            _ => Err(invalid(
                "solver",
                format!("`{s}` cannot run in simulated precision (cmrh, gmres)"),
            )),
        }
    }
}

/// Runs CMRH or GMRES with every vector kernel rounded into the context's format.
///
/// The small least-squares problem is solved in double. Arithmetic failures
/// end the run with [`StopReason::NormUnderflow`] or [`StopReason::NormOverflow`];
/// iterates are always stored. Relative errors use `opts.x_true` or, failing
/// that, the problem's own solution.
pub fn run_under_precision(
    solver: ChopSolver,
    problem: &TestProblem,
    ctx: &ChopContext,
    opts: &SolveOptions,
) -> Result<IterationHistory> {
    let op = problem.operator.as_ref();
    let b = &problem.b;
    let x0 = opts.prepare(op, b)?;
    let x_true = opts.x_true.as_ref().unwrap_or(&problem.x_true);
    let r0 = if x0.iter().all(|&v| v == 0.0) {
        ctx.round_vec(b)
    } else {
        chopped_axpy(-1.0, &chopped_matvec(op, &x0, ctx)?, b, ctx)
    };
    let mut run = Run {
        op,
        b,
        ctx,
        x0: ctx.round_vec(&x0),
        x_true,
        history: IterationHistory::new(solver.name(), x0),
    };
    match solver {
        ChopSolver::Cmrh => run.cmrh(r0, opts.max_iters)?,
        ChopSolver::Gmres => run.gmres(r0, opts.max_iters)?,
    }
    Ok(run.history)
}

struct Run<'a> {
    op: &'a dyn LinearOperator,
    b: &'a [f64],
    ctx: &'a ChopContext,
    x0: Vec<f64>,
    x_true: &'a [f64],
    history: IterationHistory,
}

impl Run<'_> {
    fn stop(&mut self, reason: StopReason) {
        self.history.stop_reason = reason;
    }

    /// Solves the projected problem, forms the chopped iterate and records it.
    fn record(&mut self, k: usize, ls: &GivensLeastSquares, basis: &[Vec<f64>]) -> bool {
        let Ok(y) = ls.solve() else {
            return false;
        };
        let mut x = self.x0.clone();
        for (yj, bj) in y.iter().zip(basis) {
            x = chopped_axpy(*yj, bj, &x, self.ctx);
        }
        let mut rec = IterationRecord::new(k, residual_norm(self.op, self.b, &x));
        rec.quasi_residual_norm = Some(ls.residual());
        rec.relative_error = Some(vector::relative_error(&x, self.x_true));
        rec.coefficients = Some(y);
        rec.x = Some(x);
        self.history.records.push(rec);
        true
    }

    fn cmrh(&mut self, r0: Vec<f64>, max_iters: usize) -> Result<()> {
        let n = r0.len();
        let mut pivot: Vec<usize> = (0..n).collect();
        let i0 = vector::argmax_abs(&r0, 0..n).ok_or(Error::DimensionMismatch {
            context: "right-hand side",
            expected: 1,
            found: 0,
        })?;
        let beta = r0[i0];
        if !beta.is_finite() {
            self.stop(StopReason::NormOverflow);
            return Ok(());
        }
        if beta == 0.0 {
            self.stop(StopReason::Breakdown);
            return Ok(());
        }
        pivot.swap(0, i0);
        let mut basis = vec![chopped_div(&r0, beta, self.ctx)];
        let mut ls = GivensLeastSquares::new(beta);
        for k in 1..=max_iters {
            let mut u = chopped_matvec(self.op, &basis[k - 1], self.ctx)?;
            let scale = vector::norm_inf(&u);
            let mut col = Vec::with_capacity(k + 1);
            for (j, lj) in basis.iter().enumerate() {
                let h = u[pivot[j]];
                col.push(h);
                u = chopped_axpy(-h, lj, &u, self.ctx);
                u[pivot[j]] = 0.0;
            }
            let next = (k < n).then(|| {
                let mut best = k;
                for pos in k + 1..n {
                    if u[pivot[pos]].abs() > u[pivot[best]].abs() {
                        best = pos;
                    }
                }
                best
            });
            let h_next = next.map_or(0.0, |pos| u[pivot[pos]]);
            if !h_next.is_finite() || col.iter().any(|h| !h.is_finite()) {
                self.stop(StopReason::NormOverflow);
                return Ok(());
            }
            let breakdown = h_next == 0.0 || h_next.abs() <= DEFAULT_BREAKDOWN_TOL * scale;
            col.push(if breakdown { 0.0 } else { h_next });
            ls.push_column(&col);
            if !self.record(k, &ls, &basis) || breakdown {
                self.stop(StopReason::Breakdown);
                return Ok(());
            }
            let pos = next.expect("no breakdown");
            pivot.swap(k, pos);
            basis.push(chopped_div(&u, h_next, self.ctx));
        }
        Ok(())
    }

    fn gmres(&mut self, r0: Vec<f64>, max_iters: usize) -> Result<()> {
        let n = r0.len();
        let beta = chopped_norm2(&r0, self.ctx);
        if !beta.is_finite() {
            self.stop(StopReason::NormOverflow);
            return Ok(());
        }
        if beta == 0.0 {
            let reason = if r0.iter().all(|&v| v == 0.0) {
                StopReason::Breakdown
            } else {
                StopReason::NormUnderflow
            };
            self.stop(reason);
            return Ok(());
        }
        let mut basis = vec![chopped_div(&r0, beta, self.ctx)];
        let mut ls = GivensLeastSquares::new(beta);
        for k in 1..=max_iters {
            let mut w = chopped_matvec(self.op, &basis[k - 1], self.ctx)?;
            let scale = chopped_norm2(&w, self.ctx);
            let mut col = Vec::with_capacity(k + 1);
            for vj in &basis {
                let h = chopped_dot(vj, &w, self.ctx);
                col.push(h);
                w = chopped_axpy(-h, vj, &w, self.ctx);
            }
            let h_next = chopped_norm2(&w, self.ctx);
            if !h_next.is_finite() || !scale.is_finite() || col.iter().any(|h| !h.is_finite()) {
                self.stop(StopReason::NormOverflow);
                return Ok(());
            }
            let stop = if h_next == 0.0 && w.iter().any(|&v| v != 0.0) {
                Some(StopReason::NormUnderflow)
            } else if k >= n || h_next == 0.0 || h_next <= DEFAULT_BREAKDOWN_TOL * scale {
                Some(StopReason::Breakdown)
            } else {
                None
            };
            col.push(if stop.is_some() { 0.0 } else { h_next });
            ls.push_column(&col);
            if !self.record(k, &ls, &basis) {
                self.stop(StopReason::Breakdown);
                return Ok(());
            }
            if let Some(reason) = stop {
                self.stop(reason);
                return Ok(());
            }
            basis.push(chopped_div(&w, h_next, self.ctx));
        }
        Ok(())
    }
}

/// Diagonal magnitudes `|H^A_kk|` of a double-precision Arnoldi run from `b`,
/// next to a unit roundoff they are compared against.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalReport {
    pub threshold: f64,
    /// `|H^A_kk|` for `k = 1, 2, …`.
    pub diagonals: Vec<f64>,
}

impl DiagonalReport {
    /// First one-based `k` with `|H^A_kk| < threshold`.
    pub fn first_below(&self) -> Option<usize> {
        self.diagonals.iter().position(|&d| d < self.threshold).map(|i| i + 1)
    }
}

/// Up to `k_max` Arnoldi diagonals against the half-precision unit roundoff `2⁻¹¹`.
pub fn arnoldi_diagonal_report(problem: &TestProblem, k_max: usize) -> Result<DiagonalReport> {
    let d = KrylovDecomposition::build(DecompositionKind::Arnoldi, problem.operator.as_ref(), &problem.b, k_max)?;
    Ok(DiagonalReport {
        threshold: PrecisionFormat::HALF.unit_roundoff(),
        diagonals: (0..d.steps()).map(|j| d.hess_column(j)[j].abs()).collect(),
    })
}
