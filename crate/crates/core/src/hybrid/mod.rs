//! Hybrid projection methods: Tikhonov regularization of the projected problem
//! with a per-iteration parameter, on the pivoted Hessenberg basis (H-CMRH) or
//! the Arnoldi basis (hybrid GMRES).

mod stopping;
mod tikhonov;

pub use stopping::{StopRule, StoppingState, DEFAULT_STOP_TOL, DEFAULT_STOP_WINDOW};
pub use tikhonov::{
    gcv_minimize, gcv_stop_value, gcv_value, lambda_grid, minimize_over_lambda, optimal_lambda,
    projected_tikhonov_solve, ProjectedTikhonovContext, GRID_POINTS, REFINE_WIDTH,
};

use crate::error::{invalid, Result};
use crate::krylov::{DecompositionKind, KrylovDecomposition};
use crate::linalg::{condition_number_2, vector};
use crate::operators::LinearOperator;
use crate::solvers::{residual_norm, IterationHistory, IterationRecord, SolveOptions, StopReason};

/// How `λ_k` is chosen at each iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamRule {
    /// Minimizer of the projected GCV function.
    Gcv,
    /// Minimizer of the true error; needs `x_true`.
    Optimal,
    /// The same λ at every iteration.
    Fixed(f64),
}

impl ParamRule {
    pub fn name(&self) -> &'static str {
        match self {
            ParamRule::Gcv => "gcv",
            ParamRule::Optimal => "optimal",
            ParamRule::Fixed(_) => "fixed",
        }
    }
}

/// Solver options plus the parameters of the `Ĝ(k)` stopping rule.
#[derive(Debug, Clone)]
pub struct HybridOptions {
    pub solve: SolveOptions,
    pub tol: f64,
    pub window: usize,
    /// Apply the `Ĝ(k)` stopping rule; `Ĝ` is recorded either way.
    pub gcv_stopping: bool,
}

impl HybridOptions {
    pub fn new(solve: SolveOptions) -> Self {
        Self {
            solve,
            tol: DEFAULT_STOP_TOL,
            window: DEFAULT_STOP_WINDOW,
            gcv_stopping: true,
        }
    }

    pub fn without_stopping(mut self) -> Self {
        self.gcv_stopping = false;
        self
    }

    pub fn with_stopping(mut self, tol: f64, window: usize) -> Self {
        self.tol = tol;
        self.window = window;
        self.gcv_stopping = true;
        self
    }
}

/// H-CMRH: pivoted Hessenberg basis, `β` the largest-magnitude entry of `r₀`.
pub fn hcmrh(op: &dyn LinearOperator, b: &[f64], opts: &HybridOptions, rule: ParamRule) -> Result<IterationHistory> {
    hybrid_solve(DecompositionKind::HessenbergPivoted, op, b, opts, rule)
}

/// Hybrid GMRES: the same scheme on the Arnoldi basis with `β = ‖r₀‖`.
pub fn hybrid_gmres(
    op: &dyn LinearOperator,
    b: &[f64],
    opts: &HybridOptions,
    rule: ParamRule,
) -> Result<IterationHistory> {
    hybrid_solve(DecompositionKind::Arnoldi, op, b, opts, rule)
}

pub fn hybrid_solve(
    kind: DecompositionKind,
    op: &dyn LinearOperator,
    b: &[f64],
    opts: &HybridOptions,
    rule: ParamRule,
) -> Result<IterationHistory> {
    let x0 = opts.solve.prepare(op, b)?;
    let x_true = match rule {
        ParamRule::Optimal => Some(
            opts.solve
                .x_true
                .as_deref()
                .ok_or_else(|| invalid("x_true", "the optimal parameter rule needs the exact solution"))?,
        ),
        ParamRule::Fixed(l) if !(l >= 0.0 && l.is_finite()) => {
            return Err(invalid("lambda", format!("must be finite and >= 0, got {l}")));
        }
        _ => None,
    };
    let mut stopping = StoppingState::new(opts.tol, opts.window)?;
    let method = match kind {
        DecompositionKind::Arnoldi => "hybrid_gmres",
        _ => "hcmrh",
    };
    let mut history = IterationHistory::new(method, x0.clone());
    let n = op.ncols();
    let r0 = vector::sub(b, &op.apply(&x0));
    if r0.iter().all(|&v| v == 0.0) {
        history.stop_reason = StopReason::Breakdown;
        return Ok(history);
    }
    let mut decomp = KrylovDecomposition::start(kind, &r0)?;
    if decomp.breakdown() {
        history.stop_reason = StopReason::Breakdown;
        return Ok(history);
    }
    let beta = decomp.beta();
    for k in 1..=opts.solve.max_iters {
        decomp.extend(op)?;
        let h = decomp.hess_matrix();
        let ctx = ProjectedTikhonovContext::new(&h, beta)?;
        let lambda = match rule {
            ParamRule::Gcv => gcv_minimize(&ctx),
            ParamRule::Optimal => optimal_lambda(&ctx, &decomp.basis_matrix(k), x_true.expect("checked above"), &x0)?,
            ParamRule::Fixed(l) => l,
        };
        let y = projected_tikhonov_solve(&ctx, lambda)?;
        let x = decomp.combine(&x0, &y);

        let mut quasi = h.matvec(&y);
        quasi[0] -= beta;
        let mut rec = IterationRecord::new(k, residual_norm(op, b, &x));
        rec.quasi_residual_norm = Some(vector::norm2(&quasi));
        rec.relative_error = opts.solve.relative_error(&x);
        rec.lambda = Some(lambda);
        rec.ghat = if k < n {
            Some(gcv_stop_value(&ctx, lambda, n)?)
        } else {
            None
        };
        rec.coefficients = Some(y);
        if opts.solve.store_solutions {
            rec.x = Some(x);
        }
        let ghat = rec.ghat;
        history.records.push(rec);

        if let Some(g) = ghat {
            stopping.push(g);
            if opts.gcv_stopping {
                if let Some(fired) = stopping.should_stop() {
                    history.stop_reason = fired.into();
                    history.selected = Some(stopping.selected(fired));
                    break;
                }
            }
        }
        if decomp.breakdown() {
            history.stop_reason = StopReason::Breakdown;
            break;
        }
    }
    history.decomposition = Some(decomp);
    Ok(history)
}

/// Hybrid residual norms of both methods at a shared fixed λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HybridBoundRow {
    pub k: usize,
    /// `‖hr_k^G‖` with `hr(x) = [b − Ax; −λx]`.
    pub gmres: f64,
    /// `‖hr_k^C‖`.
    pub cmrh: f64,
    /// `κ₂(blockdiag(L_{k+1}, L_k))`.
    pub kappa_lbar: f64,
}

impl HybridBoundRow {
    /// Whether `‖hr^G‖ ≤ ‖hr^C‖ ≤ κ ‖hr^G‖` holds with relative slack `slack`.
    pub fn holds(&self, slack: f64) -> bool {
        self.gmres <= self.cmrh * (1.0 + slack) && self.cmrh <= self.kappa_lbar * self.gmres * (1.0 + slack)
    }
}

/// Evaluates `‖hr^G_k‖ ≤ ‖hr^C_k‖ ≤ κ(L̄_{k+1}) ‖hr^G_k‖` for `k = 1..=k_max`
/// from `x₀ = 0`, stopping before the first breakdown of either process.
pub fn hybrid_residual_bound_check(
    op: &dyn LinearOperator,
    b: &[f64],
    lambda: f64,
    k_max: usize,
) -> Result<Vec<HybridBoundRow>> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    SolveOptions::new(k_max.max(1)).prepare(op, b)?;
    let hd = KrylovDecomposition::build(DecompositionKind::HessenbergPivoted, op, b, k_max)?;
    let ad = KrylovDecomposition::build(DecompositionKind::Arnoldi, op, b, k_max)?;
    let hybrid_residual = |d: &KrylovDecomposition, k: usize| -> Result<f64> {
        let ctx = ProjectedTikhonovContext::new(&d.hess_matrix_at(k), d.beta())?;
        let y = projected_tikhonov_solve(&ctx, lambda)?;
        let x = d.combine(&vec![0.0; b.len()], &y);
        let r = residual_norm(op, b, &x);
        let p = lambda * vector::norm2(&x);
        Ok(r.hypot(p))
    };
    let mut rows = Vec::new();
    for k in 1..=k_max {
        if hd.basis_len() < k + 1 || ad.basis_len() < k + 1 || hd.steps() < k || ad.steps() < k {
            break;
        }
        let lbar = hd.basis_matrix(k + 1).block_diag(&hd.basis_matrix(k));
        rows.push(HybridBoundRow {
            k,
            gmres: hybrid_residual(&ad, k)?,
            cmrh: hybrid_residual(&hd, k)?,
            kappa_lbar: condition_number_2(&lbar)?,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::operators::from_dense;
    use crate::solvers::cmrh;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(n: usize, seed: u64) -> (DenseMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        for i in 0..n {
            a[(i, i)] += 4.0;
        }
        let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (a, b)
    }

    #[test]
    fn zero_lambda_reproduces_cmrh() {
        let (a, b) = random_system(10, 1);
        let op = from_dense(a).unwrap();
        let opts = HybridOptions::new(SolveOptions::new(8)).without_stopping();
        let hy = hcmrh(&op, &b, &opts, ParamRule::Fixed(0.0)).unwrap();
        let plain = cmrh(&op, &b, &SolveOptions::new(8)).unwrap();
        assert_eq!(hy.len(), plain.len());
        for (r1, r2) in hy.records.iter().zip(&plain.records) {
            let (x1, x2) = (r1.x.as_ref().unwrap(), r2.x.as_ref().unwrap());
            assert!(vector::norm2(&vector::sub(x1, x2)) <= 1e-12 * vector::norm2(x2));
        }
    }

    #[test]
    fn zero_lambda_reproduces_gmres() {
        let (a, b) = random_system(10, 2);
        let op = from_dense(a).unwrap();
        let opts = HybridOptions::new(SolveOptions::new(8)).without_stopping();
        let hy = hybrid_gmres(&op, &b, &opts, ParamRule::Fixed(0.0)).unwrap();
        let plain = crate::solvers::gmres(&op, &b, &SolveOptions::new(8)).unwrap();
        for (r1, r2) in hy.records.iter().zip(&plain.records) {
            assert!((r1.residual_norm - r2.residual_norm).abs() <= 1e-12 * vector::norm2(&b));
        }
    }

    #[test]
    fn identity_with_exact_data() {
        let op = from_dense(DenseMatrix::identity(5)).unwrap();
        let b = vec![1.0, 2.0, -1.0, 0.5, 3.0];
        let h = hcmrh(&op, &b, &HybridOptions::new(SolveOptions::new(3)), ParamRule::Gcv).unwrap();
        assert_eq!(h.len(), 1);
        let x = h.records[0].x.as_ref().unwrap();
        assert!(vector::relative_error(x, &b) < 1e-12);
        assert_eq!(h.records[0].lambda, Some(0.0));
    }

    #[test]
    fn optimal_rule_requires_reference() {
        let (a, b) = random_system(4, 3);
        let op = from_dense(a).unwrap();
        let opts = HybridOptions::new(SolveOptions::new(2));
        assert!(hcmrh(&op, &b, &opts, ParamRule::Optimal).is_err());
        assert!(hcmrh(&op, &b, &opts, ParamRule::Fixed(-1.0)).is_err());
    }

    #[test]
    fn records_lambda_and_ghat() {
        let (a, b) = random_system(12, 4);
        let op = from_dense(a).unwrap();
        let opts = HybridOptions::new(SolveOptions::new(6)).without_stopping();
        let h = hcmrh(&op, &b, &opts, ParamRule::Gcv).unwrap();
        assert_eq!(h.len(), 6);
        assert!(h.records.iter().all(|r| r.lambda.is_some() && r.ghat.is_some()));
    }

    #[test]
    fn bound_rows_full_space_zero_lambda() {
        let (a, b) = random_system(6, 5);
        let op = from_dense(a).unwrap();
        let rows = hybrid_residual_bound_check(&op, &b, 0.0, 5).unwrap();
        assert_eq!(rows.len(), 5);
        for r in &rows {
            assert!(r.kappa_lbar >= 1.0);
            assert!(r.holds(1e-8), "{r:?}");
        }
    }
}
