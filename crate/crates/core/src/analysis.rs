//! Spectral diagnostics and history post-processing.

use crate::error::{check_len, Error, Result};
use crate::krylov::{DecompositionKind, KrylovDecomposition};
use crate::linalg::{condition_number_2, jacobi_svd, vector, Svd};
use crate::problems::{TestProblem, DENSE_LIMIT};
use crate::solvers::{cmrh, gmres, IterationHistory, SolveOptions};

/// Denominators `|u_iᵀb|` at or below this multiple of `‖b‖` are masked.
pub const FILTER_MASK_RTOL: f64 = 1e-14;

/// Empirical filter factors `Φ_i = σ_i (v_iᵀx_k)/(u_iᵀb)`.
#[derive(Debug, Clone)]
pub struct FilterFactorTable {
    /// Iteration the factors belong to (0 when not tied to a history).
    pub iteration: usize,
    /// NaN at masked indices.
    pub factors: Vec<f64>,
    /// True where `|u_iᵀb| ≤ 1e-14‖b‖`.
    pub masked: Vec<bool>,
}

impl FilterFactorTable {
    /// Unmasked `(index, factor)` pairs.
    pub fn unmasked(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.factors
            .iter()
            .zip(&self.masked)
            .enumerate()
            .filter(|(_, (_, &m))| !m)
            .map(|(i, (&f, _))| (i, f))
    }
}

/// Filter factors of `x` with respect to the SVD of the full matrix.
pub fn filter_factors(x: &[f64], svd: &Svd, b: &[f64]) -> Result<FilterFactorTable> {
    check_len("x", svd.v.rows(), x.len())?;
    check_len("b", svd.u.rows(), b.len())?;
    let threshold = FILTER_MASK_RTOL * vector::norm2(b);
    let mut factors = Vec::with_capacity(svd.singular_values.len());
    let mut masked = Vec::with_capacity(svd.singular_values.len());
    for (i, &s) in svd.singular_values.iter().enumerate() {
        let ub = vector::dot(svd.u.col(i), b);
        if ub.abs() <= threshold {
            factors.push(f64::NAN);
            masked.push(true);
        } else {
            factors.push(s * vector::dot(svd.v.col(i), x) / ub);
            masked.push(false);
        }
    }
    Ok(FilterFactorTable {
        iteration: 0,
        factors,
        masked,
    })
}

/// Filter factors of every iterate in a history.
pub fn filter_factor_series(history: &IterationHistory, svd: &Svd, b: &[f64]) -> Result<Vec<FilterFactorTable>> {
    (0..history.len())
        .map(|i| {
            let x = history.solution(i).ok_or(Error::InvalidParameter {
                name: "history",
                reason: "iterates are not available".into(),
            })?;
            let mut t = filter_factors(&x, svd, b)?;
            t.iteration = history.records[i].iter;
            Ok(t)
        })
        .collect()
}

/// Singular values of `H_{k+1,k}`, nonincreasing.
pub fn projected_singular_values(decomp: &KrylovDecomposition) -> Result<Vec<f64>> {
    Ok(jacobi_svd(&decomp.hess_matrix())?.singular_values)
}

/// Relative mismatch `|σ_j(H) − σ_j(A)|/σ_j(A)` for the leading `count` values.
pub fn singular_value_mismatch(projected: &[f64], exact: &[f64], count: usize) -> Vec<f64> {
    projected
        .iter()
        .zip(exact)
        .take(count)
        .map(|(p, a)| (p - a).abs() / a)
        .collect()
}

/// One row of the residual comparison between GMRES and CMRH.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundRow {
    pub k: usize,
    /// `‖r_k^G‖`.
    pub gmres: f64,
    /// `‖r_k^C‖`.
    pub cmrh: f64,
    /// `κ₂(R_{k+1})` with `L_{k+1} = Q_{k+1}R_{k+1}`.
    pub kappa_r: f64,
}

impl BoundRow {
    /// `‖r^C‖ − ‖r^G‖`.
    pub fn lower_margin(&self) -> f64 {
        self.cmrh - self.gmres
    }

    /// `κ ‖r^G‖ − ‖r^C‖`.
    pub fn upper_margin(&self) -> f64 {
        self.kappa_r * self.gmres - self.cmrh
    }

    /// `‖r^G‖ ≤ ‖r^C‖(1 + slack) + floor` and `‖r^C‖ ≤ κ‖r^G‖(1 + slack)`.
    pub fn holds(&self, slack: f64, floor: f64) -> bool {
        self.gmres <= self.cmrh * (1.0 + slack) + floor && self.cmrh <= self.kappa_r * self.gmres * (1.0 + slack)
    }
}

/// Runs CMRH and GMRES from `x₀ = 0` on the problem's `b` for up to `k_max`
/// iterations and tabulates both residual norms and `κ(R_{k+1})`. The table
/// stops at the first breakdown of either method.
pub fn bound_report(problem: &TestProblem, k_max: usize) -> Result<Vec<BoundRow>> {
    let n = problem.n();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    let op = problem.operator.as_ref();
    let opts = SolveOptions::new(k_max).lean();
    let c = cmrh(op, &problem.b, &opts)?;
    let g = gmres(op, &problem.b, &opts)?;
    let decomp = c.decomposition.as_ref().expect("cmrh keeps its decomposition");
    debug_assert_eq!(decomp.kind(), DecompositionKind::HessenbergPivoted);
    let mut rows = Vec::new();
    for (rc, rg) in c.records.iter().zip(&g.records) {
        let k = rc.iter;
        if decomp.basis_len() < k + 1 {
            break;
        }
        let r = crate::linalg::qr_factor(&decomp.basis_matrix(k + 1))?.r;
        rows.push(BoundRow {
            k,
            gmres: rg.residual_norm,
            cmrh: rc.residual_norm,
            kappa_r: condition_number_2(&r)?,
        });
    }
    Ok(rows)
}

/// Error-curve summary of one history.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryMetrics {
    pub relative_errors: Vec<f64>,
    /// One-based iteration with the smallest error.
    pub k_star: usize,
    pub min_error: f64,
    pub final_error: f64,
    /// Error at the final iteration is at least 1.1 times the minimum, reached earlier.
    pub semiconvergence: bool,
}

/// Relative errors of every iterate against `x_true`.
pub fn history_metrics(history: &IterationHistory, x_true: &[f64]) -> Result<HistoryMetrics> {
    let mut errors = Vec::with_capacity(history.len());
    for i in 0..history.len() {
        let x = history.solution(i).ok_or(Error::InvalidParameter {
            name: "history",
            reason: "iterates are not available".into(),
        })?;
        check_len("x_true", x.len(), x_true.len())?;
        errors.push(vector::relative_error(&x, x_true));
    }
    Ok(metrics_from_errors(errors))
}

/// Same as [`history_metrics`] for a precomputed error sequence.
pub fn metrics_from_errors(errors: Vec<f64>) -> HistoryMetrics {
    let mut best = 0;
    for (i, e) in errors.iter().enumerate() {
        if *e < errors[best] {
            best = i;
        }
    }
    let min_error = errors.get(best).copied().unwrap_or(f64::NAN);
    let final_error = errors.last().copied().unwrap_or(f64::NAN);
    let semiconvergence = !errors.is_empty() && best + 1 < errors.len() && final_error >= 1.1 * min_error;
    HistoryMetrics {
        relative_errors: errors,
        k_star: best + 1,
        min_error,
        final_error,
        semiconvergence,
    }
}
