//! Inner-product-free stationary iterations used as baselines: Landweber,
//! first-order Richardson and the Chebyshev semi-iteration on the normal equations.

use super::{residual_norm, IterationHistory, IterationRecord, SolveOptions};
use crate::error::{invalid, Error, Result};
use crate::linalg::{jacobi_svd, vector};
use crate::operators::{to_dense, LinearOperator};

/// Largest dimension for which bounds are computed from a dense SVD.
pub const DENSE_BOUNDS_LIMIT: usize = 2048;

/// Spectral information used to pick step lengths.
///
/// `eig_min`/`eig_max` are the smallest and largest eigenvalues. When computed
/// from an SVD they are estimated as `±σ_i` with the sign of `u_iᵀv_i`, which is
/// exact for symmetric matrices and a surrogate otherwise.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralBounds {
    pub eig_min: f64,
    pub eig_max: f64,
    pub sv_min: f64,
    pub sv_max: f64,
}

impl SpectralBounds {
    pub fn new(eig_min: f64, eig_max: f64, sv_min: f64, sv_max: f64) -> Self {
        Self {
            eig_min,
            eig_max,
            sv_min,
            sv_max,
        }
    }

    /// Bounds from a dense SVD of the operator.
    pub fn from_operator(op: &dyn LinearOperator) -> Result<Self> {
        if op.nrows() > DENSE_BOUNDS_LIMIT || op.ncols() > DENSE_BOUNDS_LIMIT {
            return Err(Error::TooLarge {
                n: op.nrows().max(op.ncols()),
                limit: DENSE_BOUNDS_LIMIT,
            });
        }
        let svd = match op.as_dense() {
            Some(m) => jacobi_svd(m)?,
            None => jacobi_svd(&to_dense(op))?,
        };
        let mut eig_min = f64::INFINITY;
        let mut eig_max = f64::NEG_INFINITY;
        for (j, &s) in svd.singular_values.iter().enumerate() {
            let sign = if vector::dot(svd.u.col(j), svd.v.col(j)) < 0.0 {
                -1.0
            } else {
                1.0
            };
            eig_min = eig_min.min(sign * s);
            eig_max = eig_max.max(sign * s);
        }
        Ok(Self::new(eig_min, eig_max, svd.sigma_min(), svd.sigma_max()))
    }
}

/// `0.99 / max(s₁², s_n²)`.
pub fn landweber_step(bounds: &SpectralBounds) -> f64 {
    0.99 / (bounds.eig_min * bounds.eig_min).max(bounds.eig_max * bounds.eig_max)
}

/// `0.99 / (s₁ + s_n)`. Other denominators can be passed to [`richardson`] directly.
pub fn richardson_step(bounds: &SpectralBounds) -> f64 {
    0.99 / (bounds.eig_min + bounds.eig_max)
}

/// `x_{k+1} = x_k + ω Aᵀ(b − A x_k)`.
pub fn landweber(op: &dyn LinearOperator, b: &[f64], omega: f64, opts: &SolveOptions) -> Result<IterationHistory> {
    if !op.has_transpose() {
        return Err(Error::MissingTranspose);
    }
    check_step(omega)?;
    let x0 = opts.prepare(op, b)?;
    let mut x = x0.clone();
    let mut history = IterationHistory::new("landweber", x0);
    let mut r = vector::sub(b, &op.apply(&x));
    for k in 1..=opts.max_iters {
        let g = op.apply_transpose(&r)?;
        vector::axpy(omega, &g, &mut x);
        r = vector::sub(b, &op.apply(&x));
        record(&mut history, opts, k, &x, vector::norm2(&r));
    }
    Ok(history)
}

/// `x_{k+1} = x_k + ω (b − A x_k)`.
pub fn richardson(op: &dyn LinearOperator, b: &[f64], omega: f64, opts: &SolveOptions) -> Result<IterationHistory> {
    check_step(omega)?;
    let x0 = opts.prepare(op, b)?;
    let mut x = x0.clone();
    let mut history = IterationHistory::new("richardson", x0);
    let mut r = vector::sub(b, &op.apply(&x));
    for k in 1..=opts.max_iters {
        vector::axpy(omega, &r, &mut x);
        r = vector::sub(b, &op.apply(&x));
        record(&mut history, opts, k, &x, vector::norm2(&r));
    }
    Ok(history)
}

/// Eigenvalue interval `[lo, hi]` of `AᵀA` assumed by the Chebyshev iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChebyshevInterval {
    pub lo: f64,
    pub hi: f64,
}

impl ChebyshevInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && lo.is_finite()) {
            return Err(invalid("chebyshev.lo", format!("must be positive, got {lo}")));
        }
        if !(hi > lo && hi.is_finite()) {
            return Err(invalid("chebyshev.hi", format!("must exceed lo, got {hi}")));
        }
        Ok(Self { lo, hi })
    }

    /// `[m, 1.001 m]` with `m = min(s₁², s_n²)`: the narrow interval used in the
    /// published comparison.
    pub fn narrow(bounds: &SpectralBounds) -> Result<Self> {
        let m = (bounds.eig_min * bounds.eig_min).min(bounds.eig_max * bounds.eig_max);
        Self::new(m, 1.001 * m)
    }

    /// `[σ_min², σ_max²]`, the interval that actually encloses the spectrum of `AᵀA`.
    pub fn full(bounds: &SpectralBounds) -> Result<Self> {
        Self::new(bounds.sv_min * bounds.sv_min, bounds.sv_max * bounds.sv_max)
    }
}

/// Two-term Chebyshev recurrence for `AᵀA x = Aᵀb` on the interval `[lo, hi]`.
pub fn chebyshev_semi_iteration(
    op: &dyn LinearOperator,
    b: &[f64],
    interval: ChebyshevInterval,
    opts: &SolveOptions,
) -> Result<IterationHistory> {
    if !op.has_transpose() {
        return Err(Error::MissingTranspose);
    }
    let ChebyshevInterval { lo, hi } = ChebyshevInterval::new(interval.lo, interval.hi)?;
    let x0 = opts.prepare(op, b)?;
    let mut x = x0.clone();
    let mut history = IterationHistory::new("chebyshev", x0);

    let theta = 0.5 * (hi + lo);
    let delta = 0.5 * (hi - lo);
    let sigma = theta / delta;
    let mut rho = 1.0 / sigma;
    // residual of the normal equations
    let mut s = op.apply_transpose(&vector::sub(b, &op.apply(&x)))?;
    let mut d = vector::scale(1.0 / theta, &s);
    for k in 1..=opts.max_iters {
        vector::axpy(1.0, &d, &mut x);
        let md = op.apply_transpose(&op.apply(&d))?;
        vector::axpy(-1.0, &md, &mut s);
        let rho_next = 1.0 / (2.0 * sigma - rho);
        let c = rho_next * rho;
        let w = 2.0 * rho_next / delta;
        for (di, si) in d.iter_mut().zip(&s) {
            *di = c * *di + w * si;
        }
        rho = rho_next;
        record(&mut history, opts, k, &x, residual_norm(op, b, &x));
    }
    Ok(history)
}

fn check_step(omega: f64) -> Result<()> {
    if omega.is_finite() {
        Ok(())
    } else {
        Err(invalid("step", format!("must be finite, got {omega}")))
    }
}

fn record(history: &mut IterationHistory, opts: &SolveOptions, k: usize, x: &[f64], res: f64) {
    let mut rec = IterationRecord::new(k, res);
    rec.relative_error = opts.relative_error(x);
    if opts.store_solutions {
        rec.x = Some(x.to_vec());
    }
    history.records.push(rec);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;
    use crate::operators::{from_dense, FnOperator};

    fn diag(d: &[f64]) -> crate::operators::DenseOperator {
        from_dense(DenseMatrix::from_diag(d)).unwrap()
    }

    #[test]
    fn landweber_first_step_on_identity() {
        let op = diag(&[1.0, 1.0, 1.0]);
        let bounds = SpectralBounds::from_operator(&op).unwrap();
        let omega = landweber_step(&bounds);
        assert!((omega - 0.99).abs() < 1e-15);
        let b = vec![1.0, 2.0, -1.0];
        let h = landweber(&op, &b, omega, &SolveOptions::new(1)).unwrap();
        let x = h.records[0].x.as_ref().unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - 0.99 * bi).abs() < 1e-15);
        }
    }

    #[test]
    fn landweber_converges_on_spd() {
        let op = diag(&[1.0, 2.0]);
        let omega = landweber_step(&SpectralBounds::from_operator(&op).unwrap());
        let b = vec![1.0, 1.0];
        let x_true = vec![1.0, 0.5];
        // contraction factor max|1 − ω σ²| = 1 − 0.2475
        let h = landweber(&op, &b, omega, &SolveOptions::new(80).with_x_true(x_true)).unwrap();
        assert!(h.last().unwrap().relative_error.unwrap() < 1e-6);
    }

    #[test]
    fn landweber_needs_transpose() {
        let op = FnOperator::new(2, 2, |x| x.to_vec());
        assert!(matches!(
            landweber(&op, &[1.0, 1.0], 0.5, &SolveOptions::new(1)),
            Err(Error::MissingTranspose)
        ));
    }

    #[test]
    fn richardson_identity_geometric() {
        let op = diag(&[1.0, 1.0]);
        let b = vec![2.0, -4.0];
        let omega = 0.5;
        let h = richardson(&op, &b, omega, &SolveOptions::new(5)).unwrap();
        for (k, rec) in h.records.iter().enumerate() {
            let factor = 1.0 - (1.0 - omega).powi(k as i32 + 1);
            let x = rec.x.as_ref().unwrap();
            assert!((x[0] - 2.0 * factor).abs() < 1e-14);
        }
    }

    #[test]
    fn richardson_fixed_point() {
        let op = diag(&[1.0, 3.0]);
        let omega = 0.99 / 4.0;
        let bounds = SpectralBounds::from_operator(&op).unwrap();
        assert!((richardson_step(&bounds) - omega).abs() < 1e-15);
        let b = vec![1.0, 3.0];
        let h = richardson(&op, &b, omega, &SolveOptions::new(200).with_x_true(vec![1.0, 1.0])).unwrap();
        assert!(h.last().unwrap().relative_error.unwrap() < 1e-12);
    }

    #[test]
    fn richardson_diverges_with_negative_eigenvalue() {
        let op = diag(&[-1.0, 2.0]);
        let bounds = SpectralBounds::from_operator(&op).unwrap();
        assert_eq!(bounds.eig_min, -1.0);
        assert_eq!(bounds.eig_max, 2.0);
        let omega = richardson_step(&bounds);
        let h = richardson(&op, &[1.0, 1.0], omega, &SolveOptions::new(30)).unwrap();
        let norms: Vec<f64> = h.records.iter().map(|r| vector::norm2(r.x.as_ref().unwrap())).collect();
        assert!(norms[29] > 100.0 * norms[0]);
    }

    #[test]
    fn chebyshev_on_identity() {
        // with [1, 1.001] the error after k steps is 1/T_k(2001): 1.25e-7 at k = 2
        let op = diag(&[1.0; 4]);
        let b = vec![1.0, -1.0, 2.0, 0.5];
        let opts = SolveOptions::new(3).with_x_true(b.clone());
        let h = chebyshev_semi_iteration(&op, &b, ChebyshevInterval::new(1.0, 1.001).unwrap(), &opts).unwrap();
        let errs = h.relative_errors();
        assert!(errs[1] < 2e-7);
        assert!(errs[2] < 1e-8);
    }

    #[test]
    fn chebyshev_respects_polynomial_bound() {
        let (l1, l2) = (0.5_f64, 4.0_f64);
        let op = diag(&[l1.sqrt(), l2.sqrt()]);
        let x_true = vec![1.0, -2.0];
        let b = op.apply(&x_true);
        let opts = SolveOptions::new(8).with_x_true(x_true);
        let h = chebyshev_semi_iteration(&op, &b, ChebyshevInterval::new(l1, l2).unwrap(), &opts).unwrap();
        let mu = (l2 + l1) / (l2 - l1);
        for (k, e) in h.relative_errors().iter().enumerate() {
            let tk = (((k + 1) as f64) * mu.acosh()).cosh();
            assert!(*e <= (1.0 + 1e-10) / tk, "k={k}: {e} > {}", 1.0 / tk);
        }
    }

    #[test]
    fn chebyshev_rejects_nonpositive_interval() {
        assert!(ChebyshevInterval::new(0.0, 1.0).is_err());
        assert!(ChebyshevInterval::new(1.0, 1.0).is_err());
    }

    #[test]
    fn interval_presets() {
        let bounds = SpectralBounds::new(0.1, 2.0, 0.1, 2.0);
        let narrow = ChebyshevInterval::narrow(&bounds).unwrap();
        assert!((narrow.lo - 0.01).abs() < 1e-16 && (narrow.hi - 0.01001).abs() < 1e-16);
        let full = ChebyshevInterval::full(&bounds).unwrap();
        assert!((full.lo - 0.01).abs() < 1e-16 && (full.hi - 4.0).abs() < 1e-15);
    }
}
