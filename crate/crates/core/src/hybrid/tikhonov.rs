//! Tikhonov regularization of the projected problem
//! `min ‖β e₁ − H y‖² + λ² ‖y‖²` through the SVD `H = U Σ Vᵀ`.

use crate::error::{invalid, Result};
use crate::linalg::{jacobi_svd, vector, DenseMatrix, GivensLeastSquares};

/// Points of the logarithmic λ grid.
pub const GRID_POINTS: usize = 200;
/// Relative width at which golden-section refinement stops.
pub const REFINE_WIDTH: f64 = 1e-6;

/// SVD data of `H_{k+1,k}` needed by every parameter rule.
#[derive(Debug, Clone)]
pub struct ProjectedTikhonovContext {
    k: usize,
    beta: f64,
    sigma: Vec<f64>,
    v: DenseMatrix,
    /// First `k` entries of `Uᵀe₁`.
    uhat: Vec<f64>,
    /// `|[Uᵀe₁]_{k+1}|`, from the Givens QR of `H` so that it stays accurate when tiny.
    tail: f64,
}

impl ProjectedTikhonovContext {
    /// `h` must be `(k+1) × k` upper Hessenberg with `k ≥ 1`.
    pub fn new(h: &DenseMatrix, beta: f64) -> Result<Self> {
        let k = h.cols();
        if k == 0 || h.rows() != k + 1 {
            return Err(invalid("hess", "expected a (k+1) x k matrix with k >= 1"));
        }
        for j in 0..k {
            if h.col(j)[j + 2..].iter().any(|&v| v != 0.0) {
                return Err(invalid("hess", "matrix is not upper Hessenberg"));
            }
        }
        if !beta.is_finite() {
            return Err(crate::Error::NonFinite("beta"));
        }
        let svd = jacobi_svd(h)?;
        let uhat = svd.u.row(0);
        let mut ls = GivensLeastSquares::new(1.0);
        for j in 0..k {
            ls.push_column(&h.col(j)[..j + 2]);
        }
        Ok(Self {
            k,
            beta,
            sigma: svd.singular_values,
            v: svd.v,
            uhat,
            tail: ls.tail_component(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Singular values of `H`, nonincreasing.
    pub fn singular_values(&self) -> &[f64] {
        &self.sigma
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma.first().copied().unwrap_or(0.0)
    }

    /// `[Uᵀe₁]_i` for `i ≤ k`.
    pub fn projected_rhs(&self) -> &[f64] {
        &self.uhat
    }

    /// `|[Uᵀe₁]_{k+1}|`.
    pub fn tail(&self) -> f64 {
        self.tail
    }

    /// Coefficients of `y_λ` in the basis `V`: `β σ_i/(σ_i² + λ²) [Uᵀe₁]_i`.
    fn spectral_coefficients(&self, lambda: f64) -> Vec<f64> {
        let l2 = lambda * lambda;
        self.sigma
            .iter()
            .zip(&self.uhat)
            .map(|(&s, &u)| {
                let den = s * s + l2;
                if den == 0.0 {
                    0.0
                } else {
                    self.beta * s / den * u
                }
            })
            .collect()
    }

    /// `λ²/(σ_i² + λ²)` with `0/0 := 1`.
    fn residual_filters(&self, lambda: f64) -> impl Iterator<Item = f64> + '_ {
        let l2 = lambda * lambda;
        self.sigma.iter().map(move |&s| {
            let den = s * s + l2;
            if den == 0.0 {
                1.0
            } else {
                l2 / den
            }
        })
    }

    /// `Σ (ρ_i [Uᵀe₁]_i)² + [Uᵀe₁]²_{k+1}` and `Σ ρ_i`.
    fn residual_terms(&self, lambda: f64) -> (f64, f64) {
        let mut num = self.tail * self.tail;
        let mut trace = 0.0;
        for (rho, &u) in self.residual_filters(lambda).zip(&self.uhat) {
            num += (rho * u) * (rho * u);
            trace += rho;
        }
        (num, trace)
    }
}

/// `y_{λ,k} = V (ΣᵀΣ + λ²I)⁻¹ Σᵀ Uᵀ β e₁`; zero singular values contribute nothing.
pub fn projected_tikhonov_solve(ctx: &ProjectedTikhonovContext, lambda: f64) -> Result<Vec<f64>> {
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    Ok(ctx.v.matvec(&ctx.spectral_coefficients(lambda)))
}

/// GCV function of the projected problem,
/// `k β² (Σ (ρ_i û_i)² + û²_{k+1}) / (1 + Σ ρ_i)²` with `ρ_i = λ²/(σ_i² + λ²)`.
pub fn gcv_value(ctx: &ProjectedTikhonovContext, lambda: f64) -> f64 {
    let (num, trace) = ctx.residual_terms(lambda);
    let den = 1.0 + trace;
    ctx.k as f64 * ctx.beta * ctx.beta * num / (den * den)
}

/// Stopping functional `Ĝ(k)`: the GCV function with the trace of the full
/// `n`-dimensional influence matrix approximated by `(n − k) + Σ ρ_i`.
pub fn gcv_stop_value(ctx: &ProjectedTikhonovContext, lambda: f64, n: usize) -> Result<f64> {
    if ctx.k >= n {
        return Err(invalid("n", format!("need k < n, got k = {} and n = {n}", ctx.k)));
    }
    let (num, trace) = ctx.residual_terms(lambda);
    let den = (n - ctx.k) as f64 + trace;
    Ok(n as f64 * ctx.beta * ctx.beta * num / (den * den))
}

/// The λ grid searched by both parameter rules: `λ = 0` followed by
/// 200 log-spaced points on `[max(1e-12, 1e-10 σ_max), σ_max]`.
pub fn lambda_grid(sigma_max: f64) -> Vec<f64> {
    let mut grid = vec![0.0];
    if sigma_max > 0.0 && sigma_max.is_finite() {
        let lo = (1e-10 * sigma_max).max(1e-12).min(sigma_max);
        grid.extend(vector::logspace(lo, sigma_max, GRID_POINTS));
    }
    grid
}

/// Minimizes `f` over [`lambda_grid`], then refines by golden-section search in
/// `log λ` between the neighbours of the best positive grid point. The refined value
/// is kept only if it is no worse than the best grid value.
pub fn minimize_over_lambda(sigma_max: f64, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let grid = lambda_grid(sigma_max);
    let values: Vec<f64> = grid.iter().map(|&l| f(l)).collect();
    let mut best = 0;
    for (i, v) in values.iter().enumerate() {
        if v < &values[best] || (values[best].is_nan() && !v.is_nan()) {
            best = i;
        }
    }
    let (mut lambda, mut value) = (grid[best], values[best]);
    if best == 0 || grid.len() < 3 {
        return (lambda, value);
    }
    let lo = grid[(best - 1).max(1)].ln();
    let hi = grid[(best + 1).min(grid.len() - 1)].ln();
    let g = |t: f64| f(t.exp());
    let (t, ft) = golden_section(g, lo, hi);
    if ft <= value {
        lambda = t.exp();
        value = ft;
    }
    (lambda, value)
}

fn golden_section(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    // width in log space approximates relative width in λ
    while (b - a) > REFINE_WIDTH {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// `λ_k = argmin G(λ)` over the search strategy of [`minimize_over_lambda`].
pub fn gcv_minimize(ctx: &ProjectedTikhonovContext) -> f64 {
    minimize_over_lambda(ctx.sigma_max(), |l| gcv_value(ctx, l)).0
}

/// Oracle rule: the λ minimizing `‖x₀ + B_k y_λ − x_true‖`.
///
/// `basis` holds the first `k` basis vectors as columns.
pub fn optimal_lambda(ctx: &ProjectedTikhonovContext, basis: &DenseMatrix, x_true: &[f64], x0: &[f64]) -> Result<f64> {
    crate::error::check_len("basis columns", ctx.k, basis.cols())?;
    crate::error::check_len("x_true", basis.rows(), x_true.len())?;
    crate::error::check_len("x0", basis.rows(), x0.len())?;
    let w = basis.matmul(&ctx.v)?;
    let target = vector::sub(x_true, x0);
    let err = |l: f64| {
        let c = ctx.spectral_coefficients(l);
        let mut d = w.matvec(&c);
        vector::axpy(-1.0, &target, &mut d);
        vector::norm2(&d)
    };
    Ok(minimize_over_lambda(ctx.sigma_max(), err).0)
}
