//! The Shaw, Deriv2 and Heat problems, discretized as in the Regularization
//! Tools package.

use std::f64::consts::PI;

use super::{check_min_size, kernel_operator, TestProblem};
use crate::error::{invalid, Result};

/// 1-D image restoration: `A_ij = (π/n)(cos s_i + cos t_j)² (sin u/u)²` with
/// `u = π(sin s_i + sin t_j)` on the midpoint grid of `[−π/2, π/2]`.
pub fn shaw(n: usize) -> Result<TestProblem> {
    check_min_size("n", n, 8)?;
    if !n.is_multiple_of(2) {
        return Err(invalid("n", format!("shaw needs an even size, got {n}")));
    }
    let h = PI / n as f64;
    let grid: Vec<f64> = (0..n).map(|i| (i as f64 + 0.5) * h - PI / 2.0).collect();
    let cos: Vec<f64> = grid.iter().map(|s| s.cos()).collect();
    let sin: Vec<f64> = grid.iter().map(|s| s.sin()).collect();
    let entry = move |i: usize, j: usize| {
        let c = cos[i] + cos[j];
        let u = PI * (sin[i] + sin[j]);
        let sinc = if u == 0.0 { 1.0 } else { u.sin() / u };
        h * c * c * sinc * sinc
    };
    let x_true = grid
        .iter()
        .map(|t| 2.0 * (-6.0 * (t - 0.8) * (t - 0.8)).exp() + (-2.0 * (t + 0.5) * (t + 0.5)).exp())
        .collect();
    TestProblem::new("shaw", kernel_operator(n, entry), x_true)
}

/// Galerkin discretization of the Green's function of `−u''` on `[0, 1]`,
/// `K(s,t) = s(t−1)` for `s ≤ t` and `t(s−1)` otherwise, with `x(t) = eᵗ`.
pub fn deriv2(n: usize) -> Result<TestProblem> {
    check_min_size("n", n, 8)?;
    let h = 1.0 / n as f64;
    let entry = move |i: usize, j: usize| {
        let (i, j) = if j > i { (j, i) } else { (i, j) };
        let (fi, fj) = (i as f64 + 1.0, j as f64 + 1.0);
        if i == j {
            h * h * ((fi * fi - fi + 0.25) * h - (fi - 2.0 / 3.0))
        } else {
            h * h * (fj - 0.5) * ((fi - 0.5) * h - 1.0)
        }
    };
    let sqh = h.sqrt();
    let x_true = (0..n).map(|j| sqh * ((j as f64 + 0.5) * h).exp()).collect();
    TestProblem::new("deriv2", kernel_operator(n, entry), x_true)
}

/// `√h (eˢ + (1 − e)s − 1)` at the midpoints: the continuous right-hand side of [`deriv2`].
pub fn deriv2_continuous_rhs(n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    let e = std::f64::consts::E;
    (0..n)
        .map(|i| {
            let s = (i as f64 + 0.5) * h;
            h.sqrt() * (s.exp() + (1.0 - e) * s - 1.0)
        })
        .collect()
}

/// Inverse heat equation: lower triangular Toeplitz `A_ij = h k((i−j+½)h)` with
/// `k(t) = t^{−3/2}/(2κ√π) exp(−1/(4κ²t))`.
pub fn heat(n: usize, kappa: f64) -> Result<TestProblem> {
    check_min_size("n", n, 8)?;
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(invalid("kappa", format!("must be positive, got {kappa}")));
    }
    let h = 1.0 / n as f64;
    let column: Vec<f64> = (0..n)
        .map(|m| {
            let t = (m as f64 + 0.5) * h;
            h * t.powf(-1.5) / (2.0 * kappa * PI.sqrt()) * (-1.0 / (4.0 * kappa * kappa * t)).exp()
        })
        .collect();
    let entry = move |i: usize, j: usize| if i >= j { column[i - j] } else { 0.0 };
    TestProblem::new("heat", kernel_operator(n, entry), heat_solution(n))
}

/// Pulse on the midpoint grid of `[0, 1]`: `(t/0.5)²` up to `t = 0.5`, then
/// `exp(−10(t − 0.5))`; maximum 1 at `t = 0.5`.
pub fn heat_solution(n: usize) -> Vec<f64> {
    let h = 1.0 / n as f64;
    (0..n)
        .map(|j| {
            let t = (j as f64 + 0.5) * h;
            if t <= 0.5 {
                (t / 0.5) * (t / 0.5)
            } else {
                (-10.0 * (t - 0.5)).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    #[test]
    fn shaw_is_symmetric() {
        let a = shaw(32).unwrap().dense_matrix().unwrap();
        assert!(a.sub(&a.transpose()).unwrap().max_abs() <= 1e-12 * a.max_abs());
    }

    #[test]
    fn shaw_needs_even_size() {
        assert!(shaw(31).is_err());
        assert!(shaw(6).is_err());
    }

    #[test]
    fn shaw_kernel_at_center() {
        // s = t = 0 is not a grid point for even n; check a hand-evaluated entry instead
        let n = 8;
        let a = shaw(n).unwrap().dense_matrix().unwrap();
        let h = PI / 8.0;
        let s = 0.5 * h - PI / 2.0;
        let t = 3.5 * h - PI / 2.0;
        let u = PI * (s.sin() + t.sin());
        let expected = h * (s.cos() + t.cos()).powi(2) * (u.sin() / u).powi(2);
        assert!((a[(0, 3)] - expected).abs() < 1e-15);
    }

    /// `(1/h) ∫∫` of the kernel over the boxes `i` and `j` by a tensor midpoint rule.
    fn galerkin_entry(n: usize, i: usize, j: usize, m: usize) -> f64 {
        let h = 1.0 / n as f64;
        let q = h / m as f64;
        let mut sum = 0.0;
        for a in 0..m {
            let s = i as f64 * h + (a as f64 + 0.5) * q;
            for b in 0..m {
                let t = j as f64 * h + (b as f64 + 0.5) * q;
                sum += if s <= t { s * (t - 1.0) } else { t * (s - 1.0) };
            }
        }
        sum * q * q / h
    }

    #[test]
    fn deriv2_matches_galerkin_quadrature() {
        let n = 16;
        let a = deriv2(n).unwrap().dense_matrix().unwrap();
        for (i, j) in [(0, 0), (3, 3), (15, 15), (5, 2), (2, 5), (15, 0), (9, 8)] {
            let q = galerkin_entry(n, i, j, 400);
            assert!(
                (a[(i, j)] - q).abs() <= 1e-5 * q.abs(),
                "({i},{j}): {} vs {q}",
                a[(i, j)]
            );
        }
        assert!(a.sub(&a.transpose()).unwrap().max_abs() == 0.0);
        // Green's function of −u'' is negative
        assert!(a.as_slice().iter().all(|&v| v < 0.0));
    }

    #[test]
    fn deriv2_discretization_consistency() {
        let mut prev = f64::INFINITY;
        for n in [64, 128, 256] {
            let p = deriv2(n).unwrap();
            let cont = deriv2_continuous_rhs(n);
            let rel = vector::relative_error(&p.b_exact, &cont);
            assert!(rel <= 5e-2);
            assert!(rel < prev);
            prev = rel;
        }
    }

    #[test]
    fn heat_is_lower_triangular() {
        let a = heat(16, 1.0).unwrap().dense_matrix().unwrap();
        for i in 0..16 {
            for j in i + 1..16 {
                assert_eq!(a[(i, j)], 0.0);
            }
            assert!(a[(i, i)] >= 0.0);
        }
        let x = heat_solution(64);
        let max = x.iter().cloned().fold(0.0, f64::max);
        assert!(max <= 1.0 && max > 0.95);
    }
}
