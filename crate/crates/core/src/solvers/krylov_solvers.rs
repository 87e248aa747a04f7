use super::{residual_norm, IterationHistory, IterationRecord, SolveOptions, StopReason};
use crate::error::Result;
use crate::krylov::{DecompositionKind, KrylovDecomposition};
use crate::linalg::{vector, GivensLeastSquares};
use crate::operators::LinearOperator;

/// CMRH: pivoted Hessenberg basis, `y_k = argmin ‖β e₁ − H_{k+1,k} y‖`.
pub fn cmrh(op: &dyn LinearOperator, b: &[f64], opts: &SolveOptions) -> Result<IterationHistory> {
    krylov_solve(DecompositionKind::HessenbergPivoted, op, b, opts)
}

/// GMRES: Arnoldi basis with `β = ‖r₀‖`.
pub fn gmres(op: &dyn LinearOperator, b: &[f64], opts: &SolveOptions) -> Result<IterationHistory> {
    krylov_solve(DecompositionKind::Arnoldi, op, b, opts)
}

/// Minimizes the projected residual over a Krylov decomposition of the given kind.
pub fn krylov_solve(
    kind: DecompositionKind,
    op: &dyn LinearOperator,
    b: &[f64],
    opts: &SolveOptions,
) -> Result<IterationHistory> {
    let x0 = opts.prepare(op, b)?;
    let method = match kind {
        DecompositionKind::Arnoldi => "gmres",
        DecompositionKind::HessenbergPivoted => "cmrh",
        DecompositionKind::Hessenberg => "cmrh_unpivoted",
    };
    let mut history = IterationHistory::new(method, x0.clone());
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
    let mut ls = GivensLeastSquares::new(decomp.beta());
    for k in 1..=opts.max_iters {
        decomp.extend(op)?;
        ls.push_column(decomp.hess_column(k - 1));
        let Ok(y) = ls.solve() else {
            history.stop_reason = StopReason::Breakdown;
            break;
        };
        let x = decomp.combine(&x0, &y);
        let mut rec = IterationRecord::new(k, residual_norm(op, b, &x));
        rec.quasi_residual_norm = Some(ls.residual());
        rec.relative_error = opts.relative_error(&x);
        rec.coefficients = Some(y);
        if opts.store_solutions {
            rec.x = Some(x);
        }
        history.records.push(rec);
        if decomp.breakdown() {
            history.stop_reason = StopReason::Breakdown;
            break;
        }
    }
    history.decomposition = Some(decomp);
    Ok(history)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{qr_factor, solve_upper_triangular, DenseMatrix};
    use crate::operators::from_dense;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_system(n: usize, seed: u64) -> (DenseMatrix, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = DenseMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        for i in 0..n {
            a[(i, i)] += 3.0;
        }
        let b = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        (a, b)
    }

    fn dense_solve(a: &DenseMatrix, b: &[f64]) -> Vec<f64> {
        let qr = qr_factor(a).unwrap();
        solve_upper_triangular(&qr.r, &qr.q.matvec_transpose(b)).unwrap()
    }

    #[test]
    fn identity_solves_in_one_step() {
        let op = from_dense(DenseMatrix::identity(4)).unwrap();
        let b = vec![1.0, -2.0, 0.5, 3.0];
        for solve in [cmrh, gmres] {
            let h = solve(&op, &b, &SolveOptions::new(3)).unwrap();
            assert_eq!(h.len(), 1);
            assert_eq!(h.stop_reason, StopReason::Breakdown);
            let x = h.records[0].x.as_ref().unwrap();
            for (xi, bi) in x.iter().zip(&b) {
                assert!((xi - bi).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn full_krylov_space_solves_exactly() {
        let (a, b) = random_system(5, 3);
        let x_ref = dense_solve(&a, &b);
        let op = from_dense(a).unwrap();
        for solve in [cmrh, gmres] {
            let h = solve(&op, &b, &SolveOptions::new(5)).unwrap();
            let x = h.last().unwrap().x.clone().unwrap();
            assert!(vector::relative_error(&x, &x_ref) < 1e-10);
        }
    }

    #[test]
    fn gmres_residuals_nonincreasing_and_below_cmrh() {
        let (a, b) = random_system(6, 4);
        let op = from_dense(a).unwrap();
        let g = gmres(&op, &b, &SolveOptions::new(6)).unwrap();
        let c = cmrh(&op, &b, &SolveOptions::new(6)).unwrap();
        let rg = g.residual_norms();
        for w in rg.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-12));
        }
        let bn = vector::norm2(&b);
        for (g, c) in rg.iter().zip(c.residual_norms()) {
            assert!(*g <= c + 1e-10 * bn);
        }
    }

    #[test]
    fn quasi_residual_nonincreasing() {
        let (a, b) = random_system(12, 5);
        let op = from_dense(a).unwrap();
        let h = cmrh(&op, &b, &SolveOptions::new(10)).unwrap();
        let q: Vec<f64> = h.records.iter().map(|r| r.quasi_residual_norm.unwrap()).collect();
        for w in q.windows(2) {
            assert!(w[1] <= w[0] * (1.0 + 1e-14));
        }
    }

    #[test]
    fn well_conditioned_reaches_small_residual() {
        let (a, b) = random_system(10, 6);
        let op = from_dense(a).unwrap();
        let bn = vector::norm2(&b);
        for solve in [cmrh, gmres] {
            let h = solve(&op, &b, &SolveOptions::new(10)).unwrap();
            assert!(h.last().unwrap().residual_norm / bn < 1e-8);
        }
    }

    #[test]
    fn lean_mode_rebuilds_iterates() {
        let (a, b) = random_system(8, 7);
        let op = from_dense(a).unwrap();
        let full = cmrh(&op, &b, &SolveOptions::new(5)).unwrap();
        let lean = cmrh(&op, &b, &SolveOptions::new(5).lean()).unwrap();
        assert!(lean.records.iter().all(|r| r.x.is_none()));
        for i in 0..5 {
            assert_eq!(full.solution(i).unwrap(), lean.solution(i).unwrap());
        }
    }

    #[test]
    fn nonzero_initial_guess() {
        let (a, b) = random_system(6, 8);
        let x_ref = dense_solve(&a, &b);
        let op = from_dense(a).unwrap();
        let opts = SolveOptions::new(6).with_x0(vec![1.0; 6]);
        let h = cmrh(&op, &b, &opts).unwrap();
        assert!(vector::relative_error(&h.solution(h.len() - 1).unwrap(), &x_ref) < 1e-10);
    }

    #[test]
    fn exact_initial_guess_stops_immediately() {
        let op = from_dense(DenseMatrix::identity(3)).unwrap();
        let b = vec![1.0, 2.0, 3.0];
        let h = gmres(&op, &b, &SolveOptions::new(3).with_x0(b.clone())).unwrap();
        assert!(h.is_empty());
        assert_eq!(h.stop_reason, StopReason::Breakdown);
    }

    #[test]
    fn rejects_bad_options() {
        let op = from_dense(DenseMatrix::identity(3)).unwrap();
        assert!(cmrh(&op, &[1.0, 2.0, 3.0], &SolveOptions::new(0)).is_err());
        assert!(cmrh(&op, &[1.0, 2.0], &SolveOptions::new(2)).is_err());
        let wide = from_dense(DenseMatrix::zeros(2, 3)).unwrap();
        assert!(gmres(&wide, &[1.0, 1.0], &SolveOptions::new(1)).is_err());
    }
}
