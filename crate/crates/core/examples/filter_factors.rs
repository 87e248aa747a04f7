//! Empirical filter factors of CMRH iterates on Shaw.

use hcmrh::analysis::filter_factor_series;
use hcmrh::linalg::jacobi_svd;
use hcmrh::problems::shaw;
use hcmrh::solvers::{cmrh, SolveOptions};

fn main() -> hcmrh::Result<()> {
    let p = shaw(64)?.with_noise(1e-3, 2)?;
    let svd = jacobi_svd(&p.dense_matrix()?)?;
    let history = cmrh(p.operator.as_ref(), &p.b, &SolveOptions::new(12))?;
    let tables = filter_factor_series(&history, &svd, &p.b)?;
    print!("  i  sigma    ");
    for k in [2, 4, 8, 12] {
        print!("  k={k:<5}");
    }
    println!();
    for i in 0..16 {
        print!("{:3}  {:.2e}", i + 1, svd.singular_values[i]);
        for k in [2, 4, 8, 12] {
            let t = &tables[k - 1];
            if t.masked[i] {
                print!("  {:>7}", "masked");
            } else {
                print!("  {:7.3}", t.factors[i]);
            }
        }
        println!();
    }
    Ok(())
}
