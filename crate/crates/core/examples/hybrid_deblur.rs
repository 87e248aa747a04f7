//! Hybrid CMRH on a 2-D Gaussian deblurring problem.

use hcmrh::hybrid::{hcmrh, hybrid_gmres, HybridOptions, ParamRule};
use hcmrh::operators::Boundary;
use hcmrh::problems::deblur_2d;
use hcmrh::solvers::{cmrh, SolveOptions};

fn main() -> hcmrh::Result<()> {
    let p = deblur_2d(32, 2.0, 1e-2, 1, Boundary::Zero)?;
    let op = p.operator.as_ref();
    let solve = SolveOptions::new(30).with_x_true(p.x_true.clone()).lean();

    let plain = cmrh(op, &p.b, &solve)?;
    let gcv = hcmrh(op, &p.b, &HybridOptions::new(solve.clone()), ParamRule::Gcv)?;
    let fixed = HybridOptions::new(solve.clone()).without_stopping();
    let optimal = hcmrh(op, &p.b, &fixed, ParamRule::Optimal)?;
    let hg = hybrid_gmres(op, &p.b, &fixed, ParamRule::Gcv)?;

    println!(" k   cmrh     hcmrh(opt)  hgmres(gcv)  lambda(opt)");
    for k in (0..30).step_by(3) {
        let r = &optimal.records[k];
        println!(
            "{:2}  {:.4}   {:.4}      {:.4}       {:.3e}",
            k + 1,
            plain.records[k].relative_error.unwrap_or(f64::NAN),
            r.relative_error.unwrap_or(f64::NAN),
            hg.records[k].relative_error.unwrap_or(f64::NAN),
            r.lambda.unwrap_or(f64::NAN)
        );
    }
    let sel = gcv.selected_record().expect("ran at least one step");
    println!(
        "\ngcv stopping: {} at k={}, lambda {:.3e}, error {:.4}",
        gcv.stop_reason,
        sel.iter,
        sel.lambda.unwrap_or(f64::NAN),
        sel.relative_error.unwrap_or(f64::NAN)
    );
    Ok(())
}
