//! CMRH and GMRES against the stationary iterations on Spectra.
//!
//! Prints the relative error curves and the minimum reached by each method.

use hcmrh::analysis::metrics_from_errors;
use hcmrh::problems::spectra;
use hcmrh::solvers::{
    chebyshev_semi_iteration, cmrh, gmres, landweber, landweber_step, richardson, richardson_step, ChebyshevInterval,
    SolveOptions, SpectralBounds,
};

fn main() -> hcmrh::Result<()> {
    let p = spectra(64, 2.0)?.with_noise(1e-2, 1)?;
    let op = p.operator.as_ref();
    let opts = SolveOptions::new(40).with_x_true(p.x_true.clone()).lean();
    let bounds = SpectralBounds::from_operator(op)?;
    let runs = [
        ("cmrh", cmrh(op, &p.b, &opts)?),
        ("gmres", gmres(op, &p.b, &opts)?),
        ("landweber", landweber(op, &p.b, landweber_step(&bounds), &opts)?),
        ("richardson", richardson(op, &p.b, richardson_step(&bounds), &opts)?),
        (
            "chebyshev",
            chebyshev_semi_iteration(op, &p.b, ChebyshevInterval::full(&bounds)?, &opts)?,
        ),
    ];
    for (name, h) in &runs {
        let m = metrics_from_errors(h.relative_errors());
        println!(
            "{name:<11} min {:.4} at k={:<3} final {:.4}  semiconvergent: {}",
            m.min_error, m.k_star, m.final_error, m.semiconvergence
        );
    }
    let errors = runs[0].1.relative_errors();
    println!("\ncmrh error curve:");
    for (k, e) in errors.iter().enumerate().step_by(4) {
        println!("{:3} {e:.4}", k + 1);
    }
    Ok(())
}
