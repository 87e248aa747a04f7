//! Norm underflow and overflow in simulated low precision: GMRES stops, CMRH keeps going.

use hcmrh::chop::{chopped_norm2, run_under_precision, ChopContext, ChopSolver, PrecisionFormat};
use hcmrh::problems::{deriv2, shaw};
use hcmrh::solvers::SolveOptions;

fn main() -> hcmrh::Result<()> {
    let cases = [
        ("deriv2", PrecisionFormat::Q52, deriv2(8192)?),
        ("shaw", PrecisionFormat::Q43, shaw(6144)?),
    ];
    for (name, fmt, problem) in cases {
        let ctx = ChopContext::new(fmt);
        println!(
            "{name} n={} in {fmt}: chopped ‖b‖ = {}",
            problem.n(),
            chopped_norm2(&problem.b, &ctx)
        );
        for solver in [ChopSolver::Gmres, ChopSolver::Cmrh] {
            let h = run_under_precision(solver, &problem, &ctx, &SolveOptions::new(10))?;
            println!(
                "  {:<5} iterations {:>2}  stop {}",
                solver.name(),
                h.len(),
                h.stop_reason
            );
        }
    }
    Ok(())
}
