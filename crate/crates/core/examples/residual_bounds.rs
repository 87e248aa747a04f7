//! The CMRH residual sits between the GMRES residual and κ(R) times it.

use hcmrh::analysis::bound_report;
use hcmrh::problems::deriv2;

fn main() -> hcmrh::Result<()> {
    let p = deriv2(64)?.with_noise(1e-2, 3)?;
    println!(" k  ‖r_gmres‖     ‖r_cmrh‖      κ(R)         lower   upper");
    for row in bound_report(&p, 20)? {
        println!(
            "{:2}  {:.5e}  {:.5e}  {:.5e}  {:+.1e}  {:+.1e}",
            row.k,
            row.gmres,
            row.cmrh,
            row.kappa_r,
            row.lower_margin(),
            row.upper_margin()
        );
    }
    Ok(())
}
