//! How well the singular values of the Hessenberg matrix track those of A
//! as the decay rate of the spectrum changes.

use hcmrh::analysis::{projected_singular_values, singular_value_mismatch};
use hcmrh::krylov::{DecompositionKind, KrylovDecomposition};
use hcmrh::problems::modified_spectra;

fn main() -> hcmrh::Result<()> {
    for c in [-2.0, -1.0, -0.5, -0.25] {
        let p = modified_spectra(64, c)?;
        let sigma = p.singular_values.clone().unwrap_or_default();
        println!("c = {c}");
        for k in [5, 10, 15] {
            let d = KrylovDecomposition::build(DecompositionKind::HessenbergPivoted, p.operator.as_ref(), &p.b, k)?;
            let mismatch = singular_value_mismatch(&projected_singular_values(&d)?, &sigma, 5);
            let shown: Vec<String> = mismatch.iter().map(|m| format!("{m:.3}")).collect();
            println!("  k={k:<3} relative mismatch j=1..5: {}", shown.join(" "));
        }
    }
    Ok(())
}
