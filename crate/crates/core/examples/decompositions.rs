//! Builds the pivoted Hessenberg and Arnoldi decompositions of one problem and checks
//! that both satisfy their relation and map onto each other through the R factor.

use hcmrh::krylov::{verify_basis_change, DecompositionKind, KrylovDecomposition};
use hcmrh::problems::shaw;

fn main() -> hcmrh::Result<()> {
    let p = shaw(64)?.with_noise(1e-2, 5)?;
    let op = p.operator.as_ref();
    let a_norm = p.dense_matrix()?.frobenius_norm();
    println!(" k  hess_rel      arnoldi_rel   kappa_r       basis_change");
    for k in [2, 4, 6, 8, 10] {
        let h = KrylovDecomposition::build(DecompositionKind::HessenbergPivoted, op, &p.b, k)?;
        let a = KrylovDecomposition::build(DecompositionKind::Arnoldi, op, &p.b, k)?;
        let change = verify_basis_change(&h, &a)?;
        println!(
            "{k:2}  {:.3e}  {:.3e}  {:.3e}  {:.3e}",
            h.relation_residual(op).0 / a_norm,
            a.relation_residual(op).0 / a_norm,
            change.kappa_r,
            change.relative_residual
        );
    }
    let h = KrylovDecomposition::build(DecompositionKind::HessenbergPivoted, op, &p.b, 6)?;
    println!("pivot rows: {:?}", h.pivot());
    Ok(())
}
