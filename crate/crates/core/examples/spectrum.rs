//! Lowest helicity levels, their polar counterparts and the Fock algebra checks.

use nclandau::fockspace::{commutator_defect, passage_check, FockRep};
use nclandau::params::{derive, PhysParams};
use nclandau::wavefunctions::spectrum_comparison;

fn main() -> nclandau::Result<()> {
    let p = PhysParams::new(1.0, 1.0, 0.5, 0.02);
    let d = derive(&p)?;
    println!("Omega~ = {:.6}  omega_c~ = {:.6}  Omega~+ = {:.6}  Omega~- = {:.6}", d.omega_tilde, d.omega_c_tilde, d.omega_plus, d.omega_minus);

    let rep = FockRep::build(&p, 6)?;
    println!("\n n+ n-   energy");
    for np in 0..3 {
        for nm in 0..3 {
            println!("{np:>3}{nm:>3}   {:.8}", rep.energy(np, nm));
        }
    }

    let cd = commutator_defect(&rep);
    println!("\ncommutator defect below the top level: {:.1e}, cross terms: {:.1e}", cd.low_level, cd.cross);
    println!("top-level deviation from the truncated value: {:.1e}", cd.top_level_dev);
    let pc = passage_check(&rep)?;
    println!("passage UV = 1 to {:.1e}, conjugated H diagonal: {}", pc.uv_identity_dev, pc.conjugated_is_diagonal);

    println!("\npolar vs helicity energies");
    for s in spectrum_comparison(&p, 1, 1)?.iter().take(6) {
        println!("{s:?}");
    }
    Ok(())
}
