//! Quaternionic vector coherent states: normalization, SU(2) route, displacement and statistics.

use nclandau::params::{derive, PhysParams};
use nclandau::vcs::{displacement_check, qvcs_family_norm, qvcs_statistics, su2_route, QuaternionLabel};

fn main() -> nclandau::Result<()> {
    let d = derive(&PhysParams::new(1.0, 1.0, 0.5, 0.02))?;
    let q = QuaternionLabel { r: 0.8, vartheta: 0.9, phi: 0.6, eta: 1.1, rho: 0.5, gamma: 2.0, varphi: 1.3, varrho: 4.0 };
    println!("family norm {:.15}", qvcs_family_norm(&q, 40, &d)?);

    let s = su2_route(0.7, 0.9, 0.6, 1.1);
    println!("SU(2) route: printed phase {:.1e}, corrected {:.1e}", s.printed, s.corrected);

    let dr = displacement_check(&QuaternionLabel::only_q(0.5, 0.9, 0.6, 1.1), 0.0, 1, 0, 0, 48, &d)?;
    println!("displacement {dr:#?}");

    let st = qvcs_statistics(&QuaternionLabel::only_q(0.6, 1.1, 0.4, 2.0), 3, 0.7, 1.2, 48)?;
    println!("\nstatistics for j = 3, family weight {:.6}", st.family_weight);
    for (a, b) in st.printed_discrepancies.iter().zip(&st.substituted_discrepancies) {
        println!("  {:>12}  oracle {:+.8}  printed {:+.2e}  with vartheta {:+.2e}", a.quantity, a.oracle, a.signed, b.signed);
    }
    println!("Heisenberg margins {:?}", st.heisenberg);
    Ok(())
}
