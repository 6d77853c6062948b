//! Vector coherent states labelled by diagonal matrices.

use nclandau::params::{derive, PhysParams};
use nclandau::vcs::{moment_weight_check, mvcs_check, DiagLabel};
use num_complex::Complex64;

fn main() -> nclandau::Result<()> {
    let d = derive(&PhysParams::new(1.0, 1.0, 0.5, 0.02))?;
    let c = Complex64::new;
    let label = DiagLabel::new([c(0.3, 0.4), c(0.0, 0.0), c(-0.6, 0.1), c(0.0, 1.0)], [c(0.5, 0.0), c(0.0, -0.7), c(0.2, 0.0), c(0.1, 0.1)], 0.3);
    let r = mvcs_check(&label, 40, &d)?;
    println!("family norm {:.15}", r.family_norm);
    println!("action: brute {:.12}  weighted |z|^2 {:.12}  plain |z|^2 {:.12}", r.action_brute, r.action_weighted, r.action_plain);
    println!("stability defect {:.1e}", r.stability_defect);
    let m = moment_weight_check(10)?;
    println!("moment problem: Gauss-Laguerre {:.1e}, adaptive {:.1e}", m.gauss_laguerre, m.adaptive);
    Ok(())
}
