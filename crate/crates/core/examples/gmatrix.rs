//! Eigenvalues of the 4x4 commutator matrix against the closed forms.

use nclandau::params::{g_matrix_check, PhysParams};

fn main() -> nclandau::Result<()> {
    for theta in [0.0, 0.02, 0.1] {
        let r = g_matrix_check(&PhysParams::new(1.0, 1.0, 0.5, theta))?;
        println!("theta = {theta}");
        println!("  numeric {:?}", r.numeric);
        println!("  closed  {:?}", r.closed);
        println!(
            "  rel dev closed {:.1e}, printed lambda {:.1e}, printed kappa {:.1e}",
            r.rel_dev_closed, r.rel_dev_lambda_printed, r.rel_dev_kappa_printed
        );
    }
    Ok(())
}
