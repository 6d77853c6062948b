//! Two-mode coherent states: lower and upper symbols, stability, resolution of identity.

use nclandau::coherent::{cs_vector, cs_verify, lower_symbol_h, stability_defect, upper_symbol_h, CSLabel};
use nclandau::fockspace::FockRep;
use nclandau::params::PhysParams;
use num_complex::Complex64;

fn main() -> nclandau::Result<()> {
    let p = PhysParams::new(1.0, 1.0, 0.5, 0.02);
    let rep = FockRep::build(&p, 40)?;
    let z = CSLabel::new(Complex64::new(0.6, 0.2), Complex64::new(-0.3, 0.5), 0.0);
    let v = cs_vector(&z, &rep)?;
    println!("truncated norm^2 = {:.15}", v.iter().map(|c| c.norm_sqr()).sum::<f64>());
    println!("lower symbol of H = {:.10}", lower_symbol_h(&z, &p)?);
    println!("upper symbol of H = {:.10}", upper_symbol_h(&z, &p)?);
    println!("stability defect at t = 2.5: {:.1e}", stability_defect(&z, 2.5, &rep)?);

    let r = cs_verify(&p, 48, &[z])?;
    println!("symbol dev {:.1e}, resolution dev {:.1e}", r.symbol_deviation, r.resolution_deviation);
    Ok(())
}
