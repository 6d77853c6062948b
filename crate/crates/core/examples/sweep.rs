//! Parallel thermodynamic sweep; set NCLANDAU_THREADS to pin the pool size.

use nclandau::cli::{sweep_rows, SweepConfig};
use nclandau::params::PhysParams;
use nclandau::thermo::ThermoOptions;

fn main() -> nclandau::Result<()> {
    let cfg = SweepConfig {
        params: PhysParams::new(1.0, 1.0, 0.5, 0.0),
        beta: vec![0.5, 1.0, 2.0],
        mu: vec![2.0, 5.0, 8.0],
        theta: vec![0.0, 0.02, 0.05],
        omega_c: vec![],
        options: ThermoOptions::default(),
    };
    for (b, m, th, _, r) in sweep_rows(&cfg)? {
        let g = r?;
        println!("{b:>4} {m:>4} {th:>5}  {:>12.5} <= {:>12.5} <= {:>12.5}  {}", g.gamma_lower, g.gamma_exact, g.gamma_upper, g.sandwich_ok());
    }
    Ok(())
}
