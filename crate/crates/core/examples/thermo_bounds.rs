//! Exact grand potential between the two Berezin-Lieb bounds, plus the high- and low-temperature pictures.

use nclandau::params::PhysParams;
use nclandau::thermo::{berezin_lieb_bounds, gamma_exact, high_temperature_limit, low_temp_suite, SpectrumKind, ThermoInput};

fn main() -> nclandau::Result<()> {
    let p = PhysParams::new(1.0, 1.0, 0.5, 0.02);
    println!("{:>5} {:>4} {:>14} {:>14} {:>14}", "beta", "mu", "lower", "exact", "upper");
    for (beta, mu) in [(0.5, 2.0), (1.0, 5.0), (2.0, 8.0)] {
        let t = ThermoInput::new(beta, mu, p)?;
        let b = berezin_lieb_bounds(&t)?;
        let g = gamma_exact(&t, 1e-10, SpectrumKind::Helicity)?;
        println!("{beta:>5} {mu:>4} {:>14.6} {:>14.6} {:>14.6}", b.lower, g.value, b.upper);
    }

    let hot = ThermoInput::new(1e-3, -1.0, p)?;
    println!("\nbeta = 1e-3: exact {:.6e}, high-T limit {:.6e}", gamma_exact(&hot, 1e-10, SpectrumKind::Helicity)?.value, high_temperature_limit(&hot));

    let lt = low_temp_suite(&ThermoInput::new(4.0, 10.0, p)?)?;
    println!("\nlow temperature (beta = 4, mu = 10)");
    println!("  A = {:.6}  Delta/2 = {:.6}  N_e = {:.6}", lt.a, lt.delta_half, lt.n_electrons);
    println!("  ratio printed {:.6e}  derived {:.6e}  direct {:.6e}", lt.ratio_printed, lt.ratio_derived, lt.ratio_direct);
    Ok(())
}
