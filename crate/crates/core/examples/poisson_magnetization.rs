//! Smooth, Landau and oscillatory parts of the grand potential; magnetization by Richardson differentiation.

use nclandau::params::PhysParams;
use nclandau::thermo::{
    gamma_exact, magnetic_moment_closed, magnetic_moment_landau, magnetic_moment_numeric, poisson_decomposition,
    susceptibility_closed, SpectrumKind, ThermoInput,
};

fn main() -> nclandau::Result<()> {
    let p = PhysParams::new(1.0, 1.0, 0.5, 0.02);
    for (beta, mu) in [(1.0, 8.0), (2.0, 5.0)] {
        let t = ThermoInput::new(beta, mu, p)?;
        let pp = poisson_decomposition(&t, 400, 400)?;
        let g = gamma_exact(&t, 1e-12, SpectrumKind::Polar)?.value;
        println!("beta = {beta} mu = {mu}");
        println!("  Gamma0 {:.8e}  GammaL {:.8e}  GammaOsc {:.3e}", pp.gamma0, pp.gamma_l, pp.gamma_osc);
        println!("  sum {:.8e}  exact (polar) {:.8e}  rel {:.1e}", pp.total(), g, ((pp.total() - g) / g).abs());
        println!("  M closed {:.6}  chi closed {:.6}", magnetic_moment_closed(&t)?, susceptibility_closed(&t)?);
    }

    let t = ThermoInput::new(0.5, 30.0, p.with_theta(0.0))?;
    let m = magnetic_moment_numeric(&t, 1e-3 * t.params.b_field(), SpectrumKind::Polar)?;
    println!("\nsmooth regime: numeric M {:.8}  Landau part {:.8}  Richardson estimate {:.1e}", m.value, magnetic_moment_landau(&t)?, m.rel_error_estimate);
    Ok(())
}
