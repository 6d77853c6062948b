//! Polar eigenfunctions: pointwise values and the Gram matrix.

use nclandau::params::PhysParams;
use nclandau::wavefunctions::{energy_polar, gram_matrix, psi, PolarLevel};

fn main() -> nclandau::Result<()> {
    let p = PhysParams::new(1.0, 1.0, 0.5, 0.02);
    for (n, rho) in [(0, 0), (1, -2), (2, 3)] {
        let l = PolarLevel::new(n, rho);
        println!("n = {n} rho = {rho:>2}  E = {:.6}  psi(0.7, 0.3) = {:.6}", energy_polar(l, &p)?, psi(l, 0.7, 0.3, &p)?);
    }
    let (levels, g) = gram_matrix(4, 4, &p)?;
    let k = levels.len();
    let dev = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| (g[(i, j)] - f64::from(i == j)).abs()).fold(0.0, f64::max);
    println!("Gram matrix over {k} states: max |G - I| = {dev:.2e}");
    Ok(())
}
