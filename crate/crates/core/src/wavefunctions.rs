//! Polar eigenfunctions `Ψ_{n,ρ}` and the polar spectrum.
//!
//! The angle runs over `[0, 2π)`, which the orthogonality of `e^{iρφ}` over
//! `ρ ∈ ℤ` requires.

use crate::error::Result;
use crate::fockspace::helicity_energy;
use crate::output::num;
use crate::params::{derive, DeformedQuantities, PhysParams};
use crate::quadrature::GaussLaguerre;
use crate::special::{laguerre, ln_factorial};
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;
use std::io::Write;

pub use crate::special::laguerre_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct PolarLevel {
    pub n: usize,
    pub rho: i64,
}

impl PolarLevel {
    pub fn new(n: usize, rho: i64) -> Self {
        Self { n, rho }
    }

    pub fn abs_rho(&self) -> usize {
        self.rho.unsigned_abs() as usize
    }

    /// Helicity occupation numbers `ñ± = n + (|ρ| ± ρ)/2`.
    pub fn helicity_indices(&self) -> (usize, usize) {
        let a = self.abs_rho();
        let up = (self.rho.max(0)) as usize;
        let down = (-self.rho).max(0) as usize;
        debug_assert_eq!(up + down, a);
        (self.n + up, self.n + down)
    }
}

/// `(recurrence, exact sum, relative difference)`.
pub fn laguerre_check(n: u64, alpha: u64, x: f64) -> (f64, f64, f64) {
    let rec = laguerre(n as usize, alpha as f64, x);
    let sum = laguerre_sum(n, alpha, x);
    let rel = if sum == rec { 0.0 } else { ((rec - sum) / sum).abs() };
    (rec, sum, rel)
}

/// Radial part of `Ψ_{n,ρ}` (everything except `e^{iρφ}`), log-space factorials.
pub fn radial(level: PolarLevel, r: f64, xi: f64) -> f64 {
    let a = level.abs_rho();
    let x = xi * r * r;
    let ln_norm = 0.5 * (xi / PI).ln() + 0.5 * (ln_factorial(level.n as u64) - ln_factorial((level.n + a) as u64));
    let ln_pow = if a == 0 { 0.0 } else if x == 0.0 { f64::NEG_INFINITY } else { 0.5 * a as f64 * x.ln() };
    let sign = if level.n % 2 == 0 { 1.0 } else { -1.0 };
    sign * (ln_norm - 0.5 * x + ln_pow).exp() * laguerre(level.n, a as f64, x)
}

/// `Ψ_{n,ρ}(r, φ) = (−1)ⁿ √(ξ/π) √(n!/(n+|ρ|)!) e^{−ξr²/2} (√ξ r)^{|ρ|} L_n^{(|ρ|)}(ξr²) e^{iρφ}`.
pub fn psi(level: PolarLevel, r: f64, phi: f64, p: &PhysParams) -> Result<Complex64> {
    let d = derive(p)?;
    Ok(psi_with(level, r, phi, &d))
}

pub fn psi_with(level: PolarLevel, r: f64, phi: f64, d: &DeformedQuantities) -> Complex64 {
    Complex64::from_polar(1.0, level.rho as f64 * phi) * radial(level, r, d.xi)
}

/// `ħΩ̃(n + (|ρ|+1)/2) + (ħω̃_c/2)ρ + k_{e,E}`.
pub fn energy_polar(level: PolarLevel, p: &PhysParams) -> Result<f64> {
    Ok(energy_polar_with(level, &derive(p)?, p.hbar))
}

pub fn energy_polar_with(level: PolarLevel, d: &DeformedQuantities, hbar: f64) -> f64 {
    hbar * d.omega_tilde * (level.n as f64 + 0.5 * (level.abs_rho() as f64 + 1.0))
        + 0.5 * hbar * d.omega_c_tilde * level.rho as f64
        + d.k_ee
}

/// Gauss-Laguerre order needed for exact radial overlaps up to `(n_max, |ρ|_max)`.
pub fn required_order(n_max: usize, rho_max: usize) -> usize {
    2 * (n_max + rho_max) + 8
}

fn overlap_with_rule(l1: PolarLevel, l2: PolarLevel, xi: f64, rule: &GaussLaguerre) -> f64 {
    if l1.rho != l2.rho {
        return 0.0;
    }
    // ⟨Ψ₁|Ψ₂⟩ = 2π ∫ R₁R₂ r dr = (π/ξ) ∫₀^∞ R₁R₂ dx, x = ξr²
    let s: f64 = rule
        .nodes
        .iter()
        .zip(&rule.weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(&x, &w)| {
            let r = (x / xi).sqrt();
            (w.ln() + x).exp() * radial(l1, r, xi) * radial(l2, r, xi)
        })
        .sum();
    PI / xi * s
}

/// `|⟨Ψ_{l1}|Ψ_{l2}⟩ − δ_{l1,l2}|` by Gauss-Laguerre radial quadrature with the
/// angular integral done exactly.
pub fn orthonormality_check(l1: PolarLevel, l2: PolarLevel, p: &PhysParams) -> Result<f64> {
    let d = derive(p)?;
    let order = required_order(l1.n.max(l2.n), l1.abs_rho().max(l2.abs_rho()));
    let rule = GaussLaguerre::new(order, 0.0)?;
    let delta = if l1 == l2 { 1.0 } else { 0.0 };
    Ok((overlap_with_rule(l1, l2, d.xi, &rule) - delta).abs())
}

/// Gram matrix over all levels with `n ≤ n_max`, `|ρ| ≤ rho_max`, in the order
/// returned alongside it.
pub fn gram_matrix(n_max: usize, rho_max: i64, p: &PhysParams) -> Result<(Vec<PolarLevel>, DMatrix<f64>)> {
    let d = derive(p)?;
    let rule = GaussLaguerre::new(required_order(n_max, rho_max as usize), 0.0)?;
    let levels: Vec<PolarLevel> =
        (0..=n_max).flat_map(|n| (-rho_max..=rho_max).map(move |r| PolarLevel::new(n, r))).collect();
    let k = levels.len();
    let g = DMatrix::from_fn(k, k, |i, j| overlap_with_rule(levels[i], levels[j], d.xi, &rule));
    Ok((levels, g))
}

pub fn write_polar_csv<W: Write>(p: &PhysParams, n_max: usize, rho_max: i64, w: W) -> Result<()> {
    let d = derive(p)?;
    let mut out = csv::Writer::from_writer(w);
    out.write_record(["n", "rho", "energy"])?;
    for n in 0..=n_max {
        for rho in -rho_max..=rho_max {
            let e = energy_polar_with(PolarLevel::new(n, rho), &d, p.hbar);
            out.write_record([n.to_string(), rho.to_string(), num(e)])?;
        }
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectrumPair {
    pub level: PolarLevel,
    pub n_plus: usize,
    pub n_minus: usize,
    pub e_polar: f64,
    pub e_helicity: f64,
    /// `(E_polar − k − ħΩ̃/2) / (E_helicity − k − ħΩ̃/2)`, `NaN` at the ground state.
    pub excitation_ratio: f64,
}

/// Side-by-side polar and helicity energies under `ñ± = n + (|ρ| ± ρ)/2`.
pub fn spectrum_comparison(p: &PhysParams, n_max: usize, rho_max: i64) -> Result<Vec<SpectrumPair>> {
    let d = derive(p)?;
    let base = 0.5 * p.hbar * d.omega_tilde + d.k_ee;
    let mut out = Vec::new();
    for n in 0..=n_max {
        for rho in -rho_max..=rho_max {
            let level = PolarLevel::new(n, rho);
            let (np, nm) = level.helicity_indices();
            let e_polar = energy_polar_with(level, &d, p.hbar);
            let e_helicity = helicity_energy(&d, p.hbar, np, nm);
            let den = e_helicity - base;
            out.push(SpectrumPair {
                level,
                n_plus: np,
                n_minus: nm,
                e_polar,
                e_helicity,
                excitation_ratio: if np + nm == 0 { f64::NAN } else { (e_polar - base) / den },
            });
        }
    }
    Ok(out)
}
