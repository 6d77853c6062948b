//! Two-mode coherent states `|z₊, z₋, τ)` on the truncated helicity space.

use crate::error::{Error, Result};
use crate::fockspace::FockRep;
use crate::params::{derive, PhysParams};
use crate::quadrature::GaussLaguerre;
use crate::special::ln_factorial;
use num_complex::Complex64;
use serde::Serialize;
use std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CSLabel {
    pub z_plus: Complex64,
    pub z_minus: Complex64,
    pub tau: f64,
}

impl CSLabel {
    pub fn new(z_plus: Complex64, z_minus: Complex64, tau: f64) -> Self {
        Self { z_plus, z_minus, tau }
    }
}

/// Rejects `|z|²` values whose Poisson tail beyond `n_trunc` is not negligible.
pub fn check_truncation(abs_z_sq: f64, n_trunc: usize) -> Result<()> {
    let n = n_trunc as f64;
    if abs_z_sq > 0.1 * n {
        return Err(Error::Truncation(format!("|z|² = {abs_z_sq} exceeds 0.1·n_trunc = {}", 0.1 * n)));
    }
    let tail = (abs_z_sq * std::f64::consts::E / n).powf(n);
    if tail >= 1e-12 {
        return Err(Error::Truncation(format!("tail bound {tail:e} >= 1e-12 at n_trunc = {n_trunc}")));
    }
    Ok(())
}

/// `w^k / √k!` for `k < n`.
pub fn scaled_powers(w: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut cur = Complex64::new(1.0, 0.0);
    for k in 0..n {
        if k > 0 {
            cur = cur * w / (k as f64).sqrt();
        }
        out.push(cur);
    }
    out
}

/// Coefficients `e^{−(|z₊|²+|z₋|²)/2} z₊^{ñ₊} z̄₋^{ñ₋} e^{−iτE_{ñ₊,ñ₋}} / √(ñ₊!ñ₋!)`.
pub fn cs_vector(label: &CSLabel, rep: &FockRep) -> Result<Vec<Complex64>> {
    let n = rep.n_trunc;
    check_truncation(label.z_plus.norm_sqr(), n)?;
    check_truncation(label.z_minus.norm_sqr(), n)?;
    let g = (-0.5 * (label.z_plus.norm_sqr() + label.z_minus.norm_sqr())).exp();
    let cp = scaled_powers(label.z_plus, n);
    let cm = scaled_powers(label.z_minus.conj(), n);
    Ok((0..n * n)
        .map(|i| {
            let phase = Complex64::from_polar(1.0, -label.tau * rep.e_levels[i]);
            cp[i / n] * cm[i % n] * phase * g
        })
        .collect())
}

/// `e^{−itH}` on a helicity-basis vector.
pub fn evolve(state: &[Complex64], t: f64, rep: &FockRep) -> Vec<Complex64> {
    state
        .iter()
        .zip(&rep.e_levels)
        .map(|(c, &e)| c * Complex64::from_polar(1.0, -t * e))
        .collect()
}

pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(a: &[Complex64]) -> f64 {
    inner(a, a).re.sqrt()
}

/// Max componentwise `|e^{−itH}|z,τ) − |z,τ+t)|`.
pub fn stability_defect(label: &CSLabel, t: f64, rep: &FockRep) -> Result<f64> {
    let a = evolve(&cs_vector(label, rep)?, t, rep);
    let b = cs_vector(&CSLabel { tau: label.tau + t, ..*label }, rep)?;
    Ok(a.iter().zip(&b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
}

/// Analytic overlap `(z|w)` at equal τ = 0.
pub fn overlap_analytic(z: &CSLabel, w: &CSLabel) -> Complex64 {
    let mode = |a: Complex64, b: Complex64| (-0.5 * a.norm_sqr() - 0.5 * b.norm_sqr() + a.conj() * b).exp();
    mode(z.z_plus, w.z_plus) * mode(z.z_minus.conj(), w.z_minus.conj())
}

/// `(ħ/2)(Ω̃₊|z₊|² + Ω̃₋|z₋|² + Ω̃) + k_{e,E}`.
pub fn lower_symbol_h(label: &CSLabel, p: &PhysParams) -> Result<f64> {
    let d = derive(p)?;
    Ok(0.5 * p.hbar * (d.omega_plus * label.z_plus.norm_sqr() + d.omega_minus * label.z_minus.norm_sqr() + d.omega_tilde)
        + d.k_ee)
}

/// `(z|H|z)` on the truncated representation, with H assembled from ladder matrices.
pub fn lower_symbol_numeric(label: &CSLabel, rep: &FockRep) -> Result<f64> {
    let v = cs_vector(label, rep)?;
    let hv = rep.h_from_ladders().mul_vec(&v);
    Ok(inner(&v, &hv).re)
}

/// `(ħ/2)(Ω̃₊|z₊|² + Ω̃₋|z₋|² − Ω̃) + k_{e,E}`.
pub fn upper_symbol_h(label: &CSLabel, p: &PhysParams) -> Result<f64> {
    let d = derive(p)?;
    Ok(0.5 * p.hbar * (d.omega_plus * label.z_plus.norm_sqr() + d.omega_minus * label.z_minus.norm_sqr() - d.omega_tilde)
        + d.k_ee)
}

/// Max deviation from δ of `(1/π²)∫|z)(z| d²z₊d²z₋` between basis states with
/// both indices `≤ n_max`. Off-diagonal entries vanish by the angular
/// integration; diagonal entries use Gauss-Laguerre in `u = |z|²`.
pub fn resolution_check(rep: &FockRep, radial_order: usize, n_max: usize) -> Result<f64> {
    if n_max >= rep.n_trunc {
        return Err(Error::Truncation(format!("n_max = {n_max} must be < n_trunc = {}", rep.n_trunc)));
    }
    if 2 * radial_order < n_max + 1 {
        return Err(Error::Quadrature(format!(
            "radial order {radial_order} cannot integrate u^{n_max} e^(-u) exactly"
        )));
    }
    let rule = GaussLaguerre::new(radial_order, 0.0)?;
    // (1/π)∫ e^{−|z|²}|z|^{2n}/n! d²z = ∫₀^∞ e^{−u} uⁿ/n! du
    let mode: Vec<f64> = (0..=n_max)
        .map(|n| {
            rule.nodes
                .iter()
                .zip(&rule.weights)
                .filter(|(_, &w)| w > 0.0)
                .map(|(&u, &w)| (w.ln() + n as f64 * u.ln() - ln_factorial(n as u64)).exp())
                .sum()
        })
        .collect();
    let mut dev: f64 = 0.0;
    for a in &mode {
        for b in &mode {
            dev = dev.max((a * b - 1.0).abs());
        }
    }
    Ok(dev)
}

#[derive(Debug, Clone, Serialize)]
pub struct VorosReport {
    pub integral: Complex64,
    pub series: Complex64,
    /// Individual `k` terms of the series.
    pub terms: Vec<Complex64>,
    pub deviation: f64,
}

fn falling(m: usize, i: usize) -> f64 {
    (ln_factorial(m as u64) - ln_factorial((m - i) as u64)).exp()
}

fn binom(k: usize, i: usize) -> f64 {
    (ln_factorial(k as u64) - ln_factorial(i as u64) - ln_factorial((k - i) as u64)).exp().round()
}

/// Compares the order-`K` truncation of `Σ_k (1/k!) ∂^k_z̄[z̄^{m'}e^{−z̄z}] ∂^k_z[z^m e^{−z̄z}]`
/// (z̄ and z treated as independent) against the Gaussian integral
/// `(1/π)∫d²u e^{−|u|²}(z̄+ū)^{m'}(z+u)^m e^{−2z̄z−ūz−z̄u}`, both divided by `√(m'!m!)`.
pub fn voros_expansion_check(k_order: usize, m_left: usize, m_right: usize, z: Complex64) -> Result<VorosReport> {
    if k_order > 12 || m_left > 8 || m_right > 8 {
        return Err(Error::Domain("voros check limited to K <= 12 and indices <= 8".into()));
    }
    let zb = z.conj();
    let norm = (0.5 * (ln_factorial(m_left as u64) + ln_factorial(m_right as u64))).exp();
    let gauss = (-zb * z).exp();
    let pw = |b: Complex64, e: usize| b.powu(e as u32);
    let terms: Vec<Complex64> = (0..=k_order)
        .map(|k| {
            let left: Complex64 = (0..=k.min(m_left))
                .map(|i| pw(zb, m_left - i) * pw(-z, k - i) * binom(k, i) * falling(m_left, i))
                .sum();
            let right: Complex64 = (0..=k.min(m_right))
                .map(|i| pw(z, m_right - i) * pw(-zb, k - i) * binom(k, i) * falling(m_right, i))
                .sum();
            left * right * gauss * gauss / ln_factorial(k as u64).exp() / norm
        })
        .collect();
    let series: Complex64 = terms.iter().sum();

    let rule = GaussLaguerre::new(60, 0.0)?;
    let n_ang = 64;
    let mut integral = Complex64::new(0.0, 0.0);
    for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
        if w == 0.0 {
            continue;
        }
        let r = x.sqrt();
        let mut ang = Complex64::new(0.0, 0.0);
        for j in 0..n_ang {
            let u = Complex64::from_polar(r, 2.0 * PI * j as f64 / n_ang as f64);
            let ub = u.conj();
            ang += pw(zb + ub, m_left) * pw(z + u, m_right) * (-2.0 * zb * z - ub * z - zb * u).exp();
        }
        // (1/π) d²u = (1/π)·½ dx dφ; uniform angular rule gives 2π·mean
        integral += w * ang / n_ang as f64;
    }
    integral /= norm;
    Ok(VorosReport { integral, series, deviation: (integral - series).norm(), terms })
}

/// Summary emitted by the `cs-verify` subcommand.
#[derive(Debug, Clone, Serialize)]
pub struct CsVerifyReport {
    pub resolution_deviation: f64,
    pub symbol_deviation: f64,
    pub stability_ok: bool,
}

pub fn cs_verify(p: &PhysParams, n_trunc: usize, labels: &[CSLabel]) -> Result<CsVerifyReport> {
    let rep = FockRep::build(p, n_trunc)?;
    let n_max = 16.min(n_trunc - 1);
    let resolution_deviation = resolution_check(&rep, n_max + 8, n_max)?;
    let h = rep.h_from_ladders();
    let mut symbol_deviation: f64 = 0.0;
    let mut stability_ok = true;
    for l in labels {
        let v = cs_vector(l, &rep)?;
        let num = inner(&v, &h.mul_vec(&v)).re;
        symbol_deviation = symbol_deviation.max((num - lower_symbol_h(l, p)?).abs());
        stability_ok &= stability_defect(l, 0.37, &rep)? < 1e-13;
    }
    Ok(CsVerifyReport { resolution_deviation, symbol_deviation, stability_ok })
}
