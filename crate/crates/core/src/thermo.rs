//! Grand-canonical thermodynamics of the deformed spectrum.

use crate::error::{Error, Result};
use crate::params::{derive, magnetic_coefficients, DeformedQuantities, PhysParams};
use crate::quadrature::integrate_adaptive;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// `β μ_{e,E}` above which the `μ ≫ T` regime is flagged as satisfied.
pub const MU_GG_T: f64 = 4.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThermoInput {
    pub beta: f64,
    pub mu: f64,
    pub params: PhysParams,
}

impl ThermoInput {
    pub fn new(beta: f64, mu: f64, params: PhysParams) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::Domain(format!("beta = {beta} must be positive and finite")));
        }
        if !mu.is_finite() {
            return Err(Error::Domain("mu must be finite".into()));
        }
        params.validate()?;
        Ok(Self { beta, mu, params })
    }

    fn with_params(&self, params: PhysParams) -> Self {
        Self { params, ..*self }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ControlParams {
    pub mu_ee: f64,
    /// `ln κ̃′± = β(μ_{e,E} ± ħΩ̃/2)`.
    pub ln_kappa_prime_plus: f64,
    pub ln_kappa_prime_minus: f64,
    pub kappa_prime_plus: f64,
    pub kappa_prime_minus: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
}

/// `μ_{e,E} = μ + ½e(E₁x₀ + E₂y₀) = μ − k_{e,E}`.
pub fn mu_ee(t: &ThermoInput, d: &DeformedQuantities) -> f64 {
    t.mu - d.k_ee
}

pub fn control_params(t: &ThermoInput) -> Result<ControlParams> {
    let d = derive(&t.params)?;
    let m = mu_ee(t, &d);
    let h = 0.5 * t.params.hbar * d.omega_tilde;
    let lp = t.beta * (m + h);
    let lm = t.beta * (m - h);
    Ok(ControlParams {
        mu_ee: m,
        ln_kappa_prime_plus: lp,
        ln_kappa_prime_minus: lm,
        kappa_prime_plus: lp.exp(),
        kappa_prime_minus: lm.exp(),
        kappa_plus: (t.beta * (t.mu + h)).exp(),
        kappa_minus: (t.beta * (t.mu - h)).exp(),
    })
}

// ---------------------------------------------------------------------------
// Fermi-Dirac / polylogarithm

/// `Σ_{k≥0} (−1)^k a_k` for a totally monotone sequence, Cohen-Rodriguez
/// Villegas-Zagier acceleration with `n` terms (error ≈ 5.8^{−n}).
fn cvz_alternating<F: Fn(usize) -> f64>(a: F, n: usize) -> f64 {
    let mut d = (3.0 + 8f64.sqrt()).powi(n as i32);
    d = 0.5 * (d + 1.0 / d);
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..n {
        c = b - c;
        s += c * a(k);
        let kf = k as f64;
        let nf = n as f64;
        b *= (kf + nf) * (kf - nf) / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// `F_s(z) = Σ_{n≥1} zⁿ/n^s` for `|z| ≤ 1` (`s ≥ 2` at `z = 1`).
pub fn fermi_dirac_f(s: u32, z: f64) -> Result<f64> {
    if s == 0 {
        return Err(Error::Domain("s must be >= 1".into()));
    }
    if !(z.abs() <= 1.0) {
        return Err(Error::Domain(format!("|z| = {} > 1", z.abs())));
    }
    if z == 1.0 {
        if s == 1 {
            return Err(Error::Domain("F_1(1) diverges".into()));
        }
        let eta = -fermi_dirac_f(s, -1.0)?;
        return Ok(eta / (1.0 - 2f64.powi(1 - s as i32)));
    }
    Ok(polylog_inner(s, z))
}

fn polylog_inner(s: u32, z: f64) -> f64 {
    let sf = s as f64;
    if z == 0.0 {
        0.0
    } else if z < 0.0 {
        let x = -z;
        // F_s(−x) = −Σ_{k≥0} (−1)^k x^{k+1}/(k+1)^s
        -cvz_alternating(|k| x.powi(k as i32 + 1) / ((k + 1) as f64).powf(sf), 40)
    } else if z <= 0.5 {
        let mut sum = 0.0;
        let mut zn = 1.0;
        for n in 1..200 {
            zn *= z;
            let term = zn / (n as f64).powf(sf);
            sum += term;
            if zn * z / (1.0 - z) < 1e-17 * sum.abs() {
                break;
            }
        }
        sum
    } else {
        // duplication: Li_s(z) = 2^{1−s} Li_s(z²) − Li_s(−z)
        2f64.powf(1.0 - sf) * polylog_inner(s, z * z) - polylog_inner(s, -z)
    }
}

// ---------------------------------------------------------------------------
// Exact grand potential

/// Which single-particle spectrum the exact grand potential sums over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpectrumKind {
    /// `(ħ/2)(Ω̃₊ñ₊ + Ω̃₋ñ₋ + Ω̃) + k_{e,E}`, the spectrum of the Hamiltonian
    /// whose symbols define the Berezin-Lieb bounds.
    #[default]
    Helicity,
    /// `ħΩ̃(n + (|ρ|+1)/2) + ħω̃_cρ/2 + k_{e,E}`, the one the Poisson
    /// decomposition is written for.
    Polar,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaExact {
    pub value: f64,
    pub spectrum: SpectrumKind,
    /// Cutoffs in the two occupation numbers.
    pub n_cut_plus: usize,
    pub n_cut_minus: usize,
    /// Certified bound on the omitted tail (absolute, in energy units).
    pub tail_bound: f64,
}

/// `ln(1 + e^{−x})` without overflow.
fn log1p_exp_neg(x: f64) -> f64 {
    if x > 0.0 {
        (-x).exp().ln_1p()
    } else {
        -x + x.exp().ln_1p()
    }
}

/// Neumaier-compensated sum.
#[derive(Default)]
struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Both spectra are `a·i + b·j + e0` over `(i, j) ∈ ℕ²`; for the polar one the
/// map `(n, ρ) → (n + (|ρ|+ρ)/2, n + (|ρ|−ρ)/2)` is a bijection onto `ℕ²`.
fn spectrum_coefficients(d: &DeformedQuantities, hbar: f64, kind: SpectrumKind) -> (f64, f64, f64) {
    let s = match kind {
        SpectrumKind::Helicity => 0.5 * hbar,
        SpectrumKind::Polar => hbar,
    };
    (s * d.omega_plus, s * d.omega_minus, 0.5 * hbar * d.omega_tilde + d.k_ee)
}

/// `Γ = −β⁻¹ Σ log(1 + e^{−β(E − μ)})` with cutoffs chosen so the omitted terms,
/// bounded by `log(1+x) ≤ x` and geometric tails, contribute less than `tol`.
pub fn gamma_exact(t: &ThermoInput, tol: f64, kind: SpectrumKind) -> Result<GammaExact> {
    if !(tol > 0.0) {
        return Err(Error::Domain("tol must be positive".into()));
    }
    let d = derive(&t.params)?;
    if d.omega_c_tilde >= d.omega_tilde {
        return Err(Error::Divergence(format!(
            "ω̃_c = {} >= Ω̃ = {}: spectrum unbounded below",
            d.omega_c_tilde, d.omega_tilde
        )));
    }
    let beta = t.beta;
    let (a, b, e0) = spectrum_coefficients(&d, t.params.hbar, kind);
    let qa = (-beta * a).exp();
    let qb = (-beta * b).exp();
    // Σ_{i≥I or j≥J} e^{−β(ai+bj+e0−μ)} ≤ C (q_a^I + q_b^J)
    let ln_c = -beta * (e0 - t.mu) - (-qa).ln_1p() - (-qb).ln_1p() - beta.ln();
    let target = (0.5 * tol).ln();
    let cut = |q_ln: f64| -> Result<usize> {
        let n = ((target - ln_c) / q_ln).ceil().max(1.0);
        if n > 5e7 {
            return Err(Error::Convergence(format!("exact sum would need {n} levels per mode")));
        }
        Ok(n as usize)
    };
    let n_i = cut(-beta * a)?;
    let n_j = cut(-beta * b)?;
    let tail_bound = ln_c.exp() * ((-beta * a * n_i as f64).exp() + (-beta * b * n_j as f64).exp());

    let mut acc = KahanSum::default();
    for i in 0..n_i {
        let ei = a * i as f64 + e0 - t.mu;
        for j in 0..n_j {
            acc.add(log1p_exp_neg(beta * (ei + b * j as f64)));
        }
    }
    Ok(GammaExact {
        value: -acc.value() / beta,
        spectrum: kind,
        n_cut_plus: n_i,
        n_cut_minus: n_j,
        tail_bound,
    })
}

// ---------------------------------------------------------------------------
// Berezin-Lieb bounds

fn phi_prefactor(t: &ThermoInput) -> f64 {
    let bw = t.beta * t.params.hbar * t.params.omega0;
    4.0 / (t.beta * bw * bw)
}

/// Closed two-branch form of `φ` taking `L = ln κ̃′` (so huge κ̃′ never overflow).
pub fn phi_from_log(ln_kappa: f64, t: &ThermoInput) -> f64 {
    let c = phi_prefactor(t);
    if ln_kappa <= 0.0 {
        c * polylog_inner(3, -ln_kappa.exp())
    } else {
        let l = ln_kappa;
        c * (-l.powi(3) / 6.0 - PI * PI * l / 6.0 + polylog_inner(3, -(-l).exp()))
    }
}

pub fn phi(kappa_prime: f64, t: &ThermoInput) -> Result<f64> {
    if !(kappa_prime > 0.0) {
        return Err(Error::Domain(format!("kappa' = {kappa_prime} must be positive")));
    }
    Ok(phi_from_log(kappa_prime.ln(), t))
}

/// `φ(κ̃′) = −(2κ̃′/(β(βħω₀)²)) ∫₀^∞ u² e^{−u}/(1 + κ̃′e^{−u}) du` by adaptive quadrature.
pub fn phi_quadrature(kappa_prime: f64, t: &ThermoInput) -> Result<f64> {
    if !(kappa_prime > 0.0) {
        return Err(Error::Domain(format!("kappa' = {kappa_prime} must be positive")));
    }
    let l = kappa_prime.ln();
    // κ̃′u²e^{−u}/(1+κ̃′e^{−u}) = u²/(1 + e^{u−L})
    let f = |u: f64| u * u / (1.0 + (u - l).exp());
    let upper = l.max(0.0) + 60.0;
    let mut total = 0.0;
    let mut pieces = vec![0.0];
    if l > 0.0 {
        pieces.push(l);
    }
    pieces.push(upper);
    for w in pieces.windows(2) {
        total += integrate_adaptive(f, w[0], w[1], 1e-300, 1e-13, 4000)?.0;
    }
    Ok(-0.5 * phi_prefactor(t) * total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bounds {
    pub lower: f64,
    pub upper: f64,
}

/// `(φ(κ̃′₊), φ(κ̃′₋))`.
pub fn berezin_lieb_bounds(t: &ThermoInput) -> Result<Bounds> {
    let cp = control_params(t)?;
    let lower = phi_from_log(cp.ln_kappa_prime_plus, t);
    let upper = phi_from_log(cp.ln_kappa_prime_minus, t);
    debug_assert!(lower <= upper);
    Ok(Bounds { lower, upper })
}

/// `4F₃(−1)/(β(βħω₀)²)`, the common value of both bounds when `κ̃′± → 1`.
pub fn high_temperature_limit(t: &ThermoInput) -> f64 {
    phi_prefactor(t) * polylog_inner(3, -1.0)
}

// ---------------------------------------------------------------------------
// Low-temperature expansion

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LowTemp {
    pub mu_ee: f64,
    pub a: f64,
    pub delta_half: f64,
    pub s_plus: f64,
    pub s_minus: f64,
    pub s0: f64,
    /// `Δ/|A+S₀|` with `−(1/βμ)³F₃` in the denominator, as printed.
    pub ratio_printed: f64,
    /// Same ratio with the `−6(1/βμ)³F₃` that `Δ/|A+S₀|` reduces to.
    pub ratio_derived: f64,
    /// `Δ/|A+S₀|` evaluated directly from the pieces.
    pub ratio_direct: f64,
    pub gamma_approx: f64,
    pub n_electrons: f64,
    pub n_electrons_leading: f64,
    /// `max |φ(κ̃′±) − (A ∓ Δ/2 + S±)|` (meaningful when both κ̃′± > 1).
    pub split_identity_dev: f64,
    pub valid_mu_gg_level: bool,
    pub valid_mu_gg_temperature: bool,
}

pub fn low_temp_suite(t: &ThermoInput) -> Result<LowTemp> {
    let d = derive(&t.params)?;
    let cp = control_params(t)?;
    let (beta, hb, w0) = (t.beta, t.params.hbar, t.params.omega0);
    let m = cp.mu_ee;
    let hw0 = hb * w0;
    let ot = d.omega_tilde;
    let c = phi_prefactor(t);
    let inv_bhw = 1.0 / (beta * hw0);
    let a = -2.0 * m * ((m / hw0).powi(2) / 3.0 + 0.25 * (ot / w0).powi(2) + PI * PI / 3.0 * inv_bhw * inv_bhw);
    let delta_half =
        2.0 * hb * ot * (0.5 * (m / hw0).powi(2) + (ot / w0).powi(2) / 24.0 + PI * PI / 6.0 * inv_bhw * inv_bhw);
    let s_plus = c * polylog_inner(3, -(-cp.ln_kappa_prime_plus).exp().min(1.0));
    let s_minus = c * polylog_inner(3, -(-cp.ln_kappa_prime_minus).exp().min(1.0));
    let f3 = polylog_inner(3, -(-beta * m).exp().min(1.0));
    let f2 = polylog_inner(2, -(-beta * m).exp().min(1.0));
    let s0 = c * f3;
    let x = hb * ot / m;
    let y = 1.0 / (beta * m);
    let num = 3.0 + y * y * PI * PI + 0.25 * x * x;
    let ratio_printed = x * num / (1.0 + PI * PI * y * y + 0.75 * x * x - y.powi(3) * f3);
    let ratio_derived = x * num / (1.0 + PI * PI * y * y + 0.75 * x * x - 6.0 * y.powi(3) * f3);
    let n_electrons = 4.0 * (m / hw0).powi(2) * (0.5 + x * x / 8.0 + PI * PI / 6.0 * y * y + y * y * f2);
    let split_identity_dev = (phi_from_log(cp.ln_kappa_prime_plus, t) - (a - delta_half + s_plus))
        .abs()
        .max((phi_from_log(cp.ln_kappa_prime_minus, t) - (a + delta_half + s_minus)).abs());
    Ok(LowTemp {
        mu_ee: m,
        a,
        delta_half,
        s_plus,
        s_minus,
        s0,
        ratio_printed,
        ratio_derived,
        ratio_direct: 2.0 * delta_half / (a + s0).abs(),
        gamma_approx: a + s0,
        n_electrons,
        n_electrons_leading: 2.0 * (m / hw0).powi(2),
        split_identity_dev,
        valid_mu_gg_level: m > 10.0 * 0.5 * hb * ot,
        valid_mu_gg_temperature: beta * m > 10.0,
    })
}

// ---------------------------------------------------------------------------
// Magnetization

fn magnetic_bracket(p: &PhysParams, d: &DeformedQuantities) -> f64 {
    let (m, w0, wc, th, hb) = (p.mass, p.omega0, p.omega_c, p.theta, p.hbar);
    wc / (w0 * w0) - m * th / (4.0 * hb * w0 * w0) * (2.0 * wc * wc + d.omega * d.omega)
        + 2.0 * wc / (w0 * w0) * (m * d.omega * th / (4.0 * hb)).powi(2)
}

fn susceptibility_bracket(p: &PhysParams, d: &DeformedQuantities) -> f64 {
    let (m, w0, wc, th, hb) = (p.mass, p.omega0, p.omega_c, p.theta, p.hbar);
    1.0 - 1.5 * m * th * wc / hb - (m * th * w0 / hb).powi(2) + 6.0 * (m * d.omega * th / (4.0 * hb)).powi(2)
}

/// `(eμ/Mc)[…] + (e²/2Mc)(E₁x₀+E₂y₀)[…]`.
pub fn magnetic_moment_closed(t: &ThermoInput) -> Result<f64> {
    let p = &t.params;
    let d = derive(p)?;
    let br = magnetic_bracket(p, &d);
    let mc = p.mass * p.c_light;
    let ex = p.e1 * d.x0 + p.e2 * d.y0;
    Ok(p.e_charge * t.mu / mc * br + p.e_charge * p.e_charge / (2.0 * mc) * ex * br)
}

/// `(e/Mcω₀)²μ[…] + (e³/2(Mcω₀)²)(E₁x₀+E₂y₀)[…]`.
pub fn susceptibility_closed(t: &ThermoInput) -> Result<f64> {
    let p = &t.params;
    let d = derive(p)?;
    let br = susceptibility_bracket(p, &d);
    let mcw = p.mass * p.c_light * p.omega0;
    let ex = p.e1 * d.x0 + p.e2 * d.y0;
    Ok((p.e_charge / mcw).powi(2) * t.mu * br + p.e_charge.powi(3) / (2.0 * mcw * mcw) * ex * br)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NumericDerivative {
    pub value: f64,
    pub coarse: f64,
    pub fine: f64,
    pub rel_error_estimate: f64,
    pub step: f64,
}

/// Richardson-extrapolated central difference `−∂f/∂B` with steps `h`, `h/2`.
pub fn minus_d_db<F: Fn(&ThermoInput) -> Result<f64>>(t: &ThermoInput, h_b: f64, f: F) -> Result<NumericDerivative> {
    if !(h_b > 0.0) {
        return Err(Error::Step("step must be positive".into()));
    }
    let b = t.params.b_field();
    if b - h_b < 0.0 {
        return Err(Error::Step(format!("step {h_b} exceeds B = {b}")));
    }
    let at = |bb: f64| f(&t.with_params(t.params.with_b_field(bb)));
    let central = |h: f64| -> Result<f64> { Ok(-(at(b + h)? - at(b - h)?) / (2.0 * h)) };
    let coarse = central(h_b)?;
    let fine = central(0.5 * h_b)?;
    let value = (4.0 * fine - coarse) / 3.0;
    let rel = (value - fine).abs() / value.abs().max(f64::MIN_POSITIVE);
    Ok(NumericDerivative { value, coarse, fine, rel_error_estimate: rel, step: h_b })
}

/// `M = −(∂Γ_exact/∂B)_μ` numerically; fails when the Richardson estimate
/// disagrees with the finer difference by more than `1e-4` relative.
pub fn magnetic_moment_numeric(t: &ThermoInput, h_b: f64, kind: SpectrumKind) -> Result<NumericDerivative> {
    let r = minus_d_db(t, h_b, |tt| Ok(gamma_exact(tt, 1e-13, kind)?.value))?;
    if r.rel_error_estimate > 1e-4 {
        return Err(Error::Step(format!("Richardson disagreement {:e}", r.rel_error_estimate)));
    }
    Ok(r)
}

/// `M^L = −(μ_{e,E}/12)((ω_c − Θ)/ω₀²)·𝓘`.
pub fn magnetic_moment_landau(t: &ThermoInput) -> Result<f64> {
    let d = derive(&t.params)?;
    let mc = magnetic_coefficients(&t.params)?;
    let w0 = t.params.omega0;
    Ok(-mu_ee(t, &d) / 12.0 * (t.params.omega_c - mc.theta_m / t.params.hbar) / (w0 * w0) * mc.i_coef)
}

// ---------------------------------------------------------------------------
// Poisson decomposition

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscHelpers {
    pub theta_m: f64,
    pub b_theta: f64,
    pub pi_omega: f64,
    pub pi_omega_plus: f64,
    pub pi_omega_minus: f64,
    pub i_coef: f64,
    pub k_coef: f64,
    pub l_coef: f64,
}

pub fn osc_helpers(t: &ThermoInput) -> Result<OscHelpers> {
    let d = derive(&t.params)?;
    let mc = magnetic_coefficients(&t.params)?;
    let hb = t.params.hbar;
    Ok(OscHelpers {
        theta_m: mc.theta_m,
        b_theta: mc.b_theta,
        pi_omega: PI / (hb * d.omega_tilde),
        pi_omega_plus: PI / (hb * d.omega_plus),
        pi_omega_minus: PI / (hb * d.omega_minus),
        i_coef: mc.i_coef,
        k_coef: mc.k_coef,
        l_coef: mc.l_coef,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoissonParts {
    pub gamma0: f64,
    pub gamma_l: f64,
    pub gamma_osc: f64,
    pub k_used: usize,
    pub l_used: usize,
    pub mu_gg_t: bool,
}

impl PoissonParts {
    pub fn total(&self) -> f64 {
        self.gamma0 + self.gamma_l + self.gamma_osc
    }
}

/// `Γ⁰ = −(1/(β(ħω₀)²)) ∫₀^∞ s log(1+e^{−β(s−μ_{e,E})}) ds + μ_{e,E}/12`, after
/// reducing the `(ε, η)` integral to `s = ε + η`.
pub fn gamma0(t: &ThermoInput) -> Result<f64> {
    let d = derive(&t.params)?;
    let m = mu_ee(t, &d);
    let beta = t.beta;
    let f = |s: f64| s * log1p_exp_neg(beta * (s - m));
    let end = m.max(0.0) + 60.0 / beta;
    let mut total = 0.0;
    let mut pts = vec![0.0];
    if m > 0.0 {
        pts.push(m);
    }
    pts.push(end);
    for w in pts.windows(2) {
        total += integrate_adaptive(f, w[0], w[1], 1e-300, 1e-14, 4000)?.0;
    }
    let hw0 = t.params.hbar * t.params.omega0;
    Ok(-total / (beta * hw0 * hw0) + m / 12.0)
}

/// `(μ_{e,E}/24)((ω_c − Θ/ħ)/ω₀)²`.
pub fn gamma_l(t: &ThermoInput) -> Result<f64> {
    let d = derive(&t.params)?;
    let h = osc_helpers(t)?;
    let w = (t.params.omega_c - h.theta_m / t.params.hbar) / t.params.omega0;
    Ok(mu_ee(t, &d) / 24.0 * w * w)
}

/// `Σ_{k≥1} (−1)^k [k sin(2ak) − d sin(2ad)]/(k² − d²)` in closed form.
pub fn alternating_k_sum(a: f64, d: f64) -> f64 {
    let s = (PI * d).sin();
    if s.abs() < 1e-6 {
        let h = 1e-5;
        return 0.5 * (alternating_k_sum(a, d + h) + alternating_k_sum(a, d - h));
    }
    let x = (2.0 * a).rem_euclid(2.0 * PI);
    let x = if x > PI { x - 2.0 * PI } else { x };
    let first = if (x.abs() - PI).abs() < 1e-15 { 0.0 } else { -(PI / 2.0) * (d * x).sin() / s };
    first + (PI / 2.0) * (2.0 * a * d).sin() / s - (2.0 * a * d).sin() / (2.0 * d)
}

/// Oscillatory part, summed until the `1/Sinh` envelopes drop below `1e-14`.
pub fn gamma_osc(t: &ThermoInput, k_cut: usize, l_cut: usize) -> Result<(f64, usize, usize)> {
    let d = derive(&t.params)?;
    let m = mu_ee(t, &d);
    let beta = t.beta;
    let hb = t.params.hbar;
    let ot = d.omega_tilde;
    let w0 = t.params.omega0;
    let thr = 1e-14;
    let pi_o = PI / (hb * ot);

    // k-sum
    let mut t1 = 0.0;
    let mut k_used = 0;
    let mut ok = false;
    for k in 1..=k_cut {
        let kf = k as f64;
        let arg = 2.0 * PI * PI * kf / (beta * hb * ot);
        let env = ((ot / w0).powi(2) / (kf * kf) + PI * PI / 3.0) / (2.0 * PI * beta) / arg.sinh();
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        t1 += sign * ((ot / w0).powi(2) / (kf * kf) - PI * PI / 3.0) * (2.0 * pi_o * kf * m).sin()
            / arg.sinh()
            / (2.0 * PI * beta);
        k_used = k;
        if env < thr || !env.is_finite() {
            ok = true;
            break;
        }
    }
    if !ok {
        return Err(Error::Convergence(format!("k-sum not suppressed below {thr:e} by k = {k_cut}")));
    }

    let mut t2 = 0.0;
    let mut t3 = 0.0;
    let mut l_used = 0;
    for os in [d.omega_plus, d.omega_minus] {
        let pi_s = PI / (hb * os);
        let c = ot / os;
        let mut ok = false;
        for l in 1..=l_cut {
            let lf = l as f64;
            let sh = (2.0 * PI * PI * lf / (beta * hb * os)).sinh();
            t2 += os / ot / (lf * lf) * (2.0 * pi_s * lf * m).sin() / sh / (2.0 * PI * beta);
            let ks = alternating_k_sum(pi_o * m, c * lf);
            t3 += ks / lf / sh / (PI * beta);
            l_used = l_used.max(l);
            let env = (1.0 + ks.abs()) / lf / sh / (PI * beta);
            if env < thr || !env.is_finite() {
                ok = true;
                break;
            }
        }
        if !ok {
            return Err(Error::Convergence(format!("l-sum not suppressed below {thr:e} by l = {l_cut}")));
        }
    }
    Ok((t1 + t2 + t3, k_used, l_used))
}

pub fn poisson_decomposition(t: &ThermoInput, k_cut: usize, l_cut: usize) -> Result<PoissonParts> {
    if k_cut < 8 || l_cut < 8 {
        return Err(Error::Domain("k_cut and l_cut must be >= 8".into()));
    }
    let d = derive(&t.params)?;
    let (gamma_osc, k_used, l_used) = gamma_osc(t, k_cut, l_cut)?;
    Ok(PoissonParts {
        gamma0: gamma0(t)?,
        gamma_l: gamma_l(t)?,
        gamma_osc,
        k_used,
        l_used,
        mu_gg_t: t.beta * mu_ee(t, &d) >= MU_GG_T,
    })
}

// ---------------------------------------------------------------------------
// Everything at one point

#[derive(Debug, Clone, Serialize)]
pub struct GammaBreakdown {
    pub beta: f64,
    pub mu: f64,
    pub theta: f64,
    pub gamma_lower: f64,
    pub gamma_exact: f64,
    pub gamma_upper: f64,
    pub gamma0: f64,
    pub gamma_l: f64,
    pub gamma_osc: f64,
    pub m_closed: f64,
    pub m_numeric: f64,
    pub chi: f64,
    pub exact: GammaExact,
    pub poisson_k_used: usize,
    pub poisson_l_used: usize,
}

impl GammaBreakdown {
    pub fn sandwich_ok(&self) -> bool {
        self.gamma_lower <= self.gamma_exact && self.gamma_exact <= self.gamma_upper
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermoOptions {
    pub tol: f64,
    pub spectrum: SpectrumKind,
    pub k_cut: usize,
    pub l_cut: usize,
    /// Relative step for the numeric B-derivative (`h_B = rel_step·B`).
    pub rel_step: f64,
}

impl Default for ThermoOptions {
    fn default() -> Self {
        Self { tol: 1e-10, spectrum: SpectrumKind::Helicity, k_cut: 400, l_cut: 400, rel_step: 1e-3 }
    }
}

pub fn thermo_point(t: &ThermoInput, opts: &ThermoOptions) -> Result<GammaBreakdown> {
    let exact = gamma_exact(t, opts.tol, opts.spectrum)?;
    let bounds = berezin_lieb_bounds(t)?;
    let parts = poisson_decomposition(t, opts.k_cut, opts.l_cut)?;
    let b = t.params.b_field();
    let m_numeric = if b > 0.0 {
        minus_d_db(t, opts.rel_step * b, |tt| Ok(gamma_exact(tt, 1e-13, SpectrumKind::Polar)?.value))?.value
    } else {
        f64::NAN
    };
    Ok(GammaBreakdown {
        beta: t.beta,
        mu: t.mu,
        theta: t.params.theta,
        gamma_lower: bounds.lower,
        gamma_exact: exact.value,
        gamma_upper: bounds.upper,
        gamma0: parts.gamma0,
        gamma_l: parts.gamma_l,
        gamma_osc: parts.gamma_osc,
        m_closed: magnetic_moment_closed(t)?,
        m_numeric,
        chi: susceptibility_closed(t)?,
        exact,
        poisson_k_used: parts.k_used,
        poisson_l_used: parts.l_used,
    })
}
