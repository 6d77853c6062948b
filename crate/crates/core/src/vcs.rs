//! Matrix vector coherent states on `ℂ⁴ ⊗ H_q ⊗ H_q` and their quaternionic
//! specialization.
//!
//! A family member `|…, j, ñ, m̃)` is stored as the coefficient tensor
//! `T[a, m, n]` of `χ^a ⊗ |ñ⟩⟨m̃| ⊗ |m⟩⟨n|`; the labels `ñ, m̃` are spectators.

use crate::error::{Error, Result};
use crate::fockspace::dimensionless_energy;
use crate::params::DeformedQuantities;
use crate::quadrature::{integrate_adaptive, GaussLaguerre};
use crate::special::ln_factorial;
use nalgebra::{DMatrix, Matrix2, Matrix4, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VcsState {
    pub n_trunc: usize,
    pub data: Vec<Complex64>,
}

impl VcsState {
    fn zeros(n: usize) -> Self {
        Self { n_trunc: n, data: vec![Complex64::new(0.0, 0.0); 4 * n * n] }
    }

    pub fn idx(&self, a: usize, m: usize, n: usize) -> usize {
        (a * self.n_trunc + m) * self.n_trunc + n
    }

    pub fn get(&self, a: usize, m: usize, n: usize) -> Complex64 {
        self.data[self.idx(a, m, n)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// `e^{−itH^{dim}}`, with `H^{dim}|m⟩⟨n| = Ẽ_{n,m}|m⟩⟨n|`.
    pub fn evolve(&self, t: f64, d: &DeformedQuantities) -> Self {
        let mut out = self.clone();
        let nt = self.n_trunc;
        for a in 0..4 {
            for m in 0..nt {
                for n in 0..nt {
                    let k = out.idx(a, m, n);
                    out.data[k] *= Complex64::from_polar(1.0, -t * dimensionless_energy(d, n, m));
                }
            }
        }
        out
    }
}

fn check_truncation(modulus: f64, n_trunc: usize) -> Result<()> {
    let m2 = modulus * modulus;
    // the omitted Poisson tail m2^N/N! must be negligible
    if n_trunc < 2 || (n_trunc as f64) * m2.max(1e-300).ln() - ln_factorial(n_trunc as u64) > (1e-13f64).ln() {
        return Err(Error::Truncation(format!("n_trunc = {n_trunc} too small for modulus {modulus}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Diagonal matrix VCS

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagLabel {
    pub z: [Complex64; 4],
    pub w: [Complex64; 4],
    pub tau: f64,
}

impl DiagLabel {
    pub fn new(z: [Complex64; 4], w: [Complex64; 4], tau: f64) -> Self {
        Self { z, w, tau }
    }

    fn max_modulus(&self) -> f64 {
        self.z.iter().chain(&self.w).map(|x| x.norm()).fold(0.0, f64::max)
    }
}

/// `𝒩(𝔷, 𝔴) = Σ_j e^{2(r_j² + ρ_j²)}`.
pub fn mvcs_normalization(label: &DiagLabel) -> f64 {
    (0..4).map(|j| (2.0 * (label.z[j].norm_sqr() + label.w[j].norm_sqr())).exp()).sum()
}

/// `w^k/√k!` for `k < n`.
fn scaled_powers(w: Complex64, n: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(n);
    let mut cur = c(1.0);
    for k in 0..n {
        out.push(cur);
        cur = cur * w / ((k + 1) as f64).sqrt();
    }
    out
}

pub fn mvcs_state(
    label: &DiagLabel,
    j: usize,
    n_tilde: usize,
    m_tilde: usize,
    n_trunc: usize,
    d: &DeformedQuantities,
) -> Result<VcsState> {
    if !(1..=4).contains(&j) {
        return Err(Error::Domain(format!("vector index j = {j} outside 1..4")));
    }
    check_truncation(label.max_modulus(), n_trunc)?;
    let a = j - 1;
    let (z, w) = (label.z[a], label.w[a]);
    let zp = scaled_powers(z, n_trunc.max(n_tilde + 1));
    let wp = scaled_powers(w, n_trunc.max(m_tilde + 1));
    let pre = zp[n_tilde].conj() * wp[m_tilde].conj() / mvcs_normalization(label).sqrt();
    let mut s = VcsState::zeros(n_trunc);
    for m in 0..n_trunc {
        for n in 0..n_trunc {
            let k = s.idx(a, m, n);
            s.data[k] = pre * zp[n] * wp[m] * Complex64::from_polar(1.0, -label.tau * dimensionless_energy(d, n, m));
        }
    }
    Ok(s)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MvcsReport {
    pub family_norm: f64,
    pub action_brute: f64,
    /// `½((Ω̃₊/Ω̃)|𝔷|² + (Ω̃₋/Ω̃)|𝔴|² + 1)` with `|𝔷|² = Σ_j e^{2(r_j²+ρ_j²)} r_j² / 𝒩`.
    pub action_weighted: f64,
    /// Same with `|𝔷|² = Σ_j r_j²`.
    pub action_plain: f64,
    pub stability_defect: f64,
}

/// Family sums over `j, ñ, m̃ < n_trunc` by direct summation of the states.
pub fn mvcs_check(label: &DiagLabel, n_trunc: usize, d: &DeformedQuantities) -> Result<MvcsReport> {
    let mut norm = 0.0;
    let mut action = 0.0;
    for j in 1..=4 {
        for nt in 0..n_trunc {
            for mt in 0..n_trunc {
                let s = mvcs_state(label, j, nt, mt, n_trunc, d)?;
                for m in 0..n_trunc {
                    for n in 0..n_trunc {
                        let p = s.get(j - 1, m, n).norm_sqr();
                        norm += p;
                        action += p * dimensionless_energy(d, n, m);
                    }
                }
            }
        }
    }
    let nn = mvcs_normalization(label);
    let wz: f64 = (0..4)
        .map(|j| (2.0 * (label.z[j].norm_sqr() + label.w[j].norm_sqr())).exp() * label.z[j].norm_sqr())
        .sum::<f64>()
        / nn;
    let ww: f64 = (0..4)
        .map(|j| (2.0 * (label.z[j].norm_sqr() + label.w[j].norm_sqr())).exp() * label.w[j].norm_sqr())
        .sum::<f64>()
        / nn;
    let pz: f64 = label.z.iter().map(|x| x.norm_sqr()).sum();
    let pw: f64 = label.w.iter().map(|x| x.norm_sqr()).sum();
    let (rp, rm) = (d.omega_plus / d.omega_tilde, d.omega_minus / d.omega_tilde);

    let t = 0.37;
    let mut stab = 0.0f64;
    for j in 1..=4 {
        let a = mvcs_state(label, j, 1, 2, n_trunc, d)?.evolve(t, d);
        let later = DiagLabel { tau: label.tau + t, ..*label };
        let b = mvcs_state(&later, j, 1, 2, n_trunc, d)?;
        stab = stab.max(a.max_abs_diff(&b));
    }
    Ok(MvcsReport {
        family_norm: norm,
        action_brute: action,
        action_weighted: 0.5 * (rp * wz + rm * ww + 1.0),
        action_plain: 0.5 * (rp * pz + rm * pw + 1.0),
        stability_defect: stab,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MomentReport {
    /// `max_n |∫₀^∞ λ(r) r^{2n+1} dr / n! − 1|` by Gauss-Laguerre in `x = r²`.
    pub gauss_laguerre: f64,
    /// Same integral by adaptive quadrature directly in `r`.
    pub adaptive: f64,
}

/// `λ(r) = ϖ(r) = 2e^{−r²}`.
pub fn lambda_weight(r: f64) -> f64 {
    2.0 * (-r * r).exp()
}

pub fn moment_weight_check(n_max: usize) -> Result<MomentReport> {
    if n_max > 40 {
        return Err(Error::Domain("n_max must be <= 40".into()));
    }
    let gl = GaussLaguerre::new(32, 0.0)?;
    let mut dev_gl = 0.0f64;
    let mut dev_ad = 0.0f64;
    for n in 0..=n_max {
        let lf = ln_factorial(n as u64);
        // λ(√x) e^{x} x^n / 2 against the e^{−x} weight
        let v = gl.integrate(|x| lambda_weight(x.sqrt()) * x.exp() * (n as f64 * x.ln() - lf).exp() / 2.0);
        dev_gl = dev_gl.max((v - 1.0).abs());
        let peak = (n as f64 + 0.5).sqrt();
        let f = |r: f64| lambda_weight(r) * ((2 * n + 1) as f64 * r.ln() - lf).exp();
        let (a, _) = integrate_adaptive(f, 0.0, peak, 1e-300, 1e-13, 2000)?;
        let (b, _) = integrate_adaptive(f, peak, peak + 12.0, 1e-300, 1e-13, 2000)?;
        dev_ad = dev_ad.max((a + b - 1.0).abs());
    }
    Ok(MomentReport { gauss_laguerre: dev_gl, adaptive: dev_ad })
}

// ---------------------------------------------------------------------------
// Quaternions

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuaternionLabel {
    pub r: f64,
    pub vartheta: f64,
    pub phi: f64,
    pub eta: f64,
    pub rho: f64,
    pub gamma: f64,
    pub varphi: f64,
    pub varrho: f64,
}

impl QuaternionLabel {
    pub fn validate(&self) -> Result<()> {
        let tau = 2.0 * PI;
        let checks = [
            (self.r >= 0.0 && self.r.is_finite(), "r >= 0"),
            (self.rho >= 0.0 && self.rho.is_finite(), "rho >= 0"),
            ((0.0..tau).contains(&self.vartheta), "vartheta in [0, 2pi)"),
            ((0.0..tau).contains(&self.eta), "eta in [0, 2pi)"),
            ((0.0..tau).contains(&self.gamma), "gamma in [0, 2pi)"),
            ((0.0..tau).contains(&self.varrho), "varrho in [0, 2pi)"),
            ((0.0..=PI).contains(&self.phi), "phi in [0, pi]"),
            ((0.0..=PI).contains(&self.varphi), "varphi in [0, pi]"),
        ];
        for (ok, msg) in checks {
            if !ok {
                return Err(Error::Domain(format!("quaternion label: {msg}")));
            }
        }
        Ok(())
    }

    /// Label with `ρ = 0`.
    pub fn only_q(r: f64, vartheta: f64, phi: f64, eta: f64) -> Self {
        Self { r, vartheta, phi, eta, rho: 0.0, gamma: 0.0, varphi: 0.0, varrho: 0.0 }
    }
}

/// `σ(n̂) = [[cos φ, e^{iη} sin φ], [e^{−iη} sin φ, −cos φ]]`.
pub fn sigma(phi: f64, eta: f64) -> Matrix2<Complex64> {
    Matrix2::new(
        c(phi.cos()),
        Complex64::from_polar(phi.sin(), eta),
        Complex64::from_polar(phi.sin(), -eta),
        c(-phi.cos()),
    )
}

fn block_diag(s: &Matrix2<Complex64>) -> Matrix4<Complex64> {
    let mut m = Matrix4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(s);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(s);
    m
}

/// `r(I₄ cos ϑ + iΘ(n̂) sin ϑ)`.
pub fn quaternion(r: f64, angle: f64, phi: f64, eta: f64) -> Matrix4<Complex64> {
    let th = block_diag(&sigma(phi, eta));
    (Matrix4::identity() * c(angle.cos()) + th * (I * angle.sin())) * c(r)
}

/// `(𝔮, 𝔔)`.
pub fn quaternion_build(q: &QuaternionLabel) -> Result<(Matrix4<Complex64>, Matrix4<Complex64>)> {
    q.validate()?;
    Ok((quaternion(q.r, q.vartheta, q.phi, q.eta), quaternion(q.rho, q.gamma, q.varphi, q.varrho)))
}

fn su2(xi1: f64, phi1: f64, xi2: f64) -> Matrix2<Complex64> {
    let ud = |x: f64| Matrix2::new(Complex64::from_polar(1.0, x / 2.0), c(0.0), c(0.0), Complex64::from_polar(1.0, -x / 2.0));
    let (ch, sh) = ((phi1 / 2.0).cos(), (phi1 / 2.0).sin());
    let up = Matrix2::new(c(ch), I * sh, I * sh, c(ch));
    ud(xi1) * up * ud(xi2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Su2RouteReport {
    /// `max |U𝔷U† − 𝔮|` with `ξ₁ = ξ₂ = η`.
    pub printed: f64,
    /// Same with `ξ₁ = η + π/2` (`ξ₂` drops out).
    pub corrected: f64,
}

/// Conjugates `𝔷 = diag(z, z̄, z, z̄)`, `z = re^{iϑ}`, by `U = diag(u, u)`, `u = u_{ξ₁}u_φu_{ξ₂}`.
pub fn su2_route(r: f64, vartheta: f64, phi: f64, eta: f64) -> Su2RouteReport {
    let z = Complex64::from_polar(r, vartheta);
    let zd = Matrix4::from_diagonal(&Vector4::new(z, z.conj(), z, z.conj()));
    let target = quaternion(r, vartheta, phi, eta);
    let dev = |xi1: f64, xi2: f64| {
        let u = block_diag(&su2(xi1, phi, xi2));
        (u * zd * u.adjoint() - target).iter().map(|x| x.norm()).fold(0.0, f64::max)
    };
    Su2RouteReport { printed: dev(eta, eta), corrected: dev(eta + PI / 2.0, eta) }
}

// ---------------------------------------------------------------------------
// Quaternionic VCS

/// `𝒩(r, ρ) = 4e^{2(r²+ρ²)}`.
pub fn qvcs_normalization(r: f64, rho: f64) -> f64 {
    4.0 * (2.0 * (r * r + rho * rho)).exp()
}

/// `W(r, ρ) = 𝒩(r, ρ) e^{−(r²+ρ²)} / π²`.
pub fn qvcs_weight(r: f64, rho: f64) -> f64 {
    qvcs_normalization(r, rho) * (-(r * r + rho * rho)).exp() / (PI * PI)
}

/// `M^k/√k!` for `k < n`.
fn matrix_powers(m: &Matrix4<Complex64>, n: usize) -> Vec<Matrix4<Complex64>> {
    let mut out = Vec::with_capacity(n);
    let mut cur = Matrix4::identity();
    for k in 0..n {
        out.push(cur);
        cur = m * cur / c(((k + 1) as f64).sqrt());
    }
    out
}

struct QPowers {
    q: Vec<Matrix4<Complex64>>,
    qd: Vec<Matrix4<Complex64>>,
    big_q: Vec<Matrix4<Complex64>>,
    big_qd: Vec<Matrix4<Complex64>>,
}

impl QPowers {
    fn new(q: &QuaternionLabel, n: usize) -> Result<Self> {
        let (a, b) = quaternion_build(q)?;
        Ok(Self {
            q: matrix_powers(&a, n),
            qd: matrix_powers(&a.adjoint(), n),
            big_q: matrix_powers(&b, n),
            big_qd: matrix_powers(&b.adjoint(), n),
        })
    }
}

fn basis(j: usize) -> Result<Vector4<Complex64>> {
    if !(1..=4).contains(&j) {
        return Err(Error::Domain(format!("vector index j = {j} outside 1..4")));
    }
    let mut v = Vector4::zeros();
    v[j - 1] = c(1.0);
    Ok(v)
}

/// Coefficients `𝔮ⁿ 𝔮̄^ñ 𝔔^m 𝔔̄^m̃ χ^j / √(n! ñ! m! m̃!)` with `𝔮̄ = 𝔮†`, in that order.
pub fn qvcs_state(
    q: &QuaternionLabel,
    tau: f64,
    j: usize,
    n_tilde: usize,
    m_tilde: usize,
    n_trunc: usize,
    d: &DeformedQuantities,
) -> Result<VcsState> {
    check_truncation(q.r.max(q.rho), n_trunc)?;
    let pw = QPowers::new(q, n_trunc.max(n_tilde + 1).max(m_tilde + 1))?;
    qvcs_state_with(&pw, q, tau, j, n_tilde, m_tilde, n_trunc, d)
}

#[allow(clippy::too_many_arguments)]
fn qvcs_state_with(
    pw: &QPowers,
    q: &QuaternionLabel,
    tau: f64,
    j: usize,
    n_tilde: usize,
    m_tilde: usize,
    n_trunc: usize,
    d: &DeformedQuantities,
) -> Result<VcsState> {
    let chi = basis(j)?;
    let inv = 1.0 / qvcs_normalization(q.r, q.rho).sqrt();
    let mut s = VcsState::zeros(n_trunc);
    let tail = pw.big_qd[m_tilde] * chi;
    for m in 0..n_trunc {
        let right = pw.qd[n_tilde] * (pw.big_q[m] * tail);
        for n in 0..n_trunc {
            let v = pw.q[n] * right * c(inv) * Complex64::from_polar(1.0, -tau * dimensionless_energy(d, n, m));
            for a in 0..4 {
                let k = s.idx(a, m, n);
                s.data[k] = v[a];
            }
        }
    }
    Ok(s)
}

/// `Σ_{j, ñ, m̃ < n_trunc}` of the squared norms.
pub fn qvcs_family_norm(q: &QuaternionLabel, n_trunc: usize, d: &DeformedQuantities) -> Result<f64> {
    check_truncation(q.r.max(q.rho), n_trunc)?;
    let pw = QPowers::new(q, n_trunc)?;
    let mut total = 0.0;
    for j in 1..=4 {
        for nt in 0..n_trunc {
            for mt in 0..n_trunc {
                total += qvcs_state_with(&pw, q, 0.0, j, nt, mt, n_trunc, d)?.norm_sqr();
            }
        }
    }
    Ok(total)
}

/// `max_{n,m ≤ order} |∫∫ (4π²W/𝒩)(r^{2n}/n!)(ρ^{2m}/m!) r dr ρ dρ − 1|` by a
/// tensor Gauss-Laguerre rule in `(r², ρ²)`.
pub fn w_moment_check(order: usize) -> Result<f64> {
    let gl = GaussLaguerre::new(40, 0.0)?;
    let mut dev = 0.0f64;
    for n in 0..=order {
        for m in 0..=order {
            let (lfn, lfm) = (ln_factorial(n as u64), ln_factorial(m as u64));
            let mut s = 0.0;
            for (x, wx) in gl.nodes.iter().zip(&gl.weights) {
                for (y, wy) in gl.nodes.iter().zip(&gl.weights) {
                    let (r, rho) = (x.sqrt(), y.sqrt());
                    let ratio = 4.0 * PI * PI * qvcs_weight(r, rho) / qvcs_normalization(r, rho);
                    let mono = (n as f64 * x.ln() - lfn + m as f64 * y.ln() - lfm + x + y).exp();
                    // r dr ρ dρ = dx dy / 4
                    s += wx * wy * ratio * mono / 4.0;
                }
            }
            dev = dev.max((s - 1.0).abs());
        }
    }
    Ok(dev)
}

// ---------------------------------------------------------------------------
// Displacement operators

fn ladder(n: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let mut a = DMatrix::zeros(n, n);
    for k in 1..n {
        a[(k - 1, k)] = c((k as f64).sqrt());
    }
    let ad = a.adjoint();
    (a, ad)
}

fn kron4(m: &Matrix4<Complex64>, x: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = x.nrows();
    let mut out = DMatrix::zeros(4 * n, 4 * n);
    for i in 0..4 {
        for j in 0..4 {
            if m[(i, j)] != c(0.0) {
                out.view_mut((i * n, j * n), (n, n)).copy_from(&(x * m[(i, j)]));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DisplacementReport {
    /// `max |U_L − e^{𝔔⊗d†}e^{−𝔔†⊗d}e^{−½[𝔔⊗d†, −𝔔†⊗d]}|` on the low block.
    pub left_factorization: f64,
    /// Printed right factorization `e^{−½[A,B]}e^{B}e^{A}`, `A = −𝔮⊗a_R†`, `B = 𝔮†⊗a_R`.
    pub right_factorization_printed: f64,
    /// `e^{+½[A,B]}e^{B}e^{A}`.
    pub right_factorization_corrected: f64,
    /// Displaced vacuum with the printed `U_R` generator vs the series.
    pub displaced_printed_generator: f64,
    /// Displaced vacuum with `exp(𝔮⊗a_R − 𝔮†⊗a_R†)`: coefficients `𝔮ⁿ𝔔^m𝔮̄^ñ𝔔̄^m̃χ^j`.
    pub displaced_corrected_generator: f64,
    /// `max |[𝔮^k, 𝔔†^l]|`-type noncommutativity that separates the two orderings.
    pub commutator_qq: f64,
}

/// Builds `U_L(0, 𝔔)` and `U_R(0, 𝔮)` by dense matrix exponentials on
/// `ℂ⁴ ⊗ span{|0⟩..|N−1⟩}` and compares the displaced vacuum with `qvcs_state`.
pub fn displacement_check(
    q: &QuaternionLabel,
    tau: f64,
    j: usize,
    n_tilde: usize,
    m_tilde: usize,
    n_trunc: usize,
    d: &DeformedQuantities,
) -> Result<DisplacementReport> {
    if q.r > 1.0 || q.rho > 1.0 || n_trunc < 48 {
        return Err(Error::Truncation("displacement check needs r, rho <= 1 and n_trunc >= 48".into()));
    }
    let (bq, big_q) = quaternion_build(q)?;
    let n = n_trunc;
    let (a, ad) = ladder(n);
    // right multiplication by a raises the bra index: its matrix on bra coefficients is a†
    let a_r = ad.clone();
    let a_r_dag = a.clone();

    let gen_l = kron4(&big_q, &ad) - kron4(&big_q.adjoint(), &a);
    let u_l = gen_l.clone().exp();
    let gen_r_printed = -kron4(&bq, &a_r_dag) + kron4(&bq.adjoint(), &a_r);
    let gen_r = kron4(&bq, &a_r) - kron4(&bq.adjoint(), &a_r_dag);
    let u_r_printed = gen_r_printed.clone().exp();
    let u_r = gen_r.exp();

    // factorizations, compared on columns that start in the low block
    let low = |m: &DMatrix<Complex64>| -> DMatrix<Complex64> {
        let mut out = DMatrix::zeros(4 * n, 4 * 8);
        for blk in 0..4 {
            for k in 0..8 {
                out.set_column(blk * 8 + k, &m.column(blk * n + k));
            }
        }
        out
    };
    let la = kron4(&big_q, &ad);
    let lb = -kron4(&big_q.adjoint(), &a);
    // [𝔔⊗d†, −𝔔†⊗d] = ρ² (central away from the top level)
    let left_fact = la.exp() * lb.exp() * c((-0.5 * q.rho * q.rho).exp());
    let left_factorization = (low(&u_l) - low(&left_fact)).iter().map(|x| x.norm()).fold(0.0, f64::max);

    let ra = -kron4(&bq, &a_r_dag);
    let rb = kron4(&bq.adjoint(), &a_r);
    // [A, B] = −𝔮𝔮† ⊗ [R_{a†}, R_a] = −r²
    let comm = -q.r * q.r;
    let eb_ea = rb.exp() * ra.exp();
    let printed = eb_ea.clone() * c((-0.5 * comm).exp());
    let corrected = eb_ea * c((0.5 * comm).exp());
    let rdev = |m: &DMatrix<Complex64>| (low(&u_r_printed) - low(m)).iter().map(|x| x.norm()).fold(0.0, f64::max);

    // displaced vacuum
    let chi = basis(j)?;
    let pw = QPowers::new(q, n.max(n_tilde + 1).max(m_tilde + 1))?;
    let pre = pw.qd[n_tilde] * pw.big_qd[m_tilde] * chi;
    let displaced = |ur: &DMatrix<Complex64>| -> VcsState {
        let mut s = VcsState::zeros(n);
        let scale = 0.5 * (-(q.r * q.r + q.rho * q.rho) / 2.0).exp();
        for nn in 0..n {
            // ⟨0|U_R: column of the vacuum, component nn, as a 4×4 block
            let mut br = Matrix4::zeros();
            let mut bl_all = Vec::with_capacity(n);
            for x in 0..4 {
                for y in 0..4 {
                    br[(x, y)] = ur[(x * n + nn, y * n)];
                }
            }
            for mm in 0..n {
                let mut bl = Matrix4::zeros();
                for x in 0..4 {
                    for y in 0..4 {
                        bl[(x, y)] = u_l[(x * n + mm, y * n)];
                    }
                }
                bl_all.push(bl);
            }
            for (mm, bl) in bl_all.iter().enumerate() {
                let v = br * (bl * pre)
                    * c(scale)
                    * Complex64::from_polar(1.0, -tau * dimensionless_energy(d, nn, mm));
                for aa in 0..4 {
                    let k = s.idx(aa, mm, nn);
                    s.data[k] = v[aa];
                }
            }
        }
        s
    };
    let series = qvcs_state_with(&pw, q, tau, j, n_tilde, m_tilde, n, d)?;
    let restrict = |s: &VcsState| -> f64 {
        // compare on the low block only, where truncated exponentials are exact
        let mut dev = 0.0f64;
        for aa in 0..4 {
            for mm in 0..16 {
                for nn in 0..16 {
                    dev = dev.max((s.get(aa, mm, nn) - series.get(aa, mm, nn)).norm());
                }
            }
        }
        dev
    };
    let commutator_qq = (bq.adjoint() * big_q - big_q * bq.adjoint()).iter().map(|x| x.norm()).fold(0.0, f64::max);
    Ok(DisplacementReport {
        left_factorization,
        right_factorization_printed: rdev(&printed),
        right_factorization_corrected: rdev(&corrected),
        displaced_printed_generator: restrict(&displaced(&u_r_printed)),
        displaced_corrected_generator: restrict(&displaced(&u_r)),
        commutator_qq,
    })
}

// ---------------------------------------------------------------------------
// Statistics

/// Expectations of right multiplications `X ↦ X·A` summed over the family
/// (`ñ, m̃ < N`, fixed `j`, `τ = 0`): `⟨R_A⟩ = Tr(G A)`.
#[derive(Debug, Clone)]
pub struct FamilyGram {
    pub g: DMatrix<Complex64>,
}

impl FamilyGram {
    pub fn build(q: &QuaternionLabel, j: usize, n_trunc: usize) -> Result<Self> {
        check_truncation(q.r.max(q.rho), n_trunc)?;
        let pw = QPowers::new(q, n_trunc)?;
        let chi = basis(j)?;
        // U = Σ_{ñ,m,m̃} u u†, u = 𝔮̄^ñ 𝔔^m 𝔔̄^m̃ χ^j
        let mut v = Matrix4::<Complex64>::zeros();
        for m in 0..n_trunc {
            for mt in 0..n_trunc {
                let x = pw.big_q[m] * (pw.big_qd[mt] * chi);
                v += x * x.adjoint();
            }
        }
        let mut u = Matrix4::<Complex64>::zeros();
        for nt in 0..n_trunc {
            u += pw.qd[nt] * v * pw.qd[nt].adjoint();
        }
        let inv = 1.0 / qvcs_normalization(q.r, q.rho);
        let mut g = DMatrix::zeros(n_trunc, n_trunc);
        for np in 0..n_trunc {
            for n in 0..n_trunc {
                g[(np, n)] = (pw.q[np].adjoint() * pw.q[n] * u).trace() * inv;
            }
        }
        Ok(Self { g })
    }

    pub fn expect(&self, a: &DMatrix<Complex64>) -> Complex64 {
        (&self.g * a).trace()
    }

    pub fn weight(&self) -> f64 {
        self.g.trace().re
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Moments {
    pub px: f64,
    pub py: f64,
    pub px2: f64,
    pub py2: f64,
    pub dpx2: f64,
    pub dpy2: f64,
    pub dx2: f64,
    pub dy2: f64,
    pub dx_dy: f64,
    pub dx_dpx: f64,
    pub dy_dpy: f64,
    pub dpx_dpy: f64,
}

impl Moments {
    fn fields(&self) -> [(&'static str, f64); 12] {
        [
            ("<P_X>", self.px),
            ("<P_Y>", self.py),
            ("<P_X^2>", self.px2),
            ("<P_Y^2>", self.py2),
            ("(dP_X)^2", self.dpx2),
            ("(dP_Y)^2", self.dpy2),
            ("(dX)^2", self.dx2),
            ("(dY)^2", self.dy2),
            ("[dX dY]^2", self.dx_dy),
            ("[dX dP_X]^2", self.dx_dpx),
            ("[dY dP_Y]^2", self.dy_dpy),
            ("[dP_X dP_Y]^2", self.dpx_dpy),
        ]
    }
}

/// `F(r, η, φ) = (3r²cos²η + 1)(4r²sin²η − r²cos²φ sin²η + 1)`.
pub fn f_uncertainty(r: f64, eta: f64, phi: f64) -> f64 {
    let (s, co) = (eta.sin(), eta.cos());
    (3.0 * r * r * co * co + 1.0) * (4.0 * r * r * s * s - r * r * phi.cos().powi(2) * s * s + 1.0)
}

/// Closed forms with azimuth `angle` and `⟨P̂_X⟩` sign `sign`.
pub fn closed_moments(r: f64, angle: f64, phi: f64, theta: f64, hbar: f64, sign: f64) -> Moments {
    let k = hbar * hbar / (2.0 * theta);
    let (s, co) = (angle.sin(), angle.cos());
    let bx = 4.0 * r * r * s * s - r * r * phi.cos().powi(2) * s * s + 1.0;
    let by = 3.0 * r * r * co * co + 1.0;
    let f = bx * by;
    Moments {
        px: sign * hbar / (2.0 * (2.0 * theta).sqrt()) * r * phi.cos() * s,
        py: -hbar / (2.0 * (2.0 * theta).sqrt()) * r * co,
        px2: k * (r * r * s * s + 0.25),
        py2: k * (r * r * co * co + 0.25),
        dpx2: 0.25 * k * bx,
        dpy2: 0.25 * k * by,
        dy2: 0.25 * (theta / 2.0) * bx,
        dx2: 0.25 * (theta / 2.0) * by,
        dx_dy: theta * theta / 64.0 * f,
        dx_dpx: hbar * hbar / 64.0 * f,
        dy_dpy: hbar * hbar / 64.0 * f,
        dpx_dpy: hbar.powi(4) / (64.0 * theta * theta) * f,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Discrepancy {
    pub quantity: &'static str,
    pub closed: f64,
    pub oracle: f64,
    /// `closed − oracle`.
    pub signed: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Heisenberg {
    /// `[ΔX ΔP_X]² − (1/16)(¼|⟨[X, P_X]⟩|²)` from the oracle (must be ≥ 0).
    pub x_px_margin: f64,
    pub y_py_margin: f64,
    pub px_py_margin: f64,
    /// `|⟨[P_X, P_Y]⟩|`, printed as zero.
    pub px_py_commutator: f64,
    /// `|⟨[X, Y]⟩|`, `|⟨[X, P_X]⟩|` from the oracle.
    pub xy_commutator: f64,
    pub x_px_commutator: f64,
}

impl Heisenberg {
    pub fn holds(&self) -> bool {
        self.x_px_margin >= 0.0 && self.y_py_margin >= 0.0 && self.px_py_margin >= 0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct QvcsStatistics {
    pub label: QuaternionLabel,
    pub j: usize,
    pub theta: f64,
    pub hbar: f64,
    pub n_trunc: usize,
    /// `Σ_{ñ,m̃}` of the squared norms for this `j` (¼ up to truncation).
    pub family_weight: f64,
    pub oracle: Moments,
    pub x_mean: f64,
    pub y_mean: f64,
    /// Closed forms as printed (azimuth η); the `⟨P̂_X⟩` sign is taken from the oracle.
    pub printed: Moments,
    pub printed_px_sign: f64,
    /// Closed forms with η replaced by ϑ.
    pub vartheta_substituted: Moments,
    pub printed_discrepancies: Vec<Discrepancy>,
    pub substituted_discrepancies: Vec<Discrepancy>,
    pub f_value: f64,
    pub heisenberg: Heisenberg,
}

/// Brute-force statistics under right multiplication on the `n` index:
/// `X = √(θ/2)R_{a+a†}`, `Y = i√(θ/2)R_{a†−a}`, `P_X = (−iħ/√(2θ))R_{a−a†}`,
/// `P_Y = (−ħ/√(2θ))R_{a+a†}`; `⟨·⟩` is the family sum for fixed `j`, `τ = 0`.
pub fn qvcs_statistics(q: &QuaternionLabel, j: usize, theta: f64, hbar: f64, n_trunc: usize) -> Result<QvcsStatistics> {
    if !(theta > 0.0) {
        return Err(Error::Domain("statistics need theta > 0".into()));
    }
    let fam = FamilyGram::build(q, j, n_trunc)?;
    let (a, ad) = ladder(n_trunc);
    let sx = (theta / 2.0).sqrt();
    let sp = hbar / (2.0 * theta).sqrt();
    let x_op = (&a + &ad) * c(sx);
    let y_op = (&ad - &a) * (I * sx);
    let px_op = (&a - &ad) * (-I * sp);
    let py_op = (&a + &ad) * c(-sp);
    // R_A R_B = R_{BA}
    let sq = |m: &DMatrix<Complex64>| m * m;
    let ex = |m: &DMatrix<Complex64>| fam.expect(m).re;
    let comm = |x: &DMatrix<Complex64>, y: &DMatrix<Complex64>| fam.expect(&(y * x - x * y));

    let (xm, ym, pxm, pym) = (ex(&x_op), ex(&y_op), ex(&px_op), ex(&py_op));
    let dx2 = ex(&sq(&x_op)) - xm * xm;
    let dy2 = ex(&sq(&y_op)) - ym * ym;
    let px2 = ex(&sq(&px_op));
    let py2 = ex(&sq(&py_op));
    let dpx2 = px2 - pxm * pxm;
    let dpy2 = py2 - pym * pym;
    let oracle = Moments {
        px: pxm,
        py: pym,
        px2,
        py2,
        dpx2,
        dpy2,
        dx2,
        dy2,
        dx_dy: dx2 * dy2,
        dx_dpx: dx2 * dpx2,
        dy_dpy: dy2 * dpy2,
        dpx_dpy: dpx2 * dpy2,
    };
    let plus = closed_moments(q.r, q.eta, q.phi, theta, hbar, 1.0);
    let sign = if (plus.px - pxm).abs() <= (-plus.px - pxm).abs() { 1.0 } else { -1.0 };
    let printed = closed_moments(q.r, q.eta, q.phi, theta, hbar, sign);
    let splus = closed_moments(q.r, q.vartheta, q.phi, theta, hbar, 1.0);
    let ssign = if (splus.px - pxm).abs() <= (-splus.px - pxm).abs() { 1.0 } else { -1.0 };
    let substituted = closed_moments(q.r, q.vartheta, q.phi, theta, hbar, ssign);
    let disc = |cl: &Moments| -> Vec<Discrepancy> {
        cl.fields()
            .iter()
            .zip(oracle.fields().iter())
            .map(|(&(name, cv), &(_, ov))| Discrepancy { quantity: name, closed: cv, oracle: ov, signed: cv - ov })
            .collect()
    };
    let c_xpx = comm(&x_op, &px_op);
    let c_ypy = comm(&y_op, &py_op);
    let c_pxpy = comm(&px_op, &py_op);
    let c_xy = comm(&x_op, &y_op);
    let heisenberg = Heisenberg {
        x_px_margin: dx2 * dpx2 - c_xpx.norm_sqr() / 64.0,
        y_py_margin: dy2 * dpy2 - c_ypy.norm_sqr() / 64.0,
        px_py_margin: dpx2 * dpy2 - c_pxpy.norm_sqr() / 64.0,
        px_py_commutator: c_pxpy.norm(),
        xy_commutator: c_xy.norm(),
        x_px_commutator: c_xpx.norm(),
    };
    Ok(QvcsStatistics {
        label: *q,
        j,
        theta,
        hbar,
        n_trunc,
        family_weight: fam.weight(),
        oracle,
        x_mean: xm,
        y_mean: ym,
        printed_discrepancies: disc(&printed),
        substituted_discrepancies: disc(&substituted),
        printed,
        printed_px_sign: sign,
        vartheta_substituted: substituted,
        f_value: f_uncertainty(q.r, q.eta, q.phi),
        heisenberg,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::params::{derive, PhysParams};
    use proptest::prelude::*;

    fn dq() -> DeformedQuantities {
        derive(&PhysParams::new(1.0, 1.0, 1.0, 0.1)).unwrap()
    }

    fn label() -> QuaternionLabel {
        QuaternionLabel { r: 0.7, vartheta: 0.9, phi: 0.6, eta: 1.1, rho: 0.5, gamma: 2.0, varphi: 1.3, varrho: 4.0 }
    }

    #[test]
    fn mvcs_normalization_values() {
        let zero = [c(0.0); 4];
        assert_eq!(mvcs_normalization(&DiagLabel::new(zero, zero, 0.0)), 4.0);
        let mut z = zero;
        z[0] = c(1.0);
        let e2 = 2f64.exp();
        assert!((mvcs_normalization(&DiagLabel::new(z, zero, 0.0)) - (e2 + 3.0)).abs() < 1e-15);
    }

    #[test]
    fn mvcs_family() {
        let d = dq();
        let z = [Complex64::new(0.3, 0.4), c(0.0), Complex64::new(-0.2, 0.1), c(1.0)];
        let w = [c(0.5), Complex64::new(0.0, -0.7), c(0.0), Complex64::new(0.1, 0.1)];
        let rep = mvcs_check(&DiagLabel::new(z, w, 0.3), 40, &d).unwrap();
        assert!((rep.family_norm - 1.0).abs() < 1e-10);
        assert!((rep.action_brute - rep.action_weighted).abs() < 1e-10);
        assert!((rep.action_brute - rep.action_plain).abs() > 1e-3);
        assert!(rep.stability_defect < 1e-15);
        let zero = mvcs_check(&DiagLabel::new([c(0.0); 4], [c(0.0); 4], 0.0), 8, &d).unwrap();
        assert!((zero.action_brute - 0.5).abs() < 1e-15);
    }

    #[test]
    fn moment_weights() {
        let r = moment_weight_check(40).unwrap();
        assert!(r.gauss_laguerre < 1e-9 && r.adaptive < 1e-9, "{r:?}");
        assert!(matches!(moment_weight_check(41), Err(Error::Domain(_))));
        assert!(w_moment_check(10).unwrap() < 1e-9);
    }

    #[test]
    fn quaternion_basics() {
        let q = label();
        let (a, b) = quaternion_build(&q).unwrap();
        assert!((a * a.adjoint() - Matrix4::identity() * c(q.r * q.r)).norm() < 1e-12);
        assert!((b * b.adjoint() - Matrix4::identity() * c(q.rho * q.rho)).norm() < 1e-12);
        let s = sigma(0.6, 1.1);
        assert!((s * s - Matrix2::identity()).norm() < 1e-15);
        let flat = quaternion(2.0, 0.0, 0.3, 0.4);
        assert!((flat - Matrix4::identity() * c(2.0)).norm() < 1e-15);
        let bad = QuaternionLabel { phi: 4.0, ..q };
        assert!(quaternion_build(&bad).is_err());
    }

    #[test]
    fn su2_identification() {
        let rep = su2_route(0.8, 1.2, 0.7, 2.5);
        assert!(rep.corrected < 1e-12);
        assert!(rep.printed > 1e-2);
    }

    #[test]
    fn qvcs_norms() {
        let d = dq();
        assert_eq!(qvcs_normalization(0.0, 0.0), 4.0);
        let q = QuaternionLabel { r: 0.8, rho: 0.8, ..label() };
        assert!((qvcs_family_norm(&q, 40, &d).unwrap() - 1.0).abs() < 1e-10);
        assert!(qvcs_state(&QuaternionLabel { r: 3.0, ..q }, 0.0, 1, 0, 0, 10, &d).is_err());
    }

    #[test]
    fn qvcs_temporal_stability() {
        let d = dq();
        let q = label();
        let a = qvcs_state(&q, 0.2, 3, 1, 2, 30, &d).unwrap().evolve(0.5, &d);
        let b = qvcs_state(&q, 0.7, 3, 1, 2, 30, &d).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn displacement() {
        let d = dq();
        let q = QuaternionLabel { r: 0.5, rho: 0.4, ..label() };
        let rep = displacement_check(&q, 0.3, 2, 1, 1, 48, &d).unwrap();
        assert!(rep.left_factorization < 1e-9, "{rep:?}");
        assert!(rep.right_factorization_corrected < 1e-9, "{rep:?}");
        assert!(rep.right_factorization_printed > 1e-3);
        assert!(rep.displaced_printed_generator > 1e-3);
        // commuting quaternions (shared axis): orderings agree
        let shared = QuaternionLabel { varphi: q.phi, varrho: q.eta, ..q };
        let rep2 = displacement_check(&shared, 0.3, 2, 1, 1, 48, &d).unwrap();
        assert!(rep2.commutator_qq < 1e-14);
        assert!(rep2.displaced_corrected_generator < 1e-8, "{rep2:?}");
        // zero labels: identity
        let zero = QuaternionLabel { r: 0.0, rho: 0.0, ..q };
        let rep3 = displacement_check(&zero, 0.0, 1, 0, 0, 48, &d).unwrap();
        assert!(rep3.displaced_corrected_generator < 1e-15);
    }

    #[test]
    fn gram_matches_literal_tensor() {
        let d = dq();
        let q = QuaternionLabel { r: 0.4, rho: 0.3, ..label() };
        let n = 14;
        let fam = FamilyGram::build(&q, 2, n).unwrap();
        let (a, ad) = ladder(n);
        let op = &a * c(0.3) + &ad * Complex64::new(0.1, -0.7) + &a * &a;
        let mut lit = c(0.0);
        for nt in 0..n {
            for mt in 0..n {
                let s = qvcs_state(&q, 0.0, 2, nt, mt, n, &d).unwrap();
                for aa in 0..4 {
                    for m in 0..n {
                        for np in 0..n {
                            for nn in 0..n {
                                lit += s.get(aa, m, np).conj() * s.get(aa, m, nn) * op[(nn, np)];
                            }
                        }
                    }
                }
            }
        }
        assert!((lit - fam.expect(&op)).norm() < 1e-14);
    }

    #[test]
    fn factor_two_regression() {
        // r = 0: (ΔP_X)² = ¼ ħ²/(2θ), not ¼ ħ²/θ
        let q = QuaternionLabel::only_q(0.0, 0.4, 0.3, 0.2);
        let (theta, hbar) = (0.5, 1.3);
        let st = qvcs_statistics(&q, 1, theta, hbar, 48).unwrap();
        let expect = 0.25 * hbar * hbar / (2.0 * theta);
        assert!((st.oracle.dpx2 - expect).abs() < 1e-12);
        assert!((st.oracle.dpy2 - expect).abs() < 1e-12);
        assert!((st.oracle.dx2 - theta / 8.0).abs() < 1e-12);
        assert!((st.oracle.dy2 - theta / 8.0).abs() < 1e-12);
        assert!(st.oracle.px.abs() < 1e-15 && st.oracle.py.abs() < 1e-15);
        assert!((st.family_weight - 0.25).abs() < 1e-15);
        assert_eq!(st.f_value, 1.0);
    }

    #[test]
    fn closed_forms_with_vartheta() {
        // ρ = 0: printed forms hold once η is read as ϑ; ⟨P_X⟩ sign is − for odd j
        for j in 1..=4 {
            let q = QuaternionLabel::only_q(0.7, 1.1, 0.6, 2.3);
            let st = qvcs_statistics(&q, j, 0.5, 1.0, 48).unwrap();
            for dsc in &st.substituted_discrepancies {
                assert!(dsc.signed.abs() < 1e-7, "j={j} {dsc:?}");
            }
            let expect_sign = if j % 2 == 1 { -1.0 } else { 1.0 };
            assert_eq!(st.vartheta_substituted.px.signum() * (1.1f64.sin() * 0.6f64.cos()).signum(), expect_sign);
        }
    }

    #[test]
    fn printed_example_py() {
        // r = 1, η = ϑ = 0, θ = ħ = 1
        let q = QuaternionLabel::only_q(1.0, 0.0, 0.5, 0.0);
        let st = qvcs_statistics(&q, 1, 1.0, 1.0, 48).unwrap();
        assert!((st.printed.py + 1.0 / (2.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!((st.oracle.py - st.printed.py).abs() < 1e-12);
    }

    #[test]
    fn theta_zero_rejected() {
        assert!(matches!(qvcs_statistics(&label(), 1, 0.0, 1.0, 20), Err(Error::Domain(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn quaternion_modulus(r in 0.0f64..3.0, th in 0.0f64..6.2, ph in 0.0f64..3.1, et in 0.0f64..6.2) {
            let q = quaternion(r, th, ph, et);
            prop_assert!((q * q.adjoint() - Matrix4::identity() * c(r * r)).norm() < 1e-12);
            let unit = quaternion(1.0, th, ph, et);
            prop_assert!((unit * unit.adjoint() - Matrix4::identity()).norm() < 1e-12);
        }

        #[test]
        fn heisenberg_as_printed(r in 0.0f64..1.0, th in 0.0f64..6.2, ph in 0.0f64..3.1, et in 0.0f64..6.2,
                                 rho in 0.0f64..1.0, g in 0.0f64..6.2, j in 1usize..5) {
            let q = QuaternionLabel { r, vartheta: th, phi: ph, eta: et, rho, gamma: g, varphi: 0.4, varrho: 1.0 };
            let st = qvcs_statistics(&q, j, 0.7, 1.0, 32).unwrap();
            prop_assert!(st.heisenberg.holds());
            prop_assert!(st.f_value >= 1.0);
        }
    }
}
