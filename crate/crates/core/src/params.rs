//! Physical inputs and the θ-deformed scalars derived from them.

use crate::error::{Error, Result};
use nalgebra::{Matrix4, SymmetricEigen};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::path::Path;

fn one() -> f64 {
    1.0
}

/// Raw physical inputs. The magnetic field is never stored; it is always
/// `B = M c ω_c / e` (see [`PhysParams::b_field`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysParams {
    #[serde(rename = "M")]
    pub mass: f64,
    pub omega0: f64,
    pub omega_c: f64,
    pub theta: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default = "one")]
    pub e_charge: f64,
    #[serde(default = "one")]
    pub c_light: f64,
    #[serde(rename = "E1", default)]
    pub e1: f64,
    #[serde(rename = "E2", default)]
    pub e2: f64,
}

impl Default for PhysParams {
    fn default() -> Self {
        Self::new(1.0, 1.0, 0.5, 0.0)
    }
}

impl PhysParams {
    /// Parameters with `ħ = e = c = 1` and no electric field.
    pub fn new(mass: f64, omega0: f64, omega_c: f64, theta: f64) -> Self {
        Self { mass, omega0, omega_c, theta, hbar: 1.0, e_charge: 1.0, c_light: 1.0, e1: 0.0, e2: 0.0 }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_omega_c(mut self, omega_c: f64) -> Self {
        self.omega_c = omega_c;
        self
    }

    pub fn with_field(mut self, e1: f64, e2: f64) -> Self {
        self.e1 = e1;
        self.e2 = e2;
        self
    }

    pub fn with_hbar(mut self, hbar: f64) -> Self {
        self.hbar = hbar;
        self
    }

    pub fn b_field(&self) -> f64 {
        self.mass * self.c_light * self.omega_c / self.e_charge
    }

    /// Same parameters at magnetic field `b` (changes ω_c only).
    pub fn with_b_field(mut self, b: f64) -> Self {
        self.omega_c = self.e_charge * b / (self.mass * self.c_light);
        self
    }

    /// `dω_c/dB = e/(Mc)`.
    pub fn domega_c_db(&self) -> f64 {
        self.e_charge / (self.mass * self.c_light)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.mass, self.omega0, self.omega_c, self.theta, self.hbar, self.e_charge, self.c_light, self.e1,
            self.e2,
        ];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("non-finite parameter".into()));
        }
        for (name, v) in [("M", self.mass), ("omega0", self.omega0), ("hbar", self.hbar), ("c_light", self.c_light)] {
            if v <= 0.0 {
                return Err(Error::Domain(format!("{name} = {v} must be positive")));
            }
        }
        if self.e_charge == 0.0 {
            return Err(Error::Domain("e_charge must be nonzero".into()));
        }
        if self.omega_c < 0.0 {
            return Err(Error::Domain(format!("omega_c = {} must be >= 0", self.omega_c)));
        }
        if self.theta < 0.0 {
            return Err(Error::Domain(format!("theta = {} must be >= 0", self.theta)));
        }
        Ok(())
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let p: Self = serde_json::from_str(s)?;
        p.validate()?;
        Ok(p)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }
}

/// θ-dependent scalars derived from [`PhysParams`].
///
/// `omega_tilde`, `omega_c_tilde` and the derived frequencies carry explicit
/// factors of ħ inside the deformation terms (`Mθ/ħ`), so they are correct for
/// any `hbar`, and coincide with the ħ-free printed forms when `hbar = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeformedQuantities {
    pub omega: f64,
    /// `1 - Mω_cθ/(2ħ) + (MΩθ/(4ħ))²`
    pub radicand: f64,
    pub omega_tilde: f64,
    pub omega_c_tilde: f64,
    pub omega_plus: f64,
    pub omega_minus: f64,
    pub mu_theta: f64,
    pub zeta: f64,
    pub xi: f64,
    pub kappa_plus: f64,
    pub kappa_minus: f64,
    pub lambda_plus: f64,
    pub lambda_minus: f64,
    pub b_hbar: f64,
    pub x0: f64,
    pub y0: f64,
    pub k_ee: f64,
}

impl DeformedQuantities {
    /// Eigenvalues of the commutator matrix, `±Mħ(Ω̃ ± ω̃_c)`, ascending.
    pub fn g_eigenvalues_closed(&self, p: &PhysParams) -> [f64; 4] {
        let s = p.mass * p.hbar;
        let lp = s * (self.omega_tilde + self.omega_c_tilde);
        let lm = s * (self.omega_tilde - self.omega_c_tilde);
        sorted4([lp, -lp, lm, -lm])
    }
}

fn sorted4(mut v: [f64; 4]) -> [f64; 4] {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Computes every deformed quantity; rejects points outside the validity
/// region (radicand > 0 and ω̃_c ≥ 0).
pub fn derive(p: &PhysParams) -> Result<DeformedQuantities> {
    p.validate()?;
    let (m, w0, wc, th, hb) = (p.mass, p.omega0, p.omega_c, p.theta, p.hbar);
    let omega = (4.0 * w0 * w0 + wc * wc).sqrt();
    let radicand = 1.0 - m * wc * th / (2.0 * hb) + (m * omega * th / (4.0 * hb)).powi(2);
    if radicand <= 0.0 {
        return Err(Error::Domain(format!("deformation radicand {radicand} <= 0")));
    }
    let omega_tilde = omega * radicand.sqrt();
    let omega_c_tilde = wc - (wc * wc / 4.0 + w0 * w0) * m * th / hb;
    if omega_c_tilde < 0.0 {
        return Err(Error::Domain(format!("deformed cyclotron frequency {omega_c_tilde} < 0")));
    }
    let mu_theta = radicand.powf(0.25);
    let zeta = (m * omega / hb).sqrt() / mu_theta;
    let xi = m * omega / (2.0 * hb) / radicand.sqrt();

    let rad_lambda = 1.0 - m * wc * th / (2.0 * hb) + (m * omega * th / (2.0 * hb)).powi(2);
    let lambda_lin = omega_c_tilde;
    let kappa_lin = wc - (wc * wc / 4.0 - w0 * w0) * m * th / hb;
    let mh = m * hb;

    let x0 = p.e_charge * p.e1 / (m * w0 * w0);
    let y0 = p.e_charge * p.e2 / (m * w0 * w0);
    Ok(DeformedQuantities {
        omega,
        radicand,
        omega_tilde,
        omega_c_tilde,
        omega_plus: 0.5 * (omega_tilde + omega_c_tilde),
        omega_minus: 0.5 * (omega_tilde - omega_c_tilde),
        mu_theta,
        zeta,
        xi,
        kappa_plus: mh * (omega * radicand.sqrt() + kappa_lin),
        kappa_minus: mh * (omega * radicand.sqrt() - kappa_lin),
        lambda_plus: mh * (omega * rad_lambda.max(0.0).sqrt() + lambda_lin),
        lambda_minus: mh * (omega * rad_lambda.max(0.0).sqrt() - lambda_lin),
        b_hbar: 2.0 * hb * m * w0 * (1.0 - m * wc * th / (2.0 * hb)),
        x0,
        y0,
        k_ee: -0.5 * p.e_charge * (p.e1 * x0 + p.e2 * y0),
    })
}

/// The Hermitian 4×4 commutator matrix `𝔤`.
pub fn g_matrix(p: &PhysParams) -> Result<Matrix4<Complex64>> {
    derive(p)?;
    let (m, w0, wc, th, hb) = (p.mass, p.omega0, p.omega_c, p.theta, p.hbar);
    let a = 2.0 * m * m * w0 * w0 * th;
    let b = 2.0 * hb * m * w0 * (1.0 - m * wc * th / (2.0 * hb));
    let c = 2.0 * hb * m * wc * (1.0 - m * wc * th / (4.0 * hb));
    let re = |x: f64| Complex64::new(x, 0.0);
    let im = |x: f64| Complex64::new(0.0, x);
    let z = re(0.0);
    Ok(Matrix4::new(
        re(a), z, z, im(b),
        z, re(-a), im(b), z,
        z, im(-b), re(c), z,
        im(-b), z, z, re(-c),
    ))
}

/// Dense eigensolver check of `𝔤` against the closed forms.
#[derive(Debug, Clone, Serialize)]
pub struct GMatrixReport {
    pub numeric: [f64; 4],
    /// `±Mħ(Ω̃ ± ω̃_c)`.
    pub closed: [f64; 4],
    /// `±λ̃±` as printed (`MΩθ/2ħ` inside the radical).
    pub lambda_printed: [f64; 4],
    /// `±κ±` as printed (`MΩθ/4ħ` inside the radical, `−ω₀²` in the linear term).
    pub kappa_printed: [f64; 4],
    pub rel_dev_closed: f64,
    pub rel_dev_lambda_printed: f64,
    pub rel_dev_kappa_printed: f64,
}

fn max_rel_dev(a: &[f64; 4], b: &[f64; 4]) -> f64 {
    let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    a.iter().zip(b).map(|(x, y)| (x - y).abs() / scale).fold(0.0, f64::max)
}

pub fn g_matrix_check(p: &PhysParams) -> Result<GMatrixReport> {
    let d = derive(p)?;
    let g = g_matrix(p)?;
    let ev = SymmetricEigen::new(g).eigenvalues;
    let numeric = sorted4([ev[0], ev[1], ev[2], ev[3]]);
    let closed = d.g_eigenvalues_closed(p);
    let lambda_printed = sorted4([d.lambda_plus, -d.lambda_plus, d.lambda_minus, -d.lambda_minus]);
    let kappa_printed = sorted4([d.kappa_plus, -d.kappa_plus, d.kappa_minus, -d.kappa_minus]);
    Ok(GMatrixReport {
        numeric,
        closed,
        lambda_printed,
        kappa_printed,
        rel_dev_closed: max_rel_dev(&numeric, &closed),
        rel_dev_lambda_printed: max_rel_dev(&numeric, &lambda_printed),
        rel_dev_kappa_printed: max_rel_dev(&numeric, &kappa_printed),
    })
}

/// B-derivative helper coefficients used by the magnetization formulas.
///
/// With `B = Mcω_c/e`: `theta_m = Mθ(ω_c²/4 + ω₀²)` so that `ω̃_c = ω_c − Θ/ħ`;
/// `i_coef = ∂ω̃_c/∂B`; `k_coef = ∂Ω̃/∂B`; `l_coef = ½ Ω̃ ∂ω̃_c/∂B`;
/// `b_theta` is the B-derivative of the deformation radicand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MagneticCoefficients {
    pub theta_m: f64,
    pub b_theta: f64,
    pub i_coef: f64,
    pub k_coef: f64,
    pub l_coef: f64,
}

pub fn magnetic_coefficients(p: &PhysParams) -> Result<MagneticCoefficients> {
    let d = derive(p)?;
    let (m, w0, wc, th, hb) = (p.mass, p.omega0, p.omega_c, p.theta, p.hbar);
    let (e, c) = (p.e_charge, p.c_light);
    let eb_c = e * p.b_field() / c;
    let b_theta = e * th / (2.0 * c * hb) * (eb_c * th / (4.0 * hb) - 1.0);
    let i_coef = e / (m * c) * (1.0 - eb_c * th / (2.0 * hb));
    let k_coef = wc * e * d.omega_tilde / (m * c * d.omega * d.omega)
        + d.omega * d.omega / d.omega_tilde * e * th / (4.0 * c * hb) * (eb_c * th / (4.0 * hb) - 1.0);
    let l_coef = e * d.omega_tilde / (2.0 * m * c) * (1.0 - eb_c * th / (2.0 * hb));
    Ok(MagneticCoefficients {
        theta_m: m * th * (wc * wc / 4.0 + w0 * w0),
        b_theta,
        i_coef,
        k_coef,
        l_coef,
    })
}

/// Values of the helper coefficients with θ switched off, beside their
/// expected commutative limits.
#[derive(Debug, Clone, Serialize)]
pub struct ThetaZeroReport {
    pub omega_tilde: (f64, f64),
    pub omega_c_tilde: (f64, f64),
    pub theta_m: (f64, f64),
    pub b_theta: (f64, f64),
    pub i_coef: (f64, f64),
    pub k_coef: (f64, f64),
    pub l_coef: (f64, f64),
    pub max_rel_dev: f64,
}

pub fn theta_zero_report(p: &PhysParams) -> Result<ThetaZeroReport> {
    let q = p.with_theta(0.0);
    let d = derive(&q)?;
    let mc = magnetic_coefficients(&q)?;
    let (e, m, c) = (q.e_charge, q.mass, q.c_light);
    let pairs = [
        (d.omega_tilde, d.omega),
        (d.omega_c_tilde, q.omega_c),
        (mc.theta_m, 0.0),
        (mc.b_theta, 0.0),
        (mc.i_coef, e / (m * c)),
        (mc.k_coef, e * q.omega_c / (m * c * d.omega)),
        (mc.l_coef, e * d.omega / (2.0 * m * c)),
    ];
    let max_rel_dev = pairs
        .iter()
        .map(|(a, b)| (a - b).abs() / b.abs().max(f64::MIN_POSITIVE))
        .map(|r| if r.is_nan() { 0.0 } else { r })
        .fold(0.0, f64::max);
    Ok(ThetaZeroReport {
        omega_tilde: pairs[0],
        omega_c_tilde: pairs[1],
        theta_m: pairs[2],
        b_theta: pairs[3],
        i_coef: pairs[4],
        k_coef: pairs[5],
        l_coef: pairs[6],
        max_rel_dev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn commutative_values() {
        let d = derive(&PhysParams::new(1.0, 1.0, 1.0, 0.0)).unwrap();
        assert_eq!(d.omega_tilde, 5f64.sqrt());
        assert_eq!(d.omega_c_tilde, 1.0);
        assert_eq!(d.mu_theta, 1.0);
        assert_eq!(d.xi, 5f64.sqrt() / 2.0);
        let d = derive(&PhysParams::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_eq!(d.omega, 2.0);
        assert_eq!((d.omega_plus, d.omega_minus), (1.0, 1.0));
    }

    #[test]
    fn deformed_values() {
        let d = derive(&PhysParams::new(1.0, 1.0, 1.0, 0.1)).unwrap();
        // Ω̃ = √5 · √(0.953125)
        assert_relative_eq!(d.omega_tilde, (5.0f64 * 0.953125).sqrt(), max_relative = 1e-15);
        assert_relative_eq!(d.omega_tilde, 2.183031149571622, epsilon = 1e-14);
        assert_relative_eq!(d.omega_c_tilde, 0.875, epsilon = 1e-15);
    }

    #[test]
    fn validity_region() {
        // ω̃_c < 0 once Mθ(ω_c/4 + ω₀²/ω_c) > ħ
        assert!(matches!(derive(&PhysParams::new(1.0, 1.0, 1.0, 1.0)), Err(Error::Domain(_))));
        assert!(derive(&PhysParams::new(-1.0, 1.0, 1.0, 0.0)).is_err());
        assert!(derive(&PhysParams::new(1.0, 1.0, 1.0, -0.1)).is_err());
    }

    #[test]
    fn g_matrix_theta_zero() {
        let p = PhysParams::new(1.0, 1.0, 1.0, 0.0);
        let r = g_matrix_check(&p).unwrap();
        let o = 5f64.sqrt();
        let expect = sorted4([o + 1.0, -(o + 1.0), o - 1.0, -(o - 1.0)]);
        for (a, b) in r.numeric.iter().zip(&expect) {
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
        assert!(r.rel_dev_lambda_printed < 1e-12);
        assert!(r.rel_dev_kappa_printed < 1e-12);
        let r = g_matrix_check(&PhysParams::new(1.0, 1.0, 0.0, 0.0)).unwrap();
        assert_relative_eq!(r.numeric[0], -2.0, max_relative = 1e-12);
        assert_relative_eq!(r.numeric[1], -2.0, max_relative = 1e-12);
        assert_relative_eq!(r.numeric[3], 2.0, max_relative = 1e-12);
    }

    #[test]
    fn g_matrix_generic() {
        let r = g_matrix_check(&PhysParams::new(1.0, 1.0, 1.0, 0.1)).unwrap();
        assert!(r.rel_dev_closed < 1e-12, "{r:?}");
        assert!(r.rel_dev_lambda_printed > 1e-4);
    }

    #[test]
    fn coefficients_are_b_derivatives() {
        let p = PhysParams::new(1.3, 0.9, 0.7, 0.08).with_hbar(1.2);
        let mc = magnetic_coefficients(&p).unwrap();
        let b = p.b_field();
        let h = 1e-5;
        let at = |bb: f64| derive(&p.with_b_field(bb)).unwrap();
        let d_om = (at(b + h).omega_tilde - at(b - h).omega_tilde) / (2.0 * h);
        let d_wc = (at(b + h).omega_c_tilde - at(b - h).omega_c_tilde) / (2.0 * h);
        let d_rad = (at(b + h).radicand - at(b - h).radicand) / (2.0 * h);
        assert_relative_eq!(mc.k_coef, d_om, max_relative = 1e-8);
        assert_relative_eq!(mc.i_coef, d_wc, max_relative = 1e-8);
        assert_relative_eq!(mc.l_coef, 0.5 * at(b).omega_tilde * d_wc, max_relative = 1e-8);
        assert_relative_eq!(mc.b_theta, d_rad, max_relative = 1e-8);
        assert_relative_eq!(at(b).omega_c_tilde, p.omega_c - mc.theta_m / p.hbar, max_relative = 1e-14);
    }

    #[test]
    fn theta_zero_reduction() {
        let r = theta_zero_report(&PhysParams::new(1.0, 1.0, 1.0, 0.3)).unwrap();
        assert_eq!(r.theta_m.0, 0.0);
        assert_eq!(r.b_theta.0, 0.0);
        assert_relative_eq!(r.k_coef.0, 1.0 / 5f64.sqrt(), max_relative = 1e-15);
        assert!(r.max_rel_dev < 1e-15);
    }

    #[test]
    fn json_roundtrip_and_rejection() {
        let p = PhysParams::from_json_str(r#"{"M":1,"omega0":1,"omega_c":0.5,"theta":0.02}"#).unwrap();
        assert_eq!(p, PhysParams::new(1.0, 1.0, 0.5, 0.02));
        assert!(PhysParams::from_json_str(r#"{"M":1,"omega0":1,"omega_c":0.5,"theta":0,"B":2}"#).is_err());
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(PhysParams::from_json_str(&s).unwrap(), p);
    }
}
