//! Quadrature rules: generalized Gauss-Laguerre and adaptive Gauss-Kronrod.

use crate::error::{Error, Result};
use crate::special::{laguerre_scaled, ln_factorial, ln_gamma};
use nalgebra::{DMatrix, SymmetricEigen};

/// Largest Gauss-Laguerre order this module builds.
pub const MAX_LAGUERRE_ORDER: usize = 256;

/// Nodes and weights of the `n`-point rule for `∫₀^∞ x^α e^{-x} f(x) dx`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub alpha: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize, alpha: f64) -> Result<Self> {
        if n == 0 || n > MAX_LAGUERRE_ORDER {
            return Err(Error::Quadrature(format!(
                "Gauss-Laguerre order {n} outside 1..={MAX_LAGUERRE_ORDER}"
            )));
        }
        if alpha <= -1.0 {
            return Err(Error::Domain(format!("alpha = {alpha} must exceed -1")));
        }
        // Golub-Welsch for starting values.
        let mut jac = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let kf = k as f64;
            jac[(k, k)] = 2.0 * kf + 1.0 + alpha;
            if k + 1 < n {
                let off = ((kf + 1.0) * (kf + 1.0 + alpha)).sqrt();
                jac[(k, k + 1)] = off;
                jac[(k + 1, k)] = off;
            }
        }
        let mut nodes: Vec<f64> = SymmetricEigen::new(jac).eigenvalues.iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let nf = n as f64;
        for x in nodes.iter_mut() {
            for _ in 0..8 {
                let (ln, lnm1, _) = laguerre_scaled(n, alpha, *x);
                let dl = (nf * ln - (nf + alpha) * lnm1) / *x;
                let step = ln / dl;
                *x -= step;
                if step.abs() <= 1e-16 * x.abs() {
                    break;
                }
            }
        }

        // w = Γ(n+α+1) / (n! x L_n'(x)²) with L_n' = -L_{n-1}^{(α+1)}.
        let ln_pref = ln_gamma(nf + alpha + 1.0) - ln_factorial(n as u64);
        let weights = nodes
            .iter()
            .map(|&x| {
                let (d, _, scale) = laguerre_scaled(n - 1, alpha + 1.0, x);
                (ln_pref - x.ln() - 2.0 * (d.abs().ln() + scale)).exp()
            })
            .collect();
        Ok(Self { alpha, nodes, weights })
    }

    /// `∫₀^∞ x^α e^{-x} f(x) dx`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_0,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for i in 0..7 {
        let dx = h * XGK[i];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[i] * s;
        if i % 2 == 1 {
            gauss += WG[i / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Globally adaptive 7/15-point Gauss-Kronrod integration on `[a, b]`.
///
/// Returns `(value, error_estimate)`; fails when `max_intervals` subintervals
/// do not reach `max(abs_tol, rel_tol * |value|)`.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_intervals: usize,
) -> Result<(f64, f64)> {
    let mut parts = vec![(a, b, gk15(&f, a, b))];
    loop {
        let total: f64 = parts.iter().map(|p| p.2 .0).sum();
        let err: f64 = parts.iter().map(|p| p.2 .1).sum();
        if err <= abs_tol.max(rel_tol * total.abs()) {
            return Ok((total, err));
        }
        if parts.len() >= max_intervals {
            return Err(Error::Quadrature(format!(
                "adaptive quadrature on [{a}, {b}] stalled at error {err:e} after {} intervals",
                parts.len()
            )));
        }
        let (worst, _) = parts
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .2 .1.partial_cmp(&y.1 .2 .1).unwrap())
            .unwrap();
        let (lo, hi, _) = parts.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        parts.push((lo, mid, gk15(&f, lo, mid)));
        parts.push((mid, hi, gk15(&f, mid, hi)));
    }
}
