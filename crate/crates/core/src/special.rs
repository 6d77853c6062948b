//! Small special-function helpers: log-factorials, binomials and Laguerre
//! polynomials.
//!
//! Laguerre polynomials come in two independent flavours. [`laguerre`] runs the
//! three-term recurrence in double-double precision; [`laguerre_sum`] evaluates the explicit finite
//! sum `sum_m (-1)^m C(n+a, n-m) x^m / m!` in exact rational arithmetic and
//! rounds once at the end, so the two can be cross-checked without sharing code
//! paths or suffering the catastrophic cancellation of the alternating sum.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Float, One, ToPrimitive, Zero};

/// `ln(n!)` by direct summation for small `n`, Stirling series above.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        return 0.0;
    }
    if n <= 256 {
        return (2..=n).map(|k| (k as f64).ln()).sum();
    }
    let x = n as f64 + 1.0;
    // Stirling series for ln Gamma(x), x > 256; truncation error < 1e-17.
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * std::f64::consts::PI).ln() + 1.0 / (12.0 * x)
        - 1.0 / (360.0 * x.powi(3))
        + 1.0 / (1260.0 * x.powi(5))
}

/// `ln Gamma(x)` for `x > 0` (Lanczos, g = 7, n = 9); relative error ~1e-15.
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    if x.fract() == 0.0 && x <= 257.0 {
        return ln_factorial(x as u64 - 1);
    }
    let x = x - 1.0;
    let mut a = COEF[0];
    let t = x + G + 0.5;
    for (i, c) in COEF.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

/// `n!` as `f64` (overflows to infinity above 170).
pub fn factorial(n: u64) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Unevaluated sum `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Debug, Clone, Copy)]
struct Dd {
    hi: f64,
    lo: f64,
}

impl Dd {
    fn from(x: f64) -> Self {
        Self { hi: x, lo: 0.0 }
    }

    fn two_sum(a: f64, b: f64) -> Self {
        let s = a + b;
        let bb = s - a;
        Self { hi: s, lo: (a - (s - bb)) + (b - bb) }
    }

    fn renorm(hi: f64, lo: f64) -> Self {
        let s = hi + lo;
        Self { hi: s, lo: lo - (s - hi) }
    }

    fn add(self, o: Self) -> Self {
        let s = Self::two_sum(self.hi, o.hi);
        Self::renorm(s.hi, s.lo + self.lo + o.lo)
    }

    fn neg(self) -> Self {
        Self { hi: -self.hi, lo: -self.lo }
    }

    fn mul(self, o: Self) -> Self {
        let p = self.hi * o.hi;
        let e = self.hi.mul_add(o.hi, -p);
        Self::renorm(p, e + self.hi * o.lo + self.lo * o.hi)
    }

    fn div_f64(self, d: f64) -> Self {
        let q = self.hi / d;
        let r = Self::from(q).mul(Self::from(d));
        let rem = self.add(r.neg());
        Self::renorm(q, rem.hi / d)
    }
}

/// Generalized Laguerre polynomial `L_n^{(alpha)}(x)` via the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}`, carried in
/// double-double precision and rounded once.
pub fn laguerre(n: usize, alpha: f64, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    let ax = Dd::two_sum(alpha, -x);
    let mut prev = Dd::from(1.0);
    let mut cur = Dd::from(1.0).add(ax);
    for k in 1..n {
        let kf = k as f64;
        let c1 = Dd::from(2.0 * kf + 1.0).add(ax);
        let c2 = Dd::two_sum(kf, alpha);
        let next = c1.mul(cur).add(c2.mul(prev).neg()).div_f64(kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur.hi + cur.lo
}

/// `(L_n^{(alpha)}(x), L_{n-1}^{(alpha)}(x), log_scale)` with the pair rescaled so
/// that the true values are `value * exp(log_scale)`. Used where the polynomials
/// exceed the `f64` range (large quadrature orders).
pub fn laguerre_scaled(n: usize, alpha: f64, x: f64) -> (f64, f64, f64) {
    const BIG: f64 = 1e100;
    let mut log_scale = 0.0;
    let mut prev = 0.0;
    let mut cur = 1.0;
    for k in 0..n {
        let kf = k as f64;
        let next = if k == 0 {
            1.0 + alpha - x
        } else {
            ((2.0 * kf + 1.0 + alpha - x) * cur - (kf + alpha) * prev) / (kf + 1.0)
        };
        prev = cur;
        cur = next;
        if cur.abs() > BIG {
            cur /= BIG;
            prev /= BIG;
            log_scale += BIG.ln();
        }
    }
    (cur, prev, log_scale)
}

fn big_binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Explicit finite-sum form of `L_n^{(alpha)}(x)` for integer `alpha >= 0`,
/// evaluated exactly (the `f64` input is a dyadic rational `X / D`) over the
/// common denominator `n!·D^n` and rounded to `f64` once.
pub fn laguerre_sum(n: u64, alpha: u64, x: f64) -> f64 {
    assert!(x.is_finite(), "laguerre_sum needs finite x");
    let (mant, exp, sign) = x.integer_decode();
    let mut xn = BigInt::from(mant);
    let mut den = BigInt::one();
    if exp >= 0 {
        xn <<= exp as usize;
    } else {
        den <<= (-exp) as usize;
    }
    if sign < 0 {
        xn = -xn;
    }
    // term_m = (-1)^m C(n+α, n-m) (n!/m!) X^m D^(n-m)
    let n_fact: BigInt = (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k));
    let mut total = BigInt::zero();
    let mut x_pow = BigInt::one();
    let mut fall = n_fact.clone(); // n!/m!
    let mut d_pow: Vec<BigInt> = Vec::with_capacity(n as usize + 1);
    d_pow.push(BigInt::one());
    for k in 1..=n as usize {
        let next = &d_pow[k - 1] * &den;
        d_pow.push(next);
    }
    for m in 0..=n {
        if m > 0 {
            x_pow *= &xn;
            fall /= BigInt::from(m);
        }
        let term = big_binomial(n + alpha, n - m) * &fall * &x_pow * &d_pow[(n - m) as usize];
        if m % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    BigRational::new(total, n_fact * &d_pow[n as usize]).to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laguerre_low_orders() {
        for &x in &[0.0, 0.3, 2.0, 17.5] {
            assert_eq!(laguerre(0, 3.0, x), 1.0);
            assert_eq!(laguerre_sum(0, 3, x), 1.0);
            assert!((laguerre(1, 0.0, x) - (1.0 - x)).abs() < 1e-15);
        }
        // L_2^{(1)}(x) = 3 - 3x + x^2/2, at x = 2 gives -1.
        assert_eq!(laguerre_sum(2, 1, 2.0), -1.0);
        assert!((laguerre(2, 1.0, 2.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn scaled_recurrence_matches_plain() {
        let (v, vm1, s) = laguerre_scaled(30, 2.0, 11.0);
        assert_eq!(s, 0.0);
        assert!((v - laguerre(30, 2.0, 11.0)).abs() < 1e-9 * v.abs().max(1.0));
        assert!((vm1 - laguerre(29, 2.0, 11.0)).abs() < 1e-9 * vm1.abs().max(1.0));
    }

    #[test]
    fn ln_gamma_half_integers() {
        let sqrt_pi = std::f64::consts::PI.sqrt();
        assert!((ln_gamma(0.5) - sqrt_pi.ln()).abs() < 1e-14);
        assert!((ln_gamma(2.5) - (0.75 * sqrt_pi).ln()).abs() < 1e-14);
        assert!((ln_gamma(7.0) - 720f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn log_factorial_consistent() {
        for n in [0u64, 1, 5, 20, 100, 170] {
            assert!((ln_factorial(n) - factorial(n).ln()).abs() < 1e-10 * ln_factorial(n).max(1.0));
        }
        let stirling = ln_factorial(300);
        let direct: f64 = (2..=300u64).map(|k| (k as f64).ln()).sum();
        assert!((stirling - direct).abs() < 1e-10);
    }
}
