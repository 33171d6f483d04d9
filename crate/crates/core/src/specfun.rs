//! Special functions used by the operator construction and the asymptotic
//! constant: log-Gamma, differences of log-Gamma, Bessel `J_nu` of real order
//! `nu > -1` and its first positive zero.
//!
//! Everything here is a pure function of its arguments.

use crate::error::{Error, Result};

const HALF_LN_TWO_PI: f64 = 0.918_938_533_204_672_8;

/// Stirling arguments are shifted upward until they reach this value.
const STIRLING_MIN: f64 = 10.0;

/// `B_{2k} / (2k (2k - 1))` for k = 1..8.
const STIRLING_COEFFS: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Asymptotic tail `sum_k c_k / x^(2k-1)`; truncation error below 1e-17 for x >= 10.
fn stirling_tail(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut acc = 0.0;
    for c in STIRLING_COEFFS.iter().rev() {
        acc = acc * inv2 + c;
    }
    acc * inv
}

fn shift_count(x: f64) -> usize {
    if x < STIRLING_MIN {
        (STIRLING_MIN - x).ceil() as usize
    } else {
        0
    }
}

fn check_positive(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{what} requires a positive argument, got {x}")))
    }
}

/// `ln Gamma(x)` for `x > 0`.
///
/// Stirling series after an upward shift to `x >= 10`; the shift is undone
/// with a single logarithm of the product `x (x+1) ... (x+N-1)`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive(x, "log_gamma")?;
    let shift = shift_count(x);
    let z = x + shift as f64;
    let mut product = 1.0;
    for i in 0..shift {
        product *= x + i as f64;
    }
    let stirling = (z - 0.5) * z.ln() - z + HALF_LN_TWO_PI + stirling_tail(z);
    Ok(stirling - product.ln())
}

/// `ln Gamma(a) - ln Gamma(b)` for `a, b > 0`, without forming either term.
///
/// When both arguments are large the two log-Gamma values are nearly equal
/// and subtracting them directly loses about `ulp(ln Gamma(b))`; here the
/// leading terms are combined through `ln_1p((a - b) / b)` instead.
pub fn log_gamma_ratio(a: f64, b: f64) -> Result<f64> {
    check_positive(a, "log_gamma_ratio")?;
    check_positive(b, "log_gamma_ratio")?;
    let shift = shift_count(a.min(b));
    let diff = a - b;
    let mut correction = 0.0;
    for i in 0..shift {
        correction += (diff / (b + i as f64)).ln_1p();
    }
    let big_a = a + shift as f64;
    let big_b = b + shift as f64;
    let leading = (big_b - 0.5) * (diff / big_b).ln_1p() + diff * big_a.ln() - diff;
    Ok(leading + stirling_tail(big_a) - stirling_tail(big_b) - correction)
}

/// Real Bessel order; the first positive zero exists and is simple for `nu > -1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Order(f64);

impl Order {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu > -1.0 {
            Ok(Order(nu))
        } else {
            Err(Error::domain(format!("Bessel order must satisfy nu > -1, got {nu}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Below this argument the ascending series is used; its cancellation loss
/// is at most a few thousand ulps there.
const SERIES_MAX_X: f64 = 12.0;

/// `J_nu(x)` for `x > 0`.
pub fn bessel_j(order: Order, x: f64) -> Result<f64> {
    check_positive(x, "bessel_j")?;
    Ok(bessel_pair(order.0, x)?.0)
}

/// `(J_nu(x), J_{nu+1}(x))`.
fn bessel_pair(nu: f64, x: f64) -> Result<(f64, f64)> {
    if x <= SERIES_MAX_X {
        Ok((series(nu, x)?, series(nu + 1.0, x)?))
    } else {
        miller_pair(nu, x)
    }
}

fn series(nu: f64, x: f64) -> Result<f64> {
    let q = -0.25 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..1000 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    let log_prefactor = nu * (0.5 * x).ln() - log_gamma(nu + 1.0)?;
    Ok(log_prefactor.exp() * sum)
}

/// Signed sum kept as `mantissa * exp(log_scale)`.
#[derive(Default)]
struct ScaledSum {
    mantissa: f64,
    log_scale: f64,
}

impl ScaledSum {
    fn add_log(&mut self, sign: f64, log_abs: f64) {
        if self.mantissa == 0.0 {
            self.mantissa = sign;
            self.log_scale = log_abs;
            return;
        }
        if log_abs > self.log_scale + 300.0 {
            self.mantissa *= (self.log_scale - log_abs).exp();
            self.log_scale = log_abs;
        }
        self.mantissa += sign * (log_abs - self.log_scale).exp();
        if self.mantissa.abs() > 1e100 {
            self.log_scale += self.mantissa.abs().ln();
            self.mantissa = self.mantissa.signum();
        }
    }

    fn rescale(&mut self, log_factor: f64) {
        self.log_scale += log_factor;
    }
}

/// Miller's backward recurrence from an order well above `x`, normalised with
/// the Neumann series `(x/2)^nu / Gamma(nu+1) = sum_k c_k J_{nu+2k}(x)`,
/// `c_0 = 1`, `c_k = (nu+2k) Gamma(nu+k) / (k! Gamma(nu+1))`.
fn miller_pair(nu: f64, x: f64) -> Result<(f64, f64)> {
    let mut start = (x + 30.0 + (40.0 * x).sqrt()).ceil() as usize;
    start += start % 2;
    let top_k = start / 2;
    let log_gamma_nu1 = log_gamma(nu + 1.0)?;
    let mut log_c = (nu + 2.0 * top_k as f64).ln()
        + log_gamma_ratio(nu + top_k as f64, top_k as f64 + 1.0)?
        - log_gamma_nu1;

    const RESCALE_AT: f64 = 1e200;
    let log_rescale = RESCALE_AT.ln();
    let mut above = 0.0; // f_{i+1}
    let mut current: f64 = 1.0; // f_i
    let mut norm = ScaledSum::default();
    for i in (1..=start).rev() {
        if i % 2 == 0 {
            let k = i / 2;
            if current != 0.0 {
                norm.add_log(current.signum(), log_c + current.abs().ln());
            }
            if k >= 2 {
                let kf = k as f64;
                log_c += (nu + 2.0 * kf - 2.0).ln() - (nu + 2.0 * kf).ln() - (nu + kf - 1.0).ln()
                    + kf.ln();
            }
        }
        let below = 2.0 * (nu + i as f64) / x * current - above;
        above = current;
        current = below;
        if current.abs() > RESCALE_AT {
            current /= RESCALE_AT;
            above /= RESCALE_AT;
            norm.rescale(-log_rescale);
        }
    }
    let (f0, f1) = (current, above);

    let log_f0 = f0.abs().ln();
    let reference = if norm.mantissa == 0.0 {
        log_f0
    } else {
        log_f0.max(norm.log_scale + norm.mantissa.abs().ln())
    };
    let total = f0.signum() * (log_f0 - reference).exp()
        + norm.mantissa * (norm.log_scale - reference).exp();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::Overflow(format!(
            "Bessel normalisation failed for nu = {nu}, x = {x}"
        )));
    }
    let log_total = reference + total.ln();
    let log_norm = nu * (0.5 * x).ln() - log_gamma_nu1;
    let scaled = |f: f64| -> f64 {
        if f == 0.0 {
            0.0
        } else {
            f.signum() * (f.abs().ln() + log_norm - log_total).exp()
        }
    };
    Ok((scaled(f0), scaled(f1)))
}

/// First positive zero `j_nu` of `J_nu`.
///
/// Scans `[max(eps, nu), nu + 10 + 3 nu^(1/3)]` in steps of 0.1 for the first
/// sign change, bisects to 1e-12 and finishes with three Newton steps using
/// `J'_nu = (nu/x) J_nu - J_{nu+1}`, each kept only if it stays in the bracket.
pub fn bessel_first_zero(order: Order) -> Result<f64> {
    let nu = order.0;
    let pos = nu.max(0.0);
    let mut lo = if nu > 0.0 { nu } else { 1e-6 };
    let end = pos + 10.0 + 3.0 * pos.cbrt();
    let mut f_lo = bessel_pair(nu, lo)?.0;
    let mut hi = lo;
    let mut found = false;
    while hi < end {
        hi = lo + 0.1;
        let f_hi = bessel_pair(nu, hi)?.0;
        if f_hi == 0.0 {
            return Ok(hi);
        }
        if f_lo.signum() != f_hi.signum() {
            found = true;
            break;
        }
        lo = hi;
        f_lo = f_hi;
    }
    if !found {
        return Err(Error::Bracket(format!(
            "no sign change of J_{nu} on ({}, {end})",
            if nu > 0.0 { nu } else { 1e-6 }
        )));
    }

    for _ in 0..200 {
        if hi - lo <= 1e-12 * lo.max(1.0) {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = bessel_pair(nu, mid)?.0;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }

    let mut root = 0.5 * (lo + hi);
    for _ in 0..3 {
        let (j, j_next) = bessel_pair(nu, root)?;
        let slope = nu / root * j - j_next;
        if slope == 0.0 || j == 0.0 {
            break;
        }
        let candidate = root - j / slope;
        if candidate > lo - 1e-12 && candidate < hi + 1e-12 {
            root = candidate;
        }
    }
    Ok(root)
}
