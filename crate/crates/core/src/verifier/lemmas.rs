//! Property checks for the beta-ratio inequalities and the quadrature lemmas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gegenbauer::{log_beta_ratio_squared, GegenbauerParam, Parity};

/// Default `lambda` list for the ratio checks; covers both regimes and the
/// switch points 0 and 1.
pub const RATIO_LAMBDAS: [f64; 16] = [
    -0.49, -0.25, -0.1, 0.0, 0.1, 0.25, 0.5, 0.75, 0.9, 1.0, 1.5, 2.0, 5.0, 10.0, 25.0, 50.0,
];

/// Absolute slack allowed in the logarithmic comparison of ratios.
const LOG_TOL: f64 = 1e-12;
/// Relative slack allowed in comparisons against a numerical integral.
const QUAD_SLACK: f64 = 1e-9;
/// Target relative accuracy of [`integrate`].
pub const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Serialize)]
pub struct LemmaReport {
    pub checks: usize,
    pub violations: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn record(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.violations.push(what());
        }
    }
}

/// For `1 <= j < k <= j_max`, checks that `beta_k^2 / beta_j^2` lies between
/// `(j/k)^(2 lambda - 2)` and `((j + lambda)/(k + lambda))^(2 lambda - 2)`
/// (indices shifted by `-1/2` for the odd family), in the order prescribed
/// by the sign regime of `lambda`.
pub fn check_ratio_propositions(j_max: usize, lambdas: &[f64]) -> Result<LemmaReport> {
    if j_max < 2 {
        return Err(Error::domain(format!("j_max must be at least 2, got {j_max}")));
    }
    let mut report = LemmaReport { checks: 0, violations: Vec::new() };
    for &l in lambdas {
        let param = GegenbauerParam::new(l)?;
        let e = 2.0 * l - 2.0;
        for parity in [Parity::Even, Parity::Odd] {
            let shift = if parity == Parity::Odd { 0.5 } else { 0.0 };
            for k in 2..=j_max {
                for j in 1..k {
                    let (jf, kf) = (j as f64 - shift, k as f64 - shift);
                    let mid = log_beta_ratio_squared(j, k, parity, param)?;
                    let left = e * (jf / kf).ln();
                    let right = e * ((jf + l) / (kf + l)).ln();
                    let tol = LOG_TOL * (1.0 + mid.abs());
                    // left <= mid <= right when lambda <= 0 or lambda >= 1,
                    // reversed for 0 < lambda <= 1 (both at lambda = 1)
                    if l <= 0.0 || l >= 1.0 {
                        report.record(left <= mid + tol && mid <= right + tol, || {
                            format!("{parity:?} j={j} k={k} lambda={l}: {left} <= {mid} <= {right}")
                        });
                    }
                    if l > 0.0 && l <= 1.0 {
                        report.record(left + tol >= mid && mid + tol >= right, || {
                            format!("{parity:?} j={j} k={k} lambda={l}: {left} >= {mid} >= {right}")
                        });
                    }
                }
            }
        }
    }
    Ok(report)
}

/// `int_a^b f` by composite midpoint rules on tripled meshes with Richardson
/// extrapolation in `h^2`; panels that do not settle are bisected.
pub fn integrate(f: &dyn Fn(f64) -> f64, a: f64, b: f64, rel_tol: f64) -> Result<f64> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::domain(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(0.0);
    }
    let scale = midpoint(f, a, b, 64).abs();
    let panels = ((b - a).ceil() as usize).clamp(1, 4096);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == panels { b } else { lo + width };
        total += panel(f, lo, hi, rel_tol, scale * width / (b - a), 0)?;
    }
    Ok(total)
}

fn midpoint(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    (0..n).map(|i| f(a + (i as f64 + 0.5) * h)).sum::<f64>() * h
}

fn panel(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    rel_tol: f64,
    scale: f64,
    depth: usize,
) -> Result<f64> {
    const LEVELS: usize = 7;
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(LEVELS);
    let mut n = 1;
    for level in 0..LEVELS {
        let mut row = vec![midpoint(f, a, b, n)];
        let mut factor = 1.0;
        for j in 0..level {
            factor *= 9.0;
            let prev = table[level - 1][j];
            row.push(row[j] + (row[j] - prev) / (factor - 1.0));
        }
        if level >= 2 {
            let best = row[level];
            let prior = table[level - 1][level - 1];
            if (best - prior).abs() <= 0.1 * rel_tol * best.abs().max(scale) {
                return Ok(best);
            }
        }
        table.push(row);
        n *= 3;
    }
    if depth >= 30 {
        return Err(Error::Convergence { iterations: depth, residual: f64::NAN });
    }
    let mid = 0.5 * (a + b);
    Ok(panel(f, a, mid, rel_tol, 0.5 * scale, depth + 1)?
        + panel(f, mid, b, rel_tol, 0.5 * scale, depth + 1)?)
}

/// `F_1(x) = x^(2 lambda) (x + lambda/2)^2 (x + lambda)^2`.
pub fn f1(x: f64, l: f64) -> f64 {
    x.powf(2.0 * l) * (x + 0.5 * l).powi(2) * (x + l).powi(2)
}

/// `F_2(x) = x^2 (x + lambda/2)^2 (x + lambda)^(2 lambda)`.
pub fn f2(x: f64, l: f64) -> f64 {
    x * x * (x + 0.5 * l).powi(2) * (x + l).powf(2.0 * l)
}

/// `f(1) + ... + f(l)`.
pub fn midpoint_sum(f: &dyn Fn(f64) -> f64, l: usize) -> f64 {
    (1..=l).map(|i| f(i as f64)).sum()
}

/// `f(1)/2 + f(2) + ... + f(l-1) + f(l)/2`.
pub fn trapezoid_sum(f: &dyn Fn(f64) -> f64, l: usize) -> f64 {
    let inner: f64 = (2..l).map(|i| f(i as f64)).sum();
    inner + 0.5 * (f(1.0) + f(l as f64))
}

/// A product `(x + g_1)^a_1 ... (x + g_r)^a_r`.
#[derive(Debug, Clone, Serialize)]
pub struct PowerProduct {
    pub shifts: Vec<f64>,
    pub exponents: Vec<f64>,
}

impl PowerProduct {
    pub fn eval(&self, x: f64) -> f64 {
        self.shifts.iter().zip(&self.exponents).map(|(g, a)| (x + g).powf(*a)).product()
    }

    pub fn degree(&self) -> f64 {
        self.exponents.iter().sum()
    }

    fn gamma_min(&self) -> f64 {
        self.shifts.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn gamma_max(&self) -> f64 {
        self.shifts.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `[(t + g_min) f(t)]_{x0}^{x} / (s + 1)` and `(x + g_max) f(x) / (s + 1)`.
    pub fn integral_bounds(&self, x0: f64, x: f64) -> (f64, f64) {
        let s1 = self.degree() + 1.0;
        let g = |t: f64| (t + self.gamma_min()) * self.eval(t);
        ((g(x) - g(x0)) / s1, (x + self.gamma_max()) * self.eval(x) / s1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LemmaSampleSpec {
    pub samples: usize,
    pub seed: u64,
}

impl Default for LemmaSampleSpec {
    fn default() -> Self {
        LemmaSampleSpec { samples: 200, seed: 0x5eed_2016 }
    }
}

/// Random checks of the midpoint/trapezoid inequalities for `F_1`, `F_2`,
/// their convexity and monotonicity, and the two-sided integral bound for
/// power products.
pub fn check_integral_lemmas(spec: &LemmaSampleSpec) -> Result<LemmaReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut report = LemmaReport { checks: 0, violations: Vec::new() };
    for sample in 0..spec.samples {
        let l = rng.gen_range(-0.49..=10.0);
        let ell = rng.gen_range(2..=50usize);
        let funcs: [(&str, Box<dyn Fn(f64) -> f64>); 2] =
            [("F1", Box::new(move |x| f1(x, l))), ("F2", Box::new(move |x| f2(x, l)))];
        for (name, f) in &funcs {
            let upper = integrate(f.as_ref(), 0.5, ell as f64 + 0.5, QUAD_TOL)?;
            let sum = midpoint_sum(f.as_ref(), ell);
            report.record(sum <= upper * (1.0 + QUAD_SLACK), || {
                format!("sample {sample}: {name} lambda={l} l={ell}: midpoint sum {sum} > {upper}")
            });
            let lower = integrate(f.as_ref(), 1.0, ell as f64, QUAD_TOL)?;
            let trap = trapezoid_sum(f.as_ref(), ell);
            report.record(trap >= lower * (1.0 - QUAD_SLACK), || {
                format!("sample {sample}: {name} lambda={l} l={ell}: trapezoid sum {trap} < {lower}")
            });
            // convexity on [1/2, 50], monotonicity on [1, 50]
            let h = 0.05;
            let mut convex = true;
            let mut increasing = true;
            let mut x = 0.5 + h;
            while x <= 50.0 - h {
                let (a, b, c) = (f(x - h), f(x), f(x + h));
                if a - 2.0 * b + c < -8.0 * f64::EPSILON * (a + 2.0 * b + c) {
                    convex = false;
                }
                if x >= 1.0 && c <= b {
                    increasing = false;
                }
                x += h;
            }
            report.record(convex, || format!("sample {sample}: {name} lambda={l} not convex"));
            report.record(increasing, || format!("sample {sample}: {name} lambda={l} not increasing"));
        }

        let r = rng.gen_range(1..=4usize);
        let shifts: Vec<f64> = (0..r).map(|_| rng.gen_range(-0.5..=5.0)).collect();
        let exponents: Vec<f64> = (0..r).map(|_| rng.gen_range(0.01..=3.0)).collect();
        let prod = PowerProduct { shifts, exponents };
        let x0 = -prod.gamma_min() + rng.gen_range(0.1..=3.0);
        let x = x0 + rng.gen_range(0.1..=20.0);
        let value = integrate(&|t| prod.eval(t), x0, x, QUAD_TOL)?;
        let (lo, hi) = prod.integral_bounds(x0, x);
        report.record(lo <= value * (1.0 + QUAD_SLACK) && value <= hi * (1.0 + QUAD_SLACK), || {
            format!("sample {sample}: {prod:?} on [{x0}, {x}]: {lo} <= {value} <= {hi} fails")
        });
    }
    Ok(report)
}
