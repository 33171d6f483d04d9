//! The matrices `A_m`, `Ã_m` and `B_n`.
//!
//! With `h_i^2 = Gamma(i + 2 lambda) / ((i + lambda) Gamma(i + 1))` the even
//! family uses `alpha_k = (2k - 1 + lambda) h_{2k-1}`, `beta_k = 1 / h_{2k}`
//! and the odd family the same expressions at the half-shifted index
//! `k - 1/2`. Both families share the layout
//!
//! ```text
//! a_kj = s_min(k,j) * beta_k * beta_j,    s_k = alpha_1^2 + ... + alpha_k^2
//! ```
//!
//! and `B_n = 4 A_m` for `n = 2m`, `B_n = 4 Ã_m` for `n = 2m - 1`.
//!
//! `s_k` and `beta_k` individually leave the double range for moderate
//! `lambda` (`alpha_1^2` already contains `Gamma(1 + 2 lambda)`), while the
//! entries stay of size `n^3 / lambda`. The operator therefore stores
//! `ln s_k` and `ln beta_k`, and applies itself through the diagonal `a_kk`
//! and the consecutive ratios `beta_k / beta_{k-1}`, which are all moderate.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::specfun::{log_gamma, log_gamma_ratio};

/// Largest `m` for which a dense copy of the operator may be materialised.
pub const DENSE_THRESHOLD: usize = 2048;

/// Smallest accepted `lambda`; below it `c_0 = 4 / (2 lambda + 1)` and the
/// `k = 1` odd-family entry lose most of their significant digits.
pub const LAMBDA_MIN: f64 = -0.499;

/// The Gegenbauer weight parameter `lambda`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct GegenbauerParam(f64);

impl GegenbauerParam {
    pub fn new(lambda: f64) -> Result<Self> {
        if !lambda.is_finite() || lambda <= -0.5 {
            return Err(Error::domain(format!(
                "lambda must be a finite real greater than -1/2, got {lambda}"
            )));
        }
        if lambda < LAMBDA_MIN {
            return Err(Error::domain(format!(
                "lambda = {lambda} is below {LAMBDA_MIN}: 4/(2 lambda + 1) and Gamma(2 lambda + 1) \
                 lose precision as lambda approaches -1/2"
            )));
        }
        Ok(GegenbauerParam(lambda))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// `4 / (2 lambda + 1)`.
    pub fn c0(self) -> f64 {
        4.0 / (2.0 * self.0 + 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Offset between the matrix index `k` and the real index it stands for.
    fn shift(self) -> f64 {
        match self {
            Parity::Even => 0.0,
            Parity::Odd => 0.5,
        }
    }
}

/// Degree `n`, matrix dimension `m = floor((n + 1) / 2)` and parity of `n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct ProblemSize {
    n: usize,
    m: usize,
    parity: Parity,
}

impl ProblemSize {
    pub fn new(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("polynomial degree n must be at least 1"));
        }
        let parity = if n.is_multiple_of(2) { Parity::Even } else { Parity::Odd };
        Ok(ProblemSize { n, m: n.div_ceil(2), parity })
    }

    /// Size of the even-family matrix `A_m` (`n = 2m`).
    pub fn even(m: usize) -> Result<Self> {
        Self::new(2 * m)
    }

    /// Size of the odd-family matrix `Ã_m` (`n = 2m - 1`).
    pub fn odd(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("matrix dimension m must be at least 1"));
        }
        Self::new(2 * m - 1)
    }

    pub fn n(self) -> usize {
        self.n
    }

    pub fn m(self) -> usize {
        self.m
    }

    pub fn parity(self) -> Parity {
        self.parity
    }
}

/// `ln h_t^2` for a real index `t`.
fn log_h2(t: f64, lambda: f64) -> Result<f64> {
    if t + 2.0 * lambda <= 0.0 || t + lambda <= 0.0 {
        return Err(Error::domain(format!(
            "h_i^2 needs i + 2 lambda > 0 and i + lambda > 0 (i = {t}, lambda = {lambda})"
        )));
    }
    Ok(log_gamma_ratio(t + 2.0 * lambda, t + 1.0)? - (t + lambda).ln())
}

/// `ln h_i^2 = ln Gamma(i + 2 lambda) - ln Gamma(i + 1) - ln(i + lambda)`.
pub fn log_h_squared(i: usize, lambda: GegenbauerParam) -> Result<f64> {
    log_h2(i as f64, lambda.value())
}

fn check_index(k: usize) -> Result<()> {
    if k == 0 {
        Err(Error::domain("matrix indices start at 1"))
    } else {
        Ok(())
    }
}

fn log_alpha_squared(k: usize, parity: Parity, lambda: f64) -> Result<f64> {
    check_index(k)?;
    if parity == Parity::Odd && k == 1 {
        // lambda^2 h_0^2 = lambda Gamma(2 lambda) = Gamma(2 lambda + 1) / 2
        return Ok(log_gamma(2.0 * lambda + 1.0)? - std::f64::consts::LN_2);
    }
    let t = 2.0 * (k as f64 - parity.shift()) - 1.0;
    Ok((t + lambda).ln() + log_gamma_ratio(t + 2.0 * lambda, t + 1.0)?)
}

fn log_beta_squared(k: usize, parity: Parity, lambda: f64) -> Result<f64> {
    check_index(k)?;
    Ok(-log_h2(2.0 * (k as f64 - parity.shift()), lambda)?)
}

/// `alpha_k^2` (even family) or `α̃_k^2` (odd family).
pub fn alpha_squared(k: usize, parity: Parity, lambda: GegenbauerParam) -> Result<f64> {
    Ok(log_alpha_squared(k, parity, lambda.value())?.exp())
}

/// `ln(beta_k^2 / beta_j^2)` for the given family; exactly antisymmetric in `(j, k)`.
pub fn log_beta_ratio_squared(
    j: usize,
    k: usize,
    parity: Parity,
    lambda: GegenbauerParam,
) -> Result<f64> {
    check_index(j)?;
    check_index(k)?;
    if j > k {
        return Ok(-log_beta_ratio_squared(k, j, parity, lambda)?);
    }
    if j == k {
        return Ok(0.0);
    }
    let lam = lambda.value();
    let tj = 2.0 * (j as f64 - parity.shift());
    let tk = 2.0 * (k as f64 - parity.shift());
    // h_{tj}^2 / h_{tk}^2, either across the two indices or as a difference
    // of ln h^2; the rounding error follows the size of the cancelled terms
    let upper = log_gamma_ratio(tj + 2.0 * lam, tk + 2.0 * lam)?;
    let lower = log_gamma_ratio(tj + 1.0, tk + 1.0)?;
    let hj = log_h2(tj, lam)?;
    let hk = log_h2(tk, lam)?;
    if upper.abs() + lower.abs() <= hj.abs() + hk.abs() {
        Ok(upper - lower - ((tj + lam) / (tk + lam)).ln())
    } else {
        Ok(hj - hk)
    }
}

/// `f_0(x) = x (x + lambda/2) (x + lambda)`.
pub fn f0(x: f64, lambda: f64) -> f64 {
    x * (x + 0.5 * lambda) * (x + lambda)
}

/// Closed-form diagonal `a_kk = c_0 f_0(k)` or `ã_kk = c_0 f_0(k - 1/2)`.
pub fn diag_entry(k: usize, parity: Parity, lambda: GegenbauerParam) -> Result<f64> {
    check_index(k)?;
    Ok(lambda.c0() * f0(k as f64 - parity.shift(), lambda.value()))
}

/// Closed-form trace of `B_n`.
pub fn trace_exact(size: ProblemSize, lambda: GegenbauerParam) -> f64 {
    let lam = lambda.value();
    let n = size.n() as f64;
    let c6 = 1.0 / (4.0 * (2.0 * lam + 1.0));
    match size.parity() {
        Parity::Even => c6 * n * (n + 2.0) * (n + 2.0 * lam) * (n + 2.0 * lam + 2.0),
        Parity::Odd => {
            let p = (n + 1.0) * (n + 2.0 * lam + 1.0);
            c6 * (p * p - 2.0 * p)
        }
    }
}

/// Neumaier-compensated sum of positive terms given by their logarithms.
///
/// The running sum is kept in plain arithmetic (`shift = 0`) until a term
/// would overflow; from then on it is held as `sum * exp(shift)`.
#[derive(Debug, Default)]
struct LogSum {
    shift: f64,
    sum: f64,
    comp: f64,
}

impl LogSum {
    const HEADROOM: f64 = 600.0;

    fn add_log(&mut self, log_term: f64) {
        if log_term - self.shift > Self::HEADROOM {
            let new_shift = log_term;
            let factor = (self.shift - new_shift).exp();
            self.sum *= factor;
            self.comp *= factor;
            self.shift = new_shift;
        }
        let term = (log_term - self.shift).exp();
        let t = self.sum + term;
        if self.sum.abs() >= term.abs() {
            self.comp += (self.sum - t) + term;
        } else {
            self.comp += (term - t) + self.sum;
        }
        self.sum = t;
    }

    fn ln(&self) -> f64 {
        self.shift + (self.sum + self.comp).ln()
    }
}

fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `B_n` held implicitly.
///
/// Prefix sums are accumulated with compensated summation, so `ln s_k`
/// carries a relative error of a few ulps independent of `m`; the logarithms
/// of Gamma ratios contribute `O(ulp * |ln s_k|)`.
#[derive(Debug, Clone)]
pub struct OperatorB {
    size: ProblemSize,
    lambda: GegenbauerParam,
    scale: f64,
    log_prefix: Vec<f64>,
    log_beta: Vec<f64>,
    /// `a_kk = s_k beta_k^2`, without the factor 4.
    diag: Vec<f64>,
    /// `beta_k / beta_{k-1}`; `ratio[0]` is unused and set to 0.
    ratio: Vec<f64>,
}

/// Builds `B_n` for degree `size.n()` and parameter `lambda`.
pub fn build_operator(size: ProblemSize, lambda: GegenbauerParam) -> Result<OperatorB> {
    let m = size.m();
    let parity = size.parity();
    let lam = lambda.value();
    let mut log_prefix = Vec::with_capacity(m);
    let mut log_beta = Vec::with_capacity(m);
    let mut diag = Vec::with_capacity(m);
    let mut ratio = Vec::with_capacity(m);
    let mut acc = LogSum::default();
    for k in 1..=m {
        acc.add_log(log_alpha_squared(k, parity, lam)?);
        let ls = acc.ln();
        let lb = 0.5 * log_beta_squared(k, parity, lam)?;
        let a_kk = (ls + 2.0 * lb).exp();
        if !(a_kk.is_finite() && (4.0 * a_kk).is_finite() && a_kk > 0.0) {
            return Err(Error::Overflow(format!(
                "diagonal entry {k} of B_{} (lambda = {lam}) is outside the double range \
                 (ln = {})",
                size.n(),
                ls + 2.0 * lb + 4f64.ln()
            )));
        }
        let rho = if k == 1 {
            0.0
        } else {
            (0.5 * log_beta_ratio_squared(k - 1, k, parity, lambda)?).exp()
        };
        log_prefix.push(ls);
        log_beta.push(lb);
        diag.push(a_kk);
        ratio.push(rho);
    }
    Ok(OperatorB { size, lambda, scale: 4.0, log_prefix, log_beta, diag, ratio })
}

impl OperatorB {
    pub fn size(&self) -> ProblemSize {
        self.size
    }

    pub fn dim(&self) -> usize {
        self.size.m()
    }

    pub fn lambda(&self) -> GegenbauerParam {
        self.lambda
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `ln s_k`, k = 1..m.
    pub fn log_prefix_sums(&self) -> &[f64] {
        &self.log_prefix
    }

    /// `ln beta_k`, k = 1..m.
    pub fn log_beta(&self) -> &[f64] {
        &self.log_beta
    }

    /// Diagonal of `B_n` (scale included).
    pub fn diagonal(&self) -> Vec<f64> {
        self.diag.iter().map(|d| self.scale * d).collect()
    }

    /// `y = B_n x` in O(m).
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.dim()];
        self.apply(x, &mut y)?;
        Ok(y)
    }

    /// `y = B_n x` into a caller-owned buffer.
    ///
    /// `y_k = 4 (rho_k Q_{k-1} + a_kk T_k)` with `Q_k = rho_k Q_{k-1} + a_kk x_k`
    /// and `T_k = x_k + rho_{k+1} T_{k+1}`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        let m = self.dim();
        if x.len() != m || y.len() != m {
            return Err(Error::Validation(format!(
                "vector length {} / {} does not match dimension {m}",
                x.len(),
                y.len()
            )));
        }
        // suffix pass stores T_k in y
        let mut t = 0.0;
        for k in (0..m).rev() {
            t = if k + 1 < m { x[k] + self.ratio[k + 1] * t } else { x[k] };
            y[k] = t;
        }
        let mut q = 0.0;
        for k in 0..m {
            let lower = if k == 0 { 0.0 } else { self.ratio[k] * q };
            y[k] = self.scale * (lower + self.diag[k] * y[k]);
            q = lower + self.diag[k] * x[k];
        }
        Ok(())
    }

    /// Entry `(k, j)` with 0-based indices.
    pub fn entry(&self, k: usize, j: usize) -> f64 {
        let lo = k.min(j);
        self.scale * (self.log_prefix[lo] + self.log_beta[k] + self.log_beta[j]).exp()
    }

    pub fn to_dense(&self) -> Result<DenseSym> {
        let m = self.dim();
        if m > DENSE_THRESHOLD {
            return Err(Error::Size { dim: m, cap: DENSE_THRESHOLD });
        }
        let mut data = vec![0.0; m * m];
        for k in 0..m {
            for j in 0..=k {
                let v = self.entry(k, j);
                data[k * m + j] = v;
                data[j * m + k] = v;
            }
        }
        Ok(DenseSym { dim: m, data })
    }

    /// Sum of the stored diagonal.
    pub fn trace(&self) -> f64 {
        self.scale * compensated_sum(self.diag.iter().copied())
    }

    pub fn max_diagonal(&self) -> f64 {
        self.scale * self.diag.iter().copied().fold(0.0, f64::max)
    }

    /// `||B_n||_F^2` in O(m).
    ///
    /// Row `k` contributes `a_kk^2 + 2 R_k` with
    /// `R_k = sum_{j<k} (beta_k / beta_j)^2 a_jj^2 = rho_k^2 (R_{k-1} + a_{k-1,k-1}^2)`.
    pub fn frobenius_squared(&self) -> f64 {
        let mut r = 0.0;
        let terms = (0..self.dim()).map(|k| {
            if k > 0 {
                let rho = self.ratio[k];
                r = rho * rho * (r + self.diag[k - 1] * self.diag[k - 1]);
            }
            self.diag[k] * self.diag[k] + 2.0 * r
        });
        self.scale * self.scale * compensated_sum(terms)
    }

    /// Row sums of `B_n` (all entries are positive).
    pub fn row_sums(&self) -> Vec<f64> {
        let ones = vec![1.0; self.dim()];
        let mut y = vec![0.0; self.dim()];
        self.apply(&ones, &mut y).expect("dimension matches");
        y
    }

    /// `||B_n||_inf`, the largest row sum.
    pub fn infinity_norm(&self) -> f64 {
        self.row_sums().into_iter().fold(0.0, f64::max)
    }
}

/// Convenience wrapper matching [`OperatorB::to_dense`].
pub fn to_dense(op: &OperatorB) -> Result<DenseSym> {
    op.to_dense()
}

/// `||B_n||_F^2`.
pub fn frobenius_exact(op: &OperatorB) -> f64 {
    op.frobenius_squared()
}

/// `||B_n||_inf`.
pub fn infinity_norm_exact(op: &OperatorB) -> f64 {
    op.infinity_norm()
}

/// Explicit symmetric matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSym {
    dim: usize,
    data: Vec<f64>,
}

impl DenseSym {
    /// Wraps a row-major matrix, rejecting anything not exactly symmetric.
    pub fn from_row_major(dim: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::Validation(format!(
                "{} entries given for a {dim}x{dim} matrix",
                data.len()
            )));
        }
        for k in 0..dim {
            for j in 0..k {
                if data[k * dim + j] != data[j * dim + k] {
                    return Err(Error::Validation(format!("entry ({k}, {j}) breaks symmetry")));
                }
            }
        }
        Ok(DenseSym { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.data[k * self.dim + j]
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.data[k * self.dim..(k + 1) * self.dim]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.dim)
            .map(|k| self.row(k).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.get(k, k)).sum()
    }

    pub fn frobenius_squared(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn infinity_norm(&self) -> f64 {
        (0..self.dim)
            .map(|k| self.row(k).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn lam(v: f64) -> GegenbauerParam {
        GegenbauerParam::new(v).unwrap()
    }

    fn op(n: usize, l: f64) -> OperatorB {
        build_operator(ProblemSize::new(n).unwrap(), lam(l)).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
    }

    #[test]
    fn parameter_validation() {
        assert!(GegenbauerParam::new(-0.5).is_err());
        assert!(GegenbauerParam::new(-0.4995).is_err());
        assert!(GegenbauerParam::new(f64::NAN).is_err());
        assert!(GegenbauerParam::new(-0.499).is_ok());
        assert!(ProblemSize::new(0).is_err());
        let s = ProblemSize::new(7).unwrap();
        assert_eq!((s.m(), s.parity()), (4, Parity::Odd));
        let s = ProblemSize::new(8).unwrap();
        assert_eq!((s.m(), s.parity()), (4, Parity::Even));
    }

    #[test]
    fn log_h_squared_examples() {
        assert!((log_h_squared(3, lam(0.0)).unwrap() - (1.0f64 / 9.0).ln()).abs() < 1e-14);
        assert!((log_h_squared(1, lam(0.5)).unwrap() - (2.0f64 / 3.0).ln()).abs() < 1e-14);
        assert!(log_h_squared(2, lam(1.0)).unwrap().abs() < 1e-14);
        assert!(log_h_squared(0, lam(0.0)).is_err());
        assert!(log_h_squared(0, lam(0.7)).is_ok());
    }

    #[test]
    fn alpha_squared_examples() {
        assert!((alpha_squared(1, Parity::Even, lam(0.0)).unwrap() - 1.0).abs() < 1e-14);
        assert!((alpha_squared(1, Parity::Odd, lam(0.0)).unwrap() - 0.5).abs() < 1e-14);
        assert!((alpha_squared(1, Parity::Even, lam(1.0)).unwrap() - 4.0).abs() < 1e-13);
        assert!(alpha_squared(0, Parity::Even, lam(1.0)).is_err());
    }

    #[test]
    fn beta_ratio_examples() {
        let r = |j, k, p, l| log_beta_ratio_squared(j, k, p, lam(l)).unwrap();
        assert!((r(1, 2, Parity::Even, 0.0) - 4f64.ln()).abs() < 1e-14);
        assert!(r(1, 3, Parity::Even, 1.0).abs() < 1e-14);
        assert!((r(1, 2, Parity::Odd, 0.0) - 9f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn diag_entry_examples() {
        assert!((diag_entry(1, Parity::Even, lam(0.0)).unwrap() - 4.0).abs() < 1e-14);
        assert!((diag_entry(1, Parity::Odd, lam(0.0)).unwrap() - 0.5).abs() < 1e-14);
        assert!((diag_entry(2, Parity::Even, lam(0.0)).unwrap() - 32.0).abs() < 1e-13);
        // Gamma-based reconstruction beta_1^2 * alpha_1^2
        let lb = log_beta_ratio_squared(1, 1, Parity::Even, lam(0.0)).unwrap();
        assert_eq!(lb, 0.0);
        let recon = (log_beta_squared(1, Parity::Even, 0.0).unwrap()
            + log_alpha_squared(1, Parity::Even, 0.0).unwrap())
        .exp();
        assert!((recon - 4.0).abs() < 1e-13);
    }

    #[test]
    fn small_operators() {
        let b2 = op(2, 0.0).to_dense().unwrap();
        assert_eq!(b2.dim(), 1);
        assert!((b2.get(0, 0) - 16.0).abs() < 1e-12);

        let b3 = op(3, 0.0).to_dense().unwrap();
        let expected = [[2.0, 6.0], [6.0, 54.0]];
        for k in 0..2 {
            for j in 0..2 {
                assert!((b3.get(k, j) - expected[k][j]).abs() < 1e-12, "({k},{j})");
            }
        }
        let b1 = op(1, 0.5).to_dense().unwrap();
        assert!((b1.get(0, 0) - 3.0).abs() < 1e-13);
    }

    #[test]
    fn matvec_examples() {
        let b3 = op(3, 0.0);
        let y = b3.matvec(&[1.0, 0.0]).unwrap();
        assert!((y[0] - 2.0).abs() < 1e-12 && (y[1] - 6.0).abs() < 1e-12);
        let y = b3.matvec(&[0.0, 1.0]).unwrap();
        assert!((y[0] - 6.0).abs() < 1e-12 && (y[1] - 54.0).abs() < 1e-12);
        let y = op(2, 0.0).matvec(&[1.0]).unwrap();
        assert!((y[0] - 16.0).abs() < 1e-12);
        assert!(b3.matvec(&[1.0]).is_err());
    }

    #[test]
    fn dense_threshold_is_enforced() {
        let big = op(2 * (DENSE_THRESHOLD + 1), 0.5);
        assert!(matches!(big.to_dense(), Err(Error::Size { .. })));
        assert!(op(2 * DENSE_THRESHOLD - 1, 0.5).dim() == DENSE_THRESHOLD);
    }

    #[test]
    fn trace_examples() {
        let t = |n, l| trace_exact(ProblemSize::new(n).unwrap(), lam(l));
        assert!((t(2, 0.0) - 16.0).abs() < 1e-12);
        assert!((t(3, 0.0) - 56.0).abs() < 1e-12);
        assert!((t(4, 0.0) - 144.0).abs() < 1e-12);
    }

    #[test]
    fn norm_examples() {
        assert!((frobenius_exact(&op(3, 0.0)) - 2992.0).abs() < 1e-9);
        assert!((frobenius_exact(&op(2, 0.0)) - 256.0).abs() < 1e-10);
        assert!((frobenius_exact(&op(1, 0.5)) - 9.0).abs() < 1e-12);
        assert!((infinity_norm_exact(&op(3, 0.0)) - 60.0).abs() < 1e-11);
        assert!((infinity_norm_exact(&op(2, 0.0)) - 16.0).abs() < 1e-12);
        let b4 = op(4, 0.0);
        let dense = b4.to_dense().unwrap();
        assert!(rel(infinity_norm_exact(&b4), dense.infinity_norm()) < 1e-14);
    }

    #[test]
    fn norms_match_dense_oracle() {
        for &l in &[-0.49, 0.0, 0.5, 2.0, 25.0] {
            for n in [1, 2, 5, 16, 33, 100, 201] {
                let b = op(n, l);
                let d = b.to_dense().unwrap();
                assert!(rel(b.frobenius_squared(), d.frobenius_squared()) < 1e-11, "n={n} l={l}");
                assert!(rel(b.infinity_norm(), d.infinity_norm()) < 1e-11, "n={n} l={l}");
                assert!(rel(b.trace(), d.trace()) < 1e-12);
            }
        }
    }

    #[test]
    fn trace_formula_matches_diagonal_sum() {
        for &l in &[-0.49, -0.25, 0.0, 0.5, 1.0, 2.0, 5.0, 25.0] {
            for n in 1..=200 {
                let size = ProblemSize::new(n).unwrap();
                let d = op(n, l).to_dense().unwrap();
                let closed = trace_exact(size, lam(l));
                assert!(rel(d.trace(), closed) < 1e-11, "n={n} l={l}");
                let via_diag: f64 = (1..=size.m())
                    .map(|k| 4.0 * diag_entry(k, size.parity(), lam(l)).unwrap())
                    .sum();
                assert!(rel(via_diag, closed) < 1e-11);
            }
        }
    }

    #[test]
    fn dense_entries_positive_and_symmetric() {
        for &l in &[-0.49, 0.0, 1.0, 25.0] {
            for n in [3, 10, 57, 120] {
                let d = op(n, l).to_dense().unwrap();
                for k in 0..d.dim() {
                    for j in 0..d.dim() {
                        assert!(d.get(k, j) > 0.0);
                        assert_eq!(d.get(k, j), d.get(j, k));
                    }
                }
            }
        }
    }

    #[test]
    fn large_lambda_does_not_overflow() {
        // Gamma(2 lambda + 1) alone overflows for lambda = 1000
        for n in [1, 2, 999, 1000] {
            let b = op(n, 1000.0);
            let size = b.size();
            let closed = 4.0 * diag_entry(size.m(), size.parity(), lam(1000.0)).unwrap();
            let stored = *b.diagonal().last().unwrap();
            assert!(rel(stored, closed) < 1e-9, "n={n}: {stored} vs {closed}");
        }
    }

    #[test]
    fn matvec_agrees_with_dense() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for &l in &[-0.49, -0.25, 0.0, 0.5, 1.0, 2.0, 5.0, 25.0] {
            for n in (1..=40).chain((41..=400).step_by(23)) {
                let b = op(n, l);
                let d = b.to_dense().unwrap();
                for _ in 0..5 {
                    let x: Vec<f64> = (0..b.dim()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let fast = b.matvec(&x).unwrap();
                    let slow = d.matvec(&x);
                    let scale: f64 = d.matvec(&x.iter().map(|v| v.abs()).collect::<Vec<_>>())
                        .iter()
                        .fold(0.0, |a, v| a.max(*v));
                    for (f, s) in fast.iter().zip(&slow) {
                        assert!((f - s).abs() <= 1e-10 * scale, "n={n} l={l}: {f} vs {s}");
                    }
                }
            }
        }
    }

    proptest! {
        #[test]
        fn diagonal_reconstruction_matches_closed_form(k in 1usize..600, l in -0.49f64..40.0, odd in any::<bool>()) {
            let parity = if odd { Parity::Odd } else { Parity::Even };
            let n = if odd { 2 * k - 1 } else { 2 * k };
            let b = build_operator(ProblemSize::new(n).unwrap(), lam(l)).unwrap();
            let stored = b.diagonal()[k - 1] / b.scale();
            let closed = diag_entry(k, parity, lam(l)).unwrap();
            prop_assert!(rel(stored, closed) < 1e-10, "stored {} closed {}", stored, closed);
        }

        #[test]
        fn beta_ratio_is_antisymmetric(j in 1usize..200, k in 1usize..200, l in -0.49f64..50.0, odd in any::<bool>()) {
            let parity = if odd { Parity::Odd } else { Parity::Even };
            let a = log_beta_ratio_squared(j, k, parity, lam(l)).unwrap();
            let b = log_beta_ratio_squared(k, j, parity, lam(l)).unwrap();
            prop_assert_eq!(a, -b);
        }

        #[test]
        fn beta_ratio_closed_forms_at_zero_and_one(j in 1usize..300, k in 1usize..300) {
            let at0 = log_beta_ratio_squared(j, k, Parity::Even, lam(0.0)).unwrap();
            prop_assert!((at0 - 2.0 * (k as f64 / j as f64).ln()).abs() < 1e-12);
            let at1 = log_beta_ratio_squared(j, k, Parity::Even, lam(1.0)).unwrap();
            prop_assert!(at1.abs() < 1e-12);
        }
    }
}
