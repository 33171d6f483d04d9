//! Largest eigenvalue of `B_n`.
//!
//! [`largest_eigenvalue`] runs power iteration from the all-ones vector and
//! falls back to Lanczos with full reorthogonalisation when the Perron gap
//! is too small for `max_iter` steps. [`full_spectrum_dense`] is a cyclic
//! Jacobi oracle for small matrices.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gegenbauer::{DenseSym, OperatorB};

pub const DEFAULT_TOL: f64 = 1e-11;
/// Smallest relative residual that may be requested.
pub const MIN_TOL: f64 = 1e-14;
/// Upper limit on the Lanczos basis size.
pub const KRYLOV_CAP: usize = 400;
/// Basis memory budget for Lanczos, in stored doubles.
const KRYLOV_BUDGET: usize = 20_000_000;

/// `200 m + 10^4`.
pub fn default_max_iter(m: usize) -> usize {
    200 * m + 10_000
}

/// Symmetric linear operator applied as `y = A x`.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;
    /// `x` and `y` must both have length [`dim`](Self::dim).
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
}

impl SymmetricOperator for OperatorB {
    fn dim(&self) -> usize {
        OperatorB::dim(self)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        self.apply(x, y).expect("operator dimension mismatch");
    }
}

impl SymmetricOperator for DenseSym {
    fn dim(&self) -> usize {
        DenseSym::dim(self)
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (k, yk) in y.iter_mut().enumerate() {
            *yk = self.row(k).iter().zip(x).map(|(a, b)| a * b).sum();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Power,
    Lanczos,
    Dense,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Power => "power",
            Method::Lanczos => "lanczos",
            Method::Dense => "dense",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenResult {
    pub mu_max: f64,
    /// Unit 2-norm, nonnegative components.
    pub eigenvector: Vec<f64>,
    /// `||B v - mu v||_2 / mu`.
    pub residual: f64,
    /// Matrix-vector products (power, Lanczos) or Jacobi sweeps (dense).
    pub iterations: usize,
    pub method: Method,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Rejects residual targets outside `[MIN_TOL, 1)`.
pub fn validate_tol(tol: f64) -> Result<()> {
    if !(MIN_TOL..1.0).contains(&tol) {
        return Err(Error::domain(format!(
            "eigen tolerance must lie in [{MIN_TOL:e}, 1), got {tol:e}"
        )));
    }
    Ok(())
}

/// Rayleigh quotient and relative residual of a unit vector `v`; `bv` receives `B v`.
fn rayleigh<A: SymmetricOperator + ?Sized>(op: &A, v: &[f64], bv: &mut [f64]) -> (f64, f64) {
    op.apply_into(v, bv);
    let mu = dot(v, bv);
    let res: f64 = v
        .iter()
        .zip(bv.iter())
        .map(|(x, y)| (y - mu * x).powi(2))
        .sum::<f64>()
        .sqrt();
    (mu, res / mu.abs())
}

/// Flips `v` so its components sum to a positive value and clears rounding
/// noise of the wrong sign, then renormalises.
fn perron_normalise(v: &mut [f64]) {
    let sign = if v.iter().sum::<f64>() < 0.0 { -1.0 } else { 1.0 };
    for x in v.iter_mut() {
        *x = (sign * *x).max(0.0);
    }
    let nrm = norm(v);
    for x in v.iter_mut() {
        *x /= nrm;
    }
}

/// Power iteration with Rayleigh quotient; `Err(best)` if `max_iter` steps
/// do not reach `tol`.
pub fn power_iteration<A: SymmetricOperator + ?Sized>(
    op: &A,
    tol: f64,
    max_iter: usize,
) -> std::result::Result<EigenResult, EigenResult> {
    let m = op.dim();
    let mut v = vec![1.0 / (m as f64).sqrt(); m];
    let mut bv = vec![0.0; m];
    let mut best: Option<EigenResult> = None;
    for it in 1..=max_iter.max(1) {
        let (mu, residual) = rayleigh(op, &v, &mut bv);
        if best.as_ref().is_none_or(|b| residual < b.residual) {
            best = Some(EigenResult {
                mu_max: mu,
                eigenvector: v.clone(),
                residual,
                iterations: it,
                method: Method::Power,
            });
        }
        if residual <= tol {
            return Ok(best.expect("set above"));
        }
        let nrm = norm(&bv);
        for (x, y) in v.iter_mut().zip(&bv) {
            *x = y / nrm;
        }
    }
    Err(best.expect("at least one iteration"))
}

/// Eigenvalues and eigenvectors of a symmetric tridiagonal matrix by the
/// implicit QL method.
///
/// `d` holds the diagonal and `e[i]` the entry between `i` and `i + 1`.
/// On return the eigenvalues are ascending; `z[i][k]` is component `i` of
/// eigenvector `k`.
fn tql2(d: &mut [f64], e: &[f64]) -> Result<Vec<Vec<f64>>> {
    let n = d.len();
    let mut e: Vec<f64> = e.iter().copied().chain(std::iter::once(0.0)).take(n).collect();
    let mut z: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|k| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = d[mm].abs() + d[mm + 1].abs();
                if e[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Convergence { iterations: iter, residual: e[l].abs() });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[mm] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = mm;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[mm] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                for row in z.iter_mut() {
                    let t = row[i + 1];
                    row[i + 1] = s * row[i] + c * t;
                    row[i] = c * row[i] - s * t;
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[mm] = 0.0;
        }
    }
    // sort ascending, permuting eigenvector columns
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let sorted_d: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    d.copy_from_slice(&sorted_d);
    let z = z
        .into_iter()
        .map(|row| order.iter().map(|&k| row[k]).collect())
        .collect();
    Ok(z)
}

fn krylov_cap(m: usize) -> usize {
    (KRYLOV_BUDGET / m.max(1)).clamp(20, KRYLOV_CAP).min(m)
}

/// One Lanczos cycle from `start`; returns the best Ritz pair found.
fn lanczos_cycle<A: SymmetricOperator + ?Sized>(
    op: &A,
    start: &[f64],
    kmax: usize,
    tol: f64,
    matvecs: &mut usize,
) -> Result<EigenResult> {
    let m = op.dim();
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(kmax);
    let mut alpha = Vec::with_capacity(kmax);
    let mut beta: Vec<f64> = Vec::with_capacity(kmax);
    let mut v = start.to_vec();
    let nrm = norm(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    let mut w = vec![0.0; m];
    let mut best: Option<EigenResult> = None;
    let mut scratch = vec![0.0; m];

    for j in 0..kmax {
        op.apply_into(&v, &mut w);
        *matvecs += 1;
        let a = dot(&v, &w);
        for (wi, vi) in w.iter_mut().zip(&v) {
            *wi -= a * vi;
        }
        if let (Some(prev), Some(&b)) = (basis.last(), beta.last()) {
            for (wi, pi) in w.iter_mut().zip(prev) {
                *wi -= b * pi;
            }
        }
        basis.push(std::mem::take(&mut v));
        alpha.push(a);
        // two passes of classical Gram-Schmidt against the whole basis
        for _ in 0..2 {
            for q in &basis {
                let c = dot(q, &w);
                for (wi, qi) in w.iter_mut().zip(q) {
                    *wi -= c * qi;
                }
            }
        }
        let b = norm(&w);
        let k = j + 1;
        let breakdown = b <= 1e-14 * alpha.iter().fold(0.0f64, |s, x| s.max(x.abs()));
        let last = k == kmax || breakdown;
        if k % 5 == 0 || last {
            let mut d = alpha.clone();
            let z = tql2(&mut d, &beta)?;
            let theta = d[k - 1];
            let s: Vec<f64> = z.iter().map(|row| row[k - 1]).collect();
            let estimate = (b * s[k - 1]).abs() / theta.abs();
            if estimate <= 0.1 * tol || last {
                let mut y = vec![0.0; m];
                for (q, si) in basis.iter().zip(&s) {
                    for (yi, qi) in y.iter_mut().zip(q) {
                        *yi += si * qi;
                    }
                }
                perron_normalise(&mut y);
                let (mu, residual) = rayleigh(op, &y, &mut scratch);
                *matvecs += 1;
                if best.as_ref().is_none_or(|r| residual < r.residual) {
                    best = Some(EigenResult {
                        mu_max: mu,
                        eigenvector: y,
                        residual,
                        iterations: *matvecs,
                        method: Method::Lanczos,
                    });
                }
                if residual <= tol {
                    break;
                }
            }
        }
        if last {
            break;
        }
        beta.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
    Ok(best.expect("last step always forms a Ritz vector"))
}

/// Lanczos with full reorthogonalisation, restarted once from the Ritz vector.
pub fn lanczos<A: SymmetricOperator + ?Sized>(op: &A, tol: f64) -> Result<EigenResult> {
    validate_tol(tol)?;
    let m = op.dim();
    let kmax = krylov_cap(m);
    let mut matvecs = 0;
    let first = lanczos_cycle(op, &vec![1.0; m], kmax, tol, &mut matvecs)?;
    if first.residual <= tol {
        return Ok(first);
    }
    let second = lanczos_cycle(op, &first.eigenvector, kmax, tol, &mut matvecs)?;
    let best = if second.residual < first.residual { second } else { first };
    if best.residual <= tol {
        Ok(best)
    } else {
        Err(Error::Convergence { iterations: matvecs, residual: best.residual })
    }
}

/// `mu_max(B_n)` with a relative residual of at most `tol`.
///
/// Power iteration runs for up to `max_iter` matrix-vector products; if it
/// has not converged, Lanczos takes over. The error reports the better of
/// the two residuals.
pub fn largest_eigenvalue<A: SymmetricOperator + ?Sized>(
    op: &A,
    tol: f64,
    max_iter: usize,
) -> Result<EigenResult> {
    validate_tol(tol)?;
    if op.dim() == 0 {
        return Err(Error::domain("empty operator"));
    }
    match power_iteration(op, tol, max_iter) {
        Ok(r) => Ok(r),
        Err(best_power) => match lanczos(op, tol) {
            Ok(mut r) => {
                r.iterations += best_power.iterations;
                Ok(r)
            }
            Err(Error::Convergence { iterations, residual }) => Err(Error::Convergence {
                iterations: iterations + max_iter,
                residual: residual.min(best_power.residual),
            }),
            Err(e) => Err(e),
        },
    }
}

/// Eigenvalues (ascending) and, optionally, eigenvectors by cyclic Jacobi.
///
/// Sweeps continue until the off-diagonal Frobenius norm drops below
/// `1e-13 ||A||_F`.
fn jacobi(a: &DenseSym, want_vectors: bool) -> (Vec<f64>, Option<Vec<f64>>, usize) {
    let n = a.dim();
    let mut w = a.as_slice().to_vec();
    let mut v = want_vectors.then(|| {
        let mut v = vec![0.0; n * n];
        for i in 0..n {
            v[i * n + i] = 1.0;
        }
        v
    });
    let target = 1e-13 * a.frobenius_squared().sqrt();
    let off = |w: &[f64]| -> f64 {
        let mut s = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                s += 2.0 * w[p * n + q] * w[p * n + q];
            }
        }
        s.sqrt()
    };
    let mut sweeps = 0;
    while off(&w) > target && sweeps < 100 {
        sweeps += 1;
        for p in 0..n {
            for q in p + 1..n {
                let apq = w[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = w[p * n + p];
                let aqq = w[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + theta.hypot(1.0));
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / t.hypot(1.0);
                let s = t * c;
                for k in 0..n {
                    let akp = w[k * n + p];
                    let akq = w[k * n + q];
                    w[k * n + p] = c * akp - s * akq;
                    w[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = w[p * n + k];
                    let aqk = w[q * n + k];
                    w[p * n + k] = c * apk - s * aqk;
                    w[q * n + k] = s * apk + c * aqk;
                }
                w[p * n + q] = 0.0;
                w[q * n + p] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[k * n + p];
                        let vkq = v[k * n + q];
                        v[k * n + p] = c * vkp - s * vkq;
                        v[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    let values = (0..n).map(|i| w[i * n + i]).collect();
    (values, v, sweeps)
}

/// All eigenvalues of a dense symmetric matrix, ascending.
pub fn full_spectrum_dense(a: &DenseSym) -> Vec<f64> {
    let (mut values, _, _) = jacobi(a, false);
    values.sort_by(f64::total_cmp);
    values
}

/// Largest eigenpair from the dense Jacobi oracle.
pub fn largest_eigenvalue_dense(a: &DenseSym) -> EigenResult {
    let n = a.dim();
    let (values, vectors, sweeps) = jacobi(a, true);
    let vectors = vectors.expect("requested");
    let top = (0..n).max_by(|&i, &j| values[i].total_cmp(&values[j])).unwrap_or(0);
    let mut v: Vec<f64> = (0..n).map(|k| vectors[k * n + top]).collect();
    perron_normalise(&mut v);
    let mut scratch = vec![0.0; n];
    let (mu, residual) = rayleigh(a, &v, &mut scratch);
    EigenResult { mu_max: mu, eigenvector: v, residual, iterations: sweeps, method: Method::Dense }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gegenbauer::{build_operator, GegenbauerParam, ProblemSize};

    fn op(n: usize, l: f64) -> OperatorB {
        build_operator(ProblemSize::new(n).unwrap(), GegenbauerParam::new(l).unwrap()).unwrap()
    }

    fn mu(n: usize, l: f64) -> EigenResult {
        let b = op(n, l);
        largest_eigenvalue(&b, DEFAULT_TOL, default_max_iter(b.dim())).unwrap()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    const TWO_BY_TWO: f64 = 54.683_328_128_252_67;

    #[test]
    fn closed_form_examples() {
        assert!(rel(mu(2, 0.0).mu_max, 16.0) < 1e-13);
        assert!(rel(mu(1, 0.5).mu_max, 3.0) < 1e-13);
        let exact = (56.0 + 2848f64.sqrt()) / 2.0;
        assert!((exact - TWO_BY_TWO).abs() < 1e-12);
        let r = mu(3, 0.0);
        assert!((r.mu_max - 54.683325).abs() < 1e-5);
        assert!(rel(r.mu_max, exact) < 1e-12);
        assert!(r.residual <= DEFAULT_TOL);
    }

    #[test]
    fn tolerance_is_validated() {
        let b = op(5, 0.0);
        assert!(largest_eigenvalue(&b, 1e-15, 100).is_err());
        assert!(largest_eigenvalue(&b, f64::NAN, 100).is_err());
    }

    #[test]
    fn dense_spectrum_examples() {
        let s = full_spectrum_dense(&op(3, 0.0).to_dense().unwrap());
        assert_eq!(s.len(), 2);
        assert!((s[0] - 1.316675).abs() < 1e-5 && (s[1] - 54.683325).abs() < 1e-5);
        assert!(rel(s[0] + s[1], 56.0) < 1e-13);
        let s = full_spectrum_dense(&op(2, 0.0).to_dense().unwrap());
        assert_eq!(s.len(), 1);
        assert!(rel(s[0], 16.0) < 1e-13);
    }

    #[test]
    fn jacobi_on_known_spectrum() {
        // second-difference matrix: 2 - 2 cos(k pi / (n + 1))
        let n = 30;
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            data[i * n + i] = 2.0;
            if i + 1 < n {
                data[i * n + i + 1] = -1.0;
                data[(i + 1) * n + i] = -1.0;
            }
        }
        let a = DenseSym::from_row_major(n, data).unwrap();
        let s = full_spectrum_dense(&a);
        for (k, v) in s.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-12, "{k}: {v} vs {exact}");
        }
    }

    #[test]
    fn tql2_on_known_spectrum() {
        let n = 25;
        let mut d = vec![2.0; n];
        let e = vec![-1.0; n - 1];
        let z = tql2(&mut d, &e).unwrap();
        for (k, v) in d.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        // eigenvector check: T z_k = d_k z_k
        for k in 0..n {
            for i in 0..n {
                let mut t = 2.0 * z[i][k];
                if i > 0 {
                    t -= z[i - 1][k];
                }
                if i + 1 < n {
                    t -= z[i + 1][k];
                }
                assert!((t - d[k] * z[i][k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn power_matches_dense_oracle() {
        for &l in &[-0.49, -0.25, 0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 25.0, 50.0] {
            for n in (1..=40).chain((45..=200).step_by(17)) {
                let b = op(n, l);
                let dense = b.to_dense().unwrap();
                let oracle = *full_spectrum_dense(&dense).last().unwrap();
                let r = largest_eigenvalue(&b, DEFAULT_TOL, default_max_iter(b.dim())).unwrap();
                assert!(rel(r.mu_max, oracle) < 1e-9, "n={n} l={l}: {} vs {oracle}", r.mu_max);
                assert!(r.residual <= DEFAULT_TOL);
                assert!((norm(&r.eigenvector) - 1.0).abs() < 1e-14);
                assert!(r.eigenvector.iter().all(|&x| x >= 0.0));
                if l <= 5.0 {
                    assert!(r.eigenvector.iter().all(|&x| x > 0.0), "n={n} l={l}");
                }
            }
        }
    }

    #[test]
    fn lanczos_fallback_is_used_when_power_stalls() {
        for &(n, l) in &[(3, 0.0), (60, 0.5), (301, 25.0), (200, 1000.0)] {
            let b = op(n, l);
            let r = largest_eigenvalue(&b, DEFAULT_TOL, 1).unwrap();
            assert_eq!(r.method, Method::Lanczos);
            let p = mu(n, l);
            assert!(rel(r.mu_max, p.mu_max) < 1e-10, "n={n} l={l}");
            assert!(r.residual <= DEFAULT_TOL);
            assert!((norm(&r.eigenvector) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn dense_largest_matches_power() {
        let b = op(41, 2.0);
        let d = largest_eigenvalue_dense(&b.to_dense().unwrap());
        assert_eq!(d.method, Method::Dense);
        assert!(rel(d.mu_max, mu(41, 2.0).mu_max) < 1e-12);
        assert!(d.residual < 1e-12);
    }

    #[test]
    fn spectral_identities_and_sandwich() {
        for &l in &[-0.49, 0.0, 0.5, 3.0, 50.0] {
            for n in [1, 2, 3, 4, 17, 64, 151, 200] {
                let b = op(n, l);
                let spectrum = full_spectrum_dense(&b.to_dense().unwrap());
                let tr = b.trace();
                let fro2 = b.frobenius_squared();
                let sum: f64 = spectrum.iter().sum();
                let sum_sq: f64 = spectrum.iter().map(|x| x * x).sum();
                assert!(rel(sum, tr) < 1e-10, "n={n} l={l}");
                assert!(rel(sum_sq, fro2) < 1e-9, "n={n} l={l}");
                let top = mu(n, l).mu_max;
                let slack = 1e-12 * top;
                assert!(b.max_diagonal() <= top + slack);
                assert!(fro2 / tr <= top + slack);
                assert!(top <= tr + slack);
                assert!(top <= b.infinity_norm() + slack);
                assert!(top <= fro2.sqrt() + slack);
            }
        }
    }
}
