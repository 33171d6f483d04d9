//! Numerical certification of the bounds at single points and over grids.
//!
//! A bound check compares a closed-form value against the computed
//! `mu_max = c_n^2` through the signed relative slack `(mu - bound)/mu` for
//! lower bounds and `(bound - mu)/mu` for upper bounds:
//!
//! * strict bounds pass when the slack exceeds [`STRICT_MARGIN`];
//! * non-strict bounds pass when the slack is at least `-NONSTRICT_MARGIN`;
//! * a miss by no more than ten eigen tolerances is inconclusive, anything
//!   larger is a failure.

pub mod convergence;
pub mod lemmas;
pub mod sweep;

use serde::Serialize;

use crate::bounds::{
    frobenius_bounds, infnorm_bounds, BoundKind, BoundSet, BoundTag,
};
use crate::eigen::{
    default_max_iter, full_spectrum_dense, largest_eigenvalue, EigenResult, Method, DEFAULT_TOL,
};
use crate::error::{Error, Result};
use crate::gegenbauer::{
    build_operator, trace_exact, GegenbauerParam, OperatorB, ProblemSize, DENSE_THRESHOLD,
};

pub const STRICT_MARGIN: f64 = 1e-9;
pub const NONSTRICT_MARGIN: f64 = 1e-12;
/// Relative deviation allowed for exact values.
pub const EXACT_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
pub const FROBENIUS_TOL: f64 = 1e-9;
pub const DENSE_AGREEMENT_TOL: f64 = 1e-9;
/// Relative separation required between consecutive eigenvalues.
pub const INTERLACING_MARGIN: f64 = 1e-9;
/// Default largest `m` for which the dense oracle runs.
pub const DEFAULT_DENSE_CAP: usize = 128;
/// Environment variable overriding [`DEFAULT_DENSE_CAP`].
pub const DENSE_CAP_ENV: &str = "MARKOV_DENSE_CAP";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    Pass,
    Inconclusive,
    Fail,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "pass",
            Outcome::Inconclusive => "inconclusive",
            Outcome::Fail => "fail",
        }
    }

    fn from_slack(slack: f64, strict: bool, tol: f64) -> Self {
        let passes = if strict { slack > STRICT_MARGIN } else { slack >= -NONSTRICT_MARGIN };
        if passes {
            Outcome::Pass
        } else if slack >= -10.0 * tol {
            Outcome::Inconclusive
        } else {
            Outcome::Fail
        }
    }

    fn from_deviation(dev: f64, tol: f64) -> Self {
        if dev <= tol {
            Outcome::Pass
        } else {
            Outcome::Fail
        }
    }
}

/// Parses a dense-cap override; values above the dense threshold are clamped.
pub fn parse_dense_cap(raw: &str) -> Result<usize> {
    raw.trim()
        .parse::<usize>()
        .map(|v| v.min(DENSE_THRESHOLD))
        .map_err(|_| Error::Validation(format!("{DENSE_CAP_ENV} must be a nonnegative integer, got {raw:?}")))
}

/// [`DEFAULT_DENSE_CAP`] unless overridden by `MARKOV_DENSE_CAP`.
pub fn dense_cap_from_env() -> Result<usize> {
    match std::env::var(DENSE_CAP_ENV) {
        Ok(raw) => parse_dense_cap(&raw),
        Err(_) => Ok(DEFAULT_DENSE_CAP),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyConfig {
    pub tol: f64,
    pub dense_cap: usize,
    /// Also compute `mu_max(B_{n-1})` and check `c_{n-1} < c_n`.
    pub check_monotone: bool,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig { tol: DEFAULT_TOL, dense_cap: DEFAULT_DENSE_CAP, check_monotone: true }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundCheck {
    pub tag: BoundTag,
    pub kind: BoundKind,
    pub strict: bool,
    pub value: f64,
    /// `|bound - mu| / mu`.
    pub slack: f64,
    /// Positive when the inequality holds.
    pub signed_slack: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityKind {
    /// Sum of the dense spectrum against the closed-form trace.
    TraceMatch,
    /// Sum of squared eigenvalues against `||B||_F^2`.
    FrobeniusMatch,
    /// Iterative `mu_max` against the dense oracle.
    DenseAgreement,
    /// `max b_kk <= mu <= min(trace, ||B||_inf, ||B||_F)` and `||B||_F^2/trace <= mu`.
    NormSandwich,
    /// Closed-form window on `||B||_F^2`.
    FrobeniusWindow,
    /// `||B||_inf` below its closed-form bound (`lambda > 2`).
    RowSumWindow,
    /// `c_{n-1} < c_n`.
    MonotoneInN,
}

impl IdentityKind {
    pub const ALL: [IdentityKind; 7] = [
        IdentityKind::TraceMatch,
        IdentityKind::FrobeniusMatch,
        IdentityKind::DenseAgreement,
        IdentityKind::NormSandwich,
        IdentityKind::FrobeniusWindow,
        IdentityKind::RowSumWindow,
        IdentityKind::MonotoneInN,
    ];

    pub fn label(self) -> &'static str {
        match self {
            IdentityKind::TraceMatch => "trace_match",
            IdentityKind::FrobeniusMatch => "frobenius_match",
            IdentityKind::DenseAgreement => "dense_agreement",
            IdentityKind::NormSandwich => "norm_sandwich",
            IdentityKind::FrobeniusWindow => "frobenius_window",
            IdentityKind::RowSumWindow => "row_sum_window",
            IdentityKind::MonotoneInN => "monotone_in_n",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub kind: IdentityKind,
    /// Relative deviation for matches, worst signed slack for windows.
    pub value: f64,
    pub outcome: Outcome,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationRecord {
    pub n: usize,
    pub lambda: f64,
    pub mu_max: Option<f64>,
    pub residual: Option<f64>,
    pub method: Option<Method>,
    pub iterations: Option<usize>,
    pub bounds: Vec<BoundCheck>,
    pub identities: Vec<IdentityCheck>,
    pub outcome: Outcome,
    /// Set when the eigenvalue could not be computed.
    pub error: Option<String>,
}

impl VerificationRecord {
    pub fn bound(&self, tag: BoundTag) -> Option<&BoundCheck> {
        self.bounds.iter().find(|b| b.tag == tag)
    }

    pub fn identity(&self, kind: IdentityKind) -> Option<&IdentityCheck> {
        self.identities.iter().find(|c| c.kind == kind)
    }
}

fn solve(op: &OperatorB, tol: f64) -> Result<EigenResult> {
    largest_eigenvalue(op, tol, default_max_iter(op.dim()))
}

fn window_check(kind: IdentityKind, slacks: &[f64], tol: f64) -> IdentityCheck {
    let worst = slacks.iter().copied().fold(f64::INFINITY, f64::min);
    IdentityCheck { kind, value: worst, outcome: Outcome::from_slack(worst, false, tol) }
}

/// Checks every applicable bound and identity at `(n, lambda)`.
///
/// Invalid `n`, `lambda` or configuration are errors; numerical failures
/// are recorded in the returned record as inconclusive.
pub fn verify_point(n: usize, lambda: f64, cfg: &VerifyConfig) -> Result<VerificationRecord> {
    let size = ProblemSize::new(n)?;
    let param = GegenbauerParam::new(lambda)?;
    let inconclusive = |err: Error| VerificationRecord {
        n,
        lambda,
        mu_max: None,
        residual: None,
        method: None,
        iterations: None,
        bounds: Vec::new(),
        identities: Vec::new(),
        outcome: Outcome::Inconclusive,
        error: Some(err.to_string()),
    };
    let op = match build_operator(size, param) {
        Ok(op) => op,
        Err(e) if e.is_numerical() => return Ok(inconclusive(e)),
        Err(e) => return Err(e),
    };
    let eig = match solve(&op, cfg.tol) {
        Ok(r) => r,
        Err(e) if e.is_numerical() => return Ok(inconclusive(e)),
        Err(e) => return Err(e),
    };
    let mu = eig.mu_max;
    let tol = cfg.tol;

    let bound_set = BoundSet::compute(&op)?;
    let bounds: Vec<BoundCheck> = bound_set
        .entries
        .iter()
        .map(|e| {
            let signed = match e.kind {
                BoundKind::Lower => (mu - e.value) / mu,
                BoundKind::Upper => (e.value - mu) / mu,
                BoundKind::Exact => -((mu - e.value) / e.value).abs(),
            };
            let outcome = match e.kind {
                BoundKind::Exact => Outcome::from_deviation(-signed, EXACT_TOL),
                _ => Outcome::from_slack(signed, e.strict, tol),
            };
            BoundCheck {
                tag: e.tag,
                kind: e.kind,
                strict: e.strict,
                value: e.value,
                slack: ((e.value - mu) / mu).abs(),
                signed_slack: signed,
                outcome,
            }
        })
        .collect();

    let mut identities = Vec::new();
    let trace = trace_exact(size, param);
    let fro2 = op.frobenius_squared();
    let inf = op.infinity_norm();

    if op.dim() <= cfg.dense_cap.min(DENSE_THRESHOLD) {
        let spectrum = full_spectrum_dense(&op.to_dense()?);
        let sum: f64 = spectrum.iter().sum();
        let sum_sq: f64 = spectrum.iter().map(|x| x * x).sum();
        let top = *spectrum.last().expect("m >= 1");
        let dev = (sum - trace).abs() / trace;
        identities.push(IdentityCheck {
            kind: IdentityKind::TraceMatch,
            value: dev,
            outcome: Outcome::from_deviation(dev, TRACE_TOL),
        });
        let dev = (sum_sq - fro2).abs() / fro2;
        identities.push(IdentityCheck {
            kind: IdentityKind::FrobeniusMatch,
            value: dev,
            outcome: Outcome::from_deviation(dev, FROBENIUS_TOL),
        });
        let dev = (mu - top).abs() / top;
        identities.push(IdentityCheck {
            kind: IdentityKind::DenseAgreement,
            value: dev,
            outcome: Outcome::from_deviation(dev, DENSE_AGREEMENT_TOL),
        });
    }

    identities.push(window_check(
        IdentityKind::NormSandwich,
        &[
            (mu - op.max_diagonal()) / mu,
            (mu - fro2 / trace) / mu,
            (trace - mu) / mu,
            (inf - mu) / mu,
            (fro2.sqrt() - mu) / mu,
        ],
        tol,
    ));
    let (flo, fhi) = frobenius_bounds(n, param);
    identities.push(window_check(
        IdentityKind::FrobeniusWindow,
        &[(fro2 - flo) / fro2, (fhi - fro2) / fro2],
        tol,
    ));
    if lambda > 2.0 {
        let sharp = infnorm_bounds(n, param)?.sharp;
        identities.push(window_check(IdentityKind::RowSumWindow, &[(sharp - inf) / inf], tol));
    }
    if cfg.check_monotone && n >= 2 {
        let prev = ProblemSize::new(n - 1)
            .and_then(|s| build_operator(s, param))
            .and_then(|p| solve(&p, tol));
        let check = match prev {
            Ok(p) => {
                let gap = (mu - p.mu_max) / mu;
                let outcome = if gap > INTERLACING_MARGIN {
                    Outcome::Pass
                } else if gap >= -10.0 * tol {
                    Outcome::Inconclusive
                } else {
                    Outcome::Fail
                };
                IdentityCheck { kind: IdentityKind::MonotoneInN, value: gap, outcome }
            }
            Err(e) if e.is_numerical() => IdentityCheck {
                kind: IdentityKind::MonotoneInN,
                value: f64::NAN,
                outcome: Outcome::Inconclusive,
            },
            Err(e) => return Err(e),
        };
        identities.push(check);
    }

    let outcome = bounds
        .iter()
        .map(|b| b.outcome)
        .chain(identities.iter().map(|c| c.outcome))
        .max()
        .unwrap_or(Outcome::Pass);

    Ok(VerificationRecord {
        n,
        lambda,
        mu_max: Some(mu),
        residual: Some(eig.residual),
        method: Some(eig.method),
        iterations: Some(eig.iterations),
        bounds,
        identities,
        outcome,
        error: None,
    })
}

/// `mu_max(Ã_m) < mu_max(A_m) < mu_max(Ã_{m+1})`.
#[derive(Debug, Clone, Serialize)]
pub struct InterlacingResult {
    pub m: usize,
    pub lambda: f64,
    pub odd: f64,
    pub even: f64,
    pub odd_next: f64,
    pub outcome: Outcome,
}

pub fn verify_interlacing(m: usize, lambda: f64, tol: f64) -> Result<InterlacingResult> {
    let param = GegenbauerParam::new(lambda)?;
    let mu = |size: Result<ProblemSize>| -> Result<f64> {
        Ok(solve(&build_operator(size?, param)?, tol)?.mu_max)
    };
    let odd = mu(ProblemSize::odd(m))?;
    let even = mu(ProblemSize::even(m))?;
    let odd_next = mu(ProblemSize::odd(m + 1))?;
    let holds = odd * (1.0 + INTERLACING_MARGIN) < even
        && even * (1.0 + INTERLACING_MARGIN) < odd_next;
    Ok(InterlacingResult {
        m,
        lambda,
        odd,
        even,
        odd_next,
        outcome: if holds { Outcome::Pass } else { Outcome::Fail },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_examples() {
        let cfg = VerifyConfig::default();
        let r = verify_point(3, 0.0, &cfg).unwrap();
        assert_eq!(r.outcome, Outcome::Pass, "{r:#?}");
        assert!((r.mu_max.unwrap() - 54.683325).abs() < 1e-5);
        assert!(r.identity(IdentityKind::TraceMatch).is_some());

        let r = verify_point(2, 0.0, &cfg).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        let mu = r.mu_max.unwrap();
        assert!((mu - 16.0).abs() < 1e-12);
        for tag in [BoundTag::Exact, BoundTag::DiagLower] {
            assert!(r.bound(tag).unwrap().slack < 1e-12, "{tag:?}");
        }

        let r = verify_point(3, 7.0, &cfg).unwrap();
        assert_eq!(r.outcome, Outcome::Pass);
        assert_eq!(r.bound(BoundTag::MatchedLower).unwrap().outcome, Outcome::Pass);
        assert_eq!(r.bound(BoundTag::MatchedUpper).unwrap().outcome, Outcome::Pass);
    }

    #[test]
    fn records_are_consistent() {
        let cfg = VerifyConfig::default();
        for &l in &[-0.49, 0.5, 1.0, 3.0, 25.0] {
            for n in [1, 2, 4, 9, 40] {
                let r = verify_point(n, l, &cfg).unwrap();
                let mu = r.mu_max.unwrap();
                for b in &r.bounds {
                    assert!(b.slack >= 0.0);
                    assert!((b.slack - (b.value - mu).abs() / mu).abs() < 1e-15);
                    if b.kind == BoundKind::Lower && b.outcome == Outcome::Pass {
                        assert!(b.value <= mu * (1.0 + NONSTRICT_MARGIN));
                    }
                    if b.kind == BoundKind::Upper && b.outcome == Outcome::Pass {
                        assert!(mu <= b.value * (1.0 + NONSTRICT_MARGIN));
                    }
                }
                let mut tags: Vec<_> = r.bounds.iter().map(|b| b.tag).collect();
                tags.dedup();
                assert_eq!(tags.len(), r.bounds.len());
            }
        }
    }

    #[test]
    fn schmidt_failure_is_reported_not_hidden() {
        let r = verify_point(1, 0.5, &VerifyConfig::default()).unwrap();
        assert_eq!(r.bound(BoundTag::SchmidtLower).unwrap().outcome, Outcome::Fail);
        assert_eq!(r.outcome, Outcome::Fail);
    }

    #[test]
    fn outcome_classes() {
        assert_eq!(Outcome::from_slack(2e-9, true, 1e-11), Outcome::Pass);
        assert_eq!(Outcome::from_slack(5e-10, true, 1e-11), Outcome::Inconclusive);
        assert_eq!(Outcome::from_slack(-5e-11, true, 1e-11), Outcome::Inconclusive);
        assert_eq!(Outcome::from_slack(-2e-10, true, 1e-11), Outcome::Fail);
        assert_eq!(Outcome::from_slack(0.0, false, 1e-11), Outcome::Pass);
        assert_eq!(Outcome::from_slack(-1e-3, false, 1e-11), Outcome::Fail);
        assert!(Outcome::Fail > Outcome::Inconclusive && Outcome::Inconclusive > Outcome::Pass);
    }

    #[test]
    fn invalid_input_is_an_error() {
        assert!(verify_point(0, 0.0, &VerifyConfig::default()).is_err());
        assert!(verify_point(3, -0.6, &VerifyConfig::default()).is_err());
    }

    #[test]
    fn dense_cap_parsing() {
        assert_eq!(parse_dense_cap("64").unwrap(), 64);
        assert_eq!(parse_dense_cap(" 100000 ").unwrap(), DENSE_THRESHOLD);
        assert!(parse_dense_cap("-3").is_err());
        let cfg = VerifyConfig { dense_cap: 0, ..VerifyConfig::default() };
        let r = verify_point(10, 0.5, &cfg).unwrap();
        assert!(r.identity(IdentityKind::TraceMatch).is_none());
    }

    #[test]
    fn interlacing_examples() {
        let r = verify_interlacing(1, 0.0, DEFAULT_TOL).unwrap();
        assert!((r.odd - 2.0).abs() < 1e-12);
        assert!((r.even - 16.0).abs() < 1e-12);
        assert!((r.odd_next - 54.683328128).abs() < 1e-8);
        assert_eq!(r.outcome, Outcome::Pass);
        assert_eq!(verify_interlacing(2, 1.0, DEFAULT_TOL).unwrap().outcome, Outcome::Pass);
        assert_eq!(verify_interlacing(50, 0.5, DEFAULT_TOL).unwrap().outcome, Outcome::Pass);
        assert!(verify_interlacing(0, 0.5, DEFAULT_TOL).is_err());
    }
}
