//! Closed-form bounds on `c_n(lambda)^2` and the asymptotic constant.
//!
//! Everything in a [`BoundSet`] lives on the squared scale; the Schmidt and
//! Chebyshev-weight windows, stated for `c_n` itself, are squared on entry.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gegenbauer::{GegenbauerParam, OperatorB, Parity, ProblemSize};
use crate::specfun::{bessel_first_zero, Order};

/// Largest `lambda` accepted by [`asymptotic_constant`].
pub const ASYMPTOTIC_LAMBDA_MAX: f64 = 1000.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundKind {
    Lower,
    Upper,
    Exact,
}

/// Identifies a bound. The declaration order is the report column order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundTag {
    Exact,
    MainLower,
    MainUpper,
    LargeLambdaLower,
    LargeLambdaUpper,
    MatchedLower,
    MatchedUpper,
    FWindowLower,
    FWindowUpper,
    InfNormSharp,
    InfNormRelaxed,
    TraceUpper,
    DiagLower,
    FrobeniusOverTrace,
    SchmidtLower,
    SchmidtUpper,
    ChebyshevLower,
    ChebyshevUpper,
    PriorChebyshevUpper,
}

impl BoundTag {
    pub const ALL: [BoundTag; 19] = [
        BoundTag::Exact,
        BoundTag::MainLower,
        BoundTag::MainUpper,
        BoundTag::LargeLambdaLower,
        BoundTag::LargeLambdaUpper,
        BoundTag::MatchedLower,
        BoundTag::MatchedUpper,
        BoundTag::FWindowLower,
        BoundTag::FWindowUpper,
        BoundTag::InfNormSharp,
        BoundTag::InfNormRelaxed,
        BoundTag::TraceUpper,
        BoundTag::DiagLower,
        BoundTag::FrobeniusOverTrace,
        BoundTag::SchmidtLower,
        BoundTag::SchmidtUpper,
        BoundTag::ChebyshevLower,
        BoundTag::ChebyshevUpper,
        BoundTag::PriorChebyshevUpper,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BoundTag::Exact => "exact",
            BoundTag::MainLower => "main_lower",
            BoundTag::MainUpper => "main_upper",
            BoundTag::LargeLambdaLower => "large_lambda_lower",
            BoundTag::LargeLambdaUpper => "large_lambda_upper",
            BoundTag::MatchedLower => "matched_lower",
            BoundTag::MatchedUpper => "matched_upper",
            BoundTag::FWindowLower => "f_window_lower",
            BoundTag::FWindowUpper => "f_window_upper",
            BoundTag::InfNormSharp => "infnorm_sharp",
            BoundTag::InfNormRelaxed => "infnorm_relaxed",
            BoundTag::TraceUpper => "trace_upper",
            BoundTag::DiagLower => "diag_lower",
            BoundTag::FrobeniusOverTrace => "frobenius_over_trace",
            BoundTag::SchmidtLower => "schmidt_lower",
            BoundTag::SchmidtUpper => "schmidt_upper",
            BoundTag::ChebyshevLower => "chebyshev_lower",
            BoundTag::ChebyshevUpper => "chebyshev_upper",
            BoundTag::PriorChebyshevUpper => "prior_chebyshev_upper",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            BoundTag::Exact => "exact value for n = 1, 2",
            BoundTag::MainLower => "(n+l)^2 (n+2 min(0,l))^2 / ((2l+1)(2l+5))",
            BoundTag::MainUpper => "(n+l+max(0,l)+2)^4 / (2(2l+1) sqrt(2l+5))",
            BoundTag::LargeLambdaLower => "n^2 (n+l)^2 / (4(l+1)(l+2))",
            BoundTag::LargeLambdaUpper => "n (n+2l+2)^3 / ((l+2)(l+3))",
            BoundTag::MatchedLower => "n (n+2l)^3 / (16 l^2)",
            BoundTag::MatchedUpper => "n (n+2l)^3 / l^2",
            BoundTag::FWindowLower => "F/8, F = n(n+l)(n+2l)(n+3l)/((l+1)(l+2))",
            BoundTag::FWindowUpper => "F = n(n+l)(n+2l)(n+3l)/((l+1)(l+2))",
            BoundTag::InfNormSharp => "n(n+l)(n+2l)(n+3l+6)/((l+2)(l+3)) >= max row sum",
            BoundTag::InfNormRelaxed => "n(n+2l+2)^3/((l+2)(l+3))",
            BoundTag::TraceUpper => "((n+1)(n+2l+1))^2 / (4(2l+1)) = trace",
            BoundTag::DiagLower => "2n(n+l)(n+2l)/(2l+1) = largest diagonal entry",
            BoundTag::FrobeniusOverTrace => "||B||_F^2 / trace(B)",
            BoundTag::SchmidtLower => "((n+3/2)^2/pi)^2, constant weight",
            BoundTag::SchmidtUpper => "((n+2)^2/pi)^2, constant weight",
            BoundTag::ChebyshevLower => "(0.472135 n^2)^2 or (0.248549 n^2)^2",
            BoundTag::ChebyshevUpper => "(0.472871 (n+2)^2)^2 or (0.250987 (n+4)^2)^2",
            BoundTag::PriorChebyshevUpper => "(0.478849 (n+2)^2)^2 or (0.256861 (n+5/2)^2)^2",
        }
    }

    pub fn kind(self) -> BoundKind {
        use BoundTag::*;
        match self {
            Exact => BoundKind::Exact,
            MainLower | LargeLambdaLower | MatchedLower | FWindowLower | DiagLower
            | FrobeniusOverTrace | SchmidtLower | ChebyshevLower => BoundKind::Lower,
            MainUpper | LargeLambdaUpper | MatchedUpper | FWindowUpper | InfNormSharp
            | InfNormRelaxed | TraceUpper | SchmidtUpper | ChebyshevUpper
            | PriorChebyshevUpper => BoundKind::Upper,
        }
    }

    /// Whether the inequality is stated strictly.
    pub fn strict(self) -> bool {
        matches!(
            self,
            BoundTag::MainLower
                | BoundTag::MainUpper
                | BoundTag::LargeLambdaLower
                | BoundTag::LargeLambdaUpper
        )
    }

    /// Human-readable applicability condition.
    pub fn condition(self) -> &'static str {
        use BoundTag::*;
        match self {
            Exact => "n in {1, 2}",
            MainLower | MainUpper => "n >= 3",
            LargeLambdaLower | LargeLambdaUpper => "n >= 3, lambda >= 2",
            MatchedLower | MatchedUpper => "n >= 3, lambda >= 7",
            FWindowLower | FWindowUpper => "n >= 3, lambda > 2",
            InfNormSharp | InfNormRelaxed => "lambda > 2",
            TraceUpper | DiagLower | FrobeniusOverTrace => "all n",
            SchmidtLower | SchmidtUpper => "lambda = 1/2",
            ChebyshevLower | ChebyshevUpper | PriorChebyshevUpper => "lambda in {0, 1}",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundEntry {
    pub tag: BoundTag,
    pub kind: BoundKind,
    pub strict: bool,
    /// Bound on `c_n^2`.
    pub value: f64,
}

/// All bounds applicable at `(n, lambda)`, in tag order.
#[derive(Debug, Clone, Serialize)]
pub struct BoundSet {
    pub n: usize,
    pub lambda: f64,
    pub entries: Vec<BoundEntry>,
}

impl BoundSet {
    /// Closed-form bounds only (no operator needed).
    pub fn closed_form(size: ProblemSize, lambda: GegenbauerParam) -> Result<Self> {
        let n = size.n();
        let l = lambda.value();
        let mut values: Vec<(BoundTag, f64)> = Vec::new();
        if n <= 2 {
            values.push((BoundTag::Exact, exact_small_n(n, lambda)?));
        } else {
            let (lo, hi) = main_bounds(n, lambda)?;
            values.push((BoundTag::MainLower, lo));
            values.push((BoundTag::MainUpper, hi));
            if l >= 2.0 {
                let (lo, hi) = large_lambda_bounds(n, lambda)?;
                values.push((BoundTag::LargeLambdaLower, lo));
                values.push((BoundTag::LargeLambdaUpper, hi));
            }
            if l >= 7.0 {
                let (lo, hi) = matched_order_bounds(n, lambda)?;
                values.push((BoundTag::MatchedLower, lo));
                values.push((BoundTag::MatchedUpper, hi));
            }
            if l > 2.0 {
                let (lo, hi) = f_window(n, lambda)?;
                values.push((BoundTag::FWindowLower, lo));
                values.push((BoundTag::FWindowUpper, hi));
            }
        }
        if l > 2.0 {
            let b = infnorm_bounds(n, lambda)?;
            values.push((BoundTag::InfNormSharp, b.sharp));
            values.push((BoundTag::InfNormRelaxed, b.relaxed));
        }
        values.push((BoundTag::TraceUpper, trace_upper_bound(n, lambda)));
        values.push((BoundTag::DiagLower, diag_lower_bound(n, lambda)));
        if l == 0.5 {
            let (lo, hi) = schmidt_bounds(n)?;
            values.push((BoundTag::SchmidtLower, lo * lo));
            values.push((BoundTag::SchmidtUpper, hi * hi));
        }
        if l == 0.0 || l == 1.0 {
            let c = chebyshev_bounds(n, lambda)?;
            values.push((BoundTag::ChebyshevLower, c.lower * c.lower));
            values.push((BoundTag::ChebyshevUpper, c.upper * c.upper));
            values.push((BoundTag::PriorChebyshevUpper, c.prior_upper * c.prior_upper));
        }
        let entries = values
            .into_iter()
            .map(|(tag, value)| BoundEntry { tag, kind: tag.kind(), strict: tag.strict(), value })
            .collect();
        let mut set = BoundSet { n, lambda: l, entries };
        set.sort();
        set.validate()?;
        Ok(set)
    }

    /// Closed-form bounds plus `||B_n||_F^2 / trace(B_n)` from the operator.
    pub fn compute(op: &OperatorB) -> Result<Self> {
        let mut set = Self::closed_form(op.size(), op.lambda())?;
        set.entries.push(BoundEntry {
            tag: BoundTag::FrobeniusOverTrace,
            kind: BoundKind::Lower,
            strict: false,
            value: frobenius_over_trace(op),
        });
        set.sort();
        set.validate()?;
        Ok(set)
    }

    pub fn get(&self, tag: BoundTag) -> Option<&BoundEntry> {
        self.entries.iter().find(|e| e.tag == tag)
    }

    fn sort(&mut self) {
        self.entries.sort_by_key(|e| e.tag);
    }

    fn validate(&self) -> Result<()> {
        match self.entries.iter().find(|e| !(e.value.is_finite() && e.value > 0.0)) {
            Some(e) => Err(Error::Overflow(format!(
                "bound {} at n = {}, lambda = {} evaluated to {}",
                e.tag.label(),
                self.n,
                self.lambda,
                e.value
            ))),
            None => Ok(()),
        }
    }
}

fn need_n_at_least_3(n: usize, what: &str) -> Result<()> {
    if n < 3 {
        return Err(Error::Applicability(format!("{what} needs n >= 3, got n = {n}")));
    }
    Ok(())
}

/// `c_1^2 = 2(1 + lambda)`, `c_2^2 = 4(2 + lambda)(2 + 2 lambda)/(2 lambda + 1)`.
pub fn exact_small_n(n: usize, lambda: GegenbauerParam) -> Result<f64> {
    let l = lambda.value();
    match n {
        1 => Ok(2.0 * (1.0 + l)),
        2 => Ok(4.0 * (2.0 + l) * (2.0 + 2.0 * l) / (2.0 * l + 1.0)),
        _ => Err(Error::domain(format!("exact values are known for n = 1, 2 only, got {n}"))),
    }
}

/// Strict two-sided bound valid for every `lambda > -1/2`, `n >= 3`.
pub fn main_bounds(n: usize, lambda: GegenbauerParam) -> Result<(f64, f64)> {
    need_n_at_least_3(n, "the main bounds")?;
    let l = lambda.value();
    let nf = n as f64;
    let (lp, lpp) = (l.min(0.0), l.max(0.0));
    let lower = (nf + l).powi(2) * (nf + 2.0 * lp).powi(2) / ((2.0 * l + 1.0) * (2.0 * l + 5.0));
    let upper = (nf + l + lpp + 2.0).powi(4) / (2.0 * (2.0 * l + 1.0) * (2.0 * l + 5.0).sqrt());
    Ok((lower, upper))
}

/// Strict two-sided bound for `lambda >= 2`, `n >= 3`.
pub fn large_lambda_bounds(n: usize, lambda: GegenbauerParam) -> Result<(f64, f64)> {
    need_n_at_least_3(n, "the large-lambda bounds")?;
    let l = lambda.value();
    if l < 2.0 {
        return Err(Error::Applicability(format!("large-lambda bounds need lambda >= 2, got {l}")));
    }
    let nf = n as f64;
    let lower = nf * nf * (nf + l).powi(2) / (4.0 * (l + 1.0) * (l + 2.0));
    let upper = nf * (nf + 2.0 * l + 2.0).powi(3) / ((l + 2.0) * (l + 3.0));
    Ok((lower, upper))
}

/// `n(n+2 lambda)^3 / (16 lambda^2) <= c_n^2 <= n(n+2 lambda)^3 / lambda^2`, `lambda >= 7`.
pub fn matched_order_bounds(n: usize, lambda: GegenbauerParam) -> Result<(f64, f64)> {
    need_n_at_least_3(n, "the matched-order bounds")?;
    let l = lambda.value();
    if l < 7.0 {
        return Err(Error::Applicability(format!(
            "matched-order bounds need lambda >= 7, got {l}"
        )));
    }
    let nf = n as f64;
    let upper = nf * (nf + 2.0 * l).powi(3) / (l * l);
    Ok((upper / 16.0, upper))
}

/// `F(n, lambda) = n(n+lambda)(n+2lambda)(n+3lambda)/((lambda+1)(lambda+2))`.
pub fn f_value(n: usize, lambda: f64) -> f64 {
    let nf = n as f64;
    nf * (nf + lambda) * (nf + 2.0 * lambda) * (nf + 3.0 * lambda) / ((lambda + 1.0) * (lambda + 2.0))
}

/// `[F/8, F]`, for `n >= 3`, `lambda > 2`.
pub fn f_window(n: usize, lambda: GegenbauerParam) -> Result<(f64, f64)> {
    need_n_at_least_3(n, "the F window")?;
    let l = lambda.value();
    if l <= 2.0 {
        return Err(Error::Applicability(format!("the F window needs lambda > 2, got {l}")));
    }
    let f = f_value(n, l);
    Ok((f / 8.0, f))
}

/// `((n+1)(n+2 lambda+1))^2 / (4(2 lambda+1))`, the squared form of the
/// trace-based bound on `c_n`.
pub fn trace_upper_bound(n: usize, lambda: GegenbauerParam) -> f64 {
    let l = lambda.value();
    let nf = n as f64;
    ((nf + 1.0) * (nf + 2.0 * l + 1.0)).powi(2) / (4.0 * (2.0 * l + 1.0))
}

/// `2n(n+lambda)(n+2lambda)/(2lambda+1)`, the last diagonal entry of `B_n`.
pub fn diag_lower_bound(n: usize, lambda: GegenbauerParam) -> f64 {
    let l = lambda.value();
    let nf = n as f64;
    2.0 * nf * (nf + l) * (nf + 2.0 * l) / (2.0 * l + 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InfNormBounds {
    pub sharp: f64,
    pub relaxed: f64,
}

/// Upper bounds on `||B_n||_inf` (hence on `c_n^2`) for `lambda > 2`.
pub fn infnorm_bounds(n: usize, lambda: GegenbauerParam) -> Result<InfNormBounds> {
    let l = lambda.value();
    if l <= 2.0 {
        return Err(Error::Applicability(format!(
            "row-sum bounds need lambda > 2, got {l}"
        )));
    }
    let nf = n as f64;
    let d = (l + 2.0) * (l + 3.0);
    Ok(InfNormBounds {
        sharp: nf * (nf + l) * (nf + 2.0 * l) * (nf + 3.0 * l + 6.0) / d,
        relaxed: nf * (nf + 2.0 * l + 2.0).powi(3) / d,
    })
}

/// Row-sum bound on the unscaled matrix `A_m` or `Ã_m`:
/// `4 x (x + lambda/2)(x + lambda)(x + 3 lambda/2 + 3) / ((lambda+2)(lambda+3))`
/// with `x = m` or `x = m - 1/2`.
pub fn infnorm_matrix_bound(size: ProblemSize, lambda: GegenbauerParam) -> Result<f64> {
    let l = lambda.value();
    if l <= 2.0 {
        return Err(Error::Applicability(format!(
            "row-sum bounds need lambda > 2, got {l}"
        )));
    }
    let x = match size.parity() {
        Parity::Even => size.m() as f64,
        Parity::Odd => size.m() as f64 - 0.5,
    };
    Ok(4.0 * x * (x + 0.5 * l) * (x + l) * (x + 1.5 * l + 3.0) / ((l + 2.0) * (l + 3.0)))
}

/// Two-sided bound on `||B_n||_F^2`.
pub fn frobenius_bounds(n: usize, lambda: GegenbauerParam) -> (f64, f64) {
    let l = lambda.value();
    let nf = n as f64;
    let c5_sq = 1.0 / (4.0 * (2.0 * l + 1.0).powi(2) * (2.0 * l + 5.0));
    if l >= 0.0 {
        (
            c5_sq * (nf + 8.0) * nf.powi(3) * (nf + l).powi(2) * (nf + 2.0 * l).powi(2),
            c5_sq * (nf + 2.0 * l + 2.0).powi(8),
        )
    } else {
        (
            c5_sq * (nf + 2.0 * l + 8.0) * nf * nf * (nf + l).powi(2) * (nf + 2.0 * l).powi(3),
            c5_sq * (nf + l + 2.0).powi(8),
        )
    }
}

/// `||B_n||_F^2 / trace(B_n)`, a lower bound on `mu_max`.
pub fn frobenius_over_trace(op: &OperatorB) -> f64 {
    op.frobenius_squared() / crate::gegenbauer::trace_exact(op.size(), op.lambda())
}

/// `(n+3/2)^2/pi <= c_n(1/2) <= (n+2)^2/pi`, on the `c_n` scale.
pub fn schmidt_bounds(n: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::domain("n must be at least 1"));
    }
    let nf = n as f64;
    let pi = std::f64::consts::PI;
    Ok(((nf + 1.5).powi(2) / pi, (nf + 2.0).powi(2) / pi))
}

/// Windows for the Chebyshev weights, on the `c_n` scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChebyshevBounds {
    pub lower: f64,
    pub upper: f64,
    /// The earlier, weaker upper bound.
    pub prior_upper: f64,
}

pub fn chebyshev_bounds(n: usize, lambda: GegenbauerParam) -> Result<ChebyshevBounds> {
    let nf = n as f64;
    let l = lambda.value();
    if l == 0.0 {
        Ok(ChebyshevBounds {
            lower: 0.472135 * nf * nf,
            upper: 0.472871 * (nf + 2.0).powi(2),
            prior_upper: 0.478849 * (nf + 2.0).powi(2),
        })
    } else if l == 1.0 {
        Ok(ChebyshevBounds {
            lower: 0.248549 * nf * nf,
            upper: 0.250987 * (nf + 4.0).powi(2),
            prior_upper: 0.256861 * (nf + 2.5).powi(2),
        })
    } else {
        Err(Error::Applicability(format!(
            "Chebyshev-weight bounds need lambda in {{0, 1}}, got {l}"
        )))
    }
}

/// `c_*(lambda) = lim c_n / n^2 = 1 / (2 j_nu)`, `nu = (2 lambda - 3)/4`.
pub fn asymptotic_constant(lambda: GegenbauerParam) -> Result<f64> {
    let l = lambda.value();
    if l > ASYMPTOTIC_LAMBDA_MAX {
        return Err(Error::domain(format!(
            "asymptotic constant is supported for lambda <= {ASYMPTOTIC_LAMBDA_MAX}, got {l}"
        )));
    }
    let j = bessel_first_zero(Order::new((2.0 * l - 3.0) / 4.0)?)?;
    Ok(0.5 / j)
}

/// Which upper expression bounds `c_*^2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum UpperBranch {
    /// `1 / (2(2 lambda+1) sqrt(2 lambda+5))`
    Main,
    /// `1 / ((lambda+2)(lambda+3))`
    LargeLambda,
}

/// Window for `c_*(lambda)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticWindow {
    pub lower: f64,
    pub upper: f64,
    pub branch: UpperBranch,
}

fn main_upper_coefficient(l: f64) -> f64 {
    1.0 / (2.0 * (2.0 * l + 1.0) * (2.0 * l + 5.0).sqrt())
}

fn large_lambda_upper_coefficient(l: f64) -> f64 {
    1.0 / ((l + 2.0) * (l + 3.0))
}

/// The `lambda > 2` where the two upper coefficients for `c_*^2` cross.
pub fn upper_branch_crossover() -> f64 {
    let g = |l: f64| main_upper_coefficient(l) - large_lambda_upper_coefficient(l);
    let (mut lo, mut hi) = (2.0, 1000.0);
    debug_assert!(g(lo) < 0.0 && g(hi) > 0.0);
    while hi - lo > 1e-12 * hi {
        let mid = 0.5 * (lo + hi);
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `1/((2l+1)(2l+5)) < c_*^2 <` the piecewise upper coefficient.
pub fn asymptotic_window(lambda: GegenbauerParam) -> AsymptoticWindow {
    let l = lambda.value();
    let lower = 1.0 / ((2.0 * l + 1.0) * (2.0 * l + 5.0));
    if l <= upper_branch_crossover() {
        AsymptoticWindow { lower, upper: main_upper_coefficient(l), branch: UpperBranch::Main }
    } else {
        AsymptoticWindow {
            lower,
            upper: large_lambda_upper_coefficient(l),
            branch: UpperBranch::LargeLambda,
        }
    }
}

/// `[n, 3n]`, the window for `lim_{lambda -> inf} c_n^2 / (2 lambda)`.
pub fn large_lambda_limit_window(n: usize) -> (f64, f64) {
    let nf = n as f64;
    (nf, 3.0 * nf)
}

/// `[(n - 1/2)(n - 1), (n + 3/2)^2]`, the window for
/// `lim_{lambda -> -1/2} c_n 2 sqrt(2 lambda + 1)`.
pub fn near_half_limit_window(n: usize) -> (f64, f64) {
    let nf = n as f64;
    ((nf - 0.5) * (nf - 1.0), (nf + 1.5).powi(2))
}
