//! `c_n(lambda) / n^2` against its limit `c_*(lambda)`.

use serde::Serialize;

use crate::bounds::{asymptotic_constant, asymptotic_window, AsymptoticWindow};
use crate::eigen::{default_max_iter, largest_eigenvalue};
use crate::error::{Error, Result};
use crate::gegenbauer::{build_operator, GegenbauerParam, ProblemSize};
use crate::par::Execution;

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub c_n: f64,
    pub scaled: f64,
    pub gap: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceTable {
    pub lambda: f64,
    pub asymptote: f64,
    pub window: AsymptoticWindow,
    /// `c_*^2` lies strictly inside the window.
    pub window_holds: bool,
    /// Gaps strictly decrease along the table.
    pub gaps_decreasing: bool,
    pub rows: Vec<ConvergenceRow>,
}

pub fn convergence_study(
    lambda: f64,
    ns: &[usize],
    tol: f64,
    exec: Execution,
) -> Result<ConvergenceTable> {
    if ns.is_empty() || ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation("n list must be nonempty and strictly increasing".into()));
    }
    let param = GegenbauerParam::new(lambda)?;
    let asymptote = asymptotic_constant(param)?;
    let window = asymptotic_window(param);
    let rows = exec
        .map(ns, |&n| -> Result<ConvergenceRow> {
            let op = build_operator(ProblemSize::new(n)?, param)?;
            let mu = largest_eigenvalue(&op, tol, default_max_iter(op.dim()))?.mu_max;
            let c_n = mu.sqrt();
            let scaled = c_n / (n as f64).powi(2);
            Ok(ConvergenceRow { n, c_n, scaled, gap: (scaled - asymptote).abs() })
        })
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let c2 = asymptote * asymptote;
    Ok(ConvergenceTable {
        lambda,
        asymptote,
        window,
        window_holds: window.lower < c2 && c2 < window.upper,
        gaps_decreasing: rows.windows(2).all(|w| w[1].gap < w[0].gap),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigen::DEFAULT_TOL;

    #[test]
    fn constant_weight_converges_to_one_over_pi() {
        let t = convergence_study(0.5, &[100, 200, 400, 800], DEFAULT_TOL, Execution::Parallel)
            .unwrap();
        assert!(t.gaps_decreasing);
        assert!(t.window_holds);
        assert!((t.asymptote - std::f64::consts::FRAC_1_PI).abs() < 1e-12);
        let t = convergence_study(0.5, &[4000], DEFAULT_TOL, Execution::Sequential).unwrap();
        assert!(t.rows[0].gap <= 0.002);
    }

    #[test]
    fn chebyshev_weight_limit() {
        let t = convergence_study(0.0, &[500, 1000], DEFAULT_TOL, Execution::Parallel).unwrap();
        for r in &t.rows {
            let n = r.n as f64;
            assert!(r.scaled >= 0.472135 && r.scaled <= 0.472871 * (1.0 + 2.0 / n).powi(2));
        }
    }

    #[test]
    fn rejects_unsorted_lists() {
        assert!(convergence_study(0.5, &[10, 5], DEFAULT_TOL, Execution::Sequential).is_err());
        assert!(convergence_study(0.5, &[], DEFAULT_TOL, Execution::Sequential).is_err());
    }
}
