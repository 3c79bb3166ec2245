//! Security threshold: the root in `(0, 1)` of `beta m = c (1 - e^{-(1-beta) m})`.
//!
//! `c = 1` when ties favour the adversary; `c = 2` when they do not and each
//! split chain gains two blocks per successful epoch.

use super::AnalysisError;
use crate::adversary::SplitVariant;

pub fn growth_factor(variant: SplitVariant) -> f64 {
    match variant {
        SplitVariant::TieBreak => 1.0,
        SplitVariant::NoTieBreak => 2.0,
    }
}

/// Per-epoch honest growth `c (1 - e^{-(1-beta) m})` of a held split.
pub fn split_growth_rate(m: f64, beta: f64, variant: SplitVariant) -> f64 {
    growth_factor(variant) * (1.0 - (-(1.0 - beta) * m).exp())
}

pub fn solve_threshold(m: f64, variant: SplitVariant) -> Result<f64, AnalysisError> {
    if !(m.is_finite() && m > 0.0) {
        return Err(AnalysisError::BadParameters(format!("m must be positive, got {m}")));
    }
    let c = growth_factor(variant);
    let f = |beta: f64| beta * m - c * (1.0 - (-(1.0 - beta) * m).exp());
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    if !(f(lo) < 0.0 && f(hi) > 0.0) {
        return Err(AnalysisError::NoRoot { m, c });
    }
    // f is concave with f(0) < 0 < f(1), so the sign change is unique.
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use SplitVariant::*;

    #[test]
    fn published_thresholds() {
        let cases = [
            (5.0, TieBreak, 0.196),
            (3.0, TieBreak, 0.293),
            (7.0, TieBreak, 0.143),
            (5.0, NoTieBreak, 0.382),
            (3.0, NoTieBreak, 0.512),
            (7.0, NoTieBreak, 0.284),
        ];
        for (m, v, want) in cases {
            let got = solve_threshold(m, v).unwrap();
            assert!((got - want).abs() <= 1e-3, "m={m} {v:?}: {got}");
        }
    }

    #[test]
    fn root_balances_the_equation() {
        for m in [0.5, 1.0, 2.0, 10.0, 40.0] {
            for v in [TieBreak, NoTieBreak] {
                let b = solve_threshold(m, v).unwrap();
                assert!((b * m - split_growth_rate(m, b, v)).abs() < 1e-6 * m.max(1.0));
                assert!(b > 0.0 && b < 1.0);
            }
        }
    }

    #[test]
    fn rejects_non_positive_m() {
        assert!(solve_threshold(0.0, TieBreak).is_err());
        assert!(solve_threshold(-1.0, NoTieBreak).is_err());
        assert!(solve_threshold(f64::NAN, NoTieBreak).is_err());
    }
}
