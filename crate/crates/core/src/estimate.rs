//! Outage probability estimates and their 95% confidence intervals.

use serde::{Deserialize, Serialize};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

/// Below this many observed outages an estimate is flagged as unreliable.
pub const RELIABLE_FAILURES: u64 = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum EstimatorKind {
    /// Plain indicator counting; `p_hat = failures / trials`, Wilson interval.
    Counting,
    /// Weighted (importance-sampled) mean; normal interval from the sample
    /// variance. `failures` counts trials with a nonzero contribution.
    Weighted,
    /// Combination of several estimates (e.g. a sum over decoding events).
    Combined,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub trials: u64,
    pub failures: u64,
    pub ci_half_width: f64,
    pub kind: EstimatorKind,
}

impl OutageEstimate {
    pub fn from_counts(failures: u64, trials: u64) -> Self {
        assert!(trials > 0, "an estimate needs at least one trial");
        assert!(failures <= trials);
        let p_hat = failures as f64 / trials as f64;
        let (lo, hi) = wilson_interval(failures, trials, Z95);
        Self {
            p_hat,
            trials,
            failures,
            ci_half_width: 0.5 * (hi - lo),
            kind: EstimatorKind::Counting,
        }
    }

    /// Estimate from the running sums of per-trial contributions `w_i`
    /// (`sum = Σ w_i`, `sum_sq = Σ w_i²`).
    pub fn from_weighted(sum: f64, sum_sq: f64, nonzero: u64, trials: u64) -> Self {
        assert!(trials > 0, "an estimate needs at least one trial");
        let n = trials as f64;
        let mean = sum / n;
        let var = if trials > 1 {
            ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        Self {
            p_hat: mean.clamp(0.0, 1.0),
            trials,
            failures: nonzero,
            ci_half_width: Z95 * (var / n).sqrt(),
            kind: EstimatorKind::Weighted,
        }
    }

    /// Wilson interval `(low, high)` for counting estimates; `p̂ ± half-width`
    /// clipped to `[0, 1]` otherwise.
    pub fn interval(&self) -> (f64, f64) {
        match self.kind {
            EstimatorKind::Counting => wilson_interval(self.failures, self.trials, Z95),
            _ => (
                (self.p_hat - self.ci_half_width).max(0.0),
                (self.p_hat + self.ci_half_width).min(1.0),
            ),
        }
    }

    /// Whether the two 95% intervals intersect.
    pub fn overlaps(&self, other: &OutageEstimate) -> bool {
        let (a_lo, a_hi) = self.interval();
        let (b_lo, b_hi) = other.interval();
        a_lo <= b_hi && b_lo <= a_hi
    }

    /// False when too few outages were observed for the interval to mean much.
    pub fn is_reliable(&self) -> bool {
        self.failures >= RELIABLE_FAILURES
    }
}

/// Wilson score interval for `failures` successes out of `trials`.
pub fn wilson_interval(failures: u64, trials: u64, z: f64) -> (f64, f64) {
    let n = trials as f64;
    let p = failures as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if failures == 0 {
        0.0
    } else {
        (center - half).max(0.0)
    };
    let hi = if failures == trials {
        1.0
    } else {
        (center + half).min(1.0)
    };
    (lo, hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_reference_values() {
        // 10 of 100 at z = 1.96: (0.0552, 0.1744).
        let (lo, hi) = wilson_interval(10, 100, 1.96);
        assert!((lo - 0.055_229).abs() < 1e-5, "{lo}");
        assert!((hi - 0.174_366).abs() < 1e-5, "{hi}");
        // Zero failures still give a nonzero upper bound.
        let (lo, hi) = wilson_interval(0, 1000, Z95);
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.01);
    }

    #[test]
    fn counting_estimate_consistency() {
        let e = OutageEstimate::from_counts(25, 1000);
        assert_eq!(e.p_hat, 0.025);
        assert!(e.is_reliable());
        assert!(!OutageEstimate::from_counts(5, 1000).is_reliable());
        let quad = OutageEstimate::from_counts(100, 4000);
        let ratio = e.ci_half_width / quad.ci_half_width;
        assert!((ratio - 2.0).abs() < 0.2, "{ratio}");
    }

    #[test]
    fn weighted_estimate_of_constant_has_zero_width() {
        let e = OutageEstimate::from_weighted(0.5 * 10.0, 0.25 * 10.0, 10, 10);
        assert!((e.p_hat - 0.5).abs() < 1e-15);
        assert!(e.ci_half_width < 1e-7);
    }
}
