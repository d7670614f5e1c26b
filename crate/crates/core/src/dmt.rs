//! Diversity–multiplexing tradeoff of the S1 link and empirical slope fits
//! on outage curves.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Points with an outage at or above this are outside the asymptotic regime.
pub const MAX_FIT_OUTAGE: f64 = 0.1;
pub const MIN_FIT_POINTS: usize = 4;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DmtPoint {
    /// Multiplexing gain, in `[0, 2/N_F]`.
    pub r1: f64,
    /// Diversity gain.
    pub d: f64,
}

/// `d(r₁) = N_R − (N_R N_F / 2) r₁`. The tradeoff of S1 does not depend on
/// the rate of S2.
pub fn diversity(r1: f64, n_r: u32, n_f: u32) -> Result<f64> {
    if n_r == 0 {
        return Err(invalid("n_r", "must be >= 1"));
    }
    if n_f == 0 {
        return Err(invalid("n_f", "must be >= 1"));
    }
    let r_max = max_multiplexing_gain(n_f);
    if !(r1.is_finite() && (0.0..=r_max).contains(&r1)) {
        return Err(invalid("r1", format!("must lie in [0, {r_max}], got {r1}")));
    }
    let n_r = f64::from(n_r);
    Ok((n_r - n_r * f64::from(n_f) / 2.0 * r1).max(0.0))
}

/// `2/N_F`.
pub fn max_multiplexing_gain(n_f: u32) -> f64 {
    2.0 / f64::from(n_f)
}

/// `points + 1` evenly spaced samples of the tradeoff curve.
pub fn dmt_curve(n_r: u32, n_f: u32, points: usize) -> Result<Vec<DmtPoint>> {
    let r_max = max_multiplexing_gain(n_f);
    let points = points.max(1);
    (0..=points)
        .map(|i| {
            let r1 = r_max * i as f64 / points as f64;
            Ok(DmtPoint {
                r1,
                d: diversity(r1.min(r_max), n_r, n_f)?,
            })
        })
        .collect()
}

/// Least-squares slope of `−log Pout` against `log γ` over the points with
/// `γ_dB` in `window` (inclusive) and `0 < Pout < 0.1`.
///
/// `curve` holds `(γ_dB, Pout)` pairs.
pub fn empirical_slope(curve: &[(f64, f64)], window: (f64, f64)) -> Result<f64> {
    let (lo, hi) = window;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(invalid(
            "window",
            format!("need finite lo < hi, got {lo}:{hi}"),
        ));
    }
    let pts: Vec<(f64, f64)> = curve
        .iter()
        .filter(|(db, p)| (lo..=hi).contains(db) && *p > 0.0 && *p < MAX_FIT_OUTAGE)
        .map(|&(db, p)| (db / 10.0, -p.log10()))
        .collect();
    if pts.len() < MIN_FIT_POINTS {
        return Err(Error::TooFewPoints {
            needed: MIN_FIT_POINTS,
            found: pts.len(),
        });
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}
