//! Second hop: the stacked model seen by the destination over the relay
//! slots, the post-combining SNR of each source and the linear MMSE
//! estimator.
//!
//! Relay `r` transmits `g_r·(a_{r,1}x_1 + a_{r,2}x_2 + a_{r,3}w_r)` in its own
//! slot, so slot `r` observes
//!
//! ```text
//! ỹ_r = g_r f_r a_{r,1} x_1 + g_r f_r a_{r,2} x_2 + (g_r f_r a_{r,3} w_r + w(r))
//! ```
//!
//! with independent noise across slots of variance `g²|f|²|a_3|²σ² + σ²`.

use num_complex::Complex64;

use crate::error::{positive, Error, Result};
use crate::protocol::{RelayTxState, Source};

#[derive(Clone, Debug, PartialEq)]
pub struct SecondHopModel {
    /// Row r: effective gains of `(x_1, x_2)` in slot r.
    pub h: Vec<[Complex64; 2]>,
    /// Diagonal of the noise covariance.
    pub noise_var: Vec<f64>,
}

impl SecondHopModel {
    pub fn n_slots(&self) -> usize {
        self.h.len()
    }
}

pub fn assemble(states: &[RelayTxState], f: &[Complex64], sigma2: f64) -> Result<SecondHopModel> {
    positive("sigma2", sigma2)?;
    if states.len() != f.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} relay states but {} destination gains",
            states.len(),
            f.len()
        )));
    }
    if states.is_empty() {
        return Err(Error::NoRelays);
    }
    let mut h = Vec::with_capacity(states.len());
    let mut noise_var = Vec::with_capacity(states.len());
    for (s, &fr) in states.iter().zip(f) {
        let gf = fr * s.g;
        h.push([gf * s.a1, gf * s.a2]);
        noise_var.push(gf.norm_sqr() * s.a3.norm_sqr() * sigma2 + sigma2);
    }
    Ok(SecondHopModel { h, noise_var })
}

/// `γ_D = H_{*,c}ᴴ Σ⁻¹ H_{*,c}` for the column of `source`.
pub fn gamma_d(model: &SecondHopModel, source: Source) -> f64 {
    let col = source.index();
    model
        .h
        .iter()
        .zip(&model.noise_var)
        .map(|(row, &s)| row[col].norm_sqr() / s)
        .sum()
}

/// `γ_D` written per relay in terms of `(g, |f|², a, γ)`:
/// `Σ_r g²|f|²|a_1|² / (g²|f|²|a_3|² + 1) · γ`.
pub fn gamma_d_from_states(
    states: &[RelayTxState],
    f: &[Complex64],
    gamma: f64,
    source: Source,
) -> f64 {
    states
        .iter()
        .zip(f)
        .map(|(s, fr)| {
            let a = match source {
                Source::S1 => s.a1,
                Source::S2 => s.a2,
            };
            let gf2 = s.g * s.g * fr.norm_sqr();
            gf2 * a.norm_sqr() / (gf2 * s.a3.norm_sqr() + 1.0) * gamma
        })
        .sum()
}

/// Rows of the linear MMSE filter `W = (HᴴΣ⁻¹H + I)⁻¹ HᴴΣ⁻¹` for unit-power
/// symbols; `W[s]` has one weight per slot.
pub fn mmse_filter(model: &SecondHopModel) -> Result<[Vec<Complex64>; 2]> {
    for (row, &s) in model.h.iter().zip(&model.noise_var) {
        let finite = row.iter().all(|v| v.re.is_finite() && v.im.is_finite());
        if !finite || !(s.is_finite() && s > 0.0) {
            return Err(crate::error::invalid(
                "model",
                "non-finite gain or noise variance",
            ));
        }
    }
    // A = HᴴΣ⁻¹H + I is 2×2 Hermitian positive definite.
    let mut a = [[Complex64::new(0.0, 0.0); 2]; 2];
    for (row, &s) in model.h.iter().zip(&model.noise_var) {
        for i in 0..2 {
            for j in 0..2 {
                a[i][j] += row[i].conj() * row[j] / s;
            }
        }
    }
    a[0][0] += 1.0;
    a[1][1] += 1.0;
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let inv = [
        [a[1][1] / det, -a[0][1] / det],
        [-a[1][0] / det, a[0][0] / det],
    ];
    let mut w = [
        Vec::with_capacity(model.n_slots()),
        Vec::with_capacity(model.n_slots()),
    ];
    for (row, &s) in model.h.iter().zip(&model.noise_var) {
        // Column r of HᴴΣ⁻¹ is conj(row)/s.
        let b = [row[0].conj() / s, row[1].conj() / s];
        for (i, wi) in w.iter_mut().enumerate() {
            wi.push(inv[i][0] * b[0] + inv[i][1] * b[1]);
        }
    }
    Ok(w)
}

/// Linear MMSE estimate of `(x_1, x_2)` from the slot observations.
pub fn mmse_estimate(model: &SecondHopModel, observed: &[Complex64]) -> Result<[Complex64; 2]> {
    if observed.len() != model.n_slots() {
        return Err(Error::DimensionMismatch(format!(
            "{} observations for {} slots",
            observed.len(),
            model.n_slots()
        )));
    }
    if observed
        .iter()
        .any(|v| !(v.re.is_finite() && v.im.is_finite()))
    {
        return Err(crate::error::invalid("observed", "non-finite observation"));
    }
    let w = mmse_filter(model)?;
    let apply = |wi: &[Complex64]| wi.iter().zip(observed).map(|(a, b)| a * b).sum();
    Ok([apply(&w[0]), apply(&w[1])])
}

/// SINR at the MMSE filter output for `source`, counting the other symbol as
/// interference: `|wᴴh_s|² / (Σ_r |w_r|²Σ_rr + |wᴴh_o|²)`.
pub fn post_mmse_sinr(model: &SecondHopModel, source: Source) -> Result<f64> {
    let w = mmse_filter(model)?;
    let w = &w[source.index()];
    let (own, other) = (source.index(), 1 - source.index());
    let mut signal = Complex64::new(0.0, 0.0);
    let mut interference = Complex64::new(0.0, 0.0);
    let mut noise = 0.0;
    for ((wr, row), &s) in w.iter().zip(&model.h).zip(&model.noise_var) {
        signal += wr * row[own];
        interference += wr * row[other];
        noise += wr.norm_sqr() * s;
    }
    let denom = noise + interference.norm_sqr();
    Ok(if denom > 0.0 {
        signal.norm_sqr() / denom
    } else {
        0.0
    })
}

/// Outage iff `log₂(1 + γ_D) < (N_F/2)·rate`; equality decodes.
pub fn outage_at_destination(gamma_d_value: f64, rate: f64, n_f: u32) -> bool {
    let needed = f64::from(n_f) / 2.0 * rate;
    gamma_d_value.ln_1p() / std::f64::consts::LN_2 < needed
}
