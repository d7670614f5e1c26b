//! Closed-form first-hop event probabilities, their high-SNR constants,
//! end-to-end outage by enumeration of the relay decoding outcomes, and
//! the high-SNR power-law bounds.
//!
//! With `Y = |h_{1,r}|² ~ Exp(μ)` and `X = |h_{2,r}|² ~ Exp(λ)`, the SIC
//! ordering splits the `(X, Y)` quadrant into the half-plane where S1 is
//! decoded first (`Y/k₁ ≥ X/k₂`) and its complement. Inside each half-plane
//! the three outcomes (first block lost, only the first block, both) are
//! regions bounded by lines, so every probability is a sum of exponential
//! integrals.

mod second_hop;

pub use second_hop::{
    end_to_end_outage, end_to_end_outage_with, sample_first_hop, second_hop_outage_given_events,
    second_hop_outage_with, EndToEndOutage, Estimator, FirstHopSampling, SecondHopOptions,
    MAX_ENUMERATED_RELAYS, MIN_SECOND_HOP_TRIALS, REJECTION_FLOOR, SKIP_EVENT_BELOW,
};

use serde::{Deserialize, Serialize};

use crate::error::{positive, Result};
use crate::protocol::{DecodeEvent, RateConfig};
use crate::scenario::ScenarioConfig;

/// Probabilities of the four decoding outcomes at one relay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RelayEventProbs {
    /// Neither block decoded.
    pub p_both_fail: f64,
    /// Only S2 decoded.
    pub p_s1fail_s2ok: f64,
    /// Only S1 decoded.
    pub p_s1ok_s2fail: f64,
    /// Both blocks decoded.
    pub p_both_ok: f64,
}

impl RelayEventProbs {
    pub fn get(&self, event: DecodeEvent) -> f64 {
        match event {
            DecodeEvent::Both => self.p_both_ok,
            DecodeEvent::OnlyS1 => self.p_s1ok_s2fail,
            DecodeEvent::OnlyS2 => self.p_s1fail_s2ok,
            DecodeEvent::None => self.p_both_fail,
        }
    }

    pub fn sum(&self) -> f64 {
        self.p_both_fail + self.p_s1fail_s2ok + self.p_s1ok_s2fail + self.p_both_ok
    }

    pub fn as_array(&self) -> [f64; 4] {
        DecodeEvent::ALL.map(|e| self.get(e))
    }
}

/// Masses of the three outcomes inside the half-plane where the source with
/// power rate `mu_first` (threshold `k_first`) is decoded first.
#[derive(Clone, Copy, Debug)]
struct HalfPlane {
    first_lost: f64,
    only_first: f64,
    both: f64,
}

/// `first` has `|h|² ~ Exp(mu_first)`, `other` has `|h|² ~ Exp(lam_other)`.
fn half_plane(lam_other: f64, mu_first: f64, k_first: f64, k_other: f64, gamma: f64) -> HalfPlane {
    let (lam, mu, k1, k2) = (lam_other, mu_first, k_first, k_other);
    // Rates of the exponential integrands in the other source's power x.
    let a = lam + mu * k1 / k2; // boundary of the half-plane, y = k1 x / k2
    let c = lam + mu * k1; // decoding line, y = k1 x + k1/γ
    let noise_loss = -(-mu * k1 / gamma).exp_m1(); // 1 − e^{−μk₁/γ}
    let a_coef = lam * (-mu * k1 / gamma).exp() / c;
    let second_ok = (-c * k2 / gamma).exp();

    let only_first = a_coef * -(-c * k2 / gamma).exp_m1();
    if k2 >= 1.0 {
        // The decoding line stays inside the half-plane for every x.
        HalfPlane {
            first_lost: lam * (mu * k1 * (1.0 - 1.0 / k2)) / (a * c) + lam * noise_loss / c,
            only_first,
            both: a_coef * second_ok,
        }
    } else {
        // The decoding line leaves the half-plane at x*; beyond it every
        // point of the half-plane decodes the first block.
        let x_star = k2 / (gamma * (1.0 - k2));
        let first_lost = lam / a * -(-a * x_star).exp_m1() - a_coef * -(-c * x_star).exp_m1();
        let both = a_coef * (second_ok - (-c * x_star).exp()) + lam / a * (-a * x_star).exp();
        HalfPlane {
            first_lost: first_lost.max(0.0),
            only_first,
            both: both.max(0.0),
        }
    }
}

/// Closed-form outcome probabilities at one relay with `λ = 1/E[|h_2|²]`,
/// `μ = 1/E[|h_1|²]` and transmit SNR `gamma`.
///
/// For `k₁, k₂ ≥ 1` these are the textbook expressions; a threshold below 1
/// truncates the decoding-line integrals where the line leaves the SIC
/// half-plane.
pub fn event_probs(
    lambda: f64,
    mu: f64,
    rates: &RateConfig,
    gamma: f64,
) -> Result<RelayEventProbs> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    positive("gamma", gamma)?;
    let (k1, k2) = (rates.k1(), rates.k2());
    let s1_first = half_plane(lambda, mu, k1, k2, gamma);
    let s2_first = half_plane(mu, lambda, k2, k1, gamma);
    Ok(RelayEventProbs {
        p_both_fail: (s1_first.first_lost + s2_first.first_lost).min(1.0),
        p_s1fail_s2ok: s2_first.only_first,
        p_s1ok_s2fail: s1_first.only_first,
        p_both_ok: (s1_first.both + s2_first.both).min(1.0),
    })
}

/// Literal transcription of the four published expressions (valid for
/// `k₁, k₂ ≥ 1`); kept as an independent route for cross-checks.
pub fn event_probs_printed(
    lambda: f64,
    mu: f64,
    rates: &RateConfig,
    gamma: f64,
) -> RelayEventProbs {
    let (l, m, k1, k2, g) = (lambda, mu, rates.k1(), rates.k2(), gamma);
    let a = l * (-m * k1 / g).exp() / (l + m * k1);
    let b = m * (-l * k2 / g).exp() / (m + l * k2);
    RelayEventProbs {
        p_both_fail: l / (l + m * k1 / k2) - a + m / (l * k2 / k1 + m) - b,
        p_s1fail_s2ok: b * (1.0 - (-(m + l * k2) * k1 / g).exp()),
        p_s1ok_s2fail: a * (1.0 - (-(l + m * k1) * k2 / g).exp()),
        p_both_ok: 1.0 + a * (-(l + m * k1) * k2 / g).exp() + b * (-(m + l * k2) * k1 / g).exp()
            - l / (l + m * k1 / k2)
            - m / (m + l * k2 / k1),
    }
}

/// High-SNR limits of the first-hop outcomes at one relay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HighSnrConstants {
    /// `lim_{γ→∞}` probability that neither block is decoded.
    pub c: f64,
    /// `lim_{γ→∞}` probability that both blocks are decoded.
    pub c_prime: f64,
}

/// `(C_r, C'_r)`; the single-block outcomes vanish in the limit.
pub fn high_snr_constants(lambda: f64, mu: f64, rates: &RateConfig) -> Result<HighSnrConstants> {
    positive("lambda", lambda)?;
    positive("mu", mu)?;
    let (k1, k2) = (rates.k1(), rates.k2());
    // The half-plane masses are λ/(λ+μk₁/k₂) and its complement; only the
    // wedge between the half-plane boundary and the decoding line is lost.
    let wedge = |lam: f64, mu: f64, k1: f64, k2: f64| {
        if k2 > 1.0 {
            lam * (mu * k1 * (1.0 - 1.0 / k2)) / ((lam + mu * k1 / k2) * (lam + mu * k1))
        } else {
            0.0
        }
    };
    let c = wedge(lambda, mu, k1, k2) + wedge(mu, lambda, k2, k1);
    Ok(HighSnrConstants {
        c,
        c_prime: 1.0 - c,
    })
}

/// High-SNR power-law references for the S1 end-to-end outage.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticBounds {
    /// `(Π_r C'_r ν_r)·(k₁/γ)^{N}`: every relay decodes both blocks.
    pub upper: f64,
    /// `(k₁/γ)^{N}`.
    pub lower: f64,
}

pub fn asymptotic_bounds(config: &ScenarioConfig, gamma: f64) -> Result<AsymptoticBounds> {
    positive("gamma", gamma)?;
    let active = config.active_relays()?;
    let rates = config.rates()?;
    let n = active.len() as i32;
    let base = (rates.k1() / gamma).powi(n);
    let mut product = 1.0;
    for &r in &active {
        let links = &config.relays[r];
        let consts = high_snr_constants(links.lambda(), links.mu(), &rates)?;
        product *= consts.c_prime * links.nu();
    }
    Ok(AsymptoticBounds {
        upper: product * base,
        lower: base,
    })
}

/// Decoding outcome at every used relay; one of `4^N` vectors.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EventVector(pub Vec<DecodeEvent>);

impl EventVector {
    /// Base-4 decoding of `index`, relay 0 in the least significant digit.
    pub fn from_index(mut index: usize, n_relays: usize) -> Self {
        let mut events = Vec::with_capacity(n_relays);
        for _ in 0..n_relays {
            events.push(DecodeEvent::from_index(index % 4).expect("digit < 4"));
            index /= 4;
        }
        Self(events)
    }

    pub fn index(&self) -> usize {
        self.0.iter().rev().fold(0, |acc, e| acc * 4 + e.index())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// First-hop probability of this vector; relays decode independently.
    pub fn probability(&self, per_relay: &[RelayEventProbs]) -> f64 {
        self.0
            .iter()
            .zip(per_relay)
            .map(|(e, p)| p.get(*e))
            .product()
    }
}

/// Per-relay outcome probabilities for the relays `config` uses.
pub fn relay_event_table(config: &ScenarioConfig, gamma: f64) -> Result<Vec<RelayEventProbs>> {
    let rates = config.rates()?;
    config
        .active_relays()?
        .into_iter()
        .map(|r| {
            let l = &config.relays[r];
            event_probs(l.lambda(), l.mu(), &rates, gamma)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn k(k1: f64, k2: f64) -> RateConfig {
        RateConfig::from_thresholds(k1, k2, 2).unwrap()
    }

    // Reference values from adaptive 2-D quadrature of the joint exponential
    // density over the SIC decoding regions (scipy.integrate.quad, nested),
    // ordered (none, only S2, only S1, both).
    type Case = ((f64, f64, f64, f64, f64), [f64; 4]);
    const QUADRATURE: &[Case] = &[
        (
            (1.0, 1.0, 1.0, 1.0, 10.0),
            [
                0.095162581964,
                0.082009598677,
                0.082009598677,
                0.740818220682,
            ],
        ),
        (
            (1.0, 1.0, 3.0, 3.0, 10.0),
            [
                0.629590889659,
                0.129422015133,
                0.129422015133,
                0.111565080074,
            ],
        ),
        (
            (2.0, 0.5, 1.828_427_124_746_190_3, 7.0, 100.0),
            [
                0.289976206320,
                0.006981474004,
                0.125491261360,
                0.577551058316,
            ],
        ),
        (
            (0.7, 1.3, 0.6, 0.4, 5.0),
            [
                0.015203903425,
                0.134364116055,
                0.045183669585,
                0.805248310936,
            ],
        ),
        (
            (1.0, 1.0, 0.5, 2.0, 3.0),
            [
                0.289723224107,
                0.067337965039,
                0.356719000651,
                0.286219810203,
            ],
        ),
    ];

    #[test]
    fn matches_quadrature() {
        for &((l, m, k1, k2, g), want) in QUADRATURE {
            let p = event_probs(l, m, &k(k1, k2), g).unwrap();
            let got = [p.p_both_fail, p.p_s1fail_s2ok, p.p_s1ok_s2fail, p.p_both_ok];
            for (a, b) in got.iter().zip(want) {
                assert!(
                    (a - b).abs() < 1e-10,
                    "{:?}: {got:?} vs {want:?}",
                    (l, m, k1, k2, g)
                );
            }
        }
    }

    #[test]
    fn printed_form_agrees_above_unit_thresholds() {
        for &((l, m, k1, k2, g), _) in &QUADRATURE[..3] {
            let a = event_probs(l, m, &k(k1, k2), g).unwrap().as_array();
            let b = event_probs_printed(l, m, &k(k1, k2), g).as_array();
            for (x, y) in a.iter().zip(b) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        // Below unit threshold the literal first term goes negative.
        let lit = event_probs_printed(0.7, 1.3, &k(0.6, 0.4), 5.0);
        assert!(lit.p_both_fail < 0.0);
    }

    #[test]
    fn limiting_cases() {
        let rates = k(1.0, 1.0);
        let g = 10.0;
        let p = event_probs(1e8, 1.0, &rates, g).unwrap();
        assert!((p.p_both_fail - (1.0 - (-1.0f64 / g).exp())).abs() < 1e-6);
        assert!(p.p_s1fail_s2ok < 1e-6);
        assert!((p.p_s1ok_s2fail - (-1.0f64 / g).exp()).abs() < 1e-6);
    }

    #[test]
    fn high_snr_constant_examples() {
        let c = high_snr_constants(1.0, 1.0, &k(1.0, 1.0)).unwrap();
        assert!(c.c.abs() < 1e-15);
        let c = high_snr_constants(1.0, 1.0, &k(3.0, 3.0)).unwrap();
        assert!((c.c - 0.5).abs() < 1e-15);
        let p = event_probs(1.0, 1.0, &k(3.0, 3.0), 1e9).unwrap();
        assert!((p.p_both_fail - c.c).abs() < 1e-6);
        assert!((p.p_both_ok - c.c_prime).abs() < 1e-6);
    }

    #[test]
    fn event_vector_index_round_trip() {
        for n in 1..5 {
            for i in 0..4usize.pow(n as u32) {
                let v = EventVector::from_index(i, n);
                assert_eq!(v.len(), n);
                assert_eq!(v.index(), i);
            }
        }
    }

    #[test]
    fn bounds_scale_with_gamma() {
        let cfg = ScenarioConfig::symmetric(2, 1.0, 1.0);
        let a = asymptotic_bounds(&cfg, 1e4).unwrap();
        let b = asymptotic_bounds(&cfg, 2e4).unwrap();
        assert!((a.upper / b.upper - 4.0).abs() < 1e-12);
        assert!((a.lower / b.lower - 4.0).abs() < 1e-12);
        assert!(a.upper <= a.lower);
    }

    #[test]
    fn rejects_bad_parameters() {
        let r = k(1.0, 1.0);
        assert!(event_probs(0.0, 1.0, &r, 1.0).is_err());
        assert!(event_probs(1.0, f64::NAN, &r, 1.0).is_err());
        assert!(event_probs(1.0, 1.0, &r, -1.0).is_err());
        assert!(high_snr_constants(f64::INFINITY, 1.0, &r).is_err());
    }

    proptest! {
        #[test]
        fn probabilities_are_a_distribution(
            l in 1e-3f64..1e3, m in 1e-3f64..1e3,
            k1 in 1e-2f64..50.0, k2 in 1e-2f64..50.0, g_db in -30.0f64..80.0,
        ) {
            let p = event_probs(l, m, &k(k1, k2), 10f64.powf(g_db / 10.0)).unwrap();
            for v in p.as_array() {
                prop_assert!((0.0..=1.0).contains(&v), "{p:?}");
            }
            prop_assert!((p.sum() - 1.0).abs() < 1e-12, "{}", p.sum());
        }

        #[test]
        fn swapping_sources_swaps_single_outcomes(
            l in 1e-2f64..1e2, m in 1e-2f64..1e2,
            k1 in 0.1f64..20.0, k2 in 0.1f64..20.0, g in 0.1f64..1e5,
        ) {
            let p = event_probs(l, m, &k(k1, k2), g).unwrap();
            let q = event_probs(m, l, &k(k2, k1), g).unwrap();
            prop_assert!((p.p_s1fail_s2ok - q.p_s1ok_s2fail).abs() < 1e-14);
            prop_assert!((p.p_s1ok_s2fail - q.p_s1fail_s2ok).abs() < 1e-14);
            prop_assert!((p.p_both_fail - q.p_both_fail).abs() < 1e-14);
            prop_assert!((p.p_both_ok - q.p_both_ok).abs() < 1e-14);
        }

        #[test]
        fn outcome_masses_monotone_in_gamma(
            l in 1e-2f64..1e2, m in 1e-2f64..1e2,
            k1 in 0.1f64..20.0, k2 in 0.1f64..20.0, g in 0.1f64..1e5, factor in 1.0f64..100.0,
        ) {
            let lo = event_probs(l, m, &k(k1, k2), g).unwrap();
            let hi = event_probs(l, m, &k(k1, k2), g * factor).unwrap();
            prop_assert!(hi.p_both_fail <= lo.p_both_fail + 1e-14);
            prop_assert!(hi.p_both_ok >= lo.p_both_ok - 1e-14);
        }
    }
}
