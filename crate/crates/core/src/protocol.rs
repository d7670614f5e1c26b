//! Relay-side processing: SIC ordering and decoding, the forwarding
//! coefficients for each decoding outcome, and transmit power scaling.
//!
//! Decoding success uses the information-outage criterion: a block at
//! rate `R` sent over `N_F` slots (two blocks per frame) is decodable iff its
//! SINR reaches `k = 2^{(N_F/2)R} − 1`. Equality counts as success and a tie
//! in the SIC ordering metric decodes S1 first.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, positive, Result};
use crate::fading::ChannelRealization;
use crate::scenario::ScenarioConfig;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Source {
    S1,
    S2,
}

impl Source {
    pub fn index(self) -> usize {
        match self {
            Source::S1 => 0,
            Source::S2 => 1,
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Source::S1 => "S1",
            Source::S2 => "S2",
        })
    }
}

/// Which blocks one relay recovered in the first hop.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DecodeEvent {
    Both,
    OnlyS1,
    OnlyS2,
    None,
}

impl DecodeEvent {
    pub const ALL: [DecodeEvent; 4] = [
        DecodeEvent::Both,
        DecodeEvent::OnlyS1,
        DecodeEvent::OnlyS2,
        DecodeEvent::None,
    ];

    pub fn index(self) -> usize {
        match self {
            DecodeEvent::Both => 0,
            DecodeEvent::OnlyS1 => 1,
            DecodeEvent::OnlyS2 => 2,
            DecodeEvent::None => 3,
        }
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            DecodeEvent::Both => "both",
            DecodeEvent::OnlyS1 => "only_s1",
            DecodeEvent::OnlyS2 => "only_s2",
            DecodeEvent::None => "none",
        }
    }

    pub fn decoded(self, source: Source) -> bool {
        matches!(
            (self, source),
            (DecodeEvent::Both, _)
                | (DecodeEvent::OnlyS1, Source::S1)
                | (DecodeEvent::OnlyS2, Source::S2)
        )
    }
}

impl fmt::Display for DecodeEvent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Source rates and the derived block decoding thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateConfig {
    r1: f64,
    r2: f64,
    n_f: u32,
    k1: f64,
    k2: f64,
}

impl RateConfig {
    /// Rates in bits/symbol over a frame of `n_f = N_RU + 1` slots.
    pub fn new(r1: f64, r2: f64, n_f: u32) -> Result<Self> {
        positive("r1", r1)?;
        positive("r2", r2)?;
        if n_f < 2 {
            return Err(invalid("n_f", format!("need at least 2 slots, got {n_f}")));
        }
        let half = f64::from(n_f) / 2.0;
        Ok(Self {
            r1,
            r2,
            n_f,
            k1: (half * r1).exp2() - 1.0,
            k2: (half * r2).exp2() - 1.0,
        })
    }

    /// Builds the rates that produce the given thresholds exactly.
    pub fn from_thresholds(k1: f64, k2: f64, n_f: u32) -> Result<Self> {
        positive("k1", k1)?;
        positive("k2", k2)?;
        if n_f < 2 {
            return Err(invalid("n_f", format!("need at least 2 slots, got {n_f}")));
        }
        let half = f64::from(n_f) / 2.0;
        Ok(Self {
            r1: k1.ln_1p() / std::f64::consts::LN_2 / half,
            r2: k2.ln_1p() / std::f64::consts::LN_2 / half,
            n_f,
            k1,
            k2,
        })
    }

    pub fn r1(&self) -> f64 {
        self.r1
    }
    pub fn r2(&self) -> f64 {
        self.r2
    }
    pub fn n_f(&self) -> u32 {
        self.n_f
    }
    pub fn k1(&self) -> f64 {
        self.k1
    }
    pub fn k2(&self) -> f64 {
        self.k2
    }

    pub fn rate(&self, source: Source) -> f64 {
        match source {
            Source::S1 => self.r1,
            Source::S2 => self.r2,
        }
    }

    pub fn threshold(&self, source: Source) -> f64 {
        match source {
            Source::S1 => self.k1,
            Source::S2 => self.k2,
        }
    }

    /// Same frame, roles of the two sources exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            r1: self.r2,
            r2: self.r1,
            n_f: self.n_f,
            k1: self.k2,
            k2: self.k1,
        }
    }
}

/// Forwarding coefficients `(a1, a2, a3)` and amplitude scale `g` of one relay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelayTxState {
    pub a1: Complex64,
    pub a2: Complex64,
    pub a3: Complex64,
    pub g: f64,
}

/// Source decoded first: the one with the larger `|h|² / k`.
pub fn sic_order(y: f64, x: f64, rates: &RateConfig) -> Source {
    if y / rates.k1 >= x / rates.k2 {
        Source::S1
    } else {
        Source::S2
    }
}

/// SIC outcome at a relay with `y = |h_1|²`, `x = |h_2|²` and transmit SNR
/// `gamma = 1/σ²`.
pub fn relay_decode(y: f64, x: f64, gamma: f64, rates: &RateConfig) -> DecodeEvent {
    let (k1, k2) = (rates.k1, rates.k2);
    match sic_order(y, x, rates) {
        Source::S1 => {
            // S1 against S2 + noise, then S2 against noise alone.
            if y < k1 * x + k1 / gamma {
                DecodeEvent::None
            } else if x >= k2 / gamma {
                DecodeEvent::Both
            } else {
                DecodeEvent::OnlyS1
            }
        }
        Source::S2 => {
            if x < k2 * y + k2 / gamma {
                DecodeEvent::None
            } else if y >= k1 / gamma {
                DecodeEvent::Both
            } else {
                DecodeEvent::OnlyS2
            }
        }
    }
}

/// Forwarding coefficients for each decoding outcome: decoded blocks are
/// re-encoded with unit weight, undecoded ones are forwarded through their
/// channel gain together with the relay noise.
pub fn coefficients(event: DecodeEvent, h1: Complex64, h2: Complex64) -> [Complex64; 3] {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match event {
        DecodeEvent::Both => [one, one, zero],
        DecodeEvent::OnlyS1 => [one, h2, one],
        DecodeEvent::OnlyS2 => [h1, one, one],
        DecodeEvent::None => [h1, h2, one],
    }
}

/// Amplitude scale that sets the instantaneous relay transmit power to
/// `relay_power`.
pub fn power_scale(a: [Complex64; 3], sigma2: f64, relay_power: f64) -> Result<f64> {
    positive("sigma2", sigma2)?;
    positive("relay_power", relay_power)?;
    let energy = a[0].norm_sqr() + a[1].norm_sqr() + a[2].norm_sqr() * sigma2;
    if !(energy.is_finite() && energy > 0.0) {
        return Err(invalid(
            "coefficients",
            "all-zero coefficient triple has no power",
        ));
    }
    Ok((relay_power / energy).sqrt())
}

/// Decodes, picks coefficients and scales power at one relay.
pub fn relay_state(
    h1: Complex64,
    h2: Complex64,
    gamma: f64,
    rates: &RateConfig,
    relay_power: f64,
) -> Result<(DecodeEvent, RelayTxState)> {
    let event = relay_decode(h1.norm_sqr(), h2.norm_sqr(), gamma, rates);
    let [a1, a2, a3] = coefficients(event, h1, h2);
    let g = power_scale([a1, a2, a3], 1.0 / gamma, relay_power)?;
    Ok((event, RelayTxState { a1, a2, a3, g }))
}

/// First hop at the given relays of a realization. Each relay sees only its
/// own gains.
pub fn first_hop_at(
    real: &ChannelRealization,
    relays: &[usize],
    gamma: f64,
    rates: &RateConfig,
    relay_power: f64,
) -> Result<Vec<(DecodeEvent, RelayTxState)>> {
    positive("gamma", gamma)?;
    relays
        .iter()
        .map(|&r| relay_state(real.h(0, r), real.h(1, r), gamma, rates, relay_power))
        .collect()
}

/// First hop at the relays `config` uses.
pub fn step_first_hop(
    real: &ChannelRealization,
    config: &ScenarioConfig,
    gamma: f64,
) -> Result<Vec<(DecodeEvent, RelayTxState)>> {
    if real.n_relays() != config.n_relays() {
        return Err(crate::Error::DimensionMismatch(format!(
            "realization has {} relays, config has {}",
            real.n_relays(),
            config.n_relays()
        )));
    }
    let active = config.active_relays()?;
    first_hop_at(
        real,
        &active,
        gamma,
        &config.rates()?,
        config.run.relay_power,
    )
}
