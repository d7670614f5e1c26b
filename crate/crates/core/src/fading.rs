//! Block Rayleigh fading draws and the per-trial random stream contract.
//!
//! Every link gain is a zero-mean circularly-symmetric complex Gaussian with
//! configurable mean power, so `|h|²` is exponential. Each trial owns its
//! own ChaCha8 stream selected by `(master_seed, stream_index)`: the key is
//! expanded from the master seed and the stream index picks one of the 2⁶⁴
//! ChaCha streams. The mapping is injective and does not depend on how
//! trials are split among workers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{positive, Error, Result};
use crate::scenario::ScenarioConfig;

/// Average power statistics of one Rayleigh link.
///
/// Deserializes from a bare number (the mean gain `E[|h|²]`).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LinkStats {
    mean_gain: f64,
    rate_param: f64,
}

impl LinkStats {
    pub fn new(mean_gain: f64) -> Result<Self> {
        let mean_gain = positive("mean_gain", mean_gain)?;
        let rate_param = 1.0 / mean_gain;
        positive("rate_param", rate_param)?;
        Ok(Self {
            mean_gain,
            rate_param,
        })
    }

    /// `E[|h|²]`.
    pub fn mean_gain(&self) -> f64 {
        self.mean_gain
    }

    /// Rate of the exponential law of `|h|²`, i.e. `1 / E[|h|²]`.
    pub fn rate_param(&self) -> f64 {
        self.rate_param
    }

    /// Draws one complex gain from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let scale = (0.5 * self.mean_gain).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(scale * re, scale * im)
    }

    /// Draws `|h|²` directly (an exponential with rate `rate_param`).
    pub fn sample_power<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        exponential(rng, self.rate_param)
    }
}

impl TryFrom<f64> for LinkStats {
    type Error = Error;

    fn try_from(mean_gain: f64) -> Result<Self> {
        Self::new(mean_gain)
    }
}

impl From<LinkStats> for f64 {
    fn from(stats: LinkStats) -> f64 {
        stats.mean_gain
    }
}

/// Exponential variate with the given rate, by inversion.
pub(crate) fn exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64) -> f64 {
    // 1 - U lies in (0, 1], so the log is finite.
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Exponential with the given rate conditioned on `[0, width)`; `width` may
/// be infinite.
pub(crate) fn truncated_exponential<R: Rng + ?Sized>(rng: &mut R, rate: f64, width: f64) -> f64 {
    if !width.is_finite() {
        return exponential(rng, rate);
    }
    let u: f64 = rng.random();
    let x = -(u * (-rate * width).exp_m1()).ln_1p() / rate;
    x.min(width)
}

/// Identifies one reproducible random stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_index: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_index: u64) -> Self {
        Self {
            master_seed,
            stream_index,
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        StreamFactory::new(self.master_seed).stream(self.stream_index)
    }

    /// Derives an unrelated master seed for a sub-computation labelled `tag`.
    pub fn derive_master(master_seed: u64, tag: u64) -> u64 {
        splitmix64(splitmix64(master_seed) ^ splitmix64(tag.wrapping_add(0x5851_f42d_4c95_7f2d)))
    }
}

/// Hands out per-trial streams for one master seed without re-expanding
/// the key every time.
#[derive(Clone, Debug)]
pub struct StreamFactory {
    base: ChaCha8Rng,
}

impl StreamFactory {
    pub fn new(master_seed: u64) -> Self {
        Self {
            base: ChaCha8Rng::seed_from_u64(master_seed),
        }
    }

    pub fn stream(&self, stream_index: u64) -> ChaCha8Rng {
        let mut rng = self.base.clone();
        rng.set_stream(stream_index);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// One block-fading draw of every first- and second-hop gain.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization {
    /// `h[0][r]` is S1 → relay r, `h[1][r]` is S2 → relay r.
    pub h: [Vec<Complex64>; 2],
    /// Relay r → destination.
    pub f: Vec<Complex64>,
}

impl ChannelRealization {
    pub fn n_relays(&self) -> usize {
        self.f.len()
    }

    /// Gain from source `s` (0 or 1) to relay `r`.
    pub fn h(&self, s: usize, r: usize) -> Complex64 {
        self.h[s][r]
    }
}

pub fn draw_complex_gain(stats: LinkStats, seed: SeedSpec) -> Complex64 {
    stats.sample(&mut seed.rng())
}

/// Draws all `3·N_R` gains of `config` independently from one stream.
pub fn draw_realization(config: &ScenarioConfig, seed: SeedSpec) -> Result<ChannelRealization> {
    draw_realization_with(config, &mut seed.rng())
}

pub(crate) fn draw_realization_with<R: Rng + ?Sized>(
    config: &ScenarioConfig,
    rng: &mut R,
) -> Result<ChannelRealization> {
    let n = config.relays.len();
    if n == 0 {
        return Err(Error::NoRelays);
    }
    let mut h1 = Vec::with_capacity(n);
    let mut h2 = Vec::with_capacity(n);
    let mut f = Vec::with_capacity(n);
    for relay in &config.relays {
        h1.push(relay.s1.sample(rng));
        h2.push(relay.s2.sample(rng));
        f.push(relay.dest.sample(rng));
    }
    Ok(ChannelRealization { h: [h1, h2], f })
}
