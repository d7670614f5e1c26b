//! Scenario configuration: rates, candidate relays with their link
//! statistics, and run settings.
//!
//! The on-disk form is TOML (schema version 1):
//!
//! ```toml
//! version = 1
//!
//! [rates]
//! r1 = 1.0            # bits/symbol of S1
//! r2 = 1.0            # bits/symbol of S2
//!
//! [[relay]]           # one table per candidate relay
//! s1_gain = 1.0       # E[|h_{1,r}|²]
//! s2_gain = 1.0       # E[|h_{2,r}|²]
//! dest_gain = 1.0     # E[|f_r|²]
//!
//! [run]               # every key optional
//! n_used = 2                      # relays used simultaneously (default: all)
//! relay_power = 1.0               # per-relay transmit power
//! trials = 100000                 # Monte Carlo trials per SNR point
//! master_seed = 1
//! analytic_trials_per_event = 20000
//! selection_ref_snr_db = 20.0     # SNR at which relay weights are evaluated
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, positive, Error, Result};
use crate::fading::LinkStats;
use crate::preselect;
use crate::protocol::RateConfig;

pub const CONFIG_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Rates {
    pub r1: f64,
    pub r2: f64,
}

/// Link statistics of one candidate relay.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RelayLinks {
    #[serde(rename = "s1_gain")]
    pub s1: LinkStats,
    #[serde(rename = "s2_gain")]
    pub s2: LinkStats,
    #[serde(rename = "dest_gain")]
    pub dest: LinkStats,
}

impl RelayLinks {
    pub fn new(s1_gain: f64, s2_gain: f64, dest_gain: f64) -> Result<Self> {
        Ok(Self {
            s1: LinkStats::new(s1_gain)?,
            s2: LinkStats::new(s2_gain)?,
            dest: LinkStats::new(dest_gain)?,
        })
    }

    pub fn unit() -> Self {
        Self::new(1.0, 1.0, 1.0).expect("unit gains are valid")
    }

    /// `λ_r = 1 / E[|h_{2,r}|²]`.
    pub fn lambda(&self) -> f64 {
        self.s2.rate_param()
    }

    /// `μ_r = 1 / E[|h_{1,r}|²]`.
    pub fn mu(&self) -> f64 {
        self.s1.rate_param()
    }

    /// `ν_r = 1 / E[|f_r|²]`.
    pub fn nu(&self) -> f64 {
        self.dest.rate_param()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSettings {
    pub n_used: Option<usize>,
    pub relay_power: f64,
    pub trials: u64,
    pub master_seed: u64,
    pub analytic_trials_per_event: u64,
    pub selection_ref_snr_db: f64,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            n_used: None,
            relay_power: 1.0,
            trials: 100_000,
            master_seed: 1,
            analytic_trials_per_event: 20_000,
            selection_ref_snr_db: 20.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default = "default_version")]
    pub version: u32,
    pub rates: Rates,
    #[serde(rename = "relay")]
    pub relays: Vec<RelayLinks>,
    #[serde(default)]
    pub run: RunSettings,
}

fn default_version() -> u32 {
    CONFIG_VERSION
}

impl ScenarioConfig {
    pub fn new(r1: f64, r2: f64, relays: Vec<RelayLinks>) -> Self {
        Self {
            version: CONFIG_VERSION,
            rates: Rates { r1, r2 },
            relays,
            run: RunSettings::default(),
        }
    }

    /// `n` relays with unit mean gain on every link, all of them used.
    pub fn symmetric(n: usize, r1: f64, r2: f64) -> Self {
        Self::new(r1, r2, vec![RelayLinks::unit(); n])
    }

    pub fn with_trials(mut self, trials: u64) -> Self {
        self.run.trials = trials;
        self
    }

    pub fn with_seed(mut self, master_seed: u64) -> Self {
        self.run.master_seed = master_seed;
        self
    }

    pub fn with_n_used(mut self, n_used: usize) -> Self {
        self.run.n_used = Some(n_used);
        self
    }

    pub fn n_relays(&self) -> usize {
        self.relays.len()
    }

    /// `N_RU`: relays used simultaneously.
    pub fn n_used(&self) -> usize {
        self.run.n_used.unwrap_or(self.relays.len())
    }

    /// Thresholds for the used-relay count; `N_F = N_RU + 1`.
    pub fn rates(&self) -> Result<RateConfig> {
        RateConfig::new(self.rates.r1, self.rates.r2, self.n_used() as u32 + 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.version != CONFIG_VERSION {
            return Err(invalid(
                "version",
                format!(
                    "unsupported config version {} (expected {CONFIG_VERSION})",
                    self.version
                ),
            ));
        }
        if self.relays.is_empty() {
            return Err(Error::NoRelays);
        }
        positive("rates.r1", self.rates.r1)?;
        positive("rates.r2", self.rates.r2)?;
        positive("run.relay_power", self.run.relay_power)?;
        let n_used = self.n_used();
        if n_used == 0 || n_used > self.relays.len() {
            return Err(invalid(
                "run.n_used",
                format!("must be in 1..={}, got {n_used}", self.relays.len()),
            ));
        }
        if self.run.trials == 0 {
            return Err(invalid("run.trials", "must be >= 1"));
        }
        if !self.run.selection_ref_snr_db.is_finite() {
            return Err(invalid("run.selection_ref_snr_db", "must be finite"));
        }
        Ok(())
    }

    /// Indices (ascending) of the relays that take part in the protocol.
    ///
    /// When fewer relays are used than configured, the set is chosen by
    /// static pre-selection at `run.selection_ref_snr_db`.
    pub fn active_relays(&self) -> Result<Vec<usize>> {
        self.validate()?;
        let n_used = self.n_used();
        if n_used == self.relays.len() {
            return Ok((0..n_used).collect());
        }
        let rates = self.rates()?;
        let gamma = db_to_linear(self.run.selection_ref_snr_db);
        let weights = self
            .relays
            .iter()
            .map(|l| preselect::relay_weight(l.lambda(), l.mu(), &rates, gamma))
            .collect::<Result<Vec<_>>>()?;
        let mut chosen: Vec<usize> = preselect::select(&weights, n_used)?.chosen;
        chosen.sort_unstable();
        Ok(chosen)
    }

    /// The scenario restricted to `indices`, all of them used.
    pub fn restricted_to(&self, indices: &[usize]) -> Result<Self> {
        let relays = indices
            .iter()
            .map(|&i| {
                self.relays.get(i).copied().ok_or_else(|| {
                    Error::DimensionMismatch(format!("relay index {i} out of range"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.clone();
        out.relays = relays;
        out.run.n_used = None;
        Ok(out)
    }

    /// The scenario with the roles of S1 and S2 exchanged.
    pub fn swap_sources(&self) -> Self {
        let mut out = self.clone();
        out.rates = Rates {
            r1: self.rates.r2,
            r2: self.rates.r1,
        };
        for l in &mut out.relays {
            std::mem::swap(&mut l.s1, &mut l.s2);
        }
        out
    }

    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        let cfg: Self = toml::from_str(text).map_err(|e| e.to_string())?;
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_str(&text).map_err(|message| Error::Config {
            path: path.to_path_buf(),
            message,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario config is always serializable")
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_schema() {
        let text = r#"
            version = 1
            [rates]
            r1 = 1.0
            r2 = 2.0
            [[relay]]
            s1_gain = 1.0
            s2_gain = 0.1
            dest_gain = 1.0
            [[relay]]
            s1_gain = 0.5
            s2_gain = 1.0
            dest_gain = 2.0
            [run]
            trials = 1000
            master_seed = 9
        "#;
        let cfg = ScenarioConfig::from_toml_str(text).unwrap();
        assert_eq!(cfg.n_relays(), 2);
        assert_eq!(cfg.n_used(), 2);
        assert_eq!(cfg.rates().unwrap().n_f(), 3);
        assert_eq!(cfg.relays[0].lambda(), 10.0);
        assert_eq!(cfg.run.master_seed, 9);
        let back = ScenarioConfig::from_toml_str(&cfg.to_toml()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_configs() {
        let bad_gain =
            "[rates]\nr1=1.0\nr2=1.0\n[[relay]]\ns1_gain=0.0\ns2_gain=1.0\ndest_gain=1.0\n";
        assert!(ScenarioConfig::from_toml_str(bad_gain).is_err());
        let no_relay = "[rates]\nr1=1.0\nr2=1.0\nrelay=[]\n";
        assert!(ScenarioConfig::from_toml_str(no_relay).is_err());
        let unknown = "[rates]\nr1=1.0\nr2=1.0\nr3=1.0\n";
        assert!(ScenarioConfig::from_toml_str(unknown).is_err());
        let too_many_used = ScenarioConfig::symmetric(2, 1.0, 1.0).with_n_used(3);
        assert!(too_many_used.validate().is_err());
    }

    #[test]
    fn swap_exchanges_roles() {
        let mut cfg = ScenarioConfig::symmetric(1, 1.0, 2.0);
        cfg.relays[0] = RelayLinks::new(0.5, 2.0, 1.0).unwrap();
        let s = cfg.swap_sources();
        assert_eq!(s.rates.r1, 2.0);
        assert_eq!(s.relays[0].s1.mean_gain(), 2.0);
        assert_eq!(s.swap_sources(), cfg);
    }

    #[test]
    fn active_relays_prefers_strong_first_hop() {
        let mut cfg = ScenarioConfig::symmetric(3, 1.0, 1.0).with_n_used(2);
        cfg.relays[1] = RelayLinks::new(0.01, 0.01, 1.0).unwrap();
        assert_eq!(cfg.active_relays().unwrap(), vec![0, 2]);
        let all = ScenarioConfig::symmetric(3, 1.0, 1.0);
        assert_eq!(all.active_relays().unwrap(), vec![0, 1, 2]);
    }
}
