//! Full-system Monte Carlo: channel draw, relay decoding, second hop and the
//! destination outage decision, repeated over independent trials.
//!
//! Trial `t` always consumes stream `t` of the master seed, and counts are
//! integer reductions, so results do not depend on the number of worker
//! threads or on scheduling. Every SNR point reuses the same streams.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{end_to_end_outage_with, SecondHopOptions, MAX_ENUMERATED_RELAYS};
use crate::destination::{assemble, gamma_d, outage_at_destination};
use crate::error::{positive, Error, Result};
use crate::estimate::OutageEstimate;
use crate::fading::{draw_realization_with, SeedSpec, StreamFactory};
use crate::protocol::{relay_state, DecodeEvent, RelayTxState, Source};
use crate::scenario::db_to_linear;
pub use crate::scenario::ScenarioConfig;

const CHUNK: u64 = 4096;
/// Tag deriving the seed of the analytic column from the master seed.
const ANALYTIC_SEED_TAG: u64 = 0xa11a;

/// Outcome counts of one batch of full-system trials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub s1: OutageEstimate,
    pub s2: OutageEstimate,
    /// Used relays, ascending.
    pub relays: Vec<usize>,
    /// `event_counts[i][e]`: trials in which used relay `relays[i]` had the
    /// outcome with index `e` (see [`DecodeEvent::index`]).
    pub event_counts: Vec<[u64; 4]>,
}

impl RunSummary {
    pub fn estimate(&self, source: Source) -> &OutageEstimate {
        match source {
            Source::S1 => &self.s1,
            Source::S2 => &self.s2,
        }
    }

    /// Observed frequency of `event` at used relay position `i`.
    pub fn event_frequency(&self, i: usize, event: DecodeEvent) -> f64 {
        self.event_counts[i][event.index()] as f64 / self.s1.trials as f64
    }
}

#[derive(Clone, Debug, Default)]
struct Counts {
    s1: u64,
    s2: u64,
    events: Vec<[u64; 4]>,
}

impl Counts {
    fn merge(mut self, other: Counts) -> Counts {
        self.s1 += other.s1;
        self.s2 += other.s2;
        if self.events.is_empty() {
            return Counts {
                events: other.events,
                ..self
            };
        }
        for (a, b) in self.events.iter_mut().zip(&other.events) {
            for e in 0..4 {
                a[e] += b[e];
            }
        }
        self
    }
}

/// Runs `config.run.trials` trials at linear SNR `gamma` on the current
/// rayon pool.
pub fn run_trials(config: &ScenarioConfig, gamma: f64) -> Result<RunSummary> {
    positive("gamma", gamma)?;
    let active = config.active_relays()?;
    let rates = config.rates()?;
    let trials = config.run.trials;
    let power = config.run.relay_power;
    let sigma2 = 1.0 / gamma;
    let factory = StreamFactory::new(config.run.master_seed);

    let chunk = |c: u64| -> Result<Counts> {
        let mut counts = Counts {
            events: vec![[0; 4]; active.len()],
            ..Counts::default()
        };
        let mut states: Vec<RelayTxState> = Vec::with_capacity(active.len());
        let mut f: Vec<Complex64> = Vec::with_capacity(active.len());
        for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
            // Every candidate is drawn so that selection never shifts the
            // random numbers a relay sees.
            let real = draw_realization_with(config, &mut factory.stream(t))?;
            states.clear();
            f.clear();
            for (i, &r) in active.iter().enumerate() {
                let (event, state) = relay_state(real.h(0, r), real.h(1, r), gamma, &rates, power)?;
                counts.events[i][event.index()] += 1;
                states.push(state);
                f.push(real.f[r]);
            }
            let model = assemble(&states, &f, sigma2)?;
            counts.s1 += u64::from(outage_at_destination(
                gamma_d(&model, Source::S1),
                rates.r1(),
                rates.n_f(),
            ));
            counts.s2 += u64::from(outage_at_destination(
                gamma_d(&model, Source::S2),
                rates.r2(),
                rates.n_f(),
            ));
        }
        Ok(counts)
    };
    let total = (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(chunk)
        .try_reduce(Counts::default, |a, b| Ok(a.merge(b)))?;
    Ok(RunSummary {
        s1: OutageEstimate::from_counts(total.s1, trials),
        s2: OutageEstimate::from_counts(total.s2, trials),
        relays: active,
        event_counts: total.events,
    })
}

/// Simulated end-to-end outage of `source` at linear SNR `gamma`.
///
/// Check [`OutageEstimate::is_reliable`]: with fewer than 20 observed
/// outages the interval is indicative only.
pub fn estimate_outage(
    config: &ScenarioConfig,
    gamma: f64,
    source: Source,
) -> Result<OutageEstimate> {
    Ok(*run_trials(config, gamma)?.estimate(source))
}

/// Runs `f` on a dedicated pool of `workers` threads.
pub fn with_workers<T: Send>(workers: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| crate::error::invalid("workers", e.to_string()))?;
    Ok(pool.install(f))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepOptions {
    /// Add the enumeration-based S1 value where the used relay count allows.
    pub analytic: bool,
    pub second_hop: SecondHopOptions,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            analytic: true,
            second_hop: SecondHopOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub gamma_db: f64,
    pub sim_s1: OutageEstimate,
    pub sim_s2: OutageEstimate,
    pub analytic_s1: Option<OutageEstimate>,
}

/// One row per grid point, in grid order.
pub fn sweep(config: &ScenarioConfig, gammas_db: &[f64]) -> Result<Vec<SweepRow>> {
    sweep_with(config, gammas_db, SweepOptions::default())
}

pub fn sweep_with(
    config: &ScenarioConfig,
    gammas_db: &[f64],
    opts: SweepOptions,
) -> Result<Vec<SweepRow>> {
    if gammas_db.is_empty() {
        return Err(crate::error::invalid("gammas_db", "grid is empty"));
    }
    let with_analytic = opts.analytic && config.n_used() <= MAX_ENUMERATED_RELAYS;
    let analytic_seed = SeedSpec::new(
        SeedSpec::derive_master(config.run.master_seed, ANALYTIC_SEED_TAG),
        0,
    );
    gammas_db
        .iter()
        .map(|&db| {
            if !db.is_finite() {
                return Err(crate::error::invalid(
                    "gammas_db",
                    format!("non-finite grid value {db}"),
                ));
            }
            let gamma = db_to_linear(db);
            let run = run_trials(config, gamma)?;
            let analytic_s1 = if with_analytic {
                match end_to_end_outage_with(
                    config,
                    gamma,
                    config.run.analytic_trials_per_event,
                    analytic_seed,
                    Source::S1,
                    opts.second_hop,
                ) {
                    Ok(a) => Some(a.estimate),
                    Err(Error::RareEvent { .. }) => None,
                    Err(e) => return Err(e),
                }
            } else {
                None
            };
            Ok(SweepRow {
                gamma_db: db,
                sim_s1: run.s1,
                sim_s2: run.s2,
                analytic_s1,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::event_probs;

    #[test]
    fn vanishing_snr_is_always_outage() {
        let cfg = ScenarioConfig::symmetric(2, 1.0, 1.0).with_trials(20_000);
        let e = estimate_outage(&cfg, db_to_linear(-30.0), Source::S1).unwrap();
        assert!(e.p_hat > 0.999, "{}", e.p_hat);
    }

    #[test]
    fn event_frequencies_match_closed_forms() {
        let mut cfg = ScenarioConfig::symmetric(2, 1.0, 1.5).with_trials(200_000);
        cfg.relays[1] = crate::scenario::RelayLinks::new(2.0, 0.5, 1.0).unwrap();
        let gamma = db_to_linear(10.0);
        let run = run_trials(&cfg, gamma).unwrap();
        let rates = cfg.rates().unwrap();
        for (i, &r) in run.relays.iter().enumerate() {
            let l = &cfg.relays[r];
            let p = event_probs(l.lambda(), l.mu(), &rates, gamma).unwrap();
            for e in DecodeEvent::ALL {
                let q = p.get(e);
                let se = (q * (1.0 - q) / cfg.run.trials as f64).sqrt();
                let f = run.event_frequency(i, e);
                assert!(
                    (f - q).abs() <= 4.0 * se + 1e-12,
                    "relay {r} {e}: {f} vs {q}"
                );
            }
        }
    }

    #[test]
    fn worker_count_does_not_change_results() {
        let cfg = ScenarioConfig::symmetric(3, 1.0, 1.0)
            .with_trials(10_000)
            .with_seed(9);
        let one = with_workers(1, || run_trials(&cfg, 10.0)).unwrap().unwrap();
        let four = with_workers(4, || run_trials(&cfg, 10.0)).unwrap().unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn sweep_shape() {
        let cfg = ScenarioConfig::symmetric(2, 1.0, 1.0).with_trials(2_000);
        let mut cfg = cfg;
        cfg.run.analytic_trials_per_event = 1_000;
        let rows = sweep(&cfg, &[5.0]).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].analytic_s1.is_some());
        assert!(sweep(&cfg, &[]).is_err());
        let rows = sweep_with(
            &cfg,
            &[0.0, 10.0],
            SweepOptions {
                analytic: false,
                ..Default::default()
            },
        )
        .unwrap();
        assert!(rows.iter().all(|r| r.analytic_s1.is_none()));
    }
}
