//! Numerical second hop: `Pr{γ_D < k₁ | event vector}` by Monte Carlo over
//! the first-hop gains (conditioned on the decoding outcome at each relay)
//! and the relay–destination gains, then the `4^N`-term end-to-end sum.
//!
//! Relays decode independently, so conditioning on an event vector is
//! conditioning each relay on its own outcome. Every outcome region is
//! bounded by lines in `(|h_2|², |h_1|²)`, which makes exact conditional
//! sampling possible with truncated exponentials when both thresholds are
//! at least 1; otherwise the sampler falls back to rejection.
//!
//! The default estimator samples each `|f_r|²` from its exponential law
//! restricted to `[0, U_r)`, where `U_r` is the largest value for which
//! relay r alone stays below the threshold. The outage region lies inside
//! that box, so weighting by the box probability `Π_r Pr{|f_r|² < U_r}`
//! is unbiased and keeps the relative error bounded as the outage
//! probability falls like `γ^{-N}`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{relay_event_table, EventVector, RelayEventProbs};
use crate::destination::{assemble, gamma_d, outage_at_destination};
use crate::error::{invalid, positive, Error, Result};
use crate::estimate::{EstimatorKind, OutageEstimate, Z95};
use crate::fading::{exponential, truncated_exponential, SeedSpec, StreamFactory};
use crate::protocol::{
    coefficients, power_scale, relay_decode, DecodeEvent, RateConfig, RelayTxState, Source,
};
use crate::scenario::{RelayLinks, ScenarioConfig};

pub const MAX_ENUMERATED_RELAYS: usize = 8;
pub const MIN_SECOND_HOP_TRIALS: u64 = 1_000;
/// Event vectors less likely than this are left out of the end-to-end sum.
pub const SKIP_EVENT_BELOW: f64 = 1e-12;
/// Rejection sampling refuses outcomes rarer than this.
pub const REJECTION_FLOOR: f64 = 1e-6;

const CHUNK: u64 = 1024;
const MAX_REJECTION_ATTEMPTS: u64 = 1 << 32;

/// How first-hop gains entering the forwarding coefficients are drawn.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum FirstHopSampling {
    /// Conditioned on the relay's outcome; exact samplers where available,
    /// rejection otherwise.
    #[default]
    Exact,
    /// Conditioned on the relay's outcome by rejection only.
    Rejection,
    /// Drawn from the unconditional law, ignoring the coupling between the
    /// gains and the decoding outcome.
    Unconditional,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum Estimator {
    /// Box-restricted importance sampling of the destination gains.
    #[default]
    Importance,
    /// Plain indicator counting with a Wilson interval.
    Counting,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SecondHopOptions {
    pub first_hop: FirstHopSampling,
    pub estimator: Estimator,
    /// Event vectors with a smaller first-hop probability are left out of the
    /// end-to-end sum. Once the outage itself falls below this level the sum
    /// becomes a lower bound; 0 keeps every vector.
    #[serde(default = "default_skip")]
    pub skip_below: f64,
}

fn default_skip() -> f64 {
    SKIP_EVENT_BELOW
}

impl Default for SecondHopOptions {
    fn default() -> Self {
        Self {
            first_hop: FirstHopSampling::default(),
            estimator: Estimator::default(),
            skip_below: SKIP_EVENT_BELOW,
        }
    }
}

/// Draws `(y, x) = (|h_1|², |h_2|²)` at one relay conditioned on `event`.
pub fn sample_first_hop<R: Rng + ?Sized>(
    rng: &mut R,
    event: DecodeEvent,
    lambda: f64,
    mu: f64,
    rates: &RateConfig,
    gamma: f64,
    mode: FirstHopSampling,
) -> (f64, f64) {
    let (k1, k2) = (rates.k1(), rates.k2());
    let exact_ok = k1 >= 1.0 && k2 >= 1.0;
    match mode {
        FirstHopSampling::Unconditional => (exponential(rng, mu), exponential(rng, lambda)),
        FirstHopSampling::Exact => match event {
            DecodeEvent::OnlyS1 => only_first(rng, lambda, mu, k1, k2, gamma),
            DecodeEvent::OnlyS2 => {
                let (x, y) = only_first(rng, mu, lambda, k2, k1, gamma);
                (y, x)
            }
            DecodeEvent::Both if exact_ok => both(rng, lambda, mu, k1, k2, gamma),
            DecodeEvent::None if exact_ok => neither(rng, lambda, mu, k1, k2, gamma),
            _ => rejection(rng, event, lambda, mu, rates, gamma),
        },
        FirstHopSampling::Rejection => rejection(rng, event, lambda, mu, rates, gamma),
    }
}

fn rejection<R: Rng + ?Sized>(
    rng: &mut R,
    event: DecodeEvent,
    lambda: f64,
    mu: f64,
    rates: &RateConfig,
    gamma: f64,
) -> (f64, f64) {
    for _ in 0..MAX_REJECTION_ATTEMPTS {
        let y = exponential(rng, mu);
        let x = exponential(rng, lambda);
        if relay_decode(y, x, gamma, rates) == event {
            return (y, x);
        }
    }
    // Callers check the acceptance probability against REJECTION_FLOOR
    // before sampling, so this is unreachable in practice.
    panic!("rejection sampling for {event} did not accept in {MAX_REJECTION_ATTEMPTS} attempts");
}

/// First block decoded, second lost: `x < k₂/γ`, `y ≥ k₁x + k₁/γ`.
/// Written for S1 first; the caller swaps roles for S2.
fn only_first<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: f64,
    mu: f64,
    k1: f64,
    k2: f64,
    gamma: f64,
) -> (f64, f64) {
    let x = truncated_exponential(rng, lambda + mu * k1, k2 / gamma);
    let y = k1 * x + k1 / gamma + exponential(rng, mu);
    (y, x)
}

/// Both decoded (thresholds ≥ 1): the two SIC orders give disjoint shifted
/// exponential regions.
fn both<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: f64,
    mu: f64,
    k1: f64,
    k2: f64,
    gamma: f64,
) -> (f64, f64) {
    let c1 = lambda + mu * k1;
    let c2 = mu + lambda * k2;
    // Log-masses of the S1-first and S2-first parts.
    let lw1 = lambda.ln() - mu * k1 / gamma - c1.ln() - c1 * k2 / gamma;
    let lw2 = mu.ln() - lambda * k2 / gamma - c2.ln() - c2 * k1 / gamma;
    let p1 = 1.0 / (1.0 + (lw2 - lw1).exp());
    if rng.random::<f64>() < p1 {
        let x = k2 / gamma + exponential(rng, c1);
        let y = k1 * x + k1 / gamma + exponential(rng, mu);
        (y, x)
    } else {
        let y = k1 / gamma + exponential(rng, c2);
        let x = k2 * y + k2 / gamma + exponential(rng, lambda);
        (y, x)
    }
}

/// Mass of the wedge where the first-decoded block is lost (thresholds ≥ 1).
fn lost_wedge_mass(lambda: f64, mu: f64, k1: f64, k2: f64, gamma: f64) -> f64 {
    let a = lambda + mu * k1 / k2;
    let c = lambda + mu * k1;
    lambda * (mu * k1 * (1.0 - 1.0 / k2)) / (a * c) + lambda * -(-mu * k1 / gamma).exp_m1() / c
}

/// Point of the wedge `k₁x/k₂ ≤ y < k₁x + k₁/γ`, returned as `(y, x)`.
///
/// The marginal of `x` is proportional to `e^{−ax} − e^{−μk₁/γ}e^{−(a+b)x}`,
/// a mixture of `Exp(a)` and the hypoexponential `Exp(a) + Exp(a+b)`.
fn lost_wedge<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: f64,
    mu: f64,
    k1: f64,
    k2: f64,
    gamma: f64,
) -> (f64, f64) {
    let a = lambda + mu * k1 / k2;
    let b = mu * k1 * (1.0 - 1.0 / k2);
    let c = (-mu * k1 / gamma).exp();
    let w_plain = -(-mu * k1 / gamma).exp_m1() / a;
    let w_hypo = c * b / (a * (a + b));
    let x = if rng.random::<f64>() * (w_plain + w_hypo) < w_plain {
        exponential(rng, a)
    } else {
        exponential(rng, a) + exponential(rng, a + b)
    };
    let y = k1 * x / k2 + truncated_exponential(rng, mu, b / mu * x + k1 / gamma);
    (y, x)
}

fn neither<R: Rng + ?Sized>(
    rng: &mut R,
    lambda: f64,
    mu: f64,
    k1: f64,
    k2: f64,
    gamma: f64,
) -> (f64, f64) {
    let w1 = lost_wedge_mass(lambda, mu, k1, k2, gamma);
    let w2 = lost_wedge_mass(mu, lambda, k2, k1, gamma);
    if rng.random::<f64>() * (w1 + w2) < w1 {
        lost_wedge(rng, lambda, mu, k1, k2, gamma)
    } else {
        let (x, y) = lost_wedge(rng, mu, lambda, k2, k1, gamma);
        (y, x)
    }
}

/// Relay parameters resolved once per call.
struct RelayModel {
    lambda: f64,
    mu: f64,
    nu: f64,
}

impl From<&RelayLinks> for RelayModel {
    fn from(l: &RelayLinks) -> Self {
        Self {
            lambda: l.lambda(),
            mu: l.mu(),
            nu: l.nu(),
        }
    }
}

struct TrialContext<'a> {
    relays: &'a [RelayModel],
    events: &'a [DecodeEvent],
    rates: RateConfig,
    gamma: f64,
    relay_power: f64,
    opts: SecondHopOptions,
}

impl TrialContext<'_> {
    /// Contribution of one trial to the S1 outage estimate.
    fn trial<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        states: &mut Vec<RelayTxState>,
        f: &mut Vec<Complex64>,
    ) -> Result<f64> {
        let sigma2 = 1.0 / self.gamma;
        let threshold = self.rates.k1();
        states.clear();
        f.clear();
        let mut weight = 1.0;
        for (relay, &event) in self.relays.iter().zip(self.events) {
            let (y, x) = sample_first_hop(
                rng,
                event,
                relay.lambda,
                relay.mu,
                &self.rates,
                self.gamma,
                self.opts.first_hop,
            );
            // Only magnitudes enter γ_D, so real gains suffice.
            let a = coefficients(
                event,
                Complex64::new(y.sqrt(), 0.0),
                Complex64::new(x.sqrt(), 0.0),
            );
            let g = power_scale(a, sigma2, self.relay_power)?;
            let state = RelayTxState {
                a1: a[0],
                a2: a[1],
                a3: a[2],
                g,
            };
            let u = match self.opts.estimator {
                Estimator::Counting => exponential(rng, relay.nu),
                Estimator::Importance => {
                    let slope = g * g * a[0].norm_sqr() * self.gamma;
                    let sat = g * g * a[2].norm_sqr() * threshold;
                    let bound = if slope > sat {
                        threshold / (slope - sat) * (1.0 + 1e-9)
                    } else {
                        f64::INFINITY
                    };
                    if bound.is_finite() {
                        weight *= -(-relay.nu * bound).exp_m1();
                    }
                    truncated_exponential(rng, relay.nu, bound)
                }
            };
            states.push(state);
            f.push(Complex64::new(u.sqrt(), 0.0));
        }
        let model = assemble(states, f, sigma2)?;
        let out = outage_at_destination(
            gamma_d(&model, Source::S1),
            self.rates.r1(),
            self.rates.n_f(),
        );
        Ok(if out { weight } else { 0.0 })
    }
}

#[derive(Clone, Copy, Default)]
struct Sums {
    sum: f64,
    sum_sq: f64,
    nonzero: u64,
}

/// `Pr{log₂(1+γ_D) < (N_F/2)R₁ | events}` for S1 with the default options.
pub fn second_hop_outage_given_events(
    events: &EventVector,
    config: &ScenarioConfig,
    gamma: f64,
    trials: u64,
    seed: SeedSpec,
) -> Result<OutageEstimate> {
    second_hop_outage_with(
        events,
        config,
        gamma,
        trials,
        seed,
        SecondHopOptions::default(),
    )
}

pub fn second_hop_outage_with(
    events: &EventVector,
    config: &ScenarioConfig,
    gamma: f64,
    trials: u64,
    seed: SeedSpec,
    opts: SecondHopOptions,
) -> Result<OutageEstimate> {
    positive("gamma", gamma)?;
    if trials < MIN_SECOND_HOP_TRIALS {
        return Err(invalid(
            "trials",
            format!("need at least {MIN_SECOND_HOP_TRIALS} trials, got {trials}"),
        ));
    }
    let active = config.active_relays()?;
    if events.len() != active.len() {
        return Err(Error::DimensionMismatch(format!(
            "event vector has {} entries for {} used relays",
            events.len(),
            active.len()
        )));
    }
    let rates = config.rates()?;
    let relays: Vec<RelayModel> = active
        .iter()
        .map(|&r| RelayModel::from(&config.relays[r]))
        .collect();

    let needs_rejection = |e: DecodeEvent| match opts.first_hop {
        FirstHopSampling::Rejection => true,
        FirstHopSampling::Unconditional => false,
        FirstHopSampling::Exact => {
            matches!(e, DecodeEvent::Both | DecodeEvent::None)
                && (rates.k1() < 1.0 || rates.k2() < 1.0)
        }
    };
    for (i, (relay, &e)) in relays.iter().zip(&events.0).enumerate() {
        if needs_rejection(e) {
            let p = super::event_probs(relay.lambda, relay.mu, &rates, gamma)?.get(e);
            if p < REJECTION_FLOOR {
                return Err(Error::RareEvent {
                    relay: active[i],
                    event: e.name(),
                    probability: p,
                    floor: REJECTION_FLOOR,
                });
            }
        }
    }

    let ctx = TrialContext {
        relays: &relays,
        events: &events.0,
        rates,
        gamma,
        relay_power: config.run.relay_power,
        opts,
    };
    let factory = StreamFactory::new(SeedSpec::derive_master(seed.master_seed, seed.stream_index));
    let n_chunks = trials.div_ceil(CHUNK);
    // Fixed chunks reduced in index order keep the float sums independent
    // of the thread count.
    let chunks: Vec<Sums> = (0..n_chunks)
        .into_par_iter()
        .map(|c| -> Result<Sums> {
            let mut s = Sums::default();
            let mut states = Vec::with_capacity(relays.len());
            let mut f = Vec::with_capacity(relays.len());
            for t in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let mut rng = factory.stream(t);
                let w = ctx.trial(&mut rng, &mut states, &mut f)?;
                s.sum += w;
                s.sum_sq += w * w;
                s.nonzero += u64::from(w > 0.0);
            }
            Ok(s)
        })
        .collect::<Result<_>>()?;
    let total = chunks.iter().fold(Sums::default(), |acc, s| Sums {
        sum: acc.sum + s.sum,
        sum_sq: acc.sum_sq + s.sum_sq,
        nonzero: acc.nonzero + s.nonzero,
    });
    Ok(match opts.estimator {
        Estimator::Counting => OutageEstimate::from_counts(total.nonzero, trials),
        Estimator::Importance => {
            OutageEstimate::from_weighted(total.sum, total.sum_sq, total.nonzero, trials)
        }
    })
}

/// End-to-end outage from the enumeration of relay decoding outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EndToEndOutage {
    pub estimate: OutageEstimate,
    /// First-hop probability of the event vectors left out; the true value
    /// lies in `[p̂, p̂ + skipped_mass]` up to sampling error.
    pub skipped_mass: f64,
    pub events_evaluated: usize,
    pub events_skipped: usize,
}

/// S1 end-to-end outage with the default second-hop options.
pub fn end_to_end_outage(
    config: &ScenarioConfig,
    gamma: f64,
    trials_per_event: u64,
    seed: SeedSpec,
) -> Result<EndToEndOutage> {
    end_to_end_outage_with(
        config,
        gamma,
        trials_per_event,
        seed,
        Source::S1,
        SecondHopOptions::default(),
    )
}

/// End-to-end outage of `source`; S2 is handled by exchanging the roles of
/// the two sources.
pub fn end_to_end_outage_with(
    config: &ScenarioConfig,
    gamma: f64,
    trials_per_event: u64,
    seed: SeedSpec,
    source: Source,
    opts: SecondHopOptions,
) -> Result<EndToEndOutage> {
    positive("gamma", gamma)?;
    let swapped;
    let config = match source {
        Source::S1 => config,
        Source::S2 => {
            swapped = config.swap_sources();
            &swapped
        }
    };
    let active = config.active_relays()?;
    if active.len() > MAX_ENUMERATED_RELAYS {
        return Err(Error::TooManyRelays {
            got: active.len(),
            max: MAX_ENUMERATED_RELAYS,
        });
    }
    let used = config.restricted_to(&active)?;
    let table: Vec<RelayEventProbs> = relay_event_table(&used, gamma)?;
    let n = active.len();

    let mut p_hat = 0.0;
    let mut var = 0.0;
    let mut trials = 0;
    let mut failures = 0;
    let mut skipped_mass = 0.0;
    let mut evaluated = 0;
    let mut skipped = 0;
    for index in 0..4usize.pow(n as u32) {
        let events = EventVector::from_index(index, n);
        let p_event = events.probability(&table);
        if p_event < opts.skip_below {
            skipped_mass += p_event;
            skipped += 1;
            continue;
        }
        let est = second_hop_outage_with(
            &events,
            &used,
            gamma,
            trials_per_event,
            SeedSpec::new(seed.master_seed, index as u64),
            opts,
        )?;
        p_hat += p_event * est.p_hat;
        var += (p_event * est.ci_half_width / Z95).powi(2);
        trials += est.trials;
        failures += est.failures;
        evaluated += 1;
    }
    Ok(EndToEndOutage {
        estimate: OutageEstimate {
            p_hat: p_hat.clamp(0.0, 1.0),
            trials,
            failures,
            ci_half_width: Z95 * var.sqrt(),
            kind: EstimatorKind::Combined,
        },
        skipped_mass,
        events_evaluated: evaluated,
        events_skipped: skipped,
    })
}
