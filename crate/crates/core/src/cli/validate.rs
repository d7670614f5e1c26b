//! Self-checks: closed forms against sampling oracles, sum-to-one, limiting
//! cases, high-SNR constants, the MMSE identities and simulator/calculator
//! agreement.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{end_to_end_outage, event_probs, high_snr_constants, RelayEventProbs};
use crate::destination::{gamma_d, mmse_estimate, post_mmse_sinr, SecondHopModel};
use crate::error::Result;
use crate::fading::{exponential, SeedSpec, StreamFactory};
use crate::montecarlo::estimate_outage;
use crate::protocol::{relay_decode, DecodeEvent, RateConfig, Source};
use crate::scenario::{db_to_linear, ScenarioConfig};

/// Signature of the per-relay closed forms under test.
pub type EventProbsFn = fn(f64, f64, &RateConfig, f64) -> Result<RelayEventProbs>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Grid {
    Small,
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub check_name: String,
    pub status: Status,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckResult {
    fn new(name: &str, measured: f64, tolerance: f64, detail: String) -> Self {
        Self {
            check_name: name.into(),
            status: if measured <= tolerance {
                Status::Pass
            } else {
                Status::Fail
            },
            measured,
            tolerance,
            detail,
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ValidationSuite {
    pub grid: Grid,
    /// Sampling trials per oracle point; `None` picks a per-grid default.
    pub trials: Option<u64>,
    pub seed: u64,
    pub event_probs: EventProbsFn,
}

impl ValidationSuite {
    pub fn new(grid: Grid) -> Self {
        Self {
            grid,
            trials: None,
            seed: 1,
            event_probs,
        }
    }

    fn oracle_trials(&self) -> u64 {
        self.trials.unwrap_or(match self.grid {
            Grid::Small => 200_000,
            Grid::Full => 10_000_000,
        })
    }

    fn simulation_trials(&self) -> u64 {
        self.trials.unwrap_or(match self.grid {
            Grid::Small => 100_000,
            Grid::Full => 1_000_000,
        })
    }

    pub fn run(&self) -> Result<Vec<CheckResult>> {
        Ok(vec![
            self.sum_to_one()?,
            self.closed_form_vs_oracle()?,
            self.limiting_cases()?,
            self.high_snr_limits()?,
            mmse_sinr_identity(self.seed, 1000),
            mmse_error_variance(self.seed, 100_000)?,
            self.simulation_vs_analytic()?,
        ])
    }

    pub fn sum_to_one(&self) -> Result<CheckResult> {
        let n = match self.grid {
            Grid::Small => 1_000,
            Grid::Full => 10_000,
        };
        let mut rng = SeedSpec::new(self.seed, 1).rng();
        let mut worst: f64 = 0.0;
        let mut range: f64 = 0.0;
        for _ in 0..n {
            let (l, m, k1, k2, g) = random_tuple(&mut rng);
            let rates = RateConfig::from_thresholds(k1, k2, 3)?;
            let p = (self.event_probs)(l, m, &rates, g)?;
            worst = worst.max((p.sum() - 1.0).abs());
            for v in p.as_array() {
                range = range.max((-v).max(v - 1.0));
            }
        }
        Ok(CheckResult::new(
            "sum_to_one",
            worst.max(range),
            1e-12,
            format!("{n} random tuples; worst |Σp − 1| = {worst:.3e}, worst excursion outside [0,1] = {range:.3e}"),
        ))
    }

    /// Closed forms against event frequencies of exponential draws run
    /// through the relay decoder, 3 standard errors per event.
    pub fn closed_form_vs_oracle(&self) -> Result<CheckResult> {
        let (gammas_db, lambdas, rate_pairs): (&[f64], &[f64], &[(f64, f64)]) = match self.grid {
            Grid::Small => (
                &[0.0, 20.0, 40.0],
                &[0.1, 1.0, 10.0],
                &[(1.0, 1.0), (2.0, 2.0)],
            ),
            Grid::Full => (
                &[0.0, 10.0, 20.0, 30.0, 40.0],
                &[0.1, 0.5, 1.0, 2.0, 10.0],
                &[(1.0, 1.0), (1.0, 2.0), (2.0, 2.0)],
            ),
        };
        let trials = self.oracle_trials();
        let mut worst_z: f64 = 0.0;
        let mut detail = String::new();
        let mut point = 0;
        for &db in gammas_db {
            for &lambda in lambdas {
                for &(r1, r2) in rate_pairs {
                    let rates = RateConfig::new(r1, r2, 3)?;
                    let gamma = db_to_linear(db);
                    let p = (self.event_probs)(lambda, 1.0, &rates, gamma)?;
                    let seed = SeedSpec::derive_master(self.seed, 100 + point);
                    let counts = decode_frequencies(lambda, 1.0, &rates, gamma, trials, seed);
                    point += 1;
                    for e in DecodeEvent::ALL {
                        let q = p.get(e);
                        let f = counts[e.index()] as f64 / trials as f64;
                        let se = (q * (1.0 - q) / trials as f64).sqrt();
                        let z = if f == q { 0.0 } else { (f - q).abs() / se };
                        if z > worst_z {
                            worst_z = z;
                            detail = format!(
                                "{point} points x {trials} draws; worst at γ={db} dB λ={lambda} R=({r1},{r2}) {e}: closed form {q:.6e}, frequency {f:.6e}, 3σ = {:.3e}",
                                3.0 * se
                            );
                        }
                    }
                }
            }
        }
        if detail.is_empty() {
            detail = format!("{point} points x {trials} draws; exact agreement");
        }
        Ok(CheckResult::new(
            "closed_form_vs_oracle",
            worst_z,
            3.0,
            detail,
        ))
    }

    pub fn limiting_cases(&self) -> Result<CheckResult> {
        let rates = RateConfig::new(1.0, 1.0, 3)?;
        let (k1, k2) = (rates.k1(), rates.k2());
        let gamma = 10.0;
        let big = 1e8;
        let p = (self.event_probs)(big, 1.0, &rates, gamma)?;
        let p_limit = (self.event_probs)(1.0, 1.0, &rates, 1e9)?;
        let deviations = [
            (p.p_both_fail - -(-k1 / gamma).exp_m1()).abs(),
            p.p_s1fail_s2ok,
            (p.p_s1ok_s2fail - (-k1 / gamma).exp() * -(-big * k2 / gamma).exp_m1()).abs(),
            p_limit.p_s1ok_s2fail,
            p_limit.p_s1fail_s2ok,
        ];
        let worst = deviations.iter().copied().fold(0.0, f64::max);
        Ok(CheckResult::new(
            "limiting_cases",
            worst,
            1e-6,
            format!("λ=1e8 limits and γ=1e9 intermediate events; deviations {deviations:?}"),
        ))
    }

    pub fn high_snr_limits(&self) -> Result<CheckResult> {
        let mut rng = SeedSpec::new(self.seed, 2).rng();
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let (l, m, k1, k2) = (
                log_uniform(&mut rng, 0.1, 10.0),
                log_uniform(&mut rng, 0.1, 10.0),
                log_uniform(&mut rng, 0.1, 10.0),
                log_uniform(&mut rng, 0.1, 10.0),
            );
            let rates = RateConfig::from_thresholds(k1, k2, 3)?;
            let c = high_snr_constants(l, m, &rates)?;
            let p = (self.event_probs)(l, m, &rates, 1e9)?;
            let dev = [
                (p.p_both_fail - c.c).abs(),
                p.p_s1fail_s2ok.abs(),
                p.p_s1ok_s2fail.abs(),
                (p.p_both_ok - c.c_prime).abs(),
            ];
            worst = dev.iter().copied().fold(worst, f64::max);
        }
        Ok(CheckResult::new(
            "high_snr_constants",
            worst,
            1e-6,
            "100 random tuples at γ = 1e9 against (C, 0, 0, C')".into(),
        ))
    }

    /// Full-system simulation against enumeration, 2 relays, unit gains,
    /// `R₁ = R₂ = 1`; measured is the largest gap in units of the summed
    /// half-widths (intervals overlap iff it is at most 1).
    pub fn simulation_vs_analytic(&self) -> Result<CheckResult> {
        let grid: &[f64] = match self.grid {
            Grid::Small => &[0.0, 10.0, 20.0],
            Grid::Full => &[0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0],
        };
        let trials = self.simulation_trials();
        let cfg = ScenarioConfig::symmetric(2, 1.0, 1.0)
            .with_trials(trials)
            .with_seed(self.seed);
        let mut worst: f64 = 0.0;
        let mut detail = format!("{} points, {trials} trials each", grid.len());
        for &db in grid {
            let gamma = db_to_linear(db);
            let sim = estimate_outage(&cfg, gamma, Source::S1)?;
            let ana = end_to_end_outage(
                &cfg,
                gamma,
                20_000,
                SeedSpec::new(SeedSpec::derive_master(self.seed, 7), 0),
            )?
            .estimate;
            let (s_lo, s_hi) = sim.interval();
            let (a_lo, a_hi) = ana.interval();
            let gap = (s_lo - a_hi).max(a_lo - s_hi).max(0.0);
            let width = (s_hi - s_lo) + (a_hi - a_lo);
            let ratio = (sim.p_hat - ana.p_hat).abs() / (0.5 * width);
            let measured = if gap > 0.0 {
                1.0 + gap / (0.5 * width)
            } else {
                ratio.min(1.0)
            };
            if measured > worst {
                worst = measured;
                detail = format!(
                    "{} points, {trials} trials each; worst at {db} dB: simulated {:.4e} ± {:.2e}, enumerated {:.4e} ± {:.2e}",
                    grid.len(),
                    sim.p_hat,
                    sim.ci_half_width,
                    ana.p_hat,
                    ana.ci_half_width
                );
            }
        }
        Ok(CheckResult::new(
            "simulation_vs_analytic",
            worst,
            1.0,
            detail,
        ))
    }
}

fn log_uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (lo.ln() + rng.random::<f64>() * (hi / lo).ln()).exp()
}

fn random_tuple<R: Rng + ?Sized>(rng: &mut R) -> (f64, f64, f64, f64, f64) {
    (
        log_uniform(rng, 1e-2, 1e2),
        log_uniform(rng, 1e-2, 1e2),
        log_uniform(rng, 1e-2, 1e2),
        log_uniform(rng, 1e-2, 1e2),
        log_uniform(rng, 1e-2, 1e6),
    )
}

/// Outcome counts, indexed by [`DecodeEvent::index`], of `trials` draws of
/// `(Exp(μ), Exp(λ))` through [`relay_decode`].
pub fn decode_frequencies(
    lambda: f64,
    mu: f64,
    rates: &RateConfig,
    gamma: f64,
    trials: u64,
    master: u64,
) -> [u64; 4] {
    const CHUNK: u64 = 1 << 16;
    let factory = StreamFactory::new(master);
    (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = factory.stream(c);
            let mut counts = [0u64; 4];
            for _ in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                let y = exponential(&mut rng, mu);
                let x = exponential(&mut rng, lambda);
                counts[relay_decode(y, x, gamma, rates).index()] += 1;
            }
            counts
        })
        .reduce(
            || [0; 4],
            |a, b| [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]],
        )
}

fn cn<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    Complex64::new(
        rng.sample::<f64, _>(StandardNormal) * s,
        rng.sample::<f64, _>(StandardNormal) * s,
    )
}

fn single_column_model<R: Rng + ?Sized>(rng: &mut R, slots: usize) -> SecondHopModel {
    let zero = Complex64::new(0.0, 0.0);
    SecondHopModel {
        h: (0..slots)
            .map(|_| {
                let var = log_uniform(rng, 0.01, 100.0);
                [cn(rng, var), zero]
            })
            .collect(),
        noise_var: (0..slots).map(|_| log_uniform(rng, 0.01, 10.0)).collect(),
    }
}

/// Post-MMSE SINR of S1 equals `γ_D` when the S2 column is zero.
pub fn mmse_sinr_identity(seed: u64, models: usize) -> CheckResult {
    let mut rng = SeedSpec::new(seed, 3).rng();
    let mut worst: f64 = 0.0;
    for _ in 0..models {
        let slots = rng.random_range(1..=6);
        let model = single_column_model(&mut rng, slots);
        let gd = gamma_d(&model, Source::S1);
        let sinr = post_mmse_sinr(&model, Source::S1).unwrap_or(f64::NAN);
        let rel = (sinr - gd).abs() / gd;
        worst = if rel.is_nan() {
            f64::INFINITY
        } else {
            worst.max(rel)
        };
    }
    CheckResult::new(
        "mmse_sinr_identity",
        worst,
        1e-9,
        format!("{models} random single-column models; worst relative error {worst:.3e}"),
    )
}

/// Empirical MSE of the MMSE estimate of S1 against `1/(1+γ_D)`.
pub fn mmse_error_variance(seed: u64, draws: usize) -> Result<CheckResult> {
    let mut rng = SeedSpec::new(seed, 4).rng();
    let zero = Complex64::new(0.0, 0.0);
    let model = SecondHopModel {
        h: vec![
            [Complex64::new(0.8, -0.3), zero],
            [Complex64::new(-0.2, 0.5), zero],
            [Complex64::new(0.4, 0.9), zero],
        ],
        noise_var: vec![0.5, 0.2, 1.5],
    };
    let gd = gamma_d(&model, Source::S1);
    let mut sum = 0.0;
    let mut y = vec![zero; model.n_slots()];
    for _ in 0..draws {
        let x1 = cn(&mut rng, 1.0);
        for (r, yr) in y.iter_mut().enumerate() {
            *yr = model.h[r][0] * x1 + cn(&mut rng, model.noise_var[r]);
        }
        sum += (mmse_estimate(&model, &y)?[0] - x1).norm_sqr();
    }
    let mse = sum / draws as f64;
    let expected = 1.0 / (1.0 + gd);
    let rel = (mse - expected).abs() / expected;
    Ok(CheckResult::new(
        "mmse_error_variance",
        rel,
        0.02,
        format!("{draws} draws; MSE {mse:.5} vs 1/(1+γ_D) = {expected:.5}"),
    ))
}
