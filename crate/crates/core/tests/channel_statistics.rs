use approx::assert_relative_eq;
use sic_relay::fading::{draw_realization, LinkStats};
use sic_relay::{RelayLinks, ScenarioConfig, SeedSpec};

const DRAWS: u64 = 100_000;
/// Kolmogorov–Smirnov critical value at the 1% level, times √n.
const KS_CRITICAL: f64 = 1.628;

fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = cdf(x);
            (c - i as f64 / n).abs().max(((i + 1) as f64 / n - c).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn gain_powers_are_exponential() {
    for (i, mean) in [0.1, 1.0, 3.5].into_iter().enumerate() {
        let stats = LinkStats::new(mean).unwrap();
        let mut rng = SeedSpec::new(11, i as u64).rng();
        let samples: Vec<f64> = (0..DRAWS).map(|_| stats.sample_power(&mut rng)).collect();
        let avg = samples.iter().sum::<f64>() / DRAWS as f64;
        assert_relative_eq!(avg, mean, max_relative = 0.01);
        let d = ks_statistic(samples, |x| 1.0 - (-x / mean).exp());
        assert!(
            d * (DRAWS as f64).sqrt() < KS_CRITICAL,
            "mean {mean}: KS {d}"
        );
    }
}

#[test]
fn complex_gains_have_uniform_phase_and_zero_mean() {
    let stats = LinkStats::new(2.0).unwrap();
    let mut rng = SeedSpec::new(12, 0).rng();
    let samples: Vec<_> = (0..DRAWS).map(|_| stats.sample(&mut rng)).collect();
    let mean = samples.iter().sum::<num_complex::Complex64>() / DRAWS as f64;
    assert!(mean.norm() < 0.02, "{mean}");
    let phases: Vec<f64> = samples.iter().map(|z| z.arg()).collect();
    let pi = std::f64::consts::PI;
    let d = ks_statistic(phases, |p| (p + pi) / (2.0 * pi));
    assert!(d * (DRAWS as f64).sqrt() < KS_CRITICAL, "KS {d}");
}

#[test]
fn links_of_one_realization_are_uncorrelated() {
    let cfg = ScenarioConfig::new(
        1.0,
        1.0,
        vec![RelayLinks::new(1.0, 0.5, 2.0).unwrap(), RelayLinks::unit()],
    );
    let draws: Vec<[f64; 6]> = (0..DRAWS)
        .map(|t| {
            let r = draw_realization(&cfg, SeedSpec::new(13, t)).unwrap();
            [
                r.h(0, 0).norm_sqr(),
                r.h(1, 0).norm_sqr(),
                r.f[0].norm_sqr(),
                r.h(0, 1).norm_sqr(),
                r.h(1, 1).norm_sqr(),
                r.f[1].norm_sqr(),
            ]
        })
        .collect();
    let n = DRAWS as f64;
    let mean: Vec<f64> = (0..6)
        .map(|j| draws.iter().map(|d| d[j]).sum::<f64>() / n)
        .collect();
    for (j, expected) in [1.0, 0.5, 2.0, 1.0, 1.0, 1.0].into_iter().enumerate() {
        assert_relative_eq!(mean[j], expected, max_relative = 0.02);
    }
    for a in 0..6 {
        for b in a + 1..6 {
            let cov = draws
                .iter()
                .map(|d| (d[a] - mean[a]) * (d[b] - mean[b]))
                .sum::<f64>()
                / n;
            let corr = cov / (mean[a] * mean[b]);
            assert!(corr.abs() < 0.01, "links {a},{b}: {corr}");
        }
    }
}

#[test]
fn draws_are_reproducible_per_stream() {
    let cfg = ScenarioConfig::symmetric(3, 1.0, 1.0);
    let a = draw_realization(&cfg, SeedSpec::new(5, 77)).unwrap();
    let b = draw_realization(&cfg, SeedSpec::new(5, 77)).unwrap();
    let c = draw_realization(&cfg, SeedSpec::new(5, 78)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
