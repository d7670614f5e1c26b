use sic_relay::analytic::{
    end_to_end_outage, end_to_end_outage_with, second_hop_outage_with, Estimator, EventVector,
    SecondHopOptions,
};
use sic_relay::dmt::empirical_slope;
use sic_relay::montecarlo::{estimate_outage, run_trials, with_workers};
use sic_relay::protocol::relay_decode;
use sic_relay::{
    db_to_linear, DecodeEvent, RateConfig, RelayLinks, ScenarioConfig, SeedSpec, Source,
};

#[test]
fn neither_source_decoded_frequency() {
    // λ = μ = 1, k1 = k2 = 1, γ = 10: None is x ≤ y < x + 1/γ or its mirror,
    // so Pr{None} = 1 − e^{−1/γ} ≈ 0.0952.
    let rates = RateConfig::from_thresholds(1.0, 1.0, 3).unwrap();
    let mut rng = SeedSpec::new(21, 0).rng();
    let n = 1_000_000;
    let none = (0..n)
        .filter(|_| {
            let y = -(1.0 - rand::Rng::random::<f64>(&mut rng)).ln();
            let x = -(1.0 - rand::Rng::random::<f64>(&mut rng)).ln();
            relay_decode(y, x, 10.0, &rates) == DecodeEvent::None
        })
        .count() as f64
        / n as f64;
    let exact = 1.0 - (-0.1f64).exp();
    assert!((exact - 0.0952).abs() < 5e-5, "{exact}");
    assert!(
        (none - exact).abs() < 4.0 * (exact * (1.0 - exact) / n as f64).sqrt(),
        "{none} vs {exact}"
    );
}

#[test]
fn all_both_second_hop_is_erlang() {
    // Both relays forward x1 + x2 at g² = 1/2, so γ_D = (γ/2)(|f1|² + |f2|²).
    let cfg = ScenarioConfig::symmetric(2, 1.0, 1.0);
    let gamma = 10.0;
    let k1 = cfg.rates().unwrap().k1();
    let x = 2.0 * k1 / gamma;
    let exact = 1.0 - (-x).exp() * (1.0 + x);
    let events = EventVector(vec![DecodeEvent::Both, DecodeEvent::Both]);
    for estimator in [Estimator::Counting, Estimator::Importance] {
        let opts = SecondHopOptions {
            estimator,
            ..SecondHopOptions::default()
        };
        let est = second_hop_outage_with(&events, &cfg, gamma, 200_000, SeedSpec::new(22, 0), opts)
            .unwrap();
        let se = est.ci_half_width / 1.96;
        assert!(
            (est.p_hat - exact).abs() <= 3.0 * se,
            "{estimator:?}: {} vs {exact}",
            est.p_hat
        );
    }
}

#[test]
fn vanishing_snr_gives_certain_outage() {
    let cfg = ScenarioConfig::symmetric(2, 1.0, 1.0).with_trials(10_000);
    assert!(estimate_outage(&cfg, 1e-6, Source::S1).unwrap().p_hat > 0.999);
    let a = end_to_end_outage(&cfg, 1e-6, 1_000, SeedSpec::new(23, 0)).unwrap();
    assert!(a.estimate.p_hat + a.skipped_mass > 0.999, "{a:?}");
}

#[test]
fn interval_shrinks_with_square_root_of_trials() {
    let gamma = db_to_linear(5.0);
    let base = ScenarioConfig::symmetric(2, 1.0, 1.0).with_seed(24);
    let hw = |trials| {
        estimate_outage(&base.clone().with_trials(trials), gamma, Source::S1)
            .unwrap()
            .ci_half_width
    };
    let (a, b, c) = (hw(50_000), hw(100_000), hw(200_000));
    assert!((a / b - 2f64.sqrt()).abs() < 0.1, "{a} {b}");
    assert!((a / c - 2.0).abs() < 0.15, "{a} {c}");
}

#[test]
fn results_do_not_depend_on_worker_count() {
    let cfg = ScenarioConfig::symmetric(3, 1.0, 2.0)
        .with_trials(30_000)
        .with_seed(25);
    let runs: Vec<_> = [1, 4, 16]
        .into_iter()
        .map(|w| {
            with_workers(w, || run_trials(&cfg, db_to_linear(10.0)))
                .unwrap()
                .unwrap()
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    let enumerated: Vec<_> = [1, 16]
        .into_iter()
        .map(|w| {
            with_workers(w, || {
                end_to_end_outage(&cfg, 10.0, 2_000, SeedSpec::new(25, 0))
            })
            .unwrap()
            .unwrap()
        })
        .collect();
    assert_eq!(enumerated[0], enumerated[1]);
}

#[test]
fn symmetric_sources_have_matching_outage() {
    let cfg = ScenarioConfig::symmetric(2, 1.0, 1.0)
        .with_trials(200_000)
        .with_seed(26);
    let run = run_trials(&cfg, db_to_linear(10.0)).unwrap();
    assert!(run.s1.overlaps(&run.s2), "{:?} {:?}", run.s1, run.s2);

    let mut cfg = cfg;
    cfg.relays[0] = RelayLinks::new(2.0, 0.5, 1.0).unwrap();
    let gamma = db_to_linear(15.0);
    let s2 = end_to_end_outage_with(
        &cfg,
        gamma,
        2_000,
        SeedSpec::new(26, 0),
        Source::S2,
        SecondHopOptions::default(),
    )
    .unwrap();
    let swapped =
        end_to_end_outage(&cfg.swap_sources(), gamma, 2_000, SeedSpec::new(26, 0)).unwrap();
    assert_eq!(s2, swapped);
}

#[test]
fn weak_first_hop_delays_full_diversity() {
    let opts = SecondHopOptions {
        skip_below: 0.0,
        ..SecondHopOptions::default()
    };
    let slope = |first_hop_gain: f64| {
        let relay = RelayLinks::new(first_hop_gain, first_hop_gain, 1.0).unwrap();
        let cfg = ScenarioConfig::new(1.0, 1.0, vec![relay; 2]);
        let curve: Vec<(f64, f64)> = (0..=8)
            .map(|i| {
                let db = 30.0 + 2.5 * i as f64;
                let e = end_to_end_outage_with(
                    &cfg,
                    db_to_linear(db),
                    3_000,
                    SeedSpec::new(27, 0),
                    Source::S1,
                    opts,
                );
                (db, e.unwrap().estimate.p_hat)
            })
            .collect();
        empirical_slope(&curve, (30.0, 50.0)).unwrap()
    };
    let (strong, weak) = (slope(1.0), slope(0.1));
    assert!((strong - 2.0).abs() < 0.15, "{strong}");
    assert!(weak < strong, "{weak} vs {strong}");
}
