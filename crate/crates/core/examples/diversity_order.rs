//! High-SNR outage slope of S1 for 2, 3 and 4 relays at fixed rates,
//! against the zero-multiplexing diversity order.

use std::time::Instant;

use sic_relay::analytic::{end_to_end_outage_with, SecondHopOptions};
use sic_relay::dmt::{diversity, dmt_curve, empirical_slope};
use sic_relay::{db_to_linear, Result, ScenarioConfig, SeedSpec, Source};

fn main() -> Result<()> {
    let skip_below = std::env::args()
        .nth(1)
        .map_or(0.0, |s| s.parse().expect("skip threshold"));
    let opts = SecondHopOptions {
        skip_below,
        ..SecondHopOptions::default()
    };
    for n in 2..=4u32 {
        let start = Instant::now();
        let config = ScenarioConfig::symmetric(n as usize, 1.0, 1.0);
        let mut curve = Vec::new();
        for i in 0..=8 {
            let db = 35.0 + 2.5 * i as f64;
            let p = end_to_end_outage_with(
                &config,
                db_to_linear(db),
                5_000,
                SeedSpec::new(11, 0),
                Source::S1,
                opts,
            )?;
            curve.push((db, p.estimate.p_hat));
            println!(
                "  N={n} {db:>5} dB  {:.4e} ± {:.1e}",
                p.estimate.p_hat, p.estimate.ci_half_width
            );
        }
        let slope = empirical_slope(&curve, (35.0, 55.0))?;
        println!(
            "N={n}: fitted slope {slope:.3}, d(0) = {}, {:.1?}",
            diversity(0.0, n, n + 1)?,
            start.elapsed()
        );
    }
    for p in dmt_curve(2, 3, 4)? {
        println!("r1 = {:.3}  d = {:.3}", p.r1, p.d);
    }
    Ok(())
}
