//! Conditional second-hop outage under each first-hop sampling mode and
//! estimator, for a fixed event vector.

use sic_relay::analytic::{
    second_hop_outage_with, Estimator, EventVector, FirstHopSampling, SecondHopOptions,
};
use sic_relay::{db_to_linear, DecodeEvent, Result, ScenarioConfig, SeedSpec};

fn main() -> Result<()> {
    let config = ScenarioConfig::symmetric(2, 1.0, 1.0);
    let events = EventVector(vec![DecodeEvent::OnlyS1, DecodeEvent::None]);
    println!("events {:?}", events.0);
    for db in [5.0, 15.0, 25.0] {
        let gamma = db_to_linear(db);
        println!("\n{db} dB");
        for first_hop in [
            FirstHopSampling::Exact,
            FirstHopSampling::Rejection,
            FirstHopSampling::Unconditional,
        ] {
            for estimator in [Estimator::Importance, Estimator::Counting] {
                let opts = SecondHopOptions {
                    first_hop,
                    estimator,
                    ..SecondHopOptions::default()
                };
                let label = format!(
                    "{:<13} {:<10}",
                    format!("{first_hop:?}"),
                    format!("{estimator:?}")
                );
                match second_hop_outage_with(
                    &events,
                    &config,
                    gamma,
                    100_000,
                    SeedSpec::new(4, 0),
                    opts,
                ) {
                    Ok(e) => println!("{label} {:.4e} ± {:.1e}", e.p_hat, e.ci_half_width),
                    Err(e) => println!("{label} {e}"),
                }
            }
        }
    }
    Ok(())
}
