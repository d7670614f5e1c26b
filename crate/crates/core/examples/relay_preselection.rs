//! Pre-selection of 2 relays out of N on random path-loss topologies: the
//! mean outage of the chosen pair falls with N and levels off.

use sic_relay::analytic::end_to_end_outage;
use sic_relay::preselect::{random_topology, scenario_weights, select};
use sic_relay::{db_to_linear, Result, SeedSpec};

const N_USED: usize = 2;
const TOPOLOGIES: u64 = 10;

fn main() -> Result<()> {
    let snr_db = 20.0;
    let gamma = db_to_linear(snr_db);
    println!("n_relays  mean_pout_chosen  mean_pout_lowest_weight");
    for n in [2usize, 3, 4, 5, 6, 8, 10, 12, 15, 20] {
        let (mut best, mut worst) = (0.0, 0.0);
        for seed in 0..TOPOLOGIES {
            // Relays are drawn in sequence, so smaller networks are prefixes
            // of larger ones for the same seed.
            let topo = random_topology(n, SeedSpec::new(seed, 0))?;
            let cfg = topo.scenario(2.0, 2.0, N_USED)?;
            let weights = scenario_weights(&cfg, gamma)?;
            let chosen = select(&weights, N_USED)?.chosen;
            let lowest = select(&weights.iter().map(|w| -w).collect::<Vec<_>>(), N_USED)?.chosen;
            let eval = |idx: &[usize]| -> Result<f64> {
                let sub = cfg.restricted_to(idx)?;
                Ok(
                    end_to_end_outage(&sub, gamma, 5_000, SeedSpec::new(seed, 1))?
                        .estimate
                        .p_hat,
                )
            };
            best += eval(&chosen)? / TOPOLOGIES as f64;
            worst += eval(&lowest)? / TOPOLOGIES as f64;
        }
        println!("{n:>8}  {best:.4e}        {worst:.4e}");
    }
    Ok(())
}
