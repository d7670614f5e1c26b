//! Destination MMSE receiver on one channel draw: per-slot forwarding
//! states, post-MMSE SINR against the closed form and the empirical
//! estimation error.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use sic_relay::destination::{assemble, gamma_d, mmse_estimate, post_mmse_sinr};
use sic_relay::fading::draw_realization;
use sic_relay::protocol::relay_state;
use sic_relay::{db_to_linear, Result, ScenarioConfig, SeedSpec, Source};

fn cn<R: Rng>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    Complex64::new(
        rng.sample::<f64, _>(StandardNormal) * s,
        rng.sample::<f64, _>(StandardNormal) * s,
    )
}

fn main() -> Result<()> {
    let config = ScenarioConfig::symmetric(3, 1.0, 1.0);
    let gamma = db_to_linear(8.0);
    let rates = config.rates()?;
    let real = draw_realization(&config, SeedSpec::new(3, 0))?;
    let mut states = Vec::new();
    for r in 0..real.n_relays() {
        let (event, state) = relay_state(real.h(0, r), real.h(1, r), gamma, &rates, 1.0)?;
        println!("relay {r}: {:<8} g = {:.4}", event.name(), state.g);
        states.push(state);
    }
    let model = assemble(&states, &real.f, 1.0 / gamma)?;
    for source in [Source::S1, Source::S2] {
        let closed = gamma_d(&model, source);
        let mmse = post_mmse_sinr(&model, source)?;
        // gamma_D drops the other source's interference; the two agree only
        // when that source is absent from every slot.
        println!("{source:?}: gamma_D {closed:.6}  post-MMSE SINR {mmse:.6}");
    }

    let mut rng = SeedSpec::new(3, 1).rng();
    let draws = 100_000;
    let mut err = [0.0; 2];
    for _ in 0..draws {
        let x = [cn(&mut rng, 1.0), cn(&mut rng, 1.0)];
        let y: Vec<Complex64> = (0..model.n_slots())
            .map(|i| model.h[i][0] * x[0] + model.h[i][1] * x[1] + cn(&mut rng, model.noise_var[i]))
            .collect();
        let est = mmse_estimate(&model, &y)?;
        for s in 0..2 {
            err[s] += (est[s] - x[s]).norm_sqr() / draws as f64;
        }
    }
    for (s, source) in [Source::S1, Source::S2].into_iter().enumerate() {
        let sinr = post_mmse_sinr(&model, source)?;
        println!(
            "{source:?}: MSE {:.5}  1/(1+SINR) {:.5}",
            err[s],
            1.0 / (1.0 + sinr)
        );
    }
    Ok(())
}
