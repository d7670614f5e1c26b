//! Relay decoding outcome probabilities over SNR, their high-SNR limits and
//! a decoder frequency check at one point.

use sic_relay::analytic::{event_probs, high_snr_constants};
use sic_relay::cli::validate::decode_frequencies;
use sic_relay::{db_to_linear, DecodeEvent, RateConfig, Result};

fn main() -> Result<()> {
    let (lambda, mu) = (0.5, 1.0);
    let rates = RateConfig::new(1.0, 2.0, 3)?;
    println!("k1 = {:.4}, k2 = {:.4}", rates.k1(), rates.k2());
    println!("gamma_db  both_fail    s1fail_s2ok  s1ok_s2fail  both_ok");
    for db in (0..=50).step_by(10) {
        let p = event_probs(lambda, mu, &rates, db_to_linear(db as f64))?;
        println!(
            "{db:>8}  {:.4e}  {:.4e}  {:.4e}  {:.4e}",
            p.p_both_fail, p.p_s1fail_s2ok, p.p_s1ok_s2fail, p.p_both_ok
        );
    }
    let c = high_snr_constants(lambda, mu, &rates)?;
    println!("limit     C = {:.6}, C' = {:.6}", c.c, c.c_prime);

    let gamma = db_to_linear(10.0);
    let trials = 1_000_000;
    let p = event_probs(lambda, mu, &rates, gamma)?;
    let counts = decode_frequencies(lambda, mu, &rates, gamma, trials, 1);
    println!("\n10 dB, {trials} decoder draws");
    for e in DecodeEvent::ALL {
        let q = p.get(e);
        let f = counts[e.index()] as f64 / trials as f64;
        let se = (q * (1.0 - q) / trials as f64).sqrt();
        println!(
            "{:<8} closed form {q:.6}  frequency {f:.6}  z {:+.2}",
            e.name(),
            (f - q) / se
        );
    }
    Ok(())
}
