//! Worker-count independence and manifest round trip of a sweep.

use sic_relay::cli::manifest::{ManifestCommand, RunManifest};
use sic_relay::montecarlo::{sweep, with_workers};
use sic_relay::{Result, ScenarioConfig};

fn main() -> Result<()> {
    let config = ScenarioConfig::symmetric(3, 1.0, 2.0)
        .with_trials(100_000)
        .with_seed(2024);
    let grid = [0.0, 10.0, 20.0];
    let mut runs = Vec::new();
    for workers in [1, 4, 16] {
        let rows = with_workers(workers, || sweep(&config, &grid))??;
        println!(
            "{workers:>2} workers: S1 {:?}",
            rows.iter().map(|r| r.sim_s1.p_hat).collect::<Vec<_>>()
        );
        runs.push(rows);
    }
    println!(
        "identical across worker counts: {}",
        runs.windows(2).all(|w| w[0] == w[1])
    );

    let dir = std::env::temp_dir().join("sic_relay_manifest_example");
    std::fs::create_dir_all(&dir).map_err(|e| sic_relay::Error::Io {
        path: dir.clone(),
        source: e,
    })?;
    let out = dir.join("sweep.csv");
    let manifest = RunManifest::new(
        ManifestCommand::Sweep {
            gammas_db: grid.to_vec(),
            analytic: true,
            second_hop: Default::default(),
        },
        config,
        vec![out.clone()],
    );
    let path = RunManifest::path_for(&out);
    manifest.save(&path)?;
    let loaded = RunManifest::load(&path)?;
    println!(
        "manifest {} round trips: {}",
        path.display(),
        loaded == manifest
    );
    Ok(())
}
