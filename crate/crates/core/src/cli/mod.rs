//! Command-line front end for the `sicrelay` binary.
//!
//! Exit codes: 0 success, 1 a validation check failed, 2 usage or
//! configuration error.
//!
//! Sweep CSV columns (schema 1, never reordered):
//! `gamma_db, pout_sim_s1, ci_s1, pout_analytic_s1, pout_sim_s2, ci_s2, trials`.
//! `pout_analytic_s1` is empty when more than 8 relays are used. Every file
//! written gets a `<file>.manifest.json` next to it that `rerun` accepts.

pub mod manifest;
pub mod validate;

use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytic::{
    end_to_end_outage_with, Estimator, FirstHopSampling, SecondHopOptions, SKIP_EVENT_BELOW,
};
use crate::dmt::{diversity, empirical_slope};
use crate::error::{Error, Result};
use crate::fading::SeedSpec;
use crate::montecarlo::{estimate_outage, sweep_with, with_workers, SweepOptions, SweepRow};
use crate::preselect::{random_topology, scenario_weights, select, Topology};
use crate::protocol::Source;
use crate::scenario::{db_to_linear, ScenarioConfig};
use manifest::{ManifestCommand, RunManifest};
use validate::{Grid, ValidationSuite};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

pub const SWEEP_HEADER: [&str; 7] = [
    "gamma_db",
    "pout_sim_s1",
    "ci_s1",
    "pout_analytic_s1",
    "pout_sim_s2",
    "ci_s2",
    "trials",
];

#[derive(Debug, Parser)]
#[command(
    name = "sicrelay",
    version,
    about = "Outage simulation and analysis for two-source SIC relay networks"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Outage versus SNR, simulated and (up to 8 used relays) enumerated.
    Sweep(SweepArgs),
    /// Re-executes a run manifest.
    Rerun(RerunArgs),
    /// Runs the self-check suite.
    Validate(ValidateArgs),
    /// Fits the high-SNR outage slope of S1 and compares it with the
    /// diversity order.
    Dmt(DmtArgs),
    /// Pre-selects relays on a random or given topology.
    Preselect(PreselectArgs),
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// SNR grid in dB as `start:step:stop` (inclusive).
    #[arg(long, allow_hyphen_values = true, value_parser = parse_grid)]
    pub snr_db: SnrGrid,
    /// Overrides `run.trials`.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Overrides `run.master_seed`.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
    /// Skips the enumerated column.
    #[arg(long)]
    pub no_analytic: bool,
    #[arg(long, value_enum, default_value_t = FirstHopArg::Exact)]
    pub first_hop: FirstHopArg,
    #[arg(long, value_enum, default_value_t = EstimatorArg::Importance)]
    pub estimator: EstimatorArg,
    /// Event vectors less likely than this are left out of the enumeration.
    #[arg(long, default_value_t = SKIP_EVENT_BELOW)]
    pub skip_below: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum FirstHopArg {
    Exact,
    Rejection,
    Unconditional,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EstimatorArg {
    Importance,
    Counting,
}

#[derive(Debug, Args)]
pub struct RerunArgs {
    pub manifest: PathBuf,
    /// Writes here instead of the manifest's output path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, value_enum, default_value_t = Grid::Small)]
    pub grid: Grid,
    /// Sampling trials per oracle point; 3σ tolerances scale with it.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Also writes the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DmtArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Fit window in dB as `lo:hi`.
    #[arg(long, allow_hyphen_values = true, default_value = "35:55", value_parser = parse_window)]
    pub window: (f64, f64),
    #[arg(long, default_value_t = 2.5)]
    pub step_db: f64,
    /// Overrides `run.analytic_trials_per_event`.
    #[arg(long)]
    pub trials_per_event: Option<u64>,
    /// Event vectors less likely than this are left out of the enumeration.
    /// Any skipping biases the curve once the outage drops below the
    /// skipped mass.
    #[arg(long, default_value_t = 0.0)]
    pub skip_below: f64,
}

#[derive(Debug, Args)]
pub struct PreselectArgs {
    #[arg(long)]
    pub n_relays: Option<usize>,
    #[arg(long)]
    pub n_used: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pub ref_snr_db: f64,
    /// `R1,R2`.
    #[arg(long, default_value = "1,1", value_parser = parse_rates)]
    pub rates: (f64, f64),
    /// Reads relay positions instead of drawing them.
    #[arg(long)]
    pub topology_in: Option<PathBuf>,
    #[arg(long)]
    pub topology_out: Option<PathBuf>,
    /// Simulates the chosen and the lowest-weight subsets.
    #[arg(long)]
    pub evaluate: bool,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    pub eval_snr_db: f64,
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
}

/// Inclusive dB grid parsed from `start:step:stop`.
#[derive(Clone, Debug, PartialEq)]
pub struct SnrGrid(pub Vec<f64>);

fn parse_grid(s: &str) -> std::result::Result<SnrGrid, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<std::result::Result<_, _>>()?;
    let [start, step, stop] = parts[..] else {
        return Err(format!("expected start:step:stop, got `{s}`"));
    };
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && step > 0.0 && stop >= start) {
        return Err(format!("need finite start <= stop and step > 0, got `{s}`"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize + 1;
    Ok(SnrGrid((0..n).map(|i| start + step * i as f64).collect()))
}

fn parse_window(s: &str) -> std::result::Result<(f64, f64), String> {
    let (lo, hi) = s
        .split_once(':')
        .ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("`{lo}`: {e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("`{hi}`: {e}"))?;
    if !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(format!("need lo < hi, got `{s}`"));
    }
    Ok((lo, hi))
}

fn parse_rates(s: &str) -> std::result::Result<(f64, f64), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected R1,R2, got `{s}`"))?;
    let a: f64 = a.trim().parse().map_err(|e| format!("`{a}`: {e}"))?;
    let b: f64 = b.trim().parse().map_err(|e| format!("`{b}`: {e}"))?;
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err("rates must be positive".into());
    }
    Ok((a, b))
}

enum Failure {
    Usage(Error),
    Validation,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

/// Runs a parsed command line and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let workers = cli
        .workers
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
    let outcome = with_workers(workers, || dispatch(cli.command)).unwrap_or_else(|e| Err(e.into()));
    match outcome {
        Ok(()) => EXIT_OK,
        Err(Failure::Validation) => EXIT_VALIDATION,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command) -> std::result::Result<(), Failure> {
    match command {
        Command::Sweep(a) => cmd_sweep(a).map_err(Failure::from),
        Command::Rerun(a) => cmd_rerun(a).map_err(Failure::from),
        Command::Validate(a) => cmd_validate(a),
        Command::Dmt(a) => cmd_dmt(a).map_err(Failure::from),
        Command::Preselect(a) => cmd_preselect(a).map_err(Failure::from),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn cmd_sweep(a: SweepArgs) -> Result<()> {
    let mut config = ScenarioConfig::load(&a.config)?;
    if let Some(t) = a.trials {
        config.run.trials = t;
    }
    if let Some(s) = a.seed {
        config.run.master_seed = s;
    }
    config.validate()?;
    let command = ManifestCommand::Sweep {
        gammas_db: a.snr_db.0,
        analytic: !a.no_analytic,
        second_hop: SecondHopOptions {
            first_hop: match a.first_hop {
                FirstHopArg::Exact => FirstHopSampling::Exact,
                FirstHopArg::Rejection => FirstHopSampling::Rejection,
                FirstHopArg::Unconditional => FirstHopSampling::Unconditional,
            },
            estimator: match a.estimator {
                EstimatorArg::Importance => Estimator::Importance,
                EstimatorArg::Counting => Estimator::Counting,
            },
            skip_below: a.skip_below,
        },
    };
    execute(&RunManifest::new(command, config, vec![a.out]), None)
}

fn cmd_rerun(a: RerunArgs) -> Result<()> {
    let m = RunManifest::load(&a.manifest)?;
    execute(&m, a.out)
}

/// Runs `m`, writing its output (or `out_override`) and a fresh manifest.
fn execute(m: &RunManifest, out_override: Option<PathBuf>) -> Result<()> {
    let out = match out_override.or_else(|| m.outputs.first().cloned()) {
        Some(p) => p,
        None => return Err(crate::error::invalid("manifest", "no output path")),
    };
    let mut m = m.clone();
    m.outputs = vec![out.clone()];
    match &m.command {
        ManifestCommand::Sweep {
            gammas_db,
            analytic,
            second_hop,
        } => {
            let rows = sweep_with(
                &m.config,
                gammas_db,
                SweepOptions {
                    analytic: *analytic,
                    second_hop: *second_hop,
                },
            )?;
            for r in &rows {
                for (s, e) in [("S1", &r.sim_s1), ("S2", &r.sim_s2)] {
                    if !e.is_reliable() {
                        eprintln!(
                            "warning: {} dB {s}: only {} outages in {} trials, interval unreliable",
                            r.gamma_db, e.failures, e.trials
                        );
                    }
                }
            }
            write_sweep_csv(&out, &rows)?;
            println!("wrote {} rows to {}", rows.len(), out.display());
        }
        ManifestCommand::Preselect {
            topology,
            n_used,
            ref_snr_db,
            rates,
            ..
        } => {
            let file = File::create(&out).map_err(io_err(&out))?;
            topology.write_csv(file)?;
            let cfg = topology.scenario(rates.0, rates.1, *n_used)?;
            print_selection(topology, &cfg, *ref_snr_db)?;
        }
    }
    let mpath = RunManifest::path_for(&out);
    m.save(&mpath)?;
    println!("manifest {}", mpath.display());
    Ok(())
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

pub fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(SWEEP_HEADER)?;
    for r in rows {
        w.write_record([
            fmt_f(r.gamma_db),
            fmt_f(r.sim_s1.p_hat),
            fmt_f(r.sim_s1.ci_half_width),
            r.analytic_s1.map(|a| fmt_f(a.p_hat)).unwrap_or_default(),
            fmt_f(r.sim_s2.p_hat),
            fmt_f(r.sim_s2.ci_half_width),
            r.sim_s1.trials.to_string(),
        ])?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> std::result::Result<(), Failure> {
    let mut suite = ValidationSuite::new(a.grid);
    suite.trials = a.trials;
    suite.seed = a.seed;
    let results = suite.run()?;
    for r in &results {
        println!(
            "{:<5} {:<24} measured {:.4e}  tolerance {:.4e}  {}",
            if r.passed() { "PASS" } else { "FAIL" },
            r.check_name,
            r.measured,
            r.tolerance,
            r.detail
        );
    }
    let json = serde_json::to_string_pretty(&results).map_err(Error::from)?;
    println!("{json}");
    if let Some(p) = &a.json {
        std::fs::write(p, json + "\n").map_err(io_err(p))?;
    }
    if results.iter().all(|r| r.passed()) {
        Ok(())
    } else {
        Err(Failure::Validation)
    }
}

fn cmd_dmt(a: DmtArgs) -> Result<()> {
    let config = ScenarioConfig::load(&a.config)?;
    let (lo, hi) = a.window;
    if !(a.step_db > 0.0 && a.step_db.is_finite()) {
        return Err(crate::error::invalid("step-db", "must be > 0"));
    }
    let trials = a
        .trials_per_event
        .unwrap_or(config.run.analytic_trials_per_event);
    let seed = SeedSpec::new(SeedSpec::derive_master(config.run.master_seed, 0xd317), 0);
    let n = ((hi - lo) / a.step_db + 1e-9).floor() as usize + 1;
    let mut curve = Vec::with_capacity(n);
    println!("gamma_db,pout_s1");
    for i in 0..n {
        let db = lo + a.step_db * i as f64;
        let opts = SecondHopOptions {
            skip_below: a.skip_below,
            ..SecondHopOptions::default()
        };
        let p = end_to_end_outage_with(&config, db_to_linear(db), trials, seed, Source::S1, opts)?;
        println!("{db},{}", p.estimate.p_hat);
        curve.push((db, p.estimate.p_hat));
    }
    let slope = empirical_slope(&curve, (lo, hi))?;
    let n_r = config.n_used() as u32;
    let d0 = diversity(0.0, n_r, n_r + 1)?;
    println!("fitted slope {slope:.4}");
    println!("theoretical diversity d(0) = {d0}");
    println!("relative error {:.4}", (slope - d0).abs() / d0);
    Ok(())
}

fn print_selection(
    topology: &Topology,
    cfg: &ScenarioConfig,
    ref_snr_db: f64,
) -> Result<Vec<usize>> {
    let weights = scenario_weights(cfg, db_to_linear(ref_snr_db))?;
    let sel = select(&weights, cfg.n_used())?;
    println!("node,x,y,weight,rank,chosen");
    for (name, (x, y)) in [
        ("S1", topology.s1),
        ("S2", topology.s2),
        ("D", topology.dest),
    ] {
        println!("{name},{x:.6},{y:.6},,,");
    }
    let mut rank: Vec<usize> = (0..weights.len()).collect();
    rank.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    for (i, &(x, y)) in topology.relays.iter().enumerate() {
        let pos = rank.iter().position(|&r| r == i).unwrap_or(0) + 1;
        let chosen = if sel.chosen.contains(&i) { "yes" } else { "no" };
        println!("R{i},{x:.6},{y:.6},{:.6},{pos},{chosen}", weights[i]);
    }
    println!("chosen {:?}", sel.chosen);
    Ok(rank)
}

fn cmd_preselect(a: PreselectArgs) -> Result<()> {
    let topology = match &a.topology_in {
        Some(p) => Topology::read_csv(File::open(p).map_err(io_err(p))?)?,
        None => {
            let n = a.n_relays.ok_or_else(|| {
                crate::error::invalid("n-relays", "required without --topology-in")
            })?;
            random_topology(n, SeedSpec::new(a.seed, 0))?
        }
    };
    if a.n_used == 0 || a.n_used > topology.relays.len() {
        return Err(crate::error::invalid(
            "n-used",
            format!("must be in 1..={}, got {}", topology.relays.len(), a.n_used),
        ));
    }
    let mut cfg = topology.scenario(a.rates.0, a.rates.1, a.n_used)?;
    cfg.run.selection_ref_snr_db = a.ref_snr_db;
    cfg.run.master_seed = a.seed;
    cfg.run.trials = a.trials;
    let rank = print_selection(&topology, &cfg, a.ref_snr_db)?;
    if a.evaluate {
        let gamma = db_to_linear(a.eval_snr_db);
        let best = cfg.restricted_to(&rank[..a.n_used])?;
        let worst = cfg.restricted_to(&rank[rank.len() - a.n_used..])?;
        let pb = estimate_outage(&best, gamma, Source::S1)?;
        let pw = estimate_outage(&worst, gamma, Source::S1)?;
        println!(
            "outage at {} dB over {} trials: chosen {:.4e} ± {:.1e}, lowest-weight {:.4e} ± {:.1e}",
            a.eval_snr_db, a.trials, pb.p_hat, pb.ci_half_width, pw.p_hat, pw.ci_half_width
        );
        println!("chosen <= lowest-weight: {}", pb.p_hat <= pw.p_hat);
    }
    if let Some(out) = a.topology_out {
        let m = RunManifest::new(
            ManifestCommand::Preselect {
                topology,
                n_used: a.n_used,
                ref_snr_db: a.ref_snr_db,
                rates: a.rates,
            },
            cfg,
            vec![out.clone()],
        );
        let file = File::create(&out).map_err(io_err(&out))?;
        if let ManifestCommand::Preselect { topology, .. } = &m.command {
            topology.write_csv(file)?;
        }
        m.save(&RunManifest::path_for(&out))?;
        std::io::stdout().flush().ok();
        println!("wrote topology to {}", out.display());
    }
    Ok(())
}
