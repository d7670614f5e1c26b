//! Static relay pre-selection from average channel statistics, and random
//! path-loss topologies to exercise it.
//!
//! Topology records are CSV with the header `node,x,y`; `node` is `S1`,
//! `S2`, `D` or `R<index>` (relays numbered from 0, in order).

use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::event_probs;
use crate::error::{invalid, Error, Result};
use crate::fading::SeedSpec;
use crate::protocol::RateConfig;
use crate::scenario::{RelayLinks, ScenarioConfig};

pub const S1_POSITION: (f64, f64) = (0.0, 0.25);
pub const S2_POSITION: (f64, f64) = (0.0, 0.75);
pub const DEST_POSITION: (f64, f64) = (1.0, 0.5);
/// Relays closer than this to an anchor are redrawn.
pub const MIN_ANCHOR_DISTANCE: f64 = 1e-3;

/// Expected number of bits the relay forwards in decoded form:
/// `p_s1ok_s2fail·R₁ + p_s1fail_s2ok·R₂ + p_both_ok·(R₁+R₂)`.
pub fn relay_weight(lambda: f64, mu: f64, rates: &RateConfig, gamma: f64) -> Result<f64> {
    let p = event_probs(lambda, mu, rates, gamma)?;
    let (r1, r2) = (rates.r1(), rates.r2());
    Ok(p.p_s1ok_s2fail * r1 + p.p_s1fail_s2ok * r2 + p.p_both_ok * (r1 + r2))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// Chosen relay indices, highest weight first.
    pub chosen: Vec<usize>,
    pub weights: Vec<f64>,
}

/// The `n_used` relays of highest weight; ties go to the lower index.
pub fn select(weights: &[f64], n_used: usize) -> Result<SelectionResult> {
    if n_used == 0 || n_used > weights.len() {
        return Err(invalid(
            "n_used",
            format!("must be in 1..={}, got {n_used}", weights.len()),
        ));
    }
    if weights.iter().any(|w| !w.is_finite()) {
        return Err(invalid("weights", "must be finite"));
    }
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]).then(a.cmp(&b)));
    order.truncate(n_used);
    Ok(SelectionResult {
        chosen: order,
        weights: weights.to_vec(),
    })
}

/// Node positions in the unit square. Mean gains follow `1/dist²`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub s1: (f64, f64),
    pub s2: (f64, f64),
    pub dest: (f64, f64),
    pub relays: Vec<(f64, f64)>,
}

#[derive(Debug, Serialize, Deserialize)]
struct NodeRecord {
    node: String,
    x: f64,
    y: f64,
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

impl Topology {
    /// Relays at the given positions with the fixed source and destination
    /// anchors.
    pub fn with_relays(relays: Vec<(f64, f64)>) -> Result<Self> {
        let t = Self {
            s1: S1_POSITION,
            s2: S2_POSITION,
            dest: DEST_POSITION,
            relays,
        };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.relays.is_empty() {
            return Err(Error::NoRelays);
        }
        for (i, &r) in self.relays.iter().enumerate() {
            for anchor in [self.s1, self.s2, self.dest] {
                let d = dist(r, anchor);
                if !(d.is_finite() && d > 0.0) {
                    return Err(invalid(
                        "topology",
                        format!("relay {i} coincides with an anchor"),
                    ));
                }
            }
        }
        Ok(())
    }

    /// `(E|h₁|², E|h₂|², E|f|²)` of relay `r`.
    pub fn gains(&self, r: usize) -> (f64, f64, f64) {
        let p = self.relays[r];
        (
            dist(self.s1, p).powi(-2),
            dist(self.s2, p).powi(-2),
            dist(p, self.dest).powi(-2),
        )
    }

    pub fn relay_links(&self) -> Result<Vec<RelayLinks>> {
        (0..self.relays.len())
            .map(|r| {
                let (a, b, c) = self.gains(r);
                RelayLinks::new(a, b, c)
            })
            .collect()
    }

    /// Scenario over this topology with all relays as candidates and
    /// `n_used` of them used.
    pub fn scenario(&self, r1: f64, r2: f64, n_used: usize) -> Result<ScenarioConfig> {
        let cfg = ScenarioConfig::new(r1, r2, self.relay_links()?).with_n_used(n_used);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let anchors = [("S1", self.s1), ("S2", self.s2), ("D", self.dest)];
        for (name, (x, y)) in anchors {
            w.serialize(NodeRecord {
                node: name.into(),
                x,
                y,
            })?;
        }
        for (i, &(x, y)) in self.relays.iter().enumerate() {
            w.serialize(NodeRecord {
                node: format!("R{i}"),
                x,
                y,
            })?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(input);
        let (mut s1, mut s2, mut dest) = (None, None, None);
        let mut relays: Vec<(usize, (f64, f64))> = Vec::new();
        for rec in rd.deserialize() {
            let rec: NodeRecord = rec?;
            let p = (rec.x, rec.y);
            match rec.node.as_str() {
                "S1" => s1 = Some(p),
                "S2" => s2 = Some(p),
                "D" => dest = Some(p),
                other => {
                    let idx = other
                        .strip_prefix('R')
                        .and_then(|s| s.parse::<usize>().ok())
                        .ok_or_else(|| invalid("topology", format!("unknown node id `{other}`")))?;
                    relays.push((idx, p));
                }
            }
        }
        relays.sort_by_key(|r| r.0);
        if relays.iter().enumerate().any(|(i, r)| r.0 != i) {
            return Err(invalid(
                "topology",
                "relay ids must be R0..R{n-1} without gaps",
            ));
        }
        let missing = |name| invalid("topology", format!("missing node {name}"));
        let t = Self {
            s1: s1.ok_or_else(|| missing("S1"))?,
            s2: s2.ok_or_else(|| missing("S2"))?,
            dest: dest.ok_or_else(|| missing("D"))?,
            relays: relays.into_iter().map(|r| r.1).collect(),
        };
        t.validate()?;
        Ok(t)
    }
}

/// `n_relays` relays uniform on the unit square around the fixed anchors.
pub fn random_topology(n_relays: usize, seed: SeedSpec) -> Result<Topology> {
    if n_relays == 0 {
        return Err(Error::NoRelays);
    }
    let mut rng = seed.rng();
    let relays = (0..n_relays)
        .map(|_| loop {
            let p: (f64, f64) = (rng.random(), rng.random());
            if [S1_POSITION, S2_POSITION, DEST_POSITION]
                .iter()
                .all(|&a| dist(p, a) >= MIN_ANCHOR_DISTANCE)
            {
                break p;
            }
        })
        .collect();
    Topology::with_relays(relays)
}

/// Per-relay weights of every candidate in `config` at SNR `gamma`.
pub fn scenario_weights(config: &ScenarioConfig, gamma: f64) -> Result<Vec<f64>> {
    let rates = config.rates()?;
    config
        .relays
        .iter()
        .map(|l| relay_weight(l.lambda(), l.mu(), &rates, gamma))
        .collect()
}
