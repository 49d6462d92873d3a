//! Monte-Carlo sweeps over random topologies and their CSV summaries.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::topology::{generate_topology, Layout, PRNG_DESCRIPTION};
use crate::assignment::Strategy;
use crate::channel::{PairTable, Point, Topology};
use crate::error::{Error, Result};
use crate::sim::{run_lifetime_with_table, LifetimeResult, SimConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    RelayCount,
    UpdateInterval,
}

impl fmt::Display for SweepVariable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepVariable::RelayCount => "relay_count",
            SweepVariable::UpdateInterval => "update_interval",
        })
    }
}

impl FromStr for SweepVariable {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "relay_count" => Ok(SweepVariable::RelayCount),
            "update_interval" => Ok(SweepVariable::UpdateInterval),
            _ => Err(Error::Config(format!("unknown sweep variable {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub area_side: f64,
    pub bs: Point,
    pub sources: usize,
    /// Relay count when the sweep is not over relay counts.
    pub relays: usize,
    pub initial_energy: f64,
    pub topologies: usize,
    pub seed: u64,
    pub sweep: SweepVariable,
    pub sweep_values: Vec<u64>,
    pub strategies: Vec<Strategy>,
    /// Base simulation settings; strategy and, when swept, the update
    /// interval are overridden per cell.
    pub sim: SimConfig,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        ExperimentSpec {
            area_side: 100.0,
            bs: Point::new(50.0, 50.0),
            sources: 6,
            relays: 20,
            initial_energy: 10.0,
            topologies: 300,
            seed: 1,
            sweep: SweepVariable::RelayCount,
            sweep_values: vec![10, 15, 20, 25, 30],
            strategies: Strategy::ALL.to_vec(),
            sim: SimConfig::default(),
        }
    }
}

/// Update intervals of the lifetime-versus-update-interval sweep.
pub const UPDATE_INTERVAL_SWEEP: [u64; 10] = [60, 300, 1_000, 3_000, 6_000, 10_000, 14_000, 17_000, 20_000, 30_000];

impl ExperimentSpec {
    /// Preset for one of the four reference comparisons:
    /// 1 lifetime vs relay count, 2 lifetime vs update interval,
    /// 3/4 energy per packet and wasted energy at `T_u` ∈ {60, 3·10⁴}.
    pub fn figure(fig: u8) -> Result<Self> {
        let base = ExperimentSpec::default();
        match fig {
            1 => Ok(base),
            2 => Ok(ExperimentSpec {
                sweep: SweepVariable::UpdateInterval,
                sweep_values: UPDATE_INTERVAL_SWEEP.to_vec(),
                ..base
            }),
            3 | 4 => Ok(ExperimentSpec {
                sweep: SweepVariable::UpdateInterval,
                sweep_values: vec![60, 30_000],
                ..base
            }),
            _ => Err(Error::Config(format!("no preset for figure {fig}; expected 1-4"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.topologies == 0 {
            return Err(Error::Config("topology count must be at least 1".into()));
        }
        if self.sweep_values.is_empty() || self.strategies.is_empty() {
            return Err(Error::Config("sweep values and strategies must be non-empty".into()));
        }
        if self.sources == 0 {
            return Err(Error::Config("at least one source required".into()));
        }
        if !(self.area_side > 0.0 && self.initial_energy > 0.0) {
            return Err(Error::Config("area side and initial energy must be positive".into()));
        }
        let relay_counts: Vec<usize> = match self.sweep {
            SweepVariable::RelayCount => self.sweep_values.iter().map(|&v| v as usize).collect(),
            SweepVariable::UpdateInterval => vec![self.relays],
        };
        if let Some(n) = relay_counts.iter().find(|&&n| n < self.sources) {
            return Err(Error::Config(format!("{n} relays cannot serve {} sources", self.sources)));
        }
        if self.sweep == SweepVariable::UpdateInterval && self.sweep_values.contains(&0) {
            return Err(Error::Config("update interval must be at least one packet".into()));
        }
        self.sim.validate()
    }

    fn layout(&self, sweep_value: u64) -> Layout {
        Layout {
            area_side: self.area_side,
            bs: self.bs,
            sources: self.sources,
            relays: match self.sweep {
                SweepVariable::RelayCount => sweep_value as usize,
                SweepVariable::UpdateInterval => self.relays,
            },
            initial_energy: self.initial_energy,
        }
    }

    fn config(&self, strategy: Strategy, sweep_value: u64) -> SimConfig {
        let mut c = self.sim.clone();
        c.strategy = strategy;
        if self.sweep == SweepVariable::UpdateInterval {
            c.update_interval_packets = sweep_value;
        }
        c
    }

    pub fn topology(&self, sweep_value: u64, index: usize) -> Result<Topology> {
        generate_topology(self.seed, index as u64, &self.layout(sweep_value))
    }
}

/// Outcome of one (strategy, sweep value, topology) simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub strategy: Strategy,
    pub sweep_value: u64,
    pub topology_index: usize,
    pub result: LifetimeResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub strategy: Strategy,
    pub sweep_name: SweepVariable,
    pub sweep_value: u64,
    pub mean_lifetime_packets: f64,
    pub mean_energy_per_packet_j: f64,
    pub mean_wasted_energy_j: f64,
    pub n_topologies: usize,
    pub seed: u64,
}

/// Runs every strategy on every topology of every sweep value. Each
/// topology is shared by all strategies. Records come back sorted by
/// strategy, sweep value, then topology index.
pub fn run_experiment_records(spec: &ExperimentSpec) -> Result<Vec<RunRecord>> {
    spec.validate()?;
    let cells: Vec<(u64, usize)> = spec
        .sweep_values
        .iter()
        .flat_map(|&v| (0..spec.topologies).map(move |t| (v, t)))
        .collect();
    let per_cell = cells
        .par_iter()
        .map(|&(value, index)| {
            let topology = spec.topology(value, index)?;
            let table = PairTable::from_topology(&topology, &spec.sim.params)?;
            let es: Vec<f64> = topology.sources().iter().map(|n| n.energy).collect();
            let er: Vec<f64> = topology.relays().iter().map(|n| n.energy).collect();
            spec.strategies
                .iter()
                .map(|&strategy| {
                    let result = run_lifetime_with_table(&table, &es, &er, &spec.config(strategy, value))?;
                    Ok(RunRecord {
                        strategy,
                        sweep_value: value,
                        topology_index: index,
                        result,
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut records: Vec<RunRecord> = per_cell.into_iter().flatten().collect();
    records.sort_by_key(|r| (r.strategy, r.sweep_value, r.topology_index));
    Ok(records)
}

pub fn summarize(spec: &ExperimentSpec, records: &[RunRecord]) -> Vec<ResultRow> {
    let mut rows: Vec<ResultRow> = Vec::new();
    for group in records.chunk_by(|a, b| (a.strategy, a.sweep_value) == (b.strategy, b.sweep_value)) {
        let k = group.len() as f64;
        let mean = |f: &dyn Fn(&LifetimeResult) -> f64| group.iter().map(|r| f(&r.result)).sum::<f64>() / k;
        let per_packet: Vec<f64> = group.iter().filter_map(|r| r.result.avg_energy_per_packet).collect();
        rows.push(ResultRow {
            strategy: group[0].strategy,
            sweep_name: spec.sweep,
            sweep_value: group[0].sweep_value,
            mean_lifetime_packets: mean(&|r| r.lifetime_packets as f64),
            mean_energy_per_packet_j: if per_packet.is_empty() {
                f64::NAN
            } else {
                per_packet.iter().sum::<f64>() / per_packet.len() as f64
            },
            mean_wasted_energy_j: mean(&|r| r.wasted_energy),
            n_topologies: group.len(),
            seed: spec.seed,
        });
    }
    rows.sort_by_key(|r| (r.strategy, r.sweep_value));
    rows
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<Vec<ResultRow>> {
    let records = run_experiment_records(spec)?;
    Ok(summarize(spec, &records))
}

/// Writes a `#` metadata line naming the generator, then the CSV.
pub fn write_csv<W: Write>(mut out: W, rows: &[ResultRow]) -> Result<()> {
    writeln!(out, "# prng: {PRNG_DESCRIPTION}")?;
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}
