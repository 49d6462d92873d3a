//! Flat `key = value` experiment configuration (TOML syntax). Every key is
//! optional; missing keys take the reference simulation defaults.

use std::path::Path;

use serde::Deserialize;

use super::experiment::{ExperimentSpec, SweepVariable};
use crate::assignment::{SrsOrder, Strategy};
use crate::channel::{Point, SystemParams};
use crate::error::{Error, Result};
use crate::sim::SimConfig;

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub area_side: f64,
    pub bs_x: f64,
    pub bs_y: f64,
    pub sources: usize,
    pub relays: usize,
    pub initial_energy: f64,
    pub topologies: usize,
    pub seed: u64,
    pub sweep: SweepVariable,
    pub sweep_values: Vec<u64>,
    pub strategies: Vec<Strategy>,
    pub data_rate: f64,
    pub packet_bits: f64,
    pub g0_db: f64,
    pub n0_dbm: f64,
    pub alpha: f64,
    pub eta: f64,
    pub mod_index: f64,
    pub ser_target: f64,
    pub update_interval: u64,
    pub max_packets: u64,
    pub srs_order: SrsOrder,
}

impl Default for ConfigFile {
    fn default() -> Self {
        let spec = ExperimentSpec::default();
        ConfigFile {
            area_side: spec.area_side,
            bs_x: spec.bs.x,
            bs_y: spec.bs.y,
            sources: spec.sources,
            relays: spec.relays,
            initial_energy: spec.initial_energy,
            topologies: spec.topologies,
            seed: spec.seed,
            sweep: spec.sweep,
            sweep_values: spec.sweep_values,
            strategies: spec.strategies,
            data_rate: spec.sim.data_rate,
            packet_bits: spec.sim.packet_bits,
            g0_db: -70.0,
            n0_dbm: -134.0,
            alpha: 3.5,
            eta: 1.0,
            mod_index: 2.0,
            ser_target: spec.sim.ser_target,
            update_interval: spec.sim.update_interval_packets,
            max_packets: spec.sim.max_packets,
            srs_order: spec.sim.srs_order,
        }
    }
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    /// Linear-unit system parameters; dB values are converted here.
    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::from_db(self.eta, self.alpha, self.n0_dbm, self.g0_db, self.mod_index)
    }

    pub fn into_spec(self) -> Result<ExperimentSpec> {
        let params = self.params()?;
        let spec = ExperimentSpec {
            area_side: self.area_side,
            bs: Point::new(self.bs_x, self.bs_y),
            sources: self.sources,
            relays: self.relays,
            initial_energy: self.initial_energy,
            topologies: self.topologies,
            seed: self.seed,
            sweep: self.sweep,
            sweep_values: self.sweep_values,
            strategies: self.strategies,
            sim: SimConfig {
                params,
                ser_target: self.ser_target,
                update_interval_packets: self.update_interval,
                packet_bits: self.packet_bits,
                data_rate: self.data_rate,
                srs_order: self.srs_order,
                max_packets: self.max_packets,
                ..SimConfig::default()
            },
        };
        spec.validate()?;
        Ok(spec)
    }
}
