//! Packet-level network lifetime simulation.
//!
//! Sources transmit in round-robin order. Each packet drains `ps·T_pkt`
//! from its source and `pr·T_pkt` from the assigned relay. Every
//! `update_interval_packets` delivered packets the assignment and powers are
//! recomputed from residual energies. The network expires at the first
//! packet whose source or relay cannot pay for it.

use serde::{Deserialize, Serialize};

use crate::assignment::{assign_with_table, AssignedPair, SrsOrder, Strategy};
use crate::channel::{PairTable, SystemParams, Topology};
use crate::error::{Error, Result};

/// Relative slack when comparing a residual energy to a packet cost, so
/// that accumulated rounding does not cost a node its last packet.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: SystemParams,
    pub ser_target: f64,
    /// Network-total packets between re-assignments; `u64::MAX` never updates.
    pub update_interval_packets: u64,
    pub packet_bits: f64,
    /// Bits per second.
    pub data_rate: f64,
    pub strategy: Strategy,
    pub srs_order: SrsOrder,
    pub max_packets: u64,
    pub record_timeline: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            params: SystemParams::default(),
            ser_target: 1e-4,
            update_interval_packets: 60,
            packet_bits: 1000.0,
            data_rate: 10_000.0,
            strategy: Strategy::GLM_MBM,
            srs_order: SrsOrder::HighestFirst,
            max_packets: 10_000_000,
            record_timeline: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if !(self.ser_target > 0.0 && self.ser_target < 1.0) {
            return Err(Error::Config(format!("SER target {} outside (0, 1)", self.ser_target)));
        }
        if self.update_interval_packets == 0 {
            return Err(Error::Config("update interval must be at least one packet".into()));
        }
        if !(self.packet_bits > 0.0 && self.packet_bits.is_finite()) {
            return Err(Error::Config("packet size must be positive".into()));
        }
        if !(self.data_rate > 0.0 && self.data_rate.is_finite()) {
            return Err(Error::Config("data rate must be positive".into()));
        }
        Ok(())
    }

    /// Airtime of one packet in seconds.
    pub fn packet_time(&self) -> f64 {
        self.packet_bits / self.data_rate
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeId {
    Source(usize),
    Relay(usize),
}

/// Assignment in force from `packets_delivered` until the next update.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub packets_delivered: u64,
    pub pairs: Vec<AssignedPair>,
    pub residual_energy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LifetimeResult {
    pub lifetime_packets: u64,
    /// `None` only when the run was truncated at `max_packets`.
    pub dying_node: Option<NodeId>,
    pub truncated: bool,
    pub initial_energy: f64,
    pub consumed_energy: f64,
    pub residual_source_energy: Vec<f64>,
    pub residual_relay_energy: Vec<f64>,
    pub avg_energy_per_packet: Option<f64>,
    pub wasted_energy: f64,
    pub updates: u64,
    pub timeline: Option<Vec<Snapshot>>,
}

/// Mutable network state of one run.
#[derive(Debug, Clone)]
pub struct NetworkState {
    pub source_energy: Vec<f64>,
    pub relay_energy: Vec<f64>,
    /// `(relay, ps, pr)` per source.
    pub links: Vec<(usize, f64, f64)>,
    pub packets_delivered: u64,
    pub packets_since_update: u64,
}

fn can_afford(residual: f64, cost: f64) -> bool {
    residual >= cost * (1.0 - ENERGY_TOLERANCE)
}

fn depleted(residual: f64, initial: f64) -> bool {
    residual <= initial * ENERGY_TOLERANCE
}

pub fn run_lifetime(topology: &Topology, config: &SimConfig) -> Result<LifetimeResult> {
    let table = PairTable::from_topology(topology, &config.params)?;
    let es: Vec<f64> = topology.sources().iter().map(|n| n.energy).collect();
    let er: Vec<f64> = topology.relays().iter().map(|n| n.energy).collect();
    run_lifetime_with_table(&table, &es, &er, config)
}

/// Simulation on precomputed pair coefficients and explicit initial energies.
pub fn run_lifetime_with_table(
    table: &PairTable,
    source_energy: &[f64],
    relay_energy: &[f64],
    config: &SimConfig,
) -> Result<LifetimeResult> {
    config.validate()?;
    let m = table.num_sources();
    if source_energy.len() != m || relay_energy.len() != table.num_relays() {
        return Err(Error::InvalidParameter("energy vector length mismatch".into()));
    }
    let targets = vec![config.ser_target; m];
    let t_pkt = config.packet_time();
    let initial_source = source_energy.to_vec();
    let initial_relay = relay_energy.to_vec();
    let initial_energy: f64 = source_energy.iter().chain(relay_energy).sum();

    let mut state = NetworkState {
        source_energy: source_energy.to_vec(),
        relay_energy: relay_energy.to_vec(),
        links: Vec::new(),
        packets_delivered: 0,
        packets_since_update: 0,
    };
    let mut consumed = 0.0;
    let mut updates = 0u64;
    let mut timeline = config.record_timeline.then(Vec::new);
    let mut dying_node = None;
    let mut truncated = false;

    let reassign = |state: &mut NetworkState, timeline: &mut Option<Vec<Snapshot>>| -> Result<()> {
        let a = assign_with_table(
            table,
            &state.source_energy,
            &state.relay_energy,
            config.strategy,
            &targets,
            config.srs_order,
        )?;
        state.links = a.pairs.iter().map(|p| (p.relay, p.ps, p.pr)).collect();
        if let Some(tl) = timeline {
            tl.push(Snapshot {
                packets_delivered: state.packets_delivered,
                residual_energy: state.source_energy.iter().chain(&state.relay_energy).sum(),
                pairs: a.pairs,
            });
        }
        Ok(())
    };

    reassign(&mut state, &mut timeline)?;
    loop {
        if state.packets_delivered >= config.max_packets {
            truncated = true;
            break;
        }
        if state.packets_since_update >= config.update_interval_packets {
            // a node drained to nothing is dead even if it is not scheduled next
            let dead = (0..m)
                .find(|&i| depleted(state.source_energy[i], initial_source[i]))
                .map(NodeId::Source)
                .or_else(|| {
                    (0..initial_relay.len())
                        .find(|&j| depleted(state.relay_energy[j], initial_relay[j]))
                        .map(NodeId::Relay)
                });
            if dead.is_some() {
                dying_node = dead;
                break;
            }
            reassign(&mut state, &mut timeline)?;
            state.packets_since_update = 0;
            updates += 1;
        }

        let s = (state.packets_delivered % m as u64) as usize;
        let (r, ps, pr) = state.links[s];
        let source_cost = ps * t_pkt;
        let relay_cost = pr * t_pkt;
        if !can_afford(state.source_energy[s], source_cost) {
            dying_node = Some(NodeId::Source(s));
            break;
        }
        if !can_afford(state.relay_energy[r], relay_cost) {
            dying_node = Some(NodeId::Relay(r));
            break;
        }
        let ds = source_cost.min(state.source_energy[s]);
        let dr = relay_cost.min(state.relay_energy[r]);
        state.source_energy[s] -= ds;
        state.relay_energy[r] -= dr;
        consumed += ds + dr;
        state.packets_delivered += 1;
        state.packets_since_update += 1;
    }

    let mut result = LifetimeResult {
        lifetime_packets: state.packets_delivered,
        dying_node,
        truncated,
        initial_energy,
        consumed_energy: consumed,
        residual_source_energy: state.source_energy,
        residual_relay_energy: state.relay_energy,
        avg_energy_per_packet: None,
        wasted_energy: 0.0,
        updates,
        timeline,
    };
    let (avg, wasted) = energy_metrics(&result);
    result.avg_energy_per_packet = avg;
    result.wasted_energy = wasted;
    Ok(result)
}

/// Average consumed energy per delivered packet (absent for a run that
/// delivered nothing) and the total residual energy left at expiry.
pub fn energy_metrics(result: &LifetimeResult) -> (Option<f64>, f64) {
    let wasted = result
        .residual_source_energy
        .iter()
        .chain(&result.residual_relay_energy)
        .sum();
    let avg = (result.lifetime_packets > 0).then(|| result.consumed_energy / result.lifetime_packets as f64);
    (avg, wasted)
}
