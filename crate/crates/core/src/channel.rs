//! Link variances and the analytic end-to-end SER of an amplify-and-forward
//! source–relay pair with maximal-ratio combining at the base station.
//!
//! All quantities are linear (watts, not dB). The SER expression is the
//! moderate-to-high SNR approximation and is used as the exact model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Reference distance for the power gain factor, in meters. Links shorter
/// than this are rejected rather than clamped.
pub const REFERENCE_DISTANCE: f64 = 1.0;

/// Propagation and receiver parameters shared by every link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Path-loss constant.
    pub eta: f64,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Noise power at relays and the base station, in watts.
    pub noise_power: f64,
    /// Power gain at the 1 m reference distance (linear).
    pub power_gain: f64,
    /// Modulation-dependent constant `K`.
    pub mod_index: f64,
}

impl SystemParams {
    pub fn new(eta: f64, alpha: f64, noise_power: f64, power_gain: f64, mod_index: f64) -> Result<Self> {
        let params = SystemParams {
            eta,
            alpha,
            noise_power,
            power_gain,
            mod_index,
        };
        params.validate()?;
        Ok(params)
    }

    /// Builds parameters from a noise power in dBm and a power gain in dB.
    pub fn from_db(eta: f64, alpha: f64, noise_dbm: f64, gain_db: f64, mod_index: f64) -> Result<Self> {
        Self::new(eta, alpha, dbm_to_watts(noise_dbm), db_to_linear(gain_db), mod_index)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("eta", self.eta),
            ("alpha", self.alpha),
            ("noise_power", self.noise_power),
            ("power_gain", self.power_gain),
            ("mod_index", self.mod_index),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {value}")));
            }
        }
        Ok(())
    }
}

impl Default for SystemParams {
    /// η = 1, α = 3.5, N0 = −134 dBm, G0 = −70 dB, K = 2.
    fn default() -> Self {
        SystemParams {
            eta: 1.0,
            alpha: 3.5,
            noise_power: dbm_to_watts(-134.0),
            power_gain: db_to_linear(-70.0),
            mod_index: 2.0,
        }
    }
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// A battery-powered node: its position and its (residual) energy in joules.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub position: Point,
    pub energy: f64,
}

impl Node {
    pub fn new(position: Point, energy: f64) -> Self {
        Node { position, energy }
    }
}

/// Sources, candidate relays and the base station.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    sources: Vec<Node>,
    relays: Vec<Node>,
    bs: Point,
}

impl Topology {
    /// Validates and builds a topology. Requires at least one source, at
    /// least as many relays as sources, positive energies, and every
    /// node–node and node–BS distance at or above the reference distance.
    pub fn new(sources: Vec<Node>, relays: Vec<Node>, bs: Point) -> Result<Self> {
        if sources.is_empty() {
            return Err(Error::InvalidTopology("no source nodes".into()));
        }
        if relays.len() < sources.len() {
            return Err(Error::InvalidTopology(format!(
                "{} relays cannot serve {} sources",
                relays.len(),
                sources.len()
            )));
        }
        let labelled: Vec<(String, &Node)> = sources
            .iter()
            .enumerate()
            .map(|(i, n)| (format!("source {i}"), n))
            .chain(relays.iter().enumerate().map(|(j, n)| (format!("relay {j}"), n)))
            .collect();
        for (label, node) in &labelled {
            if !(node.energy.is_finite() && node.energy > 0.0) {
                return Err(Error::InvalidTopology(format!("{label} has non-positive energy {}", node.energy)));
            }
            if !(node.position.x.is_finite() && node.position.y.is_finite()) {
                return Err(Error::InvalidTopology(format!("{label} has a non-finite position")));
            }
            let d = node.position.distance(&bs);
            if d < REFERENCE_DISTANCE {
                return Err(Error::InvalidTopology(format!("{label} is {d} m from the base station")));
            }
        }
        for (i, (la, a)) in labelled.iter().enumerate() {
            for (lb, b) in &labelled[i + 1..] {
                let d = a.position.distance(&b.position);
                if d < REFERENCE_DISTANCE {
                    return Err(Error::InvalidTopology(format!("{la} and {lb} are only {d} m apart")));
                }
            }
        }
        Ok(Topology { sources, relays, bs })
    }

    pub fn sources(&self) -> &[Node] {
        &self.sources
    }

    pub fn relays(&self) -> &[Node] {
        &self.relays
    }

    pub fn bs(&self) -> Point {
        self.bs
    }

    pub fn num_sources(&self) -> usize {
        self.sources.len()
    }

    pub fn num_relays(&self) -> usize {
        self.relays.len()
    }

    pub fn total_energy(&self) -> f64 {
        self.sources.iter().chain(&self.relays).map(|n| n.energy).sum()
    }

    /// Same geometry with new energies. Energies must stay positive.
    pub fn with_energies(&self, source_energy: &[f64], relay_energy: &[f64]) -> Result<Self> {
        if source_energy.len() != self.sources.len() || relay_energy.len() != self.relays.len() {
            return Err(Error::InvalidTopology("energy vector length mismatch".into()));
        }
        let mut next = self.clone();
        for (node, &e) in next.sources.iter_mut().zip(source_energy) {
            node.energy = e;
        }
        for (node, &e) in next.relays.iter_mut().zip(relay_energy) {
            node.energy = e;
        }
        if let Some(bad) = source_energy.iter().chain(relay_energy).find(|e| !(e.is_finite() && **e > 0.0)) {
            return Err(Error::InvalidTopology(format!("non-positive energy {bad}")));
        }
        Ok(next)
    }
}

/// SER coefficients of one source–relay pair: `p_e = a/ps² + b/(ps·pr)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairCoefficients {
    pub a: f64,
    pub b: f64,
}

/// Average channel variance `η·D^(−α)` of a link of length `distance`.
pub fn link_variance(distance: f64, params: &SystemParams) -> Result<f64> {
    if distance.is_nan() || distance < REFERENCE_DISTANCE {
        return Err(Error::InvalidTopology(format!(
            "link distance {distance} m is below the {REFERENCE_DISTANCE} m reference distance"
        )));
    }
    Ok(params.eta * distance.powf(-params.alpha))
}

fn coefficient_scale(params: &SystemParams) -> f64 {
    let n0 = params.noise_power;
    let k = params.mod_index;
    let g0 = params.power_gain;
    3.0 * n0 * n0 / (4.0 * k * k * g0 * g0)
}

fn coefficients_from_variances(scale: f64, var_sd: f64, var_sr: f64, var_rd: f64) -> PairCoefficients {
    PairCoefficients {
        a: scale / (var_sd * var_sr),
        b: scale / (var_sd * var_rd),
    }
}

pub fn ser_coefficients(
    topology: &Topology,
    source: usize,
    relay: usize,
    params: &SystemParams,
) -> Result<PairCoefficients> {
    let s = topology
        .sources
        .get(source)
        .ok_or_else(|| Error::InvalidParameter(format!("source index {source} out of range")))?;
    let r = topology
        .relays
        .get(relay)
        .ok_or_else(|| Error::InvalidParameter(format!("relay index {relay} out of range")))?;
    let var_sd = link_variance(s.position.distance(&topology.bs), params)?;
    let var_sr = link_variance(s.position.distance(&r.position), params)?;
    let var_rd = link_variance(r.position.distance(&topology.bs), params)?;
    Ok(coefficients_from_variances(coefficient_scale(params), var_sd, var_sr, var_rd))
}

/// End-to-end SER for source power `ps` and relay power `pr`, both in watts.
pub fn end_to_end_ser(ps: f64, pr: f64, coeff: &PairCoefficients) -> Result<f64> {
    if !(ps > 0.0 && pr > 0.0) {
        return Err(Error::Domain(format!("transmit powers must be positive (ps={ps}, pr={pr})")));
    }
    Ok(coeff.a / (ps * ps) + coeff.b / (ps * pr))
}

/// Geometry-derived quantities of a topology that never change during a
/// simulation: every pair's SER coefficients and each source's direct-link
/// variance.
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable {
    num_relays: usize,
    coeffs: Vec<PairCoefficients>,
    source_bs_variance: Vec<f64>,
}

impl PairTable {
    pub fn from_topology(topology: &Topology, params: &SystemParams) -> Result<Self> {
        params.validate()?;
        let scale = coefficient_scale(params);
        let relay_bs = topology
            .relays
            .iter()
            .map(|r| link_variance(r.position.distance(&topology.bs), params))
            .collect::<Result<Vec<_>>>()?;
        let mut coeffs = Vec::with_capacity(topology.num_sources() * topology.num_relays());
        let mut source_bs_variance = Vec::with_capacity(topology.num_sources());
        for s in &topology.sources {
            let var_sd = link_variance(s.position.distance(&topology.bs), params)?;
            source_bs_variance.push(var_sd);
            for (r, &var_rd) in topology.relays.iter().zip(&relay_bs) {
                let var_sr = link_variance(s.position.distance(&r.position), params)?;
                coeffs.push(coefficients_from_variances(scale, var_sd, var_sr, var_rd));
            }
        }
        Ok(PairTable {
            num_relays: topology.num_relays(),
            coeffs,
            source_bs_variance,
        })
    }

    /// Builds a table directly from coefficients, row-major by source.
    pub fn from_parts(coeffs: Vec<Vec<PairCoefficients>>, source_bs_variance: Vec<f64>) -> Result<Self> {
        let num_sources = coeffs.len();
        if num_sources == 0 || source_bs_variance.len() != num_sources {
            return Err(Error::InvalidParameter("coefficient rows and variances must match and be non-empty".into()));
        }
        let num_relays = coeffs[0].len();
        if num_relays < num_sources || coeffs.iter().any(|row| row.len() != num_relays) {
            return Err(Error::InvalidParameter("coefficient table must be rectangular with N >= M".into()));
        }
        let flat: Vec<PairCoefficients> = coeffs.into_iter().flatten().collect();
        if flat.iter().any(|c| !(c.a > 0.0 && c.b > 0.0 && c.a.is_finite() && c.b.is_finite())) {
            return Err(Error::InvalidParameter("SER coefficients must be positive and finite".into()));
        }
        if source_bs_variance.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::InvalidParameter("direct-link variances must be positive".into()));
        }
        Ok(PairTable {
            num_relays,
            coeffs: flat,
            source_bs_variance,
        })
    }

    pub fn num_sources(&self) -> usize {
        self.source_bs_variance.len()
    }

    pub fn num_relays(&self) -> usize {
        self.num_relays
    }

    pub fn coeff(&self, source: usize, relay: usize) -> PairCoefficients {
        self.coeffs[source * self.num_relays + relay]
    }

    pub fn source_bs_variance(&self, source: usize) -> f64 {
        self.source_bs_variance[source]
    }
}
