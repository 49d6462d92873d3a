//! Relay assignment strategies: a policy (how a pair is weighted and powered)
//! combined with an assignment algorithm over the padded weight matrix.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::channel::{PairTable, SystemParams, Topology};
use crate::error::{Error, Result};
use crate::matching::{
    bottleneck_matching, hungarian_min_weight, minimum_bottleneck_matching, Matching, WeightMatrix,
};
use crate::power::{allocate, PairContext, Policy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Algorithm {
    /// Bottleneck matching.
    Bm,
    /// Minimum bottleneck matching.
    Mbm,
    /// Minimum-weight (Hungarian) matching.
    Mwm,
    /// Greedy suboptimal relay selection.
    Srs,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Bm => "BM",
            Algorithm::Mbm => "MBM",
            Algorithm::Mwm => "MWM",
            Algorithm::Srs => "SRS",
        })
    }
}

/// One of the five supported policy/algorithm combinations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Strategy {
    policy: Policy,
    algorithm: Algorithm,
}

impl Strategy {
    pub const GLM_BM: Strategy = Strategy::raw(Policy::Glm, Algorithm::Bm);
    pub const GLM_MBM: Strategy = Strategy::raw(Policy::Glm, Algorithm::Mbm);
    pub const GLM_SRS: Strategy = Strategy::raw(Policy::Glm, Algorithm::Srs);
    pub const MWTP_MWM: Strategy = Strategy::raw(Policy::Mwtp, Algorithm::Mwm);
    pub const MWTP_SRS: Strategy = Strategy::raw(Policy::Mwtp, Algorithm::Srs);

    pub const ALL: [Strategy; 5] = [
        Strategy::GLM_BM,
        Strategy::GLM_MBM,
        Strategy::GLM_SRS,
        Strategy::MWTP_MWM,
        Strategy::MWTP_SRS,
    ];

    const fn raw(policy: Policy, algorithm: Algorithm) -> Self {
        Strategy { policy, algorithm }
    }

    pub fn new(policy: Policy, algorithm: Algorithm) -> Result<Self> {
        let s = Strategy::raw(policy, algorithm);
        if Strategy::ALL.contains(&s) {
            Ok(s)
        } else {
            Err(Error::InvalidParameter(format!("{policy}-{algorithm} is not a supported strategy")))
        }
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }

    pub fn algorithm(&self) -> Algorithm {
        self.algorithm
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.policy, self.algorithm)
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let normalized = s.trim().to_ascii_uppercase().replace(['_', ' '], "-");
        Strategy::ALL
            .into_iter()
            .find(|st| st.to_string() == normalized)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy {s:?}")))
    }
}

impl Serialize for Strategy {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Which end of the priority order SRS serves first.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SrsOrder {
    /// Largest priority metric first: energy-poor or distant sources pick first.
    #[default]
    HighestFirst,
    /// Smallest priority metric first.
    LowestFirst,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssignedPair {
    pub source: usize,
    pub relay: usize,
    pub ps: f64,
    pub pr: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    /// One entry per source, in source order.
    pub pairs: Vec<AssignedPair>,
    /// Minimum-bottleneck certification flag; only set by MBM.
    pub certified: Option<bool>,
}

impl Assignment {
    pub fn max_weight(&self) -> f64 {
        self.pairs.iter().map(|p| p.weight).fold(0.0, f64::max)
    }

    pub fn total_weight(&self) -> f64 {
        self.pairs.iter().map(|p| p.weight).sum()
    }
}

fn check_targets(targets: &[f64], sources: usize) -> Result<()> {
    if targets.len() != sources {
        return Err(Error::InvalidParameter(format!(
            "{} SER targets given for {sources} sources",
            targets.len()
        )));
    }
    if let Some(t) = targets.iter().find(|t| !(**t > 0.0 && **t < 1.0)) {
        return Err(Error::InvalidParameter(format!("SER target {t} outside (0, 1)")));
    }
    Ok(())
}

/// Pair-weight matrix of the topology under `policy`, padded with zero rows.
pub fn build_weight_matrix(
    topology: &Topology,
    params: &SystemParams,
    policy: Policy,
    ser_targets: &[f64],
) -> Result<WeightMatrix> {
    let table = PairTable::from_topology(topology, params)?;
    let (es, er) = energies(topology);
    weight_matrix_from_table(&table, &es, &er, policy, ser_targets)
}

fn energies(topology: &Topology) -> (Vec<f64>, Vec<f64>) {
    (
        topology.sources().iter().map(|n| n.energy).collect(),
        topology.relays().iter().map(|n| n.energy).collect(),
    )
}

fn context(table: &PairTable, es: &[f64], er: &[f64], targets: &[f64], i: usize, j: usize) -> Result<PairContext> {
    PairContext::new(table.coeff(i, j), es[i], er[j], targets[i])
}

pub fn weight_matrix_from_table(
    table: &PairTable,
    source_energy: &[f64],
    relay_energy: &[f64],
    policy: Policy,
    ser_targets: &[f64],
) -> Result<WeightMatrix> {
    let (m, n) = (table.num_sources(), table.num_relays());
    check_targets(ser_targets, m)?;
    if source_energy.len() != m || relay_energy.len() != n {
        return Err(Error::InvalidParameter("energy vector length mismatch".into()));
    }
    let real = (0..m)
        .map(|i| {
            (0..n)
                .map(|j| Ok(allocate(policy, &context(table, source_energy, relay_energy, ser_targets, i, j)?).weight))
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    WeightMatrix::from_real_rows(real)
}

/// SRS source priority: larger for energy-poor sources and for sources with
/// a weak direct link to the base station.
pub fn priority_metric(es: f64, sigma_sd2: f64) -> f64 {
    debug_assert!(es > 0.0 && sigma_sd2 > 0.0);
    1.0 / (es * sigma_sd2)
}

/// Greedy relay selection: sources in priority order each take their
/// cheapest still-free relay. Dummy rows then take the leftover columns.
pub fn srs_select(w: &WeightMatrix, priorities: &[f64], order: SrsOrder) -> Matching {
    let (n, m) = (w.n(), w.m_real());
    assert_eq!(priorities.len(), m, "one priority per real source");
    let mut sources: Vec<usize> = (0..m).collect();
    // stable sort keeps lower source indices first on ties
    match order {
        SrsOrder::HighestFirst => sources.sort_by(|&a, &b| priorities[b].total_cmp(&priorities[a])),
        SrsOrder::LowestFirst => sources.sort_by(|&a, &b| priorities[a].total_cmp(&priorities[b])),
    }
    let mut taken = vec![false; n];
    let mut pairing = vec![usize::MAX; n];
    for s in sources {
        let row = w.row(s);
        let best = (0..n)
            .filter(|&j| !taken[j])
            .min_by(|&a, &b| row[a].total_cmp(&row[b]))
            .expect("a free relay remains for every source");
        taken[best] = true;
        pairing[s] = best;
    }
    let mut free = (0..n).filter(|&j| !taken[j]);
    for slot in pairing.iter_mut().skip(m) {
        *slot = free.next().expect("column count matches row count");
    }
    Matching { pairing }
}

/// Relay assignment plus transmit powers under `strategy`.
pub fn assign(
    topology: &Topology,
    params: &SystemParams,
    strategy: Strategy,
    ser_targets: &[f64],
) -> Result<Assignment> {
    let table = PairTable::from_topology(topology, params)?;
    let (es, er) = energies(topology);
    assign_with_table(&table, &es, &er, strategy, ser_targets, SrsOrder::default())
}

/// Same as [`assign`], on precomputed geometry and explicit residual energies.
pub fn assign_with_table(
    table: &PairTable,
    source_energy: &[f64],
    relay_energy: &[f64],
    strategy: Strategy,
    ser_targets: &[f64],
    srs_order: SrsOrder,
) -> Result<Assignment> {
    let policy = strategy.policy();
    let w = weight_matrix_from_table(table, source_energy, relay_energy, policy, ser_targets)?;
    let (matching, certified) = match strategy.algorithm() {
        Algorithm::Bm => (bottleneck_matching(&w).matching, None),
        Algorithm::Mbm => {
            let r = minimum_bottleneck_matching(&w);
            (r.matching, Some(r.certified))
        }
        Algorithm::Mwm => (hungarian_min_weight(&w).0, None),
        Algorithm::Srs => {
            let priorities: Vec<f64> = (0..table.num_sources())
                .map(|i| priority_metric(source_energy[i], table.source_bs_variance(i)))
                .collect();
            (srs_select(&w, &priorities, srs_order), None)
        }
    };
    let pairs = matching
        .real_pairs(w.m_real())
        .map(|(i, j)| {
            let al = allocate(policy, &context(table, source_energy, relay_energy, ser_targets, i, j)?);
            Ok(AssignedPair {
                source: i,
                relay: j,
                ps: al.ps,
                pr: al.pr,
                weight: al.weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment { pairs, certified })
}
