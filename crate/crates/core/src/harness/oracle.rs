//! Exhaustive-search oracles for small instances. Slow by construction;
//! used to cross-check the matching solvers and the strategies.

use std::cmp::Ordering;

use crate::assignment::{AssignedPair, Assignment};
use crate::channel::{PairTable, SystemParams, Topology};
use crate::error::{Error, Result};
use crate::matching::{lex_cmp, WeightMatrix};
use crate::power::{allocate, PairContext, Policy};

pub const MAX_ORACLE_SOURCES: usize = 7;
pub const MAX_ORACLE_RELAYS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Minimize the sum of pair weights.
    Sum,
    /// Minimize the largest pair weight.
    Bottleneck,
    /// Minimize the descending-sorted weight vector lexicographically.
    LexBottleneck,
}

/// All permutations of `0..n` in lexicographic order.
pub fn permutations(n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut next = Some((0..n).collect::<Vec<_>>());
    std::iter::from_fn(move || {
        let current = next.take()?;
        let mut p = current.clone();
        if let Some(i) = (1..p.len()).rev().find(|&i| p[i - 1] < p[i]) {
            let j = (i..p.len()).rev().find(|&j| p[j] > p[i - 1]).unwrap();
            p.swap(i - 1, j);
            p[i..].reverse();
            next = Some(p);
        }
        Some(current)
    })
}

fn real_weights<'a>(w: &'a WeightMatrix, perm: &'a [usize]) -> impl Iterator<Item = f64> + 'a {
    (0..w.m_real()).map(move |r| w.get(r, perm[r]))
}

pub fn exhaustive_min_sum(w: &WeightMatrix) -> f64 {
    permutations(w.n())
        .map(|p| real_weights(w, &p).sum::<f64>())
        .min_by(f64::total_cmp)
        .unwrap()
}

pub fn exhaustive_min_max(w: &WeightMatrix) -> f64 {
    permutations(w.n())
        .map(|p| real_weights(w, &p).fold(0.0, f64::max))
        .min_by(f64::total_cmp)
        .unwrap()
}

/// Lexicographically smallest descending-sorted real-weight vector.
pub fn exhaustive_lex_min(w: &WeightMatrix) -> Vec<f64> {
    permutations(w.n())
        .map(|p| descending(real_weights(w, &p).collect()))
        .min_by(|a, b| lex_cmp(a, b))
        .unwrap()
}

fn descending(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn compare(objective: Objective, a: &[f64], b: &[f64]) -> Ordering {
    match objective {
        Objective::Sum => a.iter().sum::<f64>().total_cmp(&b.iter().sum::<f64>()),
        Objective::Bottleneck => a.iter().copied().fold(0.0, f64::max).total_cmp(&b.iter().copied().fold(0.0, f64::max)),
        Objective::LexBottleneck => lex_cmp(&descending(a.to_vec()), &descending(b.to_vec())),
    }
}

/// Best assignment under `objective` by enumerating every injective
/// source → relay map. Ties keep the first map in lexicographic order.
pub fn oracle_assign(
    topology: &Topology,
    params: &SystemParams,
    policy: Policy,
    objective: Objective,
    ser_targets: &[f64],
) -> Result<Assignment> {
    let (m, n) = (topology.num_sources(), topology.num_relays());
    if m > MAX_ORACLE_SOURCES || n > MAX_ORACLE_RELAYS {
        return Err(Error::OracleTooLarge { sources: m, relays: n });
    }
    if ser_targets.len() != m {
        return Err(Error::InvalidParameter("one SER target per source required".into()));
    }
    let table = PairTable::from_topology(topology, params)?;
    let ctx = |i: usize, j: usize| {
        PairContext::new(table.coeff(i, j), topology.sources()[i].energy, topology.relays()[j].energy, ser_targets[i])
    };
    let mut weights = vec![vec![0.0; n]; m];
    for (i, row) in weights.iter_mut().enumerate() {
        for (j, cell) in row.iter_mut().enumerate() {
            *cell = allocate(policy, &ctx(i, j)?).weight;
        }
    }

    let mut best: Option<(Vec<usize>, Vec<f64>)> = None;
    let mut chosen = Vec::with_capacity(m);
    let mut used = vec![false; n];
    enumerate_maps(m, n, &mut chosen, &mut used, &mut |map| {
        let w: Vec<f64> = map.iter().enumerate().map(|(i, &j)| weights[i][j]).collect();
        let better = match &best {
            None => true,
            Some((_, bw)) => compare(objective, &w, bw) == Ordering::Less,
        };
        if better {
            best = Some((map.to_vec(), w));
        }
    });

    let (map, _) = best.expect("N >= M guarantees at least one map");
    let pairs = map
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let al = allocate(policy, &ctx(i, j)?);
            Ok(AssignedPair {
                source: i,
                relay: j,
                ps: al.ps,
                pr: al.pr,
                weight: al.weight,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assignment { pairs, certified: None })
}

fn enumerate_maps(m: usize, n: usize, chosen: &mut Vec<usize>, used: &mut [bool], visit: &mut impl FnMut(&[usize])) {
    if chosen.len() == m {
        visit(chosen);
        return;
    }
    for j in 0..n {
        if !used[j] {
            used[j] = true;
            chosen.push(j);
            enumerate_maps(m, n, chosen, used, visit);
            chosen.pop();
            used[j] = false;
        }
    }
}
