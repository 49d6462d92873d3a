//! Random topology generation and the plain-text topology file format.
//!
//! File format, one node per line, `#` starts a comment:
//!
//! ```text
//! bs 50 50
//! s  12.5 80.0 10
//! r  40.0 33.3 10
//! ```
//!
//! `s`/`source`, `r`/`relay` lines carry `x y energy`; the single `bs` line
//! carries `x y` and an optional, ignored energy column.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{Node, Point, Topology, REFERENCE_DISTANCE};
use crate::error::{Error, Result};

/// Identity of the generator behind every random topology. Part of the
/// reproducibility contract and echoed into CSV metadata.
pub const PRNG_DESCRIPTION: &str = "ChaCha8Rng (rand_chacha 0.3), seed_from_u64(seed), stream = topology index";

const MAX_DRAWS_PER_NODE: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Layout {
    pub area_side: f64,
    pub bs: Point,
    pub sources: usize,
    pub relays: usize,
    pub initial_energy: f64,
}

pub fn topology_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Uniformly placed sources, then relays, redrawing any position closer
/// than the reference distance to the BS or an already placed node.
pub fn generate_topology(seed: u64, index: u64, layout: &Layout) -> Result<Topology> {
    let mut rng = topology_rng(seed, index);
    let mut placed: Vec<Point> = Vec::with_capacity(layout.sources + layout.relays);
    for _ in 0..layout.sources + layout.relays {
        let mut draws = 0;
        let p = loop {
            if draws == MAX_DRAWS_PER_NODE {
                return Err(Error::TopologyRetries(draws));
            }
            draws += 1;
            let p = Point::new(rng.gen::<f64>() * layout.area_side, rng.gen::<f64>() * layout.area_side);
            let clear = p.distance(&layout.bs) >= REFERENCE_DISTANCE
                && placed.iter().all(|q| p.distance(q) >= REFERENCE_DISTANCE);
            if clear {
                break p;
            }
        };
        placed.push(p);
    }
    let nodes: Vec<Node> = placed.into_iter().map(|p| Node::new(p, layout.initial_energy)).collect();
    let (sources, relays) = nodes.split_at(layout.sources);
    Topology::new(sources.to_vec(), relays.to_vec(), layout.bs)
}

pub fn parse_topology(text: &str, path: &Path) -> Result<Topology> {
    let err = |line: usize, msg: String| Error::Parse {
        path: path.to_path_buf(),
        line,
        msg,
    };
    let mut sources = Vec::new();
    let mut relays = Vec::new();
    let mut bs = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let num = |k: usize| -> Result<f64> {
            let f = fields.get(k).ok_or_else(|| err(line_no, format!("missing column {}", k + 1)))?;
            f.parse::<f64>().map_err(|e| err(line_no, format!("bad number {f:?}: {e}")))
        };
        match fields[0].to_ascii_lowercase().as_str() {
            "s" | "source" => sources.push(Node::new(Point::new(num(1)?, num(2)?), num(3)?)),
            "r" | "relay" => relays.push(Node::new(Point::new(num(1)?, num(2)?), num(3)?)),
            "bs" | "d" => {
                if bs.is_some() {
                    return Err(err(line_no, "second base station".into()));
                }
                bs = Some(Point::new(num(1)?, num(2)?));
            }
            other => return Err(err(line_no, format!("unknown node kind {other:?}"))),
        }
        if fields.len() > 4 {
            return Err(err(line_no, "too many columns".into()));
        }
    }
    let bs = bs.ok_or_else(|| err(0, "no base station line".into()))?;
    Topology::new(sources, relays, bs)
}

pub fn read_topology(path: &Path) -> Result<Topology> {
    parse_topology(&std::fs::read_to_string(path)?, path)
}

pub fn format_topology(topology: &Topology) -> String {
    let mut out = String::new();
    let bs = topology.bs();
    writeln!(out, "bs {} {}", bs.x, bs.y).unwrap();
    for n in topology.sources() {
        writeln!(out, "s {} {} {}", n.position.x, n.position.y, n.energy).unwrap();
    }
    for n in topology.relays() {
        writeln!(out, "r {} {} {}", n.position.x, n.position.y, n.energy).unwrap();
    }
    out
}
