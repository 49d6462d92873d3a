//! Per-pair transmit power allocation meeting the SER target with equality.
//!
//! GLM equalizes the source and relay lifetimes of the pair; its weight is
//! the inverse pair lifetime (1/s). MWTP minimizes `ps/es + pr/er`; its
//! weight is that minimum (W/J). Weights are only ever compared within one
//! policy.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::channel::PairCoefficients;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    /// Group lifetime maximization.
    #[serde(rename = "GLM")]
    Glm,
    /// Minimum weighted total power.
    #[serde(rename = "MWTP")]
    Mwtp,
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Policy::Glm => "GLM",
            Policy::Mwtp => "MWTP",
        })
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "GLM" => Ok(Policy::Glm),
            "MWTP" => Ok(Policy::Mwtp),
            _ => Err(Error::InvalidParameter(format!("unknown policy {s:?}"))),
        }
    }
}

/// Everything the allocator needs to know about one candidate pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairContext {
    pub coeff: PairCoefficients,
    /// Source residual energy, joules.
    pub es: f64,
    /// Relay residual energy, joules.
    pub er: f64,
    pub ser_target: f64,
}

impl PairContext {
    pub fn new(coeff: PairCoefficients, es: f64, er: f64, ser_target: f64) -> Result<Self> {
        let ctx = PairContext {
            coeff,
            es,
            er,
            ser_target,
        };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn validate(&self) -> Result<()> {
        let PairCoefficients { a, b } = self.coeff;
        if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
            return Err(Error::Domain(format!("SER coefficients must be positive (a={a}, b={b})")));
        }
        if !(self.es > 0.0 && self.er > 0.0 && self.es.is_finite() && self.er.is_finite()) {
            return Err(Error::Domain(format!(
                "residual energies must be positive (es={}, er={})",
                self.es, self.er
            )));
        }
        if !(self.ser_target > 0.0 && self.ser_target < 1.0) {
            return Err(Error::Domain(format!("SER target {} outside (0, 1)", self.ser_target)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairAllocation {
    pub ps: f64,
    pub pr: f64,
    pub weight: f64,
}

/// Lifetime-equalizing allocation: `es/ps = er/pr` on the SER-equality curve.
pub fn glm_allocate(ctx: &PairContext) -> PairAllocation {
    let PairCoefficients { a, b } = ctx.coeff;
    let (es, er, p) = (ctx.es, ctx.er, ctx.ser_target);
    let numer = a * er + b * es;
    let ps = (numer / (er * p)).sqrt();
    let pr = ps * er / es;
    let weight = (numer / (es * es * er * p)).sqrt();
    PairAllocation { ps, pr, weight }
}

/// Minimizer of `ps/es + pr/er` on the SER-equality curve.
pub fn mwtp_allocate(ctx: &PairContext) -> PairAllocation {
    let PairCoefficients { a, b } = ctx.coeff;
    let (es, er, p) = (ctx.es, ctx.er, ctx.ser_target);
    let c = b * es / (a * er);
    // p·ps²/a − 1, kept apart so the relay-power denominator is free of cancellation
    let excess = (c + (c * (c + 8.0)).sqrt()) / 2.0;
    let ps = (a * (1.0 + excess) / p).sqrt();
    let pr = b * ps / (a * excess);
    PairAllocation {
        ps,
        pr,
        weight: ps / es + pr / er,
    }
}

pub fn allocate(policy: Policy, ctx: &PairContext) -> PairAllocation {
    match policy {
        Policy::Glm => glm_allocate(ctx),
        Policy::Mwtp => mwtp_allocate(ctx),
    }
}

pub fn pair_weight(policy: Policy, ctx: &PairContext) -> f64 {
    allocate(policy, ctx).weight
}

/// Relay power that meets the SER target exactly for a given source power,
/// or `None` when `ps` is too small for any relay power to suffice.
pub fn relay_power_on_target(coeff: &PairCoefficients, ser_target: f64, ps: f64) -> Option<f64> {
    let denom = ser_target * ps * ps - coeff.a;
    (denom > 0.0).then(|| coeff.b * ps / denom)
}
