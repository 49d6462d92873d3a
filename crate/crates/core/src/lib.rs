//! Relay assignment and power allocation for multi-user amplify-and-forward
//! cooperative networks under a per-source symbol-error-rate constraint.
//!
//! - [`channel`]: path-loss link variances and the analytic end-to-end SER model
//! - [`power`]: closed-form per-pair power allocation for the GLM and MWTP policies
//! - [`matching`]: maximum, minimum-weight, bottleneck and minimum-bottleneck matching
//! - [`assignment`]: weight matrices, the SRS heuristic and the five strategies
//! - [`sim`]: packet-level network lifetime simulation
//! - [`harness`]: topology generation, experiment sweeps, CSV output and oracles
//!
//! ```
//! use coop_relay::channel::{Node, Point, SystemParams, Topology};
//! use coop_relay::assignment::{assign, Strategy};
//!
//! let topology = Topology::new(
//!     vec![Node::new(Point::new(10.0, 10.0), 10.0)],
//!     vec![Node::new(Point::new(30.0, 30.0), 10.0), Node::new(Point::new(80.0, 20.0), 10.0)],
//!     Point::new(50.0, 50.0),
//! )
//! .unwrap();
//! let params = SystemParams::default();
//! let result = assign(&topology, &params, Strategy::GLM_MBM, &[1e-4]).unwrap();
//! assert_eq!(result.pairs.len(), 1);
//! ```

pub mod assignment;
pub mod channel;
pub mod error;
pub mod harness;
pub mod matching;
pub mod power;
pub mod sim;

pub use error::{Error, Result};
