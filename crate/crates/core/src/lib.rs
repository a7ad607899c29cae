//! Slotted simulator for prediction-based target tracking in wireless sensor
//! networks.
//!
//! A single target crosses a field of battery-powered sensors. In the
//! prediction-based method only the nodes near the target's predicted next
//! position are kept awake; in the comparison baseline every node senses all
//! the time. Both run over the same slotted p-persistent MAC and the same
//! first-order radio energy model, and report energy, activity, throughput,
//! delay and delivery figures.

pub mod bench;
pub mod config;
pub mod energy;
pub mod error;
pub mod field;
pub mod mac;
pub mod metrics;
pub mod mobility;
pub mod protocol;
pub mod report;
pub mod rng;
pub mod sim;
pub mod sweep;

pub use config::{Method, ScenarioConfig};
pub use error::{Result, SimError};
pub use field::{NodeField, NodeId, NodeMode, Point};
pub use report::RunReport;
pub use sim::{run, run_baseline};
