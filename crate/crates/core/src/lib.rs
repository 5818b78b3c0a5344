//! Resilient multi-dimensional consensus and distributed optimization for
//! multi-agent systems under simultaneous adversarial-agent and edge-targeted
//! denial-of-service attacks.
//!
//! Benign agents move toward an *auxiliary point* built from safe-kernel
//! points of their in-neighbors' states, holding the last received value on
//! any edge that is currently blocked. The optimization variant adds a
//! subgradient step on each agent's local convex cost.

pub mod analysis;
pub mod attacks;
pub mod error;
pub mod geometry;
pub mod graph;
pub mod optimization;
pub mod protocol;
pub mod scenario;
pub mod simulator;

pub use error::{Error, Result};
pub use graph::{Digraph, NodeId, Role};
pub use protocol::Policy;
pub use scenario::{load_scenario, Scenario, ScenarioConfig};
pub use simulator::{compare_policies, run, SimulationTrace};
