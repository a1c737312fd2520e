//! Throughput analysis and simulation toolkit for a wireless-powered
//! two-way amplify-and-forward relay that accumulates harvested energy in a
//! finite battery via power splitting.
//!
//! The analytical route models the battery as a finite-state Markov chain
//! over discretized energy levels, solves its stationary distribution, and
//! evaluates a closed-form success probability over Nakagami-m fading. An
//! independent Monte Carlo simulator ([`sim`]) and quadrature reference
//! implementations ([`oracle`]) cross-validate the closed forms.

pub mod chain;
pub mod channel;
pub mod error;
pub mod gammasum;
pub mod opt;
pub mod oracle;
pub mod sim;
pub mod specfun;
pub mod throughput;

pub use chain::{BatteryModel, StationaryDist, TransitionMatrix};
pub use channel::{SnrConstants, SystemParams, Topology};
pub use error::{Error, Result};
pub use gammasum::GammaPair;
pub use sim::{SimConfig, SimResult};
pub use throughput::{PhiParams, ThroughputResult};
