//! Monte Carlo laboratory for fronts of the one-dimensional FA-1f
//! kinetically constrained model and the threshold contact process.
//!
//! * [`randomness`]: keyed, shiftable clock and coin collections.
//! * [`lattice`]: windowed configurations, fronts, gap events.
//! * [`dynamics`]: the event-driven engine, single or coupled.
//! * [`restart`]: FA-1f dominated by a restarted contact process.
//! * [`estimators`]: velocity, CLT, covariance, TV and tail statistics.
//! * [`oracle`]: exact generators, transient laws and maximal couplings.
//! * [`experiment`]: ensemble drivers behind the `frontlab` binary.

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod estimators;
pub mod experiment;
pub mod lattice;
pub mod oracle;
mod queue;
pub mod randomness;
pub mod restart;

pub use dynamics::{
    evolve, evolve_coupled, evolve_finite_volume, extinction_time, q_bar, CoupledPair,
    EngineOptions, FrontPath, ModelKind, ModelParams, Simulation, StopReason, WindowPolicy,
};
pub use error::{Error, Result};
pub use lattice::{make_initial, InitialCondition, Pattern, SpinConfig};
pub use randomness::ClockCollection;
