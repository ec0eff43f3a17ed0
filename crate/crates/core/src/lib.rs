//! Simulator for one-round distributed estimation in the Gaussian sequence
//! model under per-machine communication budgets.
//!
//! Each of `m` machines observes `X_ij = theta_i + Z_ij / sqrt(n)` for a
//! coefficient sequence `theta` in a Sobolev ellipsoid, sends at most `b`
//! bits, and a center combines the messages. The crate covers the problem
//! model, a dithered quantizer, the quantize-and-average protocol, Bayes
//! risk lower bounds, and a Monte Carlo harness for risk sweeps.
//!
//! Everything is generic over the scalar type; the aliases at the crate
//! root fix it to `f64`.

pub mod error;
pub mod harness;
pub mod intmath;
pub mod lowerbound;
pub mod model;
pub mod protocol;
pub mod quantizer;
pub mod rng;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use model::Regime;
pub use scalar::Real;

pub type ProblemConfig = model::ProblemConfig<f64>;
pub type CoefficientSequence = model::CoefficientSequence<f64>;
pub type CoefficientSpec = model::CoefficientSpec<f64>;
pub type CoefficientKind = model::CoefficientKind<f64>;
pub type ObservationRow = model::ObservationRow<f64>;
pub type QuantizerSpec = quantizer::QuantizerSpec<f64>;
pub type ProtocolPlan = protocol::ProtocolPlan<f64>;
pub type Estimate = protocol::Estimate<f64>;
pub type PriorSpec = lowerbound::PriorSpec<f64>;
pub type LowerBoundInstance = lowerbound::LowerBoundInstance<f64>;
pub type LowerBoundSolution = lowerbound::LowerBoundSolution<f64>;
pub type BoundReport = lowerbound::BoundReport<f64>;
pub type RiskReport = harness::RiskReport<f64>;
pub type SweepSpec = harness::SweepSpec<f64>;
pub type SweepTable = harness::SweepTable<f64>;
