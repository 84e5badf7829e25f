//! Numerical laboratory for disordered pinning and product-spin models under
//! exponentially tilted disorder.
//!
//! The crate is organized around the objects it simulates:
//!
//! * [`disorder`] — disorder laws with locally finite exponential moments:
//!   moment generating function, exact tilting, tilted expectations, seeded
//!   sampling with exact likelihood ratios.
//! * [`constants`] — the explicit constants of the smoothing and
//!   tilt-vs-shift comparison inequalities: `B`, `c±`, `C±`, `F`, `F⁻¹`, `A`.
//! * [`pinning`] — the renewal pinning model: quenched partition-function
//!   recursion, parallel Monte Carlo free energy, homogeneous solver,
//!   critical-point location.
//! * [`toy`] — exact i.i.d. product-spin oracles, restricted free energies,
//!   the sup decomposition over empirical-mean windows, and the signed-spin
//!   counterexample.
//! * [`rarestretch`] — rare-stretch gain/cost experiments with importance
//!   sampling and the certified free-energy lower bound.
//! * [`verify`] — named, reproducible checks producing machine-readable
//!   pass/fail reports.
//! * [`config`], [`commands`], [`golden`] — experiment configuration, the
//!   command runners behind the CLI, and golden-fixture regression replay.

pub mod commands;
pub mod config;
pub mod constants;
pub mod disorder;
pub mod error;
pub mod golden;
pub mod numeric;
pub mod pinning;
pub mod rarestretch;
pub mod seeds;
pub mod toy;
pub mod verify;



pub use disorder::DisorderSpec;
pub use error::{Error, Result};

pub use config::ExperimentConfig;
pub use constants::ConstantsReport;
pub use pinning::{FreeEnergyEstimate, RenewalLaw};
pub use rarestretch::StretchExperiment;
pub use toy::ProductSpinSpec;
pub use verify::CheckReport;
