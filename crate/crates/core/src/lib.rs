//! Simulation and spectral estimation for long-range dependent discrete-time
//! trawl processes.
//!
//! The crate is organized bottom-up:
//!
//! * [`seeds`]: seed-process families and their exact moments,
//! * [`trawl`]: height sequences, the trawl model, its exact autocovariance
//!   and sample-path simulation,
//! * [`spectral`]: empirical autocovariance, periodogram, kernel spectral
//!   estimation, the ARFIMA(0, d, 0) density and trigonometric polynomials,
//! * [`whittle`]: the additive-form parametric Whittle estimator, local
//!   Whittle and the ARFIMA reduced contrast,
//! * [`oracle`]: brute-force validators for the identities and decay rates,
//! * [`experiment`]: the Monte Carlo harness behind the estimator tables.

pub mod error;
pub mod experiment;
pub mod optim;
pub mod oracle;
pub mod rng;
pub mod seeds;
pub mod series;
pub mod special;
pub mod spectral;
pub mod stats;
pub mod trawl;
pub mod whittle;

pub use error::{Error, Result};
pub use seeds::{SeedDraw, SeedSpec};
pub use series::TimeSeries;
pub use spectral::{KernelSpec, Periodogram, TrigPoly};
pub use trawl::{SimulationConfig, TrawlModel, TrawlSequence};
pub use whittle::{FitResult, SpectralModel, WhittleConfig};
