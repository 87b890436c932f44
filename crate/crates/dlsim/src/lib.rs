//! Downlink cellular simulator.
//!
//! Two-stage methodology: a link-level Monte Carlo engine produces per-CQI
//! block-error-rate curves over AWGN; the 10% points of those curves become
//! an SNR-to-CQI map; a mutual-information (MIESM) or exponential (EESM)
//! effective-SINR mapping carries per-RB channel quality across the
//! link-to-system interface; and a system-level simulator compares
//! round-robin, proportional-fair, and best-CQI schedulers by UE throughput
//! CDF.
//!
//! Start from the `examples/` directory: each example exercises one stage of
//! the pipeline. The `dlsim` binary chains the stages through files
//! (`bler` -> `map-cqi` -> `simulate` -> `cdf`).

pub mod abstraction;
pub mod digest;
pub mod error;
pub mod linksim;
pub mod numerology;
pub mod pipeline;
pub mod rng;
pub mod stats;
pub mod sysim;
pub mod turbo;

pub use error::{Error, Result};
