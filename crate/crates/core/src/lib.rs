//! Transmit antenna subset selection for MIMO-OFDM links.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] draws L-tap frequency-selective Rayleigh channels and turns
//!   them into per-subcarrier frequency responses.
//! * [`capacity`] evaluates the ergodic capacity of a transmit-antenna subset,
//!   the fitness function every optimizer shares.
//! * [`ga`] is the genetic search, with a plain random-swap mutation and the
//!   adaptive best-point mutation.
//! * [`oracle`] enumerates every subset and is the ground truth for the GA.
//! * [`experiment`] drives seeded experiment grids and writes CSV/JSON output.

pub mod capacity;
pub mod channel;
pub mod error;
pub mod experiment;
pub mod ga;
pub mod oracle;
pub mod rng;

pub use capacity::{AntennaSubset, CapacityEstimate, Snr};
pub use channel::{ChannelConfig, ChannelRealization, RealizationBatch, TapSet};
pub use error::{Error, Result};
pub use ga::{Chromosome, GaConfig, MutationStrategy, PartnerMode, RunTrace};
pub use oracle::OracleResult;
pub use rng::SimRng;
