//! pmaplab: a simulation and verification laboratory for random p-mappings,
//! p-trees, their walk encodings, and their continuum scaling limits.
//!
//! The crate is organized around the objects it simulates:
//!
//! - [`model`]: ranked probability vectors, theta sequences, the hub family,
//!   and regime diagnostics.
//! - [`discrete`]: exact samplers and enumerators for p-mappings and p-trees,
//!   the parent-code bijection, basin/cycle decomposition, q-biased order.
//! - [`walks`]: height processes, mapping-walks with marks, time changes,
//!   and path distances.
//! - [`joyal`]: the pre-post infimum, generalized excursions, the Joyal
//!   functional and its tilde variant, the spine lift, and the
//!   tree-to-mapping correspondence.
//! - [`limit`]: the grid pipeline from an exchangeable-increment bridge to
//!   the exploration process, its rearrangement `Z`, local time, and marks.
//! - [`icrt`]: the stick-breaking construction, span reduction, rescaling,
//!   and junc-based basin statistics.
//! - [`experiment`] and [`suites`]: the seeded parallel Monte Carlo driver,
//!   the experiment catalog E1-E7, and the verification suites.

pub mod discrete;
pub mod error;
pub mod experiment;
pub mod icrt;
pub mod joyal;
pub mod limit;
pub mod model;
pub mod rng;
pub mod stats;
pub mod suites;
mod util;
pub mod walks;

pub use error::{Error, Result};
pub use model::{make_hub_family, sigma, FamilySpec, RankedProb, ThetaVector};
pub use rng::RngStream;
