//! Bridged Hamiltonian cycles in sub-critical random geometric graphs.
//!
//! The pipeline for one trial:
//!
//! 1. [`params`]: radius `r_n`, tile side `1/K`, rectangle width, bridge budget.
//! 2. [`sampling`]: `n` i.i.d. nodes in `[-1/2, 1/2]^2` from a bounded density.
//! 3. [`grid`]: dense/sparse tiles, rectangle crossings, backbone, events.
//! 4. [`cycle`]: small cycles merged into one Hamiltonian cycle whose edges
//!    are all shorter than `2 r_n`, with at most `16/(L-8)` of them bridges.
//! 5. [`experiment`]: seeded trials, Monte Carlo batches, CSV/JSON reports.
//!
//! [`render`] draws tilings, backbones and cycles as SVG.

pub mod cycle;
pub mod error;
pub mod experiment;
pub mod grid;
pub mod params;
pub mod render;
pub mod sampling;

pub use error::{Error, Result};
