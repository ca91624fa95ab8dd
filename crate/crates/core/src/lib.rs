//! Vertex percolation on the binary n-cube.
//!
//! The crate is organised bottom-up:
//!
//! * [`hypercube`]: vertices, metric, balls and boundaries, the weight-then-lex
//!   linear order and the coordinate block layout used by the constructions.
//! * [`sampling`]: counter-based, seed-reproducible sampling of the random
//!   induced subgraph, including two-round sprinkling.
//! * [`components`]: union-find component analysis of a sampled subgraph.
//! * [`branching`]: Galton-Watson offspring laws, extinction fixed points and
//!   simulation.
//! * [`constructions`]: the tail-direction tree exploration and the staged
//!   subcomponent growth built on top of it.
//! * [`boundary`]: translation-overlap identities, direction bounds, 2-sphere
//!   density audits and disjoint short paths between splits.
//! * [`experiments`]: the Monte Carlo drivers behind the `cubeperc` binary.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod branching;
pub mod components;
pub mod constructions;
pub mod error;
pub mod experiments;
pub mod hypercube;
pub mod sampling;
pub mod stats;

pub use error::{Error, Result};
pub use hypercube::{CoordinateLayout, CubeGeometry, OccupancySet, Vertex};
