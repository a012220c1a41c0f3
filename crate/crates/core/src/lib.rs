//! Exact sampler and verification lab for uniform rooted bipartite planar maps.
//!
//! Maps are produced from labeled two-type trees (mobiles) through the
//! Bouttier–Di Francesco–Guitter correspondence. The tree itself is drawn from
//! a conditioned two-type Galton–Watson law by sampling a bridge of the
//! associated ν-walk, rotating it into an excursion and decoding that
//! excursion as a modified Łukasiewicz path.

pub mod bdg;
pub mod encodings;
pub mod error;
pub mod experiments;
pub mod map;
pub mod metrics;
pub mod model;
pub mod oracle;
pub mod rng;
pub mod sampler;
pub mod stats;

pub use error::{Error, Result};
pub use map::CombinatorialMap;
pub use model::{Mobile, PlaneTree, VertexRef};
pub use rng::{LabRng, RngState};
