//! First-passage percolation on Z^d: weight fields, geodesics, empirical
//! measures along geodesics, and the combinatorial machinery used to bound
//! them (shells, greedy animals, black boxes, barriers, directed segments).

pub mod animals;
pub mod constants;
pub mod directed;
pub mod empirical;
pub mod error;
pub mod geodesics;
pub mod lattice;
pub mod percolation;
pub mod rng;
pub mod shells;
pub mod weights;

pub use error::{FppError, Result};
pub use lattice::{make_edge, v_e, EdgeId, LatticeBox, PathRec, Point};
pub use weights::{DistributionSpec, Environment};
