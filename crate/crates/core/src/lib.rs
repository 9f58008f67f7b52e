//! Force transmissibility at the center of mass of serial kinematic chains.
//!
//! A force `F` applied at the CoM of a constrained chain accelerates the CoM
//! as if a smaller force `f = T·F` acted on a free point mass of the same
//! total mass. The Ratio of Transmission of Motion (RoToM) `‖f‖ / ‖F‖` lies
//! in `[0, 1]`. This crate computes `T`, the RoToM, the transmissibility
//! ellipsoid and index, and searches configuration space for RoToM minima
//! and zeros.

pub mod centroidal;
pub mod chain_model;
mod error;
pub mod reference;
pub mod robot_file;
pub mod search;
pub mod transmissibility;

pub use centroidal::{centroidal_state, fictitious_force, CentroidalState, RotomResult};
pub use chain_model::{ChainModel, Configuration, JointSpec, LinkSpec, TaskDim};
pub use error::{Error, Result};
pub use reference::{preset, Preset};
pub use transmissibility::{ellipsoid, rotom, transmissibility_index, TransmissibilityEllipsoid};
