//! Numerics and simulation for the interacting partially directed
//! self-avoiding walk (IPDSAW) and small prudent-walk extensions.
//!
//! A configuration of size `L` is a vector of signed vertical stretches
//! `(l_1, ..., l_N)` with `|l_1| + ... + |l_N| + N = L`; every pair of
//! opposite consecutive stretches earns `min(|l_n|, |l_{n+1}|)`
//! self-touchings. The crate is organised bottom-up:
//!
//! * [`model`] configurations, the Hamiltonian, the walk bijection and the
//!   bead/pattern decompositions;
//! * [`walk`] the auxiliary random walk with discrete-Laplace increments;
//! * [`partition`] exact partition functions (three independent engines);
//! * [`free_energy`] critical point, transfer operator, excess free energy;
//! * [`sampler`] exact Gibbs sampling and a Metropolis chain;
//! * [`geometry`] ensemble estimators and scaling fits;
//! * [`wulff`] the collapsed-phase limit shape;
//! * [`ipsaw`] exhaustive enumeration of lattice path families.

pub mod error;
pub mod free_energy;
pub mod geometry;
pub mod ipsaw;
pub mod model;
pub mod partition;
pub mod quad;
pub mod sampler;
pub mod stats;
pub mod walk;
pub mod wulff;

pub use error::{Error, Result};
pub use free_energy::CriticalConstants;
pub use geometry::ScalingReport;
pub use ipsaw::{Family, FamilyTable, LatticePath};
pub use model::{BeadDecomposition, HalfInt, PatternDecomposition, StretchConfig};
pub use partition::PartitionTable;
pub use sampler::{Ensemble, ExactSampler, McmcParams, SamplerKind};
pub use walk::{ModelParams, WalkPath};
pub use wulff::WulffData;
