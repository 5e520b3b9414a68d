//! Dense, desk-scale simulation of heralded molecule assembly on real-space
//! grids.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only the numerical
//! kernels: grids and configuration bases, operator blocks and the scheduled
//! merging Hamiltonian, closed-system propagation, exchange symmetry,
//! geometric success criteria, weak-measurement heralding, scattering-tree
//! orchestration, and the Landau-Zener / block-encoding cost calculators.
//! File formats and the command line live in the `mergo` crate.
//!
//! All quantities are in atomic units (ħ = mₑ = e = 1, lengths in Bohr)
//! unless a function says otherwise; [`units`] converts at the boundary.

#![no_std]
// `!(x > 0.0)` is used on purpose: it also rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod criteria;
pub mod error;
pub mod evolution;
pub mod grid;
pub mod hamiltonian;
pub mod linalg;
pub mod lzcost;
pub mod schedule;
pub mod spectrum;
pub mod spin;
pub mod state;
pub mod symmetry;
pub mod tree;
pub mod units;
pub mod weakmeas;

pub use error::{Error, Result};
pub use grid::{Basis, Configuration, GridSpec, Particle, ParticleKind, ParticleSet, Site, Spin};
pub use hamiltonian::{BlockTag, OperatorBlock, ScheduledHamiltonian, TrapSpec};
pub use schedule::{Profile, Schedule};
pub use state::DensityMatrix;

/// Complex scalar used throughout.
pub type C64 = nalgebra::Complex<f64>;
/// Dense complex matrix over an enumerated basis.
pub type CMatrix = nalgebra::DMatrix<C64>;
/// Dense complex column vector over an enumerated basis.
pub type CVector = nalgebra::DVector<C64>;
