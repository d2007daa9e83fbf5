//! Hamilton–Jacobi equations with rough time dependence,
//! `∂_t u = H(Du)·ξ̇(t)`, solved pathwise.
//!
//! * [`signal`]: piecewise-linear driving paths, total variation, monotone
//!   decomposition and the partition bound on `u(T, 0, 0)`.
//! * [`hamiltonian`]: Hamiltonians and the Lax–Friedrichs flux.
//! * [`solver`]: the two evolution engines (exact morphology, finite differences).
//! * [`game`]: the differential game behind the saddle example: dynamic
//!   programming, trajectories, strategies and adversary search.

pub mod error;
pub mod game;
pub mod grid;
pub mod hamiltonian;
pub mod morphology;
pub mod signal;
pub mod solver;

pub use error::{Error, Result};
pub use grid::{Grid, GridFunction};
pub use hamiltonian::HamiltonianSpec;
pub use signal::{DrivingPath, MonotoneSegment, Partition};
pub use solver::{evolve, EvolveReport, SolveConfig};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/solving.md")]
    mod solving {}
    #[doc = include_str!("../../../book/src/propagation.md")]
    mod propagation {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
}
