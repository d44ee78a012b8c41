//! Numerical core for the edge-eigenvalue distributions `F_beta(s, m)` of the
//! Gaussian orthogonal, unitary and symplectic ensembles.
//!
//! The crate is `no_std` (it needs `alloc`). File formats, caching, parallel
//! drivers and the command line live in the `twedge` crate.

#![no_std]
extern crate alloc;

pub mod error;
pub mod special;

pub use error::{Error, Result};
pub mod grid;
pub mod lemma;
pub mod distributions;
pub mod eigen;
pub mod ensembles;
pub mod fd;
pub mod fredholm;
pub mod ode;
pub mod painleve;
