//! Numerics and exact symbolic machinery for the AHT transport equation
//!
//! ```text
//! ∂_t y + (P y)·∇y = 0
//! ```
//!
//! on the flat torus, the disk and the annulus. Everything here is
//! `no_std` with `alloc`; file formats, configuration and the CLI live in
//! the companion `aht-lab` crate.
//!
//! Modules:
//! - [`geometry`]: domains, grids, fields, signed distance, loops
//! - [`elliptic`]: periodic, Neumann and Dirichlet Poisson solvers
//! - [`hodge`]: Leray projection and div–curl reconstruction
//! - [`dynamics`]: RK4 time stepping and transport diagnostics
//! - [`flowmap`]: trajectories, time-Taylor summation, radius estimates
//! - [`symbolic`]: material-derivative term rewriting with exact integers
//! - [`kato`]: numeric evaluation of the series and the derivative ladder
//! - [`combinatorics`]: Chemin sums, coefficient bounds, γ(L)
#![no_std]
// `num_traits::Float` supplies f64 math without std; the imports go unused
// (and are allowed) whenever some dependency links std.

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod combinatorics;
pub mod dynamics;
pub mod elliptic;
mod error;
pub mod fd;
pub mod fft;
pub mod flowmap;
pub mod geometry;
pub mod hodge;
pub mod kato;
pub mod presets;
pub mod symbolic;

pub use error::{Error, Result};
pub use geometry::{BoundaryTrace, Domain, Grid2D, HomologyLoop, ScalarField, VectorField};
