//! Green functions of universal covering trees, their band structure, and
//! numerical checks of eigenvector delocalization for Schrödinger operators
//! `H = A + W` on finite graphs.
//!
//! - [`graph`]: graphs with potential, generators, lifts, radii.
//! - [`green`]: the `ζ` system on directed edges, boundary values, bands.
//! - [`metrics`]: `z_λ`, `Z_{s,λ}`, path decay, cycle products.
//! - [`eigen`]: exact spectra and the per-eigenpair bounds.
//! - [`cycle`]: periodic operators on `ℤ` and `N`-cycles.
//! - [`report`]: run configuration and reports used by the CLI.

pub mod cycle;
pub mod eigen;
pub mod error;
pub mod graph;
pub mod green;
pub mod metrics;
pub mod report;

pub use error::{Error, Result};
