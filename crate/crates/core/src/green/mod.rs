//! Green functions of the universal cover.

pub mod bands;
pub mod boundary;
pub mod cone;
pub mod ct;
pub mod paths;
pub mod solver;

pub use bands::{band_scan, band_scan_system, Band, BandOptions, BandStructure, GridMeta};
pub use boundary::{boundary_zeta, BoundaryOptions, BoundarySolver, BoundaryZeta, Classification, Ladder};
pub use cone::ConeSystem;
pub use ct::{combes_thomas_check, sphere_sums, CtReport, CtRow};
pub use paths::{green_diag, green_path, nb_path_edges, zeta_product, zetainv_residual};
pub use solver::{solve_zeta, solve_zeta_with, Complex, SolverOptions, SpectralParam, ZetaTable};
