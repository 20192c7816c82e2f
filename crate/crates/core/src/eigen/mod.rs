//! Exact spectra of finite graphs and checks of eigenfunction bounds.

mod nb;
mod spectrum;
mod verify;

pub use nb::{kernel_mass, nb_lift, representation_check, KernelMass, NbFunction, NbKind, NbLift, RepresentationReport};
pub use spectrum::{clusters, full_spectrum, full_spectrum_capped, EigenPair, CLUSTER_GAP, DEFAULT_CAP};
pub use verify::{
    biregular_degrees, classify_and_report, BoundCheck, Direction, EigenReport, PairClass, PairReport, RotationReport,
    Skipped, Summary, VerifyOptions,
};
