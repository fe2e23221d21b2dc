//! Random-to-random shuffling on the linear extensions of a finite poset.
//!
//! The crate builds the exact transition matrices of the shuffle (and of the
//! random-to-top, Bubley-Dyer and transposition-analogue chains), computes
//! their spectra against the bound `(1 + 1/n)(1 - 2/n)`, certifies the
//! N-shape rank-one decomposition, checks lumping and duality, and measures
//! mixing exactly and by sampling.

pub mod canon;
pub mod chains;
pub mod error;
pub mod extensions;
pub mod family;
pub mod mixing;
pub mod poset;
pub mod rational;
pub mod rng;
pub mod spectral;
pub mod survey;

pub use canon::{canonical_form, canonical_poset, enumerate_classes, enumerate_posets};
pub use chains::{
    build_bubley_dyer_matrix, build_matrix, build_r2r_matrix, build_random_to_top_matrix,
    build_transposition_matrix, conjugate_by_reversal, factorization_orientation, lumped_matrix,
    sort_fibers, ChainSpec, FactorOrientation, MoveTable, Weighting,
};
pub use error::{Error, Result};
pub use extensions::{
    apply_t, apply_tau, apply_transposition_analogue, enumerate_extensions, is_linear_extension,
    reverse_extension, sort_map, sorting_path, ExtensionSet, LinearExtension,
};
pub use family::{family_poset, Family};
pub use mixing::{
    bubley_dyer_mixing, chain_step, compare_chains, diameter, diameter_check, distance_profile,
    exact_mixing_time, mixing_report, sample_extensions, scaling_experiment, tv_distance, BurnIn,
    MixingReport, SampleTrace, ScalingTable,
};
pub use poset::{poset_inclusion, CoverList, Poset, PosetJson};
pub use rational::{Rational, RationalMatrix};
pub use spectral::{
    conjecture_check, conjectured_bound, eigenvalues_symmetric, interlacing_check,
    lifted_spectrum_check, nshape_rank_one_certificate, special_extensions, RankOneCertificate,
    SpectralReport, UpdateSign,
};
pub use survey::{
    inclusion_table, monotonicity_scan, verify_all, Survey, SurveyRecord, SurveySummary,
};

/// Version string embedded in emitted reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
