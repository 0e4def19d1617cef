//! Dyadic annuli, masked operator norms and Davies-Gaffney estimates on grid kernels.

mod annulus;
mod averages;
mod checks;
mod geometry;
mod norms;
mod pointwise;
mod profile;

pub use annulus::{
    annulus_index, annulus_mask, annulus_nodes, annulus_partition, ball_nodes, outer_radius,
    DyadicAnnulus,
};
pub use averages::{
    ball_average, ball_count, check_average_bounded, check_average_equivalence, lp_norm,
    AverageCheck,
};
pub use checks::{
    check_dual, check_hypercontractive, check_lp_bounded, check_square_root, check_two_radius,
    full_norm, localized_norm, DualReport, HypercontractiveReport, LpBoundedReport, RadiusNorm,
    SquareRootCheck, TwoRadiusReport, TwoRadiusRow, FULL_MATRIX_LIMIT, STABILITY_FACTOR,
    TWO_RADIUS_SLACK,
};
pub use geometry::{check_geom_annuli, GeomReport};
pub use norms::{
    conjugate_exponent, max_column_norm, max_row_norm, opnorm, spectral_norm, NormBound,
    SubMatrix, UNCERTAIN_GAP,
};
pub use pointwise::{pointwise_equivalence_check, PointwiseReport, Violation};
pub use profile::{
    dg_profile, measure_annuli, profile_unchecked, slope_fit, AnnulusNorm, DGParams, DGReport,
    Variant, DEFAULT_SLOPE_TOL,
};
