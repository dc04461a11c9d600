//! Spectral shape functionals and minimizing sequences.

pub mod anneal;
pub mod detect;
pub mod functional;
pub mod geometry;
pub mod two_ball;

pub use anneal::{minimize_many, minimize_shape, Move, Schedule, ShapeTrajectory};
pub use detect::{
    detect_dichotomy, gamma_distance, split_clusters, volume_semicontinuity_check, ClusterSplit, DichotomyReport,
    SemicontinuityReport, ShapeVerdict,
};
pub use functional::{eval_functional, mask_eigenvalues, parse_functional, Expr, FunctionalSpec};
pub use geometry::{ball_mask, centering_shift, components, set_distance};
pub use two_ball::{two_ball_csv, two_ball_experiment, TwoBallRow, TWO_BALL_HEADER};
