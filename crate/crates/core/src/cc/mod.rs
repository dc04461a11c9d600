//! Discrete concentration-compactness.

pub mod classify;
pub mod cutoff;
pub mod generators;
pub mod lieb;
pub mod profile;
pub mod sequence;
pub mod split;

pub use classify::{classify, Plateau, Thresholds, TrichotomyReport, Verdict};
pub use cutoff::{cutoff_defect, localization_defect, make_cutoffs, Cutoffs, Profile};
pub use generators::{generate, Family, GeneratorParams};
pub use lieb::{lieb_translation_search, LiebOutcome};
pub use profile::{concentration_profile, concentration_profile_detailed, ProfilePoint};
pub use sequence::FunctionSequence;
pub use split::{dichotomy_split, SplitPair};
