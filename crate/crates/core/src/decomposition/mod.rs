//! Localized decomposition of a kernel into a mixture of context trees.

mod layout;
mod report;
mod thresholds;
mod triplet;

pub use layout::{base_intervals, Interval, IntervalLayout};
pub use report::{
    cff_alpha_avoiding, decomposition_table, verify_proposition, DecompositionRow,
    PropositionReport, PropositionRow,
};
pub use thresholds::{
    alpha_minus_one, alpha_w, alpha_w_at_distance, alpha_w_enumerated, cff_alpha,
    cff_alpha_containing, continuity_modulus, envelope_gap, ThresholdSequence, MAX_ENUMERATION,
    SATURATION_TOLERANCE,
};
pub use triplet::{build_triplet, reconstruct_prob, MixtureTriplet};
