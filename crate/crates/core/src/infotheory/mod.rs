//! Entropies (in bits), entropic inequalities, state discrimination and
//! accessible information.

mod accessible;
mod entropy;
mod guessing;
mod lemmas;

pub use accessible::{
    accessible_information, bipartite_shape, discord, qc_mutual_information, AccessibleResult, DiscordOptions,
    DiscordReport, SEESAW_MAX_ITER, SEESAW_TOL,
};
pub use entropy::{
    binary_entropy, chain_rule_residual, conditional_mutual_information, entropy, entropy_report, mutual_information,
    mutual_information_bipartite, shannon_entropy, subsystem_entropy, EntropyReport, EIG_CLAMP,
};
pub(crate) use guessing::project_povm;
pub use guessing::{guessing_probability, guessing_probability_with, helstrom, GuessingResult};
pub use lemmas::{
    alicki_fannes_residual, gentle_measurement_residual, pinsker_gap, product_distance, AlickiFannesReport,
    ContinuityMode, GentleMeasurementReport,
};
