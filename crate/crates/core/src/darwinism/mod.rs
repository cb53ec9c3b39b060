//! Pointer-measurement extraction and the certified inequality chain behind it,
//! agreement between observers, and redistribution of correlations.

mod agreement;
mod bounds;
mod broadcast;
mod extraction;
mod verify;

pub use agreement::{
    channel_agreement, outcome_agreement, AgreementOptions, AgreementReport, ChannelAgreement, StateGrid,
};
pub use bounds::{average_bound, chain_bound, is_vacuous, theorem1_bound, theorem2_bound, DIAMOND_MAX};
pub use broadcast::{
    broadcast_sweep, classical_broadcast_protocol, corollary4_experiment, BroadcastBudget, BroadcastOutcome,
    BroadcastReport, MAX_BROADCAST_DIM,
};
pub use extraction::{
    build_map_approximations, extract_for_groups, extract_pointer_povm, ExtractionResult, ProbeStrategy, ScanEntry,
    TargetConditionals, DEGENERATE_FLOOR, DESK_SCALE_CHOI_DIM, MERGE_THRESHOLD, POINTER_SUM_TOL,
};
pub use verify::{
    verify_theorem1, verify_theorem2, DarwinismReport, FragmentReport, MatrixJson, VerifyOptions, CSV_HEADER,
};
