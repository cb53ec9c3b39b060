//! Semidefinite programming, diamond-norm distances and Choi-based bounds.

mod block_bound;
mod norm;
pub mod sdp;

pub use block_bound::{lemma5_block_bound, local_measured_norm, BlockBoundReport, BlockKind};
pub use norm::{
    choi_distance_bounds, diamond_distance, diamond_distance_with, diamond_norm_from_choi, ChoiBounds, DiamondResult,
};
pub use sdp::{hermitian_basis, SdpOptions, SdpProblem, SdpSolution};
