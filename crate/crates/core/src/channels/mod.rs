//! Channel representations, measure-and-prepare maps and the model library.

mod channel;
mod measure_prepare;
pub mod models;
mod serialization;

pub use channel::{choi_of, effective_fragment_channel, QuantumChannel, Representation, KRAUS_CUTOFF, TP_TOL};
pub use measure_prepare::{measure_and_prepare, qc_channel, MeasurePrepareChannel};
pub use serialization::{channel_from_json, channel_to_json};
