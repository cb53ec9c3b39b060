//! States, measurements, ensembles and seeded random generators.

mod ensemble;
mod povm;
mod random;
mod state;

pub use ensemble::{measure, measure_local, LabeledEnsemble, Measurement, OUTCOME_FLOOR};
pub use povm::{Povm, POVM_PSD_TOL, POVM_SUM_TOL};
pub use random::{
    haar_isometry, haar_unitary, random_density, random_povm, random_pure_vector, random_state, SeededRng,
};
pub use state::{maximally_entangled, maximally_entangled_vector, DensityMatrix, STATE_TOL};
