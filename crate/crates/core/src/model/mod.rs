//! Port-Hamiltonian DAE model, structural validation and Schur reduction.

mod input;
mod io;
mod reduce;
mod system;

pub use input::{InputSignal, Moments, Quadrature};
pub use io::{load_model, model_from_json, model_to_json, save_model, ModelFile};
pub use reduce::{reduce, reduce_with_basis, ReducedSystem};
pub use system::{
    validate_structure, validate_structure_seeded, Check, PhDaeSystem, ValidationReport, CHECK_EQ, CHECK_INDEX,
    CHECK_J, CHECK_PENCIL, CHECK_Q, CHECK_R, CHECK_RANK, CHECK_X0, CONSISTENCY_TOL, DEFAULT_PENCIL_SEED,
    PENCIL_SAMPLES, STRUCTURE_TOL,
};
