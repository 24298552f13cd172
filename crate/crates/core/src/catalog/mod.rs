//! Registry of inequalities and their certified evaluation.

mod eval;
mod params;
mod registry;

pub use eval::{
    evaluate, evaluate_scalar, evaluate_with, refinement_chain, verdict_of, CatalogError,
    ChainReport, EvalContext, EvalInput, EvalOptions, IneqResult, ResultWitness, Verdict,
    COMMUTATION_GATE, EQUALITY_REL, SCALAR_VERDICT_REL, VERDICT_REL,
};
pub use params::{ExponentParams, CONJUGACY_TOL};
pub use registry::{find, known_id, list_registry, registry, FormClass, Needs, Record, RegistryRow, Variant};
