//! Markov-chain solution of linear rational-expectations models with one
//! endogenous and one exogenous state.
//!
//! The solver maps a model onto an absorbing three-state chain (impact,
//! medium run, steady state). The persistence probability `q` of the medium
//! run is the stable root of the characteristic equation; the Markov states
//! solve a small linear system. Impulse responses, present values and
//! cumulative effects follow in closed form.

pub mod analytics;
pub mod ensemble;
pub mod error;
pub mod io;
pub mod linalg;
pub mod markov;
pub mod model;
pub mod nk;
pub mod oracle;
pub mod roots;

pub use analytics::{cumsum, irf, pdv, IrfPath, Variable};
pub use ensemble::{ensemble_average, ChainConfig, Ensemble};
pub use error::{MumsError, Result};
pub use io::{parse_model, ModelDocument, RunReport};
pub use markov::{solve, verify_restrictions, MarkovSolution, PersistenceRoot, RestrictionReport};
pub use model::{ModelSpec, ReducedModel, ShockImpulse, ValidationReport};
pub use nk::NkParams;
pub use oracle::{solve_msv, SolverOptions, StateSpaceSolution};
