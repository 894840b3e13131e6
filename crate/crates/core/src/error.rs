use thiserror::Error;

use crate::markov::RestrictionReport;
use crate::model::ValidationReport;

pub type Result<T> = std::result::Result<T, MumsError>;

#[derive(Debug, Error)]
pub enum MumsError {
    #[error("invalid model: {0}")]
    Invalid(ValidationReport),

    #[error("invalid parameter `{field}`: {reason}")]
    Parameter { field: &'static str, reason: String },

    #[error("singular system in {context}{}", at.map(|x| format!(" at x = {x}")).unwrap_or_default())]
    Singular {
        context: &'static str,
        at: Option<f64>,
    },

    #[error(
        "ill-conditioned system in {context}: relative residual {residual:e} exceeds {limit:e}"
    )]
    IllConditioned {
        context: &'static str,
        residual: f64,
        limit: f64,
    },

    #[error(
        "characteristic equation has complex roots (discriminant {discriminant:e}); \
         the model has no real MSV solution"
    )]
    ComplexRoots { discriminant: f64 },

    #[error("no real root in ({lo}, {hi}) near {near} at continuation step s = {s}")]
    NoRoot { s: f64, near: f64, lo: f64, hi: f64 },

    #[error(
        "root cross-check failed: continuation gave {tracked}, closed form gave {closed_form}"
    )]
    CrossCheck { tracked: f64, closed_form: f64 },

    #[error("restriction check failed: {0}")]
    Restrictions(RestrictionReport),

    #[error("{what} is undefined: {reason}")]
    Domain { what: &'static str, reason: String },

    #[error("model document: {0}")]
    Document(String),
}
