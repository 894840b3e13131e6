//! Dense linear solves with a conditioning guard.

use nalgebra::{DMatrix, DVector};

use crate::error::{MumsError, Result};

/// Relative residual above which a solve is rejected as ill-conditioned.
pub const RESIDUAL_GUARD: f64 = 1e-8;

/// Solves `m x = rhs` by partial-pivoting LU.
///
/// The result is rejected when `‖m x − rhs‖∞ / (‖m‖∞‖x‖∞ + ‖rhs‖∞)` exceeds
/// [`RESIDUAL_GUARD`].
pub fn solve(m: &DMatrix<f64>, rhs: &DVector<f64>, context: &'static str) -> Result<DVector<f64>> {
    solve_at(m, rhs, context, None)
}

pub(crate) fn solve_at(
    m: &DMatrix<f64>,
    rhs: &DVector<f64>,
    context: &'static str,
    at: Option<f64>,
) -> Result<DVector<f64>> {
    let x = m
        .clone()
        .lu()
        .solve(rhs)
        .ok_or(MumsError::Singular { context, at })?;
    if x.iter().any(|v| !v.is_finite()) {
        return Err(MumsError::Singular { context, at });
    }
    let residual = inf_norm(&(m * &x - rhs));
    let scale = matrix_inf_norm(m) * inf_norm(&x) + inf_norm(rhs);
    let relative = if scale > 0.0 {
        residual / scale
    } else {
        residual
    };
    if relative > RESIDUAL_GUARD {
        return Err(MumsError::IllConditioned {
            context,
            residual: relative,
            limit: RESIDUAL_GUARD,
        });
    }
    Ok(x)
}

pub fn inf_norm(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

pub fn matrix_inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Row vector times column vector.
pub fn dot_row(row: &DVector<f64>, col: &DVector<f64>) -> f64 {
    row.dot(col)
}
