//! Markov-state solution of a model.
//!
//! The impulse response is represented by a three-state absorbing chain with
//! transition matrix `[[p, 1−p, 0], [0, q, 1−q], [0, 0, 1]]` over an impact
//! vector `(shock, k_I, Y_I)`, a medium-run vector `(0, k_M, Y_M)` and the
//! steady state. The unknowns solve
//!
//! ```text
//! A0 Y_I = p A Y_I + (1−p) A Y_M + B k_I + C·shock     (forward, impact)
//! A0 Y_M = q A Y_M + B k_M                             (forward, medium run)
//! k_I    = D0 Y_I + e·shock                            (backward, impact)
//! k_M    = rho k_I / (1−p) + D0 Y_M                    (backward, medium run)
//! k_M    = q k_I / (1−p)                               (AR(2) link)
//! ```
//!
//! Solved in three steps: `q` from the medium-run block, the medium-run
//! direction `Y_M ∝ (A0 − qA)^{-1} B`, then the impact block as one linear
//! system.

use std::fmt;

use nalgebra::DVector;
use serde::Serialize;

use crate::error::{MumsError, Result};
use crate::linalg::{self, inf_norm};
use crate::model::{ModelSpec, ReducedModel, ShockImpulse};
use crate::oracle::{scalar_msv_root, select_msv_root, SolverOptions};
use crate::roots::RootTrace;

/// Gap below which `q` and `p` are treated as coincident by the closed forms.
pub const COINCIDENCE_THRESHOLD: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MarkovSolution {
    pub control_names: Vec<String>,
    pub q: f64,
    pub k_i: f64,
    pub k_m: f64,
    pub y_i: Vec<f64>,
    pub y_m: Vec<f64>,
    pub p: f64,
    pub shock: f64,
    /// `0 <= q < 1`, i.e. `q` is a probability.
    pub markov_valid: bool,
    /// `|q − p| < COINCIDENCE_THRESHOLD`; the closed forms switch to their
    /// limits.
    pub q_equals_p: bool,
}

impl MarkovSolution {
    pub fn n_controls(&self) -> usize {
        self.y_i.len()
    }

    pub fn control_index(&self, name: &str) -> Option<usize> {
        self.control_names.iter().position(|n| n == name)
    }
}

/// Persistence probability with the continuation path that selected it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PersistenceRoot {
    pub q: f64,
    pub markov_valid: bool,
    /// Closed-form root, available with a single control.
    pub closed_form: Option<f64>,
    pub trace: RootTrace,
}

/// Infinity-norm residual of each Markov restriction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestrictionReport {
    pub forward_impact: f64,
    pub forward_medium: f64,
    pub backward_impact: f64,
    pub backward_medium: f64,
    pub ar2_link: f64,
}

impl RestrictionReport {
    pub fn max(&self) -> f64 {
        self.named().iter().fold(0.0, |acc, (_, v)| acc.max(*v))
    }

    pub fn named(&self) -> [(&'static str, f64); 5] {
        [
            ("forward_impact", self.forward_impact),
            ("forward_medium", self.forward_medium),
            ("backward_impact", self.backward_impact),
            ("backward_medium", self.backward_medium),
            ("ar2_link", self.ar2_link),
        ]
    }
}

impl fmt::Display for RestrictionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (name, v)) in self.named().iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{name}={v:e}")?;
        }
        Ok(())
    }
}

/// Residual of the medium-run backward restriction with `k_I = 1`, after
/// eliminating `k_M` through the AR(2) link and `Y_M` through the medium-run
/// forward restriction. Vanishes exactly at admissible `q`.
fn medium_run_residual(reduced: &ReducedModel, q: f64) -> Result<f64> {
    let k_m = q / (1.0 - reduced.p);
    let y_m = linalg::solve_at(
        &reduced.pencil(q),
        &(&reduced.b * k_m),
        "medium-run system A0 - qA",
        Some(q),
    )?;
    Ok(k_m - reduced.rho / (1.0 - reduced.p) - reduced.d0.dot(&y_m))
}

pub fn solve_q(model: &ModelSpec, opts: &SolverOptions) -> Result<PersistenceRoot> {
    let reduced = model.reduce()?;
    let (q, trace) = select_msv_root(&reduced, opts, medium_run_residual)?;
    let closed_form = if reduced.n_controls() == 1 {
        let root = scalar_msv_root(&reduced)?;
        if (root - q).abs() > opts.cross_check_tol * 1f64.max(q.abs()) {
            return Err(MumsError::CrossCheck {
                tracked: q,
                closed_form: root,
            });
        }
        Some(root)
    } else {
        None
    };
    Ok(PersistenceRoot {
        q,
        markov_valid: (0.0..1.0).contains(&q),
        closed_form,
        trace,
    })
}

pub fn solve_states(
    model: &ModelSpec,
    q: f64,
    shock: ShockImpulse,
    opts: &SolverOptions,
) -> Result<MarkovSolution> {
    let reduced = model.reduce()?;
    let p = reduced.p;
    let shock = shock.size();

    // Medium-run direction per unit of k_M.
    let u = linalg::solve_at(
        &reduced.pencil(q),
        &reduced.b,
        "medium-run system A0 - qA",
        Some(q),
    )?;

    // Substituting Y_M = u q k_I/(1−p) and k_I = D0 Y_I + e·shock into the
    // impact forward restriction leaves one linear system in Y_I.
    let feedback = &reduced.a * &u * q + &reduced.b;
    let lhs = &reduced.a0 - &reduced.a * p - &feedback * reduced.d0.transpose();
    let rhs = (&feedback * reduced.e + &reduced.c) * shock;
    let y_i = linalg::solve(&lhs, &rhs, "impact system")?;
    let k_i = reduced.d0.dot(&y_i) + reduced.e * shock;
    let k_m = q * k_i / (1.0 - p);
    let y_m = &u * k_m;

    let sol = MarkovSolution {
        control_names: model.control_names.clone(),
        q,
        k_i,
        k_m,
        y_i: y_i.iter().copied().collect(),
        y_m: y_m.iter().copied().collect(),
        p,
        shock,
        markov_valid: (0.0..1.0).contains(&q),
        q_equals_p: (q - p).abs() < COINCIDENCE_THRESHOLD,
    };
    let report = residuals(&sol, &reduced);
    if report.max() > opts.residual_tol * 1f64.max(shock.abs()) {
        return Err(MumsError::Restrictions(report));
    }
    Ok(sol)
}

/// Full solve: persistence probability, then the Markov states.
pub fn solve(
    model: &ModelSpec,
    shock: ShockImpulse,
    opts: &SolverOptions,
) -> Result<(MarkovSolution, PersistenceRoot)> {
    let root = solve_q(model, opts)?;
    let sol = solve_states(model, root.q, shock, opts)?;
    Ok((sol, root))
}

fn residuals(sol: &MarkovSolution, reduced: &ReducedModel) -> RestrictionReport {
    let p = sol.p;
    let y_i = DVector::from_column_slice(&sol.y_i);
    let y_m = DVector::from_column_slice(&sol.y_m);
    let a0 = &reduced.a0;
    let a = &reduced.a;
    RestrictionReport {
        forward_impact: inf_norm(
            &(a0 * &y_i
                - a * &y_i * p
                - a * &y_m * (1.0 - p)
                - &reduced.b * sol.k_i
                - &reduced.c * sol.shock),
        ),
        forward_medium: inf_norm(&(a0 * &y_m - a * &y_m * sol.q - &reduced.b * sol.k_m)),
        backward_impact: (sol.k_i - reduced.d0.dot(&y_i) - reduced.e * sol.shock).abs(),
        backward_medium: (sol.k_m - reduced.rho * sol.k_i / (1.0 - p) - reduced.d0.dot(&y_m)).abs(),
        ar2_link: (sol.k_m - sol.q * sol.k_i / (1.0 - p)).abs(),
    }
}

/// Residual of every Markov restriction for `sol` under `model`.
pub fn verify_restrictions(sol: &MarkovSolution, model: &ModelSpec) -> Result<RestrictionReport> {
    let reduced = model.reduce()?;
    if sol.n_controls() != reduced.n_controls() {
        return Err(MumsError::Domain {
            what: "restriction check",
            reason: format!(
                "solution has {} controls, model has {}",
                sol.n_controls(),
                reduced.n_controls()
            ),
        });
    }
    Ok(residuals(sol, &reduced))
}

/// Next-period expectations of the state and controls, conditional on the
/// chain sitting in the impact or the medium-run state.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionalExpectations {
    pub impact_state: f64,
    pub impact_controls: Vec<f64>,
    pub medium_state: f64,
    pub medium_controls: Vec<f64>,
}

pub fn conditional_expectations(sol: &MarkovSolution) -> ConditionalExpectations {
    let p = sol.p;
    let q = sol.q;
    ConditionalExpectations {
        impact_state: p * sol.k_i + (1.0 - p) * sol.k_m,
        impact_controls: sol
            .y_i
            .iter()
            .zip(&sol.y_m)
            .map(|(yi, ym)| p * yi + (1.0 - p) * ym)
            .collect(),
        medium_state: q * sol.k_m,
        medium_controls: sol.y_m.iter().map(|ym| q * ym).collect(),
    }
}
