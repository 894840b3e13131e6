//! Undetermined-coefficients solution in state-space form.
//!
//! Guess `Y_t = M_k k_{t-1} + M_z z_t` and `k_t = eta_k k_{t-1} + eta_z z_t`.
//! Matching coefficients on `k_{t-1}` gives
//!
//! ```text
//! A0 M_k = eta_k A M_k + B eta_k,   eta_k = rho + D0 M_k
//! ```
//!
//! so `eta_k` solves `x = rho + x D0 (A0 - x A)^{-1} B`, and matching on `z_t`
//! gives a linear system for `M_z`. This pipeline never touches the Markov
//! representation and serves as the reference the Markov solver is checked
//! against.

use nalgebra::DVector;
use serde::Serialize;

use crate::analytics::IrfPath;
use crate::error::{MumsError, Result};
use crate::linalg::{self, inf_norm};
use crate::model::{ModelSpec, ReducedModel, ShockImpulse};
use crate::roots::{self, ContinuationOptions, RootTrace};

#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    pub continuation: ContinuationOptions,
    /// Bound on identification and restriction residuals, relative to
    /// `max(1, |shock|)`.
    pub residual_tol: f64,
    /// Bound on `|f(root)|` for the characteristic equation.
    pub root_tol: f64,
    /// Allowed gap between the tracked root and the closed-form root when
    /// there is a single control.
    pub cross_check_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            continuation: ContinuationOptions::default(),
            residual_tol: 1e-8,
            root_tol: 1e-10,
            cross_check_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentificationResiduals {
    /// `‖A0 M_k − eta_k A M_k − B eta_k‖∞`
    pub persistence_controls: f64,
    /// `|eta_k − rho − D0 M_k|`
    pub persistence_state: f64,
    /// Residual of the `z_t` coefficient system for `M_z`.
    pub shock_controls: f64,
    /// `|eta_z − D0 M_z − e|`
    pub shock_state: f64,
}

impl IdentificationResiduals {
    pub fn max(&self) -> f64 {
        self.persistence_controls
            .max(self.persistence_state)
            .max(self.shock_controls)
            .max(self.shock_state)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StateSpaceSolution {
    pub control_names: Vec<String>,
    pub eta_kk: f64,
    pub eta_kz: f64,
    /// `M_k`
    pub eta_yk: Vec<f64>,
    /// `M_z`
    pub eta_yz: Vec<f64>,
    pub p: f64,
    /// `|eta_kk| < 1`
    pub stationary: bool,
    /// `0 <= eta_kk < 1`
    pub markov_valid: bool,
    pub residuals: IdentificationResiduals,
    pub trace: RootTrace,
}

/// `f(x) = x − rho − x D0 (A0 − x A)^{-1} B`; zero at every admissible
/// persistence coefficient.
pub fn characteristic_residual(reduced: &ReducedModel, x: f64) -> Result<f64> {
    let u = linalg::solve_at(
        &reduced.pencil(x),
        &reduced.b,
        "characteristic equation A0 - xA",
        Some(x),
    )?;
    Ok(x - reduced.rho - x * reduced.d0.dot(&u))
}

/// Closed-form MSV root for a single control.
///
/// With scalar `A0 = alpha`, the characteristic equation is the quadratic
/// `a' x² − (1 + a' rho − b' d) x + rho = 0` with `a' = a/alpha`,
/// `b' = b/alpha`; the MSV root is the minus root, the one that vanishes with
/// `b = d = rho = 0`.
pub fn scalar_msv_root(reduced: &ReducedModel) -> Result<f64> {
    if reduced.n_controls() != 1 {
        return Err(MumsError::Domain {
            what: "scalar MSV root",
            reason: format!("model has {} controls", reduced.n_controls()),
        });
    }
    let alpha = reduced.a0[(0, 0)];
    if alpha == 0.0 {
        return Err(MumsError::Singular {
            context: "scalar A0",
            at: None,
        });
    }
    let a = reduced.a[(0, 0)] / alpha;
    let bd = reduced.b[0] * reduced.d0[0] / alpha;
    let rho = reduced.rho;
    let s = 1.0 + a * rho - bd;
    if a == 0.0 {
        return if s == 0.0 {
            Err(MumsError::Singular {
                context: "scalar characteristic equation",
                at: None,
            })
        } else {
            Ok(rho / s)
        };
    }
    let disc = s * s - 4.0 * a * rho;
    if disc < 0.0 {
        return Err(MumsError::ComplexRoots { discriminant: disc });
    }
    let sq = disc.sqrt();
    // Same root as (s − sq)/(2a), without the cancellation when s > 0.
    if s > 0.0 {
        Ok(2.0 * rho / (s + sq))
    } else {
        Ok((s - sq) / (2.0 * a))
    }
}

/// Selects the MSV root of `residual` by continuation in the feedback scale.
pub(crate) fn select_msv_root<F>(
    reduced: &ReducedModel,
    opts: &SolverOptions,
    residual: F,
) -> Result<(f64, RootTrace)>
where
    F: Fn(&ReducedModel, f64) -> Result<f64>,
{
    if reduced.n_controls() == 1 {
        // Complex roots are a hard failure; surface them before tracking.
        if let Err(err @ MumsError::ComplexRoots { .. }) = scalar_msv_root(reduced) {
            return Err(err);
        }
    }
    roots::track_from_zero(
        |s, x| residual(&reduced.with_feedback_scaled(s), x),
        &opts.continuation,
    )
}

pub fn solve_msv(model: &ModelSpec, opts: &SolverOptions) -> Result<StateSpaceSolution> {
    let reduced = model.reduce()?;
    let (eta_k, trace) = select_msv_root(&reduced, opts, characteristic_residual)?;

    let root_residual = characteristic_residual(&reduced, eta_k)?.abs();
    if root_residual > opts.root_tol {
        return Err(MumsError::Domain {
            what: "MSV root",
            reason: format!("residual {root_residual:e} exceeds {:e}", opts.root_tol),
        });
    }

    let m_k = linalg::solve_at(
        &reduced.pencil(eta_k),
        &(&reduced.b * eta_k),
        "persistence coefficients",
        Some(eta_k),
    )?;

    // [A0 − pA − (A M_k + B) D0] M_z = (A M_k + B) e + C
    let feedback = &reduced.a * &m_k + &reduced.b;
    let lhs = &reduced.a0 - &reduced.a * reduced.p - &feedback * reduced.d0.transpose();
    let rhs = &feedback * reduced.e + &reduced.c;
    let m_z = linalg::solve(&lhs, &rhs, "shock coefficients")?;
    let eta_z = reduced.d0.dot(&m_z) + reduced.e;

    let residuals = IdentificationResiduals {
        persistence_controls: inf_norm(
            &(&reduced.a0 * &m_k - &reduced.a * &m_k * eta_k - &reduced.b * eta_k),
        ),
        persistence_state: (eta_k - reduced.rho - reduced.d0.dot(&m_k)).abs(),
        shock_controls: inf_norm(&(&lhs * &m_z - &rhs)),
        shock_state: (eta_z - reduced.d0.dot(&m_z) - reduced.e).abs(),
    };
    let scale = 1f64.max(inf_norm(&m_k)).max(inf_norm(&m_z));
    if residuals.max() > opts.residual_tol * scale {
        return Err(MumsError::Domain {
            what: "state-space solution",
            reason: format!("identification residual {:e}", residuals.max()),
        });
    }

    Ok(StateSpaceSolution {
        control_names: model.control_names.clone(),
        eta_kk: eta_k,
        eta_kz: eta_z,
        eta_yk: m_k.iter().copied().collect(),
        eta_yz: m_z.iter().copied().collect(),
        p: reduced.p,
        stationary: eta_k.abs() < 1.0,
        markov_valid: (0.0..1.0).contains(&eta_k),
        residuals,
        trace,
    })
}

/// Impulse response by direct forward iteration of the state-space form,
/// starting from `k_{t-1} = 0` and `z_t = shock`.
pub fn iterate_irf(sol: &StateSpaceSolution, horizon: usize, shock: ShockImpulse) -> IrfPath {
    let n_controls = sol.eta_yz.len();
    let m_k = DVector::from_column_slice(&sol.eta_yk);
    let m_z = DVector::from_column_slice(&sol.eta_yz);

    let mut exogenous = Vec::with_capacity(horizon + 1);
    let mut state = Vec::with_capacity(horizon + 1);
    let mut controls = vec![Vec::with_capacity(horizon + 1); n_controls];

    let mut z = shock.size();
    let mut k_prev = 0.0;
    for _ in 0..=horizon {
        let y = &m_k * k_prev + &m_z * z;
        let k = sol.eta_kk * k_prev + sol.eta_kz * z;
        exogenous.push(z);
        state.push(k);
        for (path, v) in controls.iter_mut().zip(y.iter()) {
            path.push(*v);
        }
        k_prev = k;
        z *= sol.p;
    }
    IrfPath {
        horizon,
        exogenous,
        state,
        control_names: sol.control_names.clone(),
        controls,
    }
}
