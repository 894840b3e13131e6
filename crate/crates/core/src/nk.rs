//! New Keynesian model with external habit formation.
//!
//! ```text
//! λ_t = E_t λ_{t+1} + (r_t − E_t π_{t+1} − ξ_t)
//! π_t = β E_t π_{t+1} + κ (η y_t − λ_t)
//! y_t = h y_{t−1} − (1−h) λ_t
//! r_t = φ_π π_t
//! ```
//!
//! Mapped onto the general model with controls `(λ, π)`, endogenous state
//! `k_t = y_t` (`ρ = h`, `D0 = [−(1−h), 0]`) and exogenous state `ξ_t`. The
//! module also carries an independent specialised solver that works directly
//! with the seven Markov restrictions of this model.

use serde::Serialize;

use crate::error::{MumsError, Result};
use crate::linalg;
use crate::markov::{self, MarkovSolution, PersistenceRoot};
use crate::model::{ModelSpec, ShockImpulse};
use crate::oracle::SolverOptions;
use crate::roots::brent;

pub const CONTROL_NAMES: [&str; 2] = ["lambda", "pi"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NkParams {
    pub beta: f64,
    pub kappa: f64,
    pub phi_pi: f64,
    pub h: f64,
    pub eta: f64,
    pub p: f64,
    pub xi_i: f64,
}

impl Default for NkParams {
    /// The demand-shock calibration with strong habits.
    fn default() -> Self {
        Self {
            beta: 0.99,
            kappa: 0.05,
            phi_pi: 1.5,
            h: 0.9,
            eta: 1.0,
            p: 0.7,
            xi_i: -0.01,
        }
    }
}

impl NkParams {
    pub fn validate(&self) -> Result<()> {
        let checks: [(&'static str, bool, &str); 7] = [
            (
                "beta",
                self.beta > 0.0 && self.beta < 1.0,
                "must lie in (0, 1)",
            ),
            (
                "kappa",
                self.kappa > 0.0 && self.kappa.is_finite(),
                "must be positive",
            ),
            (
                "phi_pi",
                self.phi_pi > 1.0 && self.phi_pi.is_finite(),
                "must exceed 1",
            ),
            ("h", (0.0..1.0).contains(&self.h), "must lie in [0, 1)"),
            ("eta", self.eta.is_finite(), "must be finite"),
            ("p", (0.0..1.0).contains(&self.p), "must lie in [0, 1)"),
            (
                "xi_i",
                self.xi_i.is_finite() && self.xi_i != 0.0,
                "must be finite and nonzero",
            ),
        ];
        for (field, ok, rule) in checks {
            if !ok {
                return Err(MumsError::Parameter {
                    field,
                    reason: rule.to_string(),
                });
            }
        }
        Ok(())
    }

    pub fn without_habits(&self) -> Self {
        Self { h: 0.0, ..*self }
    }

    /// `f(q) = κ(φ_π − q) / ((1−q)(1−βq) + κ(φ_π − q))`.
    pub fn f(&self, q: f64) -> f64 {
        let num = self.kappa * (self.phi_pi - q);
        num / ((1.0 - q) * (1.0 - self.beta * q) + num)
    }

    /// Coefficient on output in the short-run Phillips curve, `κ(η + 1/(1−h))`.
    pub fn nkpc_coefficient(&self) -> f64 {
        self.kappa * (self.eta + 1.0 / (1.0 - self.h))
    }
}

pub fn build_model(params: &NkParams) -> Result<ModelSpec> {
    params.validate()?;
    let NkParams {
        beta,
        kappa,
        phi_pi,
        h,
        eta,
        p,
        ..
    } = *params;
    Ok(ModelSpec {
        n_controls: 2,
        control_names: CONTROL_NAMES.iter().map(|s| s.to_string()).collect(),
        // λ − φ_π π = E λ' − E π' − ξ ;  κλ + π = β E π' + κη y
        a0: vec![vec![1.0, -phi_pi], vec![kappa, 1.0]],
        a1: vec![vec![1.0, -1.0], vec![0.0, beta]],
        b0: vec![0.0, kappa * eta],
        b1: vec![0.0, 0.0],
        c0: vec![-1.0, 0.0],
        d0: vec![-(1.0 - h), 0.0],
        rho: h,
        e: 0.0,
        p,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FixedPointCheck {
    /// `q − h + q(1−h) η f(q)`
    pub residual: f64,
    pub f: f64,
    /// `0 < f(q) <= 1`
    pub f_in_unit_interval: bool,
}

/// Residual of the scalar equation `q = h − q(1−h) η f(q)` that the
/// persistence probability of this model solves.
pub fn fixed_point_q_check(params: &NkParams, q: f64) -> Result<FixedPointCheck> {
    if !(0.0..1.0).contains(&q) {
        return Err(MumsError::Parameter {
            field: "q",
            reason: format!("must lie in [0, 1), found {q}"),
        });
    }
    let f = params.f(q);
    Ok(FixedPointCheck {
        residual: q - params.h + q * (1.0 - params.h) * params.eta * f,
        f,
        f_in_unit_interval: f > 0.0 && f <= 1.0,
    })
}

/// Solution of the habit model through the general Markov solver.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NkSolution {
    pub params: NkParams,
    pub markov: MarkovSolution,
    pub root: PersistenceRoot,
}

impl NkSolution {
    pub fn q(&self) -> f64 {
        self.markov.q
    }
    pub fn y_i(&self) -> f64 {
        self.markov.k_i
    }
    pub fn y_m(&self) -> f64 {
        self.markov.k_m
    }
    pub fn lambda_i(&self) -> f64 {
        self.markov.y_i[0]
    }
    pub fn lambda_m(&self) -> f64 {
        self.markov.y_m[0]
    }
    pub fn pi_i(&self) -> f64 {
        self.markov.y_i[1]
    }
    pub fn pi_m(&self) -> f64 {
        self.markov.y_m[1]
    }

    pub fn states(&self) -> NkStates {
        NkStates {
            q: self.q(),
            lambda_i: self.lambda_i(),
            lambda_m: self.lambda_m(),
            pi_i: self.pi_i(),
            pi_m: self.pi_m(),
            y_i: self.y_i(),
            y_m: self.y_m(),
        }
    }
}

pub fn solve(params: &NkParams, opts: &SolverOptions) -> Result<NkSolution> {
    let model = build_model(params)?;
    let shock = ShockImpulse::new(params.xi_i)?;
    let (markov, root) = markov::solve(&model, shock, opts)?;
    Ok(NkSolution {
        params: *params,
        markov,
        root,
    })
}

/// The seven Markov unknowns of the habit model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NkStates {
    pub q: f64,
    pub lambda_i: f64,
    pub lambda_m: f64,
    pub pi_i: f64,
    pub pi_m: f64,
    pub y_i: f64,
    pub y_m: f64,
}

/// Residuals of the seven restrictions, in order: Euler (impact, medium),
/// Phillips curve (impact, medium), marginal utility (impact, medium), AR(2)
/// link.
pub fn nk_restriction_residuals(params: &NkParams, s: &NkStates) -> [f64; 7] {
    let NkParams {
        beta,
        kappa,
        phi_pi,
        h,
        eta,
        p,
        xi_i,
    } = *params;
    let q = s.q;
    [
        s.lambda_i
            - (p * s.lambda_i + (1.0 - p) * s.lambda_m + (phi_pi - p) * s.pi_i
                - (1.0 - p) * s.pi_m
                - xi_i),
        s.lambda_m - (q * s.lambda_m + (phi_pi - q) * s.pi_m),
        s.pi_i - (beta * (p * s.pi_i + (1.0 - p) * s.pi_m) + kappa * (eta * s.y_i - s.lambda_i)),
        s.pi_m - (beta * q * s.pi_m + kappa * (eta * s.y_m - s.lambda_m)),
        s.y_i + (1.0 - h) * s.lambda_i,
        s.y_m - (h / (1.0 - p) * s.y_i - (1.0 - h) * s.lambda_m),
        s.y_m - q / (1.0 - p) * s.y_i,
    ]
}

/// Solves the seven restrictions directly: `q` by bracketing the scalar
/// equation on `[0, 1)`, then six of the linear restrictions for the states.
/// The medium-run marginal-utility restriction is left out of the linear
/// solve and holds only if `q` is right.
pub fn solve_specialized(params: &NkParams) -> Result<NkStates> {
    params.validate()?;
    let g = |q: f64| q - params.h + q * (1.0 - params.h) * params.eta * params.f(q);
    let hi = 1.0 - 1e-12;
    let q = brent(g, 0.0, hi, g(0.0), g(hi)).ok_or(MumsError::NoRoot {
        s: 1.0,
        near: params.h,
        lo: 0.0,
        hi: 1.0,
    })?;

    let NkParams {
        beta,
        kappa,
        phi_pi,
        h,
        eta,
        p,
        xi_i,
    } = *params;
    // Unknowns: [λ_I, λ_M, π_I, π_M, y_I, y_M]
    #[rustfmt::skip]
    let rows = [
        [1.0 - p, -(1.0 - p), -(phi_pi - p), 1.0 - p, 0.0, 0.0],
        [0.0, 1.0 - q, 0.0, -(phi_pi - q), 0.0, 0.0],
        [kappa, 0.0, 1.0 - beta * p, -beta * (1.0 - p), -kappa * eta, 0.0],
        [0.0, kappa, 0.0, 1.0 - beta * q, 0.0, -kappa * eta],
        [1.0 - h, 0.0, 0.0, 0.0, 1.0, 0.0],
        [0.0, 0.0, 0.0, 0.0, -q / (1.0 - p), 1.0],
    ];
    let m = nalgebra::DMatrix::from_fn(6, 6, |i, j| rows[i][j]);
    let rhs = nalgebra::DVector::from_vec(vec![-xi_i, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let x = linalg::solve(&m, &rhs, "habit-model restrictions")?;
    Ok(NkStates {
        q,
        lambda_i: x[0],
        lambda_m: x[1],
        pi_i: x[2],
        pi_m: x[3],
        y_i: x[4],
        y_m: x[5],
    })
}

/// Straight line `π = intercept + slope · y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Line {
    pub slope: f64,
    pub intercept: f64,
}

impl Line {
    pub fn at(&self, y: f64) -> f64 {
        self.intercept + self.slope * y
    }

    /// Output at which the line crosses `π = pi`.
    pub fn output_at(&self, pi: f64) -> Option<f64> {
        (self.slope != 0.0).then(|| (pi - self.intercept) / self.slope)
    }

    pub fn intersect(&self, other: &Line) -> Option<(f64, f64)> {
        let ds = self.slope - other.slope;
        if ds == 0.0 {
            return None;
        }
        let y = (other.intercept - self.intercept) / ds;
        Some((y, self.at(y)))
    }
}

/// Aggregate demand (Euler) and supply (Phillips) loci of one model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LociLines {
    pub short_euler: Line,
    pub short_phillips: Line,
    pub medium_euler: Line,
    pub medium_phillips: Line,
}

/// Drag from the short run on the medium run, `h y_I / (1−p)`.
fn drag(params: &NkParams, y_i: f64) -> f64 {
    params.h * y_i / (1.0 - params.p)
}

/// `Ψ = κ/(1−βq) [ηq + (q−h)/(1−h)]`, so that `E_I π' = p π_I + Ψ y_I`.
fn psi(params: &NkParams, q: f64) -> f64 {
    params.kappa / (1.0 - params.beta * q) * (params.eta * q + (q - params.h) / (1.0 - params.h))
}

/// Loci in the `(y, π)` plane given the solved `q` and the drag shifter.
///
/// Short run: the Euler equation with `E_I y' = (p+q) y_I` and
/// `E_I π' = p π_I + Ψ y_I`, and the Phillips curve with the same inflation
/// expectation. Medium run: the Euler and Phillips restrictions with
/// `λ_M = (drag − y_M)/(1−h)`.
pub fn loci_lines(params: &NkParams, q: f64, drag: f64) -> LociLines {
    let NkParams {
        beta,
        kappa,
        phi_pi,
        h,
        eta,
        p,
        xi_i,
    } = *params;
    let psi = psi(params, q);
    let euler_den = (1.0 - h) * (phi_pi - p);
    let short_euler = Line {
        slope: -(1.0 + h - p - q - (1.0 - h) * psi) / euler_den,
        intercept: xi_i / (phi_pi - p),
    };
    let short_phillips = Line {
        slope: (beta * psi + params.nkpc_coefficient()) / (1.0 - beta * p),
        intercept: 0.0,
    };
    let medium_ee = (1.0 - q) / ((1.0 - h) * (phi_pi - q));
    let medium_euler = Line {
        slope: -medium_ee,
        intercept: medium_ee * drag,
    };
    let medium_phillips = Line {
        slope: kappa * (eta + 1.0 / (1.0 - h)) / (1.0 - beta * q),
        intercept: -kappa * drag / ((1.0 - h) * (1.0 - beta * q)),
    };
    LociLines {
        short_euler,
        short_phillips,
        medium_euler,
        medium_phillips,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NkDerivedStats {
    pub q: f64,
    pub psi: f64,
    /// `−(1−h) / (1−p+h−q−(1−h)Ψ)`: response of `y_I` to the real-rate term.
    pub euler_slope_i: f64,
    /// `βq/(1−βq)`, the medium-run share of the PDV multiplier.
    pub pdv_coefficient: f64,
    /// `1 + βq/(1−βq)`
    pub pdv_scaling: f64,
    /// Vertical shift of the medium-run Euler locus caused by the drag.
    pub sigma_ee: f64,
    /// Vertical shift of the medium-run Phillips locus caused by the drag.
    pub sigma_pc: f64,
    /// `sigma_ee / sigma_pc`; absent when the drag vanishes.
    pub shift_ratio: Option<f64>,
    /// Horizontal (output-axis) shifts of the same two loci.
    pub sigma_ee_output: f64,
    pub sigma_pc_output: f64,
    pub output_shift_ratio: Option<f64>,
    /// `1 + η(1−h)`
    pub relative_shift: f64,
    pub nkpc_coefficient: f64,
    /// `2h − 1`
    pub q_lower_bound: f64,
    pub f_q: f64,
    /// `p + q > 1`
    pub hump: bool,
    pub drag: f64,
    pub notes: Vec<String>,
}

pub fn derived_stats(sol: &NkSolution) -> Result<NkDerivedStats> {
    let params = &sol.params;
    let NkParams {
        beta, h, eta, p, ..
    } = *params;
    let q = sol.q();
    let mut notes = Vec::new();

    let psi = psi(params, q);
    let den = 1.0 - p + h - q - (1.0 - h) * psi;
    if den.abs() < 1e-14 {
        return Err(MumsError::Domain {
            what: "short-run Euler slope",
            reason: "denominator 1-p+h-q-(1-h)Psi vanishes".into(),
        });
    }
    let bq = beta * q;
    if (1.0 - bq).abs() < 1e-14 {
        return Err(MumsError::Domain {
            what: "PDV scaling",
            reason: "1 - beta q vanishes".into(),
        });
    }

    let d = drag(params, sol.y_i());
    let with_drag = loci_lines(params, q, d);
    let no_drag = loci_lines(params, q, 0.0);
    let sigma_ee = (with_drag.medium_euler.at(0.0) - no_drag.medium_euler.at(0.0)).abs();
    let sigma_pc = (with_drag.medium_phillips.at(0.0) - no_drag.medium_phillips.at(0.0)).abs();
    let horizontal = |a: &Line, b: &Line| match (a.output_at(0.0), b.output_at(0.0)) {
        (Some(x), Some(y)) => (x - y).abs(),
        _ => f64::NAN,
    };
    let sigma_ee_output = horizontal(&with_drag.medium_euler, &no_drag.medium_euler);
    let sigma_pc_output = horizontal(&with_drag.medium_phillips, &no_drag.medium_phillips);
    let ratio = |num: f64, den: f64, what: &str, notes: &mut Vec<String>| {
        if den == 0.0 || !den.is_finite() {
            notes.push(format!("{what} undefined: the drag term is zero"));
            None
        } else {
            Some(num / den)
        }
    };
    let shift_ratio = ratio(sigma_ee, sigma_pc, "shift_ratio", &mut notes);
    let output_shift_ratio = ratio(
        sigma_ee_output,
        sigma_pc_output,
        "output_shift_ratio",
        &mut notes,
    );

    Ok(NkDerivedStats {
        q,
        psi,
        euler_slope_i: -(1.0 - h) / den,
        pdv_coefficient: bq / (1.0 - bq),
        pdv_scaling: 1.0 + bq / (1.0 - bq),
        sigma_ee,
        sigma_pc,
        shift_ratio,
        sigma_ee_output,
        sigma_pc_output,
        output_shift_ratio,
        relative_shift: 1.0 + eta * (1.0 - h),
        nkpc_coefficient: params.nkpc_coefficient(),
        q_lower_bound: 2.0 * h - 1.0,
        f_q: params.f(q),
        hump: p + q > 1.0,
        drag: d,
        notes,
    })
}

/// Output grid as multiples of each panel's equilibrium output displacement:
/// 201 points on `[−2, 2]`.
pub fn default_grid() -> Vec<f64> {
    (0..=200).map(|i| -2.0 + 4.0 * i as f64 / 200.0).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Locus {
    pub panel: &'static str,
    pub name: &'static str,
    pub line: Line,
    /// `(y, π)` points.
    pub points: Vec<(f64, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Equilibrium {
    pub panel: &'static str,
    pub name: &'static str,
    pub y: f64,
    pub pi: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AsadLoci {
    pub loci: Vec<Locus>,
    pub equilibria: Vec<Equilibrium>,
}

/// Short- and medium-run Euler and Phillips loci for the habit model and
/// its `h = 0` counterpart. `grid` holds output multiples of each panel's
/// largest equilibrium output displacement.
pub fn asad_loci(habits: &NkSolution, no_habits: &NkSolution, grid: &[f64]) -> Result<AsadLoci> {
    if grid.is_empty() {
        return Err(MumsError::Parameter {
            field: "grid",
            reason: "needs at least one point".into(),
        });
    }
    let lines = |sol: &NkSolution| loci_lines(&sol.params, sol.q(), drag(&sol.params, sol.y_i()));
    let with = lines(habits);
    let without = lines(no_habits);

    let scale = |a: f64, b: f64| {
        let s = a.abs().max(b.abs());
        if s > 0.0 {
            s
        } else {
            1.0
        }
    };
    let short_scale = scale(habits.y_i(), no_habits.y_i());
    let medium_scale = scale(habits.y_m(), no_habits.y_m());

    let locus = |panel, name, line: Line, scale: f64| Locus {
        panel,
        name,
        line,
        points: grid
            .iter()
            .map(|t| (t * scale, line.at(t * scale)))
            .collect(),
    };
    let loci = vec![
        locus("short_run", "euler_habits", with.short_euler, short_scale),
        locus(
            "short_run",
            "phillips_habits",
            with.short_phillips,
            short_scale,
        ),
        locus(
            "short_run",
            "euler_no_habits",
            without.short_euler,
            short_scale,
        ),
        locus(
            "short_run",
            "phillips_no_habits",
            without.short_phillips,
            short_scale,
        ),
        locus(
            "medium_run",
            "euler_habits",
            with.medium_euler,
            medium_scale,
        ),
        locus(
            "medium_run",
            "phillips_habits",
            with.medium_phillips,
            medium_scale,
        ),
        locus(
            "medium_run",
            "euler_no_habits",
            without.medium_euler,
            medium_scale,
        ),
        locus(
            "medium_run",
            "phillips_no_habits",
            without.medium_phillips,
            medium_scale,
        ),
    ];
    let equilibria = vec![
        Equilibrium {
            panel: "short_run",
            name: "equilibrium_habits",
            y: habits.y_i(),
            pi: habits.pi_i(),
        },
        Equilibrium {
            panel: "short_run",
            name: "equilibrium_no_habits",
            y: no_habits.y_i(),
            pi: no_habits.pi_i(),
        },
        Equilibrium {
            panel: "medium_run",
            name: "equilibrium_habits",
            y: habits.y_m(),
            pi: habits.pi_m(),
        },
        Equilibrium {
            panel: "medium_run",
            name: "equilibrium_no_habits",
            y: no_habits.y_m(),
            pi: no_habits.pi_m(),
        },
    ];
    Ok(AsadLoci { loci, equilibria })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolverOptions {
        SolverOptions::default()
    }

    /// Plain fixed-point iteration of `q = h − q(1−h)η f(q)`.
    fn iterate_fixed_point(params: &NkParams) -> f64 {
        let mut q = params.h;
        for _ in 0..10_000 {
            let next = params.h - q * (1.0 - params.h) * params.eta * params.f(q);
            if (next - q).abs() < 1e-16 {
                return next;
            }
            q = next;
        }
        q
    }

    #[test]
    fn calibration_q_matches_fixed_point_iteration() {
        let params = NkParams::default();
        let fixed = iterate_fixed_point(&params);
        assert!((fixed - 0.8507).abs() < 5e-4, "{fixed}");
        let sol = solve(&params, &opts()).unwrap();
        assert!((sol.q() - fixed).abs() < 1e-10);
        assert!(sol.markov.markov_valid);
        let check = fixed_point_q_check(&params, sol.q()).unwrap();
        assert!(check.residual.abs() < 1e-10);
        assert!(check.f_in_unit_interval);
    }

    #[test]
    fn no_habits_nests_the_forward_model() {
        let params = NkParams::default().without_habits();
        let sol = solve(&params, &opts()).unwrap();
        assert_eq!(sol.q(), 0.0);
        assert!((sol.lambda_i() + sol.y_i()).abs() < 1e-15);
        assert_eq!(fixed_point_q_check(&params, 0.0).unwrap().residual, 0.0);
    }

    #[test]
    fn restrictions_hold_for_both_routes() {
        for h in [0.0, 0.3, 0.9] {
            let params = NkParams {
                h,
                ..Default::default()
            };
            let general = solve(&params, &opts()).unwrap().states();
            let special = solve_specialized(&params).unwrap();
            for r in nk_restriction_residuals(&params, &general) {
                assert!(r.abs() < 1e-12);
            }
            for r in nk_restriction_residuals(&params, &special) {
                assert!(r.abs() < 1e-12);
            }
            assert!((general.q - special.q).abs() < 1e-12);
            assert!((general.y_i - special.y_i).abs() < 1e-12);
            assert!((general.pi_m - special.pi_m).abs() < 1e-12);
        }
    }

    #[test]
    fn no_habit_stats_degenerate() {
        let sol = solve(&NkParams::default().without_habits(), &opts()).unwrap();
        let stats = derived_stats(&sol).unwrap();
        assert_eq!(stats.pdv_scaling, 1.0);
        assert_eq!(stats.psi, 0.0);
        assert_eq!(stats.sigma_ee, 0.0);
        assert_eq!(stats.sigma_pc, 0.0);
        assert!(stats.shift_ratio.is_none());
        assert_eq!(stats.notes.len(), 2);
    }

    #[test]
    fn calibration_stats() {
        let sol = solve(&NkParams::default(), &opts()).unwrap();
        let stats = derived_stats(&sol).unwrap();
        assert!(
            (stats.pdv_coefficient - 5.34).abs() <= 0.01,
            "{}",
            stats.pdv_coefficient
        );
        assert_eq!(stats.relative_shift, 1.1);
        assert!(stats.q > stats.q_lower_bound);
        // Horizontal shifts are in the ratio 1 + η(1−h) exactly.
        let r = stats.output_shift_ratio.unwrap();
        assert!((r - stats.relative_shift).abs() < 1e-12, "{r}");
        // Ψ reproduces the inflation expectation.
        let e_pi = 0.7 * sol.pi_i() + 0.3 * sol.pi_m();
        assert!((e_pi - (0.7 * sol.pi_i() + stats.psi * sol.y_i())).abs() < 1e-15);
    }

    #[test]
    fn euler_slope_reproduces_impact_output() {
        for h in [0.0, 0.5, 0.9] {
            let params = NkParams {
                h,
                ..Default::default()
            };
            let sol = solve(&params, &opts()).unwrap();
            let stats = derived_stats(&sol).unwrap();
            let y = stats.euler_slope_i * ((params.phi_pi - params.p) * sol.pi_i() - params.xi_i);
            assert!((y - sol.y_i()).abs() < 1e-14, "h={h}: {y} vs {}", sol.y_i());
        }
    }

    #[test]
    fn loci_intersections_are_equilibria() {
        let params = NkParams::default();
        let with = solve(&params, &opts()).unwrap();
        let without = solve(&params.without_habits(), &opts()).unwrap();
        let loci = asad_loci(&with, &without, &default_grid()).unwrap();
        assert_eq!(loci.loci.len(), 8);
        assert!(loci.loci.iter().all(|l| l.points.len() == 201));

        let find = |panel: &str, name: &str| {
            loci.loci
                .iter()
                .find(|l| l.panel == panel && l.name == name)
                .unwrap()
        };
        for (panel, variant, y, pi) in [
            ("short_run", "habits", with.y_i(), with.pi_i()),
            ("short_run", "no_habits", without.y_i(), without.pi_i()),
            ("medium_run", "habits", with.y_m(), with.pi_m()),
        ] {
            let ee = find(
                panel,
                if variant == "habits" {
                    "euler_habits"
                } else {
                    "euler_no_habits"
                },
            );
            let pc = find(
                panel,
                if variant == "habits" {
                    "phillips_habits"
                } else {
                    "phillips_no_habits"
                },
            );
            let (yi, pii) = ee.line.intersect(&pc.line).unwrap();
            assert!(
                (yi - y).abs() < 1e-8 && (pii - pi).abs() < 1e-8,
                "{panel} {variant}"
            );
        }
        assert!(asad_loci(&with, &without, &[]).is_err());
    }

    #[test]
    fn no_habit_phillips_coefficient() {
        let params = NkParams::default().without_habits();
        assert!((params.nkpc_coefficient() - params.kappa * (params.eta + 1.0)).abs() < 1e-16);
    }

    #[test]
    fn invalid_params_rejected() {
        assert!(NkParams {
            phi_pi: 0.9,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(NkParams {
            h: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(NkParams {
            beta: 1.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(NkParams {
            kappa: 0.0,
            ..Default::default()
        }
        .validate()
        .is_err());
        assert!(build_model(&NkParams {
            p: 1.0,
            ..Default::default()
        })
        .is_err());
    }
}
