//! Closed-form objects computed from a Markov solution: impulse responses,
//! present-discount-value multipliers, cumulative sums, state occupancy
//! probabilities and powers of the substochastic transition block.

use serde::Serialize;

use crate::error::{MumsError, Result};
use crate::markov::{MarkovSolution, COINCIDENCE_THRESHOLD};

/// Which tracked series an operation applies to.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Variable {
    Exogenous,
    State,
    Control(usize),
}

impl Variable {
    /// Resolves `z`, `k` or a control name.
    pub fn parse(name: &str, sol: &MarkovSolution) -> Option<Self> {
        match name {
            "z" => Some(Variable::Exogenous),
            "k" => Some(Variable::State),
            other => sol.control_index(other).map(Variable::Control),
        }
    }

    pub fn name(self, sol: &MarkovSolution) -> String {
        match self {
            Variable::Exogenous => "z".into(),
            Variable::State => "k".into(),
            Variable::Control(i) => sol.control_names[i].clone(),
        }
    }
}

/// `(impact, medium-run)` Markov state values of a variable.
pub fn markov_states(sol: &MarkovSolution, var: Variable) -> Result<(f64, f64)> {
    match var {
        Variable::Exogenous => Ok((sol.shock, 0.0)),
        Variable::State => Ok((sol.k_i, sol.k_m)),
        Variable::Control(i) if i < sol.n_controls() => Ok((sol.y_i[i], sol.y_m[i])),
        Variable::Control(i) => Err(MumsError::Domain {
            what: "control index",
            reason: format!("{i} out of range for {} controls", sol.n_controls()),
        }),
    }
}

/// Expected paths after the shock, indexed by horizon `n = 0..=H`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IrfPath {
    pub horizon: usize,
    pub exogenous: Vec<f64>,
    pub state: Vec<f64>,
    pub control_names: Vec<String>,
    pub controls: Vec<Vec<f64>>,
}

impl IrfPath {
    pub fn series(&self, var: Variable) -> &[f64] {
        match var {
            Variable::Exogenous => &self.exogenous,
            Variable::State => &self.state,
            Variable::Control(i) => &self.controls[i],
        }
    }

    /// Largest absolute gap between two paths over every series.
    pub fn max_abs_diff(&self, other: &IrfPath) -> f64 {
        let pairs = std::iter::once((&self.exogenous, &other.exogenous))
            .chain(std::iter::once((&self.state, &other.state)))
            .chain(self.controls.iter().zip(&other.controls));
        pairs
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }
}

/// `(q^n − p^n)/(q − p)`, the expected number of medium-run visits weight.
///
/// When `|q − p| < COINCIDENCE_THRESHOLD` the limit `n p^{n−1}` is used,
/// carried to second order in `δ = q − p`:
/// `Σ_{k≤2} C(n, k+1) p^{n−1−k} δ^k`.
///
/// For `p, q > 0` the difference is evaluated as
/// `p^n expm1(n ln1p((q−p)/p)) / (q−p)`, which stays accurate when `q` is
/// close to but not within the threshold of `p`.
pub fn medium_run_weight(p: f64, q: f64, n: usize) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let delta = q - p;
    if delta.abs() < COINCIDENCE_THRESHOLD {
        let nf = n as f64;
        let mut w = nf * p.powi(n as i32 - 1);
        if n >= 2 {
            w += nf * (nf - 1.0) / 2.0 * p.powi(n as i32 - 2) * delta;
        }
        if n >= 3 {
            w += nf * (nf - 1.0) * (nf - 2.0) / 6.0 * p.powi(n as i32 - 3) * delta * delta;
        }
        return w;
    }
    if p > 0.0 && q > 0.0 {
        let growth = (n as f64 * (delta / p).ln_1p()).exp_m1();
        p.powi(n as i32) * growth / delta
    } else {
        (q.powi(n as i32) - p.powi(n as i32)) / delta
    }
}

fn control_path(p: f64, q: f64, impact: f64, medium: f64, horizon: usize) -> Vec<f64> {
    (0..=horizon)
        .map(|n| p.powi(n as i32) * impact + (1.0 - p) * medium_run_weight(p, q, n) * medium)
        .collect()
}

/// Closed-form impulse response of every tracked variable.
pub fn irf(sol: &MarkovSolution, horizon: usize) -> IrfPath {
    let (p, q) = (sol.p, sol.q);
    IrfPath {
        horizon,
        exogenous: (0..=horizon)
            .map(|n| p.powi(n as i32) * sol.shock)
            .collect(),
        state: (0..=horizon)
            .map(|n| medium_run_weight(p, q, n + 1) * sol.k_i)
            .collect(),
        control_names: sol.control_names.clone(),
        controls: sol
            .y_i
            .iter()
            .zip(&sol.y_m)
            .map(|(&yi, &ym)| control_path(p, q, yi, ym, horizon))
            .collect(),
    }
}

/// Ensemble-average recursion: `x_0 = y_I`, `x_1 = p y_I + (1−p) y_M`,
/// `x_n = (p+q) x_{n−1} − p q x_{n−2}`.
pub fn irf_recurrence(y_i: f64, y_m: f64, p: f64, q: f64, horizon: usize) -> Vec<f64> {
    let mut path = Vec::with_capacity(horizon + 1);
    path.push(y_i);
    if horizon >= 1 {
        path.push(p * y_i + (1.0 - p) * y_m);
    }
    for n in 2..=horizon {
        let next = (p + q) * path[n - 1] - p * q * path[n - 2];
        path.push(next);
    }
    path
}

/// Present-discount-value multiplier `x_I + β(1−p)/(1−βq) x_M`: the
/// discounted response relative to the discounted path of the exogenous
/// process `Σ βⁿ pⁿ`.
pub fn pdv(sol: &MarkovSolution, beta: f64, var: Variable) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(MumsError::Parameter {
            field: "beta",
            reason: format!("must lie in (0, 1), found {beta}"),
        });
    }
    if (beta * sol.q).abs() >= 1.0 {
        return Err(MumsError::Domain {
            what: "present discount value",
            reason: format!("|beta q| = {} >= 1", (beta * sol.q).abs()),
        });
    }
    let (impact, medium) = markov_states(sol, var)?;
    Ok(impact + beta * (1.0 - sol.p) / (1.0 - beta * sol.q) * medium)
}

/// Cumulative response `x_I/(1−p) + x_M/(1−q)`.
pub fn cumsum(sol: &MarkovSolution, var: Variable) -> Result<f64> {
    if sol.q.abs() >= 1.0 {
        return Err(MumsError::Domain {
            what: "cumulative sum",
            reason: format!("|q| = {} >= 1", sol.q.abs()),
        });
    }
    let (impact, medium) = markov_states(sol, var)?;
    Ok(impact / (1.0 - sol.p) + medium / (1.0 - sol.q))
}

/// Cumulative response of the endogenous state from the medium-run state
/// alone, `k_M / (q(1−q))`; needs `q ≠ 0`.
pub fn state_cumsum_from_medium(sol: &MarkovSolution) -> Result<f64> {
    if sol.q == 0.0 || sol.q.abs() >= 1.0 {
        return Err(MumsError::Domain {
            what: "state cumulative sum",
            reason: format!("needs 0 < |q| < 1, found {}", sol.q),
        });
    }
    Ok(sol.k_m / (sol.q * (1.0 - sol.q)))
}

/// Unconditional probabilities of the impact and medium-run states.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OccupancyPath {
    pub impact: Vec<f64>,
    pub medium: Vec<f64>,
}

fn check_probabilities(p: f64, q: f64) -> Result<()> {
    for (field, v) in [("p", p), ("q", q)] {
        if !(0.0..1.0).contains(&v) {
            return Err(MumsError::Parameter {
                field,
                reason: format!("must be a probability in [0, 1), found {v}"),
            });
        }
    }
    Ok(())
}

/// Iterates `π_{n} = Qᵀ π_{n−1}` from `π_0 = (1, 0)`.
pub fn occupancy(p: f64, q: f64, horizon: usize) -> Result<OccupancyPath> {
    check_probabilities(p, q)?;
    let mut impact = Vec::with_capacity(horizon + 1);
    let mut medium = Vec::with_capacity(horizon + 1);
    let (mut pi, mut pm) = (1.0, 0.0);
    for _ in 0..=horizon {
        impact.push(pi);
        medium.push(pm);
        (pi, pm) = (p * pi, (1.0 - p) * pi + q * pm);
    }
    Ok(OccupancyPath { impact, medium })
}

/// `Qⁿ = [[pⁿ, (1−p)(qⁿ−pⁿ)/(q−p)], [0, qⁿ]]` for `Q = [[p, 1−p], [0, q]]`.
pub fn q_matrix_power(p: f64, q: f64, n: usize) -> [[f64; 2]; 2] {
    [
        [p.powi(n as i32), (1.0 - p) * medium_run_weight(p, q, n)],
        [0.0, q.powi(n as i32)],
    ]
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HumpReport {
    pub has_hump: bool,
    pub peak_index: usize,
    /// `E_I[x_{t+1}] / x_I`
    pub ratio: f64,
}

/// Whether the response peaks after impact. For the endogenous state this is
/// equivalent to `p + q > 1`.
pub fn hump_diagnosis(sol: &MarkovSolution, var: Variable, horizon: usize) -> Result<HumpReport> {
    let (impact, medium) = markov_states(sol, var)?;
    if impact == 0.0 {
        return Err(MumsError::Domain {
            what: "hump ratio",
            reason: "impact response is zero".into(),
        });
    }
    let path = irf_recurrence(impact, medium, sol.p, sol.q, horizon.max(1));
    let peak_index = path
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()).then(b.0.cmp(&a.0)))
        .map(|(i, _)| i)
        .unwrap_or(0);
    Ok(HumpReport {
        has_hump: path[1].abs() > path[0].abs(),
        peak_index,
        ratio: path[1] / path[0],
    })
}
