//! Agreement between the closed-form, recurrence and state-space pipelines.

use std::fmt::Write as _;

use serde::Serialize;

use mums_core::analytics::{self, Variable};
use mums_core::ensemble::{self, ChainConfig};
use mums_core::oracle::{self, SolverOptions};
use mums_core::{markov, ModelSpec, Result, ShockImpulse};

pub struct McOptions {
    pub runs: usize,
    pub seed: u64,
    pub band: f64,
    pub threads: usize,
}

#[derive(Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Serialize)]
pub struct ValidationReport {
    pub q: f64,
    pub eta_kk: f64,
    pub horizon: usize,
    pub checks: Vec<Check>,
    pub max_discrepancy: f64,
    pub tol: f64,
    pub pass: bool,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let _ = writeln!(
                out,
                "{:<5} {:<28} {:.3e} (limit {:.1e})",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.value,
                c.limit
            );
        }
        for n in &self.notes {
            let _ = writeln!(out, "note: {n}");
        }
        let _ = writeln!(
            out,
            "{}, max discrepancy {:.3e} {} {:.1e}",
            if self.pass { "PASS" } else { "FAIL" },
            self.max_discrepancy,
            if self.max_discrepancy <= self.tol {
                "<="
            } else {
                ">"
            },
            self.tol
        );
        out
    }
}

pub fn run(
    model: &ModelSpec,
    shock: ShockImpulse,
    horizon: usize,
    tol: f64,
    mc: Option<McOptions>,
    opts: &SolverOptions,
) -> Result<ValidationReport> {
    let (sol, _) = markov::solve(model, shock, opts)?;
    let state_space = oracle::solve_msv(model, opts)?;
    let closed = analytics::irf(&sol, horizon);
    let iterated = oracle::iterate_irf(&state_space, horizon, shock);

    let mut recurrence_gap: f64 = 0.0;
    let mut vars = vec![Variable::Exogenous, Variable::State];
    vars.extend((0..sol.n_controls()).map(Variable::Control));
    for &v in &vars {
        let (impact, medium) = analytics::markov_states(&sol, v)?;
        let path = analytics::irf_recurrence(impact, medium, sol.p, sol.q, horizon);
        for (a, b) in path.iter().zip(closed.series(v)) {
            recurrence_gap = recurrence_gap.max((a - b).abs());
        }
    }

    let restrictions = markov::verify_restrictions(&sol, model)?;
    let mut checks = vec![
        Check::new(
            "q vs state-space root",
            (sol.q - state_space.eta_kk).abs(),
            tol,
        ),
        Check::new(
            "closed form vs state space",
            closed.max_abs_diff(&iterated),
            tol,
        ),
        Check::new("closed form vs recurrence", recurrence_gap, tol),
        Check::new(
            "Markov restrictions",
            restrictions.max(),
            tol * shock.size().abs().max(1.0),
        ),
    ];
    let max_discrepancy = checks.iter().map(|c| c.value).fold(0.0, f64::max);

    let mut notes = Vec::new();
    if let Some(mc) = mc {
        if sol.markov_valid {
            let config = ChainConfig::from_solution(&sol, mc.runs, horizon, mc.seed)?;
            let ens = ensemble::ensemble_average_with_threads(&config, mc.threads)?;
            let occ = analytics::occupancy(sol.p, sol.q, horizon)?;
            let mut worst: f64 = 0.0;
            for (tracked, result) in config.variables.iter().zip(&ens.variables) {
                for n in 0..=horizon {
                    let (pi, pm) = (occ.impact[n], occ.medium[n]);
                    let mean = pi * tracked.impact + pm * tracked.medium;
                    let second = pi * tracked.impact.powi(2) + pm * tracked.medium.powi(2);
                    let se = ((second - mean * mean).max(0.0) / mc.runs as f64).sqrt();
                    let gap = (result.mean[n] - mean).abs();
                    let z = if se > 0.0 {
                        gap / se
                    } else if gap <= 1e-12 * mean.abs().max(1e-300) {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                    worst = worst.max(z);
                }
            }
            checks.push(Check::new("ensemble band (std errors)", worst, mc.band));
        } else {
            notes.push(format!(
                "ensemble check skipped: q = {} is not a probability",
                sol.q
            ));
        }
    }

    let pass = checks.iter().all(|c| c.pass);
    Ok(ValidationReport {
        q: sol.q,
        eta_kk: state_space.eta_kk,
        horizon,
        checks,
        max_discrepancy,
        tol,
        pass,
        notes,
    })
}

impl Check {
    fn new(name: &'static str, value: f64, limit: f64) -> Self {
        Self {
            name,
            value,
            limit,
            pass: value <= limit,
        }
    }
}
