//! Monte Carlo simulation of the absorbing three-state chain.
//!
//! Each run starts in the impact state and moves along
//! `[[p, 1−p, 0], [0, q, 1−q], [0, 0, 1]]`. Run `j` draws from a ChaCha8
//! stream keyed by `(seed, j)`, so results do not depend on how runs are
//! scheduled across threads. Runs are reduced to integer occupancy counts per
//! period, which makes the mean and standard error independent of the
//! summation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::markov_states;
use crate::analytics::Variable;
use crate::error::{MumsError, Result};
use crate::markov::MarkovSolution;

/// Runs per parallel work unit.
const BLOCK: usize = 1024;

/// Default number of simulated runs.
pub const DEFAULT_RUNS: usize = 50_000;

/// Impact and medium-run values of one tracked series. The steady state is 0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrackedVariable {
    pub name: String,
    pub impact: f64,
    pub medium: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    pub p: f64,
    pub q: f64,
    pub variables: Vec<TrackedVariable>,
    pub runs: usize,
    pub horizon: usize,
    pub seed: u64,
}

impl ChainConfig {
    pub fn new(
        p: f64,
        q: f64,
        variables: Vec<TrackedVariable>,
        runs: usize,
        horizon: usize,
        seed: u64,
    ) -> Result<Self> {
        for (field, v) in [("p", p), ("q", q)] {
            if !(0.0..1.0).contains(&v) {
                return Err(MumsError::Parameter {
                    field,
                    reason: format!("transition probability must lie in [0, 1), found {v}"),
                });
            }
        }
        if runs == 0 {
            return Err(MumsError::Parameter {
                field: "runs",
                reason: "need at least one run".into(),
            });
        }
        Ok(Self {
            p,
            q,
            variables,
            runs,
            horizon,
            seed,
        })
    }

    /// Tracks `z`, `k` and every control of a solution. Solutions whose `q` is
    /// not a probability are rejected.
    pub fn from_solution(
        sol: &MarkovSolution,
        runs: usize,
        horizon: usize,
        seed: u64,
    ) -> Result<Self> {
        if !sol.markov_valid {
            return Err(MumsError::Domain {
                what: "Markov chain simulation",
                reason: format!("q = {} is not a probability", sol.q),
            });
        }
        let mut vars = vec![Variable::Exogenous, Variable::State];
        vars.extend((0..sol.n_controls()).map(Variable::Control));
        let variables = vars
            .into_iter()
            .map(|v| {
                let (impact, medium) = markov_states(sol, v)?;
                Ok(TrackedVariable {
                    name: v.name(sol),
                    impact,
                    medium,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(sol.p, sol.q, variables, runs, horizon, seed)
    }

    /// Transition matrix of the chain; rows sum to one.
    pub fn transition_matrix(&self) -> [[f64; 3]; 3] {
        [
            [self.p, 1.0 - self.p, 0.0],
            [0.0, self.q, 1.0 - self.q],
            [0.0, 0.0, 1.0],
        ]
    }
}

/// Random stream for run `run` under `seed`.
pub fn run_stream(seed: u64, run: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run);
    rng
}

/// One realisation: state indices 0 (impact), 1 (medium run), 2 (absorbed)
/// for `n = 0..=horizon`.
pub fn simulate_run<R: Rng + ?Sized>(config: &ChainConfig, rng: &mut R) -> Vec<u8> {
    let mut path = Vec::with_capacity(config.horizon + 1);
    let mut state = 0u8;
    path.push(state);
    for _ in 0..config.horizon {
        state = match state {
            0 if rng.random::<f64>() >= config.p => 1,
            1 if rng.random::<f64>() >= config.q => 2,
            s => s,
        };
        path.push(state);
    }
    path
}

/// Per-period mean over runs and its standard error `sd/√J`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleResult {
    pub name: String,
    pub mean: Vec<f64>,
    pub stderr: Vec<f64>,
    pub runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Ensemble {
    pub runs: usize,
    /// Number of runs in each state at each period.
    pub counts: Vec<[u64; 3]>,
    pub variables: Vec<EnsembleResult>,
}

impl Ensemble {
    pub fn variable(&self, name: &str) -> Option<&EnsembleResult> {
        self.variables.iter().find(|v| v.name == name)
    }

    /// Share of runs in the absorbing state at period `n`.
    pub fn absorbed_fraction(&self, n: usize) -> f64 {
        self.counts[n][2] as f64 / self.runs as f64
    }
}

fn count_block(config: &ChainConfig, runs: std::ops::Range<usize>) -> Vec<[u64; 3]> {
    let mut counts = vec![[0u64; 3]; config.horizon + 1];
    for run in runs {
        let mut rng = run_stream(config.seed, run as u64);
        for (slot, state) in counts.iter_mut().zip(simulate_run(config, &mut rng)) {
            slot[state as usize] += 1;
        }
    }
    counts
}

fn summarize(var: &TrackedVariable, counts: &[[u64; 3]], runs: usize) -> EnsembleResult {
    let j = runs as f64;
    let values = [var.impact, var.medium, 0.0];
    let mut mean = Vec::with_capacity(counts.len());
    let mut stderr = Vec::with_capacity(counts.len());
    for c in counts {
        let m = c
            .iter()
            .zip(values)
            .map(|(&k, v)| k as f64 * v)
            .sum::<f64>()
            / j;
        let ss: f64 = c
            .iter()
            .zip(values)
            .map(|(&k, v)| k as f64 * (v - m) * (v - m))
            .sum();
        let sd = if runs > 1 {
            (ss / (j - 1.0)).sqrt()
        } else {
            0.0
        };
        mean.push(m);
        stderr.push(sd / j.sqrt());
    }
    EnsembleResult {
        name: var.name.clone(),
        mean,
        stderr,
        runs,
    }
}

/// Simulates `config.runs` runs on a pool of `threads` workers (0 = all
/// cores). The result is bit-identical for every thread count.
pub fn ensemble_average_with_threads(config: &ChainConfig, threads: usize) -> Result<Ensemble> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| MumsError::Parameter {
            field: "threads",
            reason: e.to_string(),
        })?;
    let blocks: Vec<_> = (0..config.runs)
        .step_by(BLOCK)
        .map(|start| start..(start + BLOCK).min(config.runs))
        .collect();
    let zero = || vec![[0u64; 3]; config.horizon + 1];
    let counts = pool.install(|| {
        blocks
            .into_par_iter()
            .map(|range| count_block(config, range))
            .reduce(zero, |mut acc, block| {
                for (a, b) in acc.iter_mut().zip(block) {
                    for s in 0..3 {
                        a[s] += b[s];
                    }
                }
                acc
            })
    });
    let variables = config
        .variables
        .iter()
        .map(|v| summarize(v, &counts, config.runs))
        .collect();
    Ok(Ensemble {
        runs: config.runs,
        counts,
        variables,
    })
}

pub fn ensemble_average(config: &ChainConfig) -> Result<Ensemble> {
    ensemble_average_with_threads(config, 0)
}

/// Expected number of periods spent in the impact and medium-run states,
/// `(1/(1−p), 1/(1−q))`.
pub fn expected_durations(p: f64, q: f64) -> Result<(f64, f64)> {
    for (field, v) in [("p", p), ("q", q)] {
        if !(0.0..1.0).contains(&v) {
            return Err(MumsError::Parameter {
                field,
                reason: format!("must lie in [0, 1), found {v}"),
            });
        }
    }
    Ok((1.0 / (1.0 - p), 1.0 / (1.0 - q)))
}

/// State-space coefficients of the hump-shaped illustration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ArmaIllustration {
    pub eta_kk: f64,
    pub eta_kz: f64,
    pub eta_yk: f64,
    pub eta_yz: f64,
    pub p: f64,
}

impl Default for ArmaIllustration {
    fn default() -> Self {
        Self {
            eta_kk: 0.8,
            eta_kz: 0.5,
            eta_yk: 0.5,
            eta_yz: 0.1,
            p: 0.7,
        }
    }
}

impl ArmaIllustration {
    /// Deterministic ARMA(2,1) response to `eps_0 = 1`:
    /// `y_t = (p+η_kk) y_{t−1} − p η_kk y_{t−2} + η_yz ε_t + (η_yk η_kz − η_yz η_kk) ε_{t−1}`.
    pub fn reference_path(&self, horizon: usize) -> Vec<f64> {
        let ar1 = self.p + self.eta_kk;
        let ar2 = -self.p * self.eta_kk;
        let ma1 = self.eta_yk * self.eta_kz - self.eta_yz * self.eta_kk;
        let mut y: Vec<f64> = Vec::with_capacity(horizon + 1);
        for t in 0..=horizon {
            let eps = if t == 0 { 1.0 } else { 0.0 };
            let eps_lag = if t == 1 { 1.0 } else { 0.0 };
            let lag1 = if t >= 1 { y[t - 1] } else { 0.0 };
            let lag2 = if t >= 2 { y[t - 2] } else { 0.0 };
            y.push(ar1 * lag1 + ar2 * lag2 + self.eta_yz * eps + ma1 * eps_lag);
        }
        y
    }

    /// Chain reproducing the path: `y_I = η_yz`, `y_M = η_yk η_kz/(1−p)`,
    /// `q = η_kk`.
    pub fn chain(&self, runs: usize, horizon: usize, seed: u64) -> Result<ChainConfig> {
        let var = TrackedVariable {
            name: "y".into(),
            impact: self.eta_yz,
            medium: self.eta_yk * self.eta_kz / (1.0 - self.p),
        };
        ChainConfig::new(self.p, self.eta_kk, vec![var], runs, horizon, seed)
    }
}

pub const ILLUSTRATION_RUNS: [usize; 4] = [1, 2, 10, DEFAULT_RUNS];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IllustrationTable {
    pub horizon: usize,
    pub reference: Vec<f64>,
    pub panels: Vec<EnsembleResult>,
}

/// Ensemble means for 1, 2, 10 and 50,000 runs next to the ARMA(2,1) path.
/// All panels share `seed`, so smaller panels are prefixes of larger ones.
pub fn illustration_experiment(
    seed: u64,
    horizon: usize,
    threads: usize,
) -> Result<IllustrationTable> {
    let arma = ArmaIllustration::default();
    let panels = ILLUSTRATION_RUNS
        .iter()
        .map(|&runs| {
            let config = arma.chain(runs, horizon, seed)?;
            let mut ens = ensemble_average_with_threads(&config, threads)?;
            Ok(ens.variables.remove(0))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(IllustrationTable {
        horizon,
        reference: arma.reference_path(horizon),
        panels,
    })
}
