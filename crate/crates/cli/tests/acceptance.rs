//! Acceptance criteria 1 to 8. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::{Command, ExitCode};
use std::time::Instant;

use mums_core::analytics::{self, Variable};
use mums_core::ensemble::{self, ArmaIllustration};
use mums_core::markov;
use mums_core::nk::{self, NkParams};
use mums_core::oracle;
use mums_core::{MarkovSolution, ModelSpec, ShockImpulse, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MODELS: usize = 1_000;
const IRF_HORIZON: usize = 200;
const Q_TOL: f64 = 1e-10;
const IRF_TOL: f64 = 1e-8;
const RECURRENCE_TOL: f64 = 1e-12;
const RECURRENCE_HORIZON: usize = 100;
const COINCIDENT: usize = 50;
const COINCIDENT_GAP: f64 = 1e-8;
const SUM_TERMS: usize = 10_000;
const SUM_TOL: f64 = 1e-8;
const BETA: f64 = 0.99;
const ENSEMBLE_BAND: f64 = 4.0;
const ENSEMBLE_HORIZON: usize = 40;
const RESTRICTION_TOL: f64 = 1e-8;
const BOUNDARY: f64 = 1e-10;

struct Outcome {
    pass: bool,
    detail: String,
}

/// A univariate instance with its solution.
struct Solved {
    model: ModelSpec,
    sol: MarkovSolution,
}

#[derive(Default)]
struct Ledger {
    /// Every solution produced anywhere in the suite.
    solutions: Vec<(ModelSpec, MarkovSolution)>,
}

fn univariate(a: f64, b: f64, d: f64, rho: f64, p: f64) -> ModelSpec {
    ModelSpec {
        n_controls: 1,
        control_names: vec!["y".into()],
        a0: vec![vec![1.0]],
        a1: vec![vec![a]],
        b0: vec![b],
        b1: vec![0.0],
        c0: vec![1.0],
        d0: vec![d],
        rho,
        e: 0.0,
        p,
    }
}

/// Minimum-state-variable root oracle: the root of
/// `a x² − (1 + aρ − bd) x + ρ = 0` that is continuous with `x = 0` at
/// `ρ = b = d = 0`, i.e. `(S − √D)/(2a)`. `None` for complex roots.
fn quadratic_root(a: f64, b: f64, d: f64, rho: f64) -> Option<f64> {
    let s = 1.0 + a * rho - b * d;
    let disc = s * s - 4.0 * a * rho;
    if disc < 0.0 {
        return None;
    }
    Some(if s > 0.0 {
        2.0 * rho / (s + disc.sqrt())
    } else {
        (s - disc.sqrt()) / (2.0 * a)
    })
}

/// Draws univariate models until `MODELS` stationary instances with real
/// characteristic roots are solved.
fn sample_models(ledger: &mut Ledger) -> (Vec<Solved>, usize, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_611);
    let opts = SolverOptions::default();
    let mut out = Vec::with_capacity(MODELS);
    let (mut complex, mut explosive) = (0, 0);
    while out.len() < MODELS {
        let a = loop {
            let a: f64 = rng.random_range(-0.9..=0.9);
            if a != 0.0 {
                break a;
            }
        };
        let b = rng.random_range(-0.5..=0.5);
        let d = rng.random_range(-0.5..=0.5);
        let rho = rng.random_range(0.0..=0.95);
        let p = rng.random_range(0.0..=0.95);
        let Some(root) = quadratic_root(a, b, d, rho) else {
            complex += 1;
            continue;
        };
        if root.abs() >= 1.0 {
            explosive += 1;
            continue;
        }
        let model = univariate(a, b, d, rho, p);
        let (sol, _) =
            markov::solve(&model, ShockImpulse::unit(), &opts).expect("sampled model solves");
        ledger.solutions.push((model.clone(), sol.clone()));
        out.push(Solved { model, sol });
    }
    (out, complex, explosive)
}

fn criterion_1(models: &[Solved]) -> Outcome {
    let opts = SolverOptions::default();
    let (mut q_gap, mut irf_gap, mut oracle_gap): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for m in models {
        let ss = oracle::solve_msv(&m.model, &opts).expect("state-space oracle solves");
        q_gap = q_gap.max((m.sol.q - ss.eta_kk).abs());
        let (a, b, d, rho) = (m.model.a1[0][0], m.model.b0[0], m.model.d0[0], m.model.rho);
        oracle_gap = oracle_gap.max((m.sol.q - quadratic_root(a, b, d, rho).unwrap()).abs());
        let closed = analytics::irf(&m.sol, IRF_HORIZON);
        let iterated = oracle::iterate_irf(&ss, IRF_HORIZON, ShockImpulse::unit());
        irf_gap = irf_gap.max(closed.max_abs_diff(&iterated));
    }
    Outcome {
        pass: q_gap <= Q_TOL && oracle_gap <= Q_TOL && irf_gap <= IRF_TOL,
        detail: format!(
            "{} models: max |q - eta_kk| {q_gap:.2e}, max |q - quadratic root| {oracle_gap:.2e}, max IRF gap {irf_gap:.2e}",
            models.len()
        ),
    }
}

/// Occupancy-recurrence path `x_n = π_I(n) x_I + π_M(n) x_M`.
fn occupancy_path(impact: f64, medium: f64, p: f64, q: f64, horizon: usize) -> Vec<f64> {
    let (mut pi, mut pm) = (1.0, 0.0);
    let mut out = Vec::with_capacity(horizon + 1);
    for _ in 0..=horizon {
        out.push(pi * impact + pm * medium);
        (pi, pm) = (p * pi, (1.0 - p) * pi + q * pm);
    }
    out
}

fn recurrence_gap(sol: &MarkovSolution) -> f64 {
    let closed = analytics::irf(sol, RECURRENCE_HORIZON);
    let mut gap: f64 = 0.0;
    for var in [Variable::Exogenous, Variable::State, Variable::Control(0)] {
        let (impact, medium) = analytics::markov_states(sol, var).unwrap();
        let rec = analytics::irf_recurrence(impact, medium, sol.p, sol.q, RECURRENCE_HORIZON);
        let occ = occupancy_path(impact, medium, sol.p, sol.q, RECURRENCE_HORIZON);
        for ((c, r), o) in closed.series(var).iter().zip(&rec).zip(&occ) {
            gap = gap.max((c - r).abs()).max((c - o).abs());
        }
    }
    gap
}

fn criterion_2(models: &[Solved], ledger: &mut Ledger) -> Outcome {
    let mut gap: f64 = models
        .iter()
        .map(|m| recurrence_gap(&m.sol))
        .fold(0.0, f64::max);

    // Shift p onto q; q does not depend on p when e = 0 and B1 = 0.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let opts = SolverOptions::default();
    let (mut forced, mut max_sep, mut limit_path): (usize, f64, usize) = (0, 0.0, 0);
    for m in models.iter().filter(|m| m.sol.q > 0.01 && m.sol.q < 0.94) {
        if forced == COINCIDENT {
            break;
        }
        let delta = if forced % 2 == 0 {
            rng.random_range(-1e-9..1e-9)
        } else {
            rng.random_range(-COINCIDENT_GAP..COINCIDENT_GAP)
        };
        let mut model = m.model.clone();
        model.p = m.sol.q + delta;
        let (sol, _) =
            markov::solve(&model, ShockImpulse::unit(), &opts).expect("shifted model solves");
        max_sep = max_sep.max((sol.q - sol.p).abs());
        limit_path += usize::from(sol.q_equals_p);
        gap = gap.max(recurrence_gap(&sol));
        ledger.solutions.push((model, sol));
        forced += 1;
    }
    Outcome {
        pass: gap <= RECURRENCE_TOL && forced == COINCIDENT && max_sep <= COINCIDENT_GAP,
        detail: format!(
            "{} models + {forced} with |q-p| <= {max_sep:.1e} ({limit_path} on the limit formula): max gap {gap:.2e}",
            models.len()
        ),
    }
}

fn criterion_3(models: &[Solved]) -> Outcome {
    let (mut pdv_gap, mut cum_gap): (f64, f64) = (0.0, 0.0);
    for m in models {
        let sol = &m.sol;
        let path = analytics::irf(sol, SUM_TERMS - 1);
        let discount: f64 = (0..SUM_TERMS).map(|n| (BETA * sol.p).powi(n as i32)).sum();
        for var in [Variable::Exogenous, Variable::State, Variable::Control(0)] {
            let series = path.series(var);
            let mut disc = 0.0;
            let mut weight = 1.0;
            for x in series {
                disc += weight * x;
                weight *= BETA;
            }
            let total: f64 = series.iter().sum();
            pdv_gap =
                pdv_gap.max((analytics::pdv(sol, BETA, var).unwrap() - disc / discount).abs());
            cum_gap = cum_gap.max((analytics::cumsum(sol, var).unwrap() - total).abs());
        }
    }
    Outcome {
        pass: pdv_gap <= SUM_TOL && cum_gap <= SUM_TOL,
        detail: format!("{SUM_TERMS}-term sums, beta {BETA}: max PDV gap {pdv_gap:.2e}, max cumulative gap {cum_gap:.2e}"),
    }
}

fn criterion_4() -> Outcome {
    let arma = ArmaIllustration::default();
    let fig = ensemble::illustration_experiment(2024, ENSEMBLE_HORIZON, 0).expect("ensemble runs");
    let big = fig.panels.last().unwrap();
    let config = arma.chain(big.runs, ENSEMBLE_HORIZON, 0).unwrap();
    let v = &config.variables[0];
    let occ = analytics::occupancy(config.p, config.q, ENSEMBLE_HORIZON).unwrap();
    let mut worst: f64 = 0.0;
    let mut sample_worst: f64 = 0.0;
    for n in 0..=ENSEMBLE_HORIZON {
        let mean = occ.impact[n] * v.impact + occ.medium[n] * v.medium;
        let second = occ.impact[n] * v.impact.powi(2) + occ.medium[n] * v.medium.powi(2);
        let se = ((second - mean * mean).max(0.0) / big.runs as f64).sqrt();
        let gap = (big.mean[n] - fig.reference[n]).abs();
        assert!((mean - fig.reference[n]).abs() < 1e-12);
        let z = if se > 0.0 {
            gap / se
        } else if gap < 1e-15 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
        let sz = if big.stderr[n] > 0.0 {
            gap / big.stderr[n]
        } else if gap < 1e-15 {
            0.0
        } else {
            f64::INFINITY
        };
        sample_worst = sample_worst.max(sz);
    }
    let anchors = (fig.reference[0] - 0.1).abs() < 1e-15 && (fig.reference[1] - 0.32).abs() < 1e-15;
    Outcome {
        pass: anchors && worst <= ENSEMBLE_BAND && sample_worst <= ENSEMBLE_BAND && big.runs == 50_000,
        detail: format!(
            "J={}: max deviation {worst:.2} population SE ({sample_worst:.2} sample SE), y_0={:.4} y_1={:.4}",
            big.runs, fig.reference[0], fig.reference[1]
        ),
    }
}

fn criterion_5(ledger: &mut Ledger) -> Outcome {
    let params = NkParams::default();
    let sol = nk::solve(&params, &SolverOptions::default()).expect("calibration solves");
    let check = nk::fixed_point_q_check(&params, sol.q()).unwrap();
    let stats = nk::derived_stats(&sol).unwrap();
    let relative = 1.0 + params.eta * (1.0 - params.h);
    let pass = check.residual.abs() <= 1e-10
        && check.f_in_unit_interval
        && (stats.pdv_coefficient - 5.34).abs() <= 0.01
        && relative == 1.1
        && stats.relative_shift == 1.1
        && stats
            .output_shift_ratio
            .is_some_and(|r| (r - 1.1).abs() <= 1e-12)
        && sol.q() > 2.0 * params.h - 1.0;
    ledger
        .solutions
        .push((nk::build_model(&params).unwrap(), sol.markov.clone()));
    Outcome {
        pass,
        detail: format!(
            "q {:.6}, fixed-point residual {:.1e}, beta q/(1-beta q) {:.4}, 1+eta(1-h) {}, q > {:.1}",
            sol.q(),
            check.residual,
            stats.pdv_coefficient,
            relative,
            stats.q_lower_bound
        ),
    }
}

fn criterion_6(ledger: &mut Ledger) -> Outcome {
    let opts = SolverOptions::default();
    let (mut checked, mut humps, mut excluded, mut mismatches) = (0, 0, 0, 0);
    for hi in 0..10 {
        for pi in 0..10 {
            let params = NkParams {
                h: hi as f64 / 10.0,
                p: pi as f64 / 10.0,
                ..Default::default()
            };
            let sol = nk::solve(&params, &opts).expect("grid model solves");
            let model = nk::build_model(&params).unwrap();
            let ss = oracle::solve_msv(&model, &opts).unwrap();
            let path = oracle::iterate_irf(&ss, 2, ShockImpulse::new(params.xi_i).unwrap());
            let closed = analytics::irf(&sol.markov, 2);
            ledger.solutions.push((model, sol.markov.clone()));
            if (params.p + sol.q() - 1.0).abs() <= BOUNDARY {
                excluded += 1;
                continue;
            }
            let predicted = params.p + sol.q() > 1.0;
            let hump = closed.state[1].abs() > closed.state[0].abs();
            let hump_ss = path.state[1].abs() > path.state[0].abs();
            checked += 1;
            humps += usize::from(hump);
            mismatches += usize::from(hump != predicted || hump_ss != predicted);
        }
    }
    Outcome {
        pass: mismatches == 0 && checked + excluded == 100,
        detail: format!("{checked} grid points ({humps} humped, {excluded} on the boundary): {mismatches} mismatches"),
    }
}

fn criterion_7(ledger: &Ledger) -> Outcome {
    let mut worst: f64 = 0.0;
    for (model, sol) in &ledger.solutions {
        let r = markov::verify_restrictions(sol, model).expect("restriction check runs");
        worst = worst.max(r.max() / sol.shock.abs().max(1.0));
    }
    let params = NkParams::default();
    let special = nk::solve_specialized(&params).unwrap();
    let nk_worst = nk::nk_restriction_residuals(&params, &special)
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    Outcome {
        pass: worst <= RESTRICTION_TOL && nk_worst <= RESTRICTION_TOL,
        detail: format!(
            "{} solutions: max scaled residual {worst:.2e}; specialised habit solve {nk_worst:.2e}",
            ledger.solutions.len()
        ),
    }
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("model.json");
    std::fs::write(
        &model,
        r#"{"n_controls": 2, "control_names": ["lambda", "pi"],
            "A0": [[1.0, -1.5], [0.05, 1.0]], "A1": [[1.0, -1.0], [0.0, 0.99]],
            "B0": [0.0, 0.05], "B1": [0.0, 0.0], "C0": [-1.0, 0.0], "D0": [-0.1, 0.0],
            "rho": 0.9, "e": 0.0, "p": 0.7, "shock": -0.01}"#,
    )
    .unwrap();
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_mums"))
            .args([
                "simulate",
                model.to_str().unwrap(),
                "--runs",
                "50000",
                "--seed",
                "42",
                "--horizon",
                "40",
            ])
            .env("MUMS_THREADS", threads)
            .output()
            .expect("binary runs");
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        out.stdout
    };
    let single = run("1");
    let auto = run("0");
    let eight = run("8");
    let cores = std::thread::available_parallelism().map_or(1, |n| n.get());
    let identical = single == auto && single == eight;
    Outcome {
        pass: identical && !single.is_empty(),
        detail: format!(
            "{} bytes, 1 thread vs all {cores} cores vs 8 threads: identical = {identical}",
            single.len()
        ),
    }
}

fn main() -> ExitCode {
    let mut ledger = Ledger::default();
    let start = Instant::now();
    let (models, complex, explosive) = sample_models(&mut ledger);
    let sampling = start.elapsed().as_secs_f64();
    println!(
        "sampled {} models ({complex} complex-root and {explosive} explosive draws skipped) in {sampling:.2} s",
        models.len()
    );

    type Criterion<'a> = (
        &'static str,
        Option<f64>,
        Box<dyn FnOnce(&mut Ledger) -> Outcome + 'a>,
    );
    let criteria: Vec<Criterion> = vec![
        (
            "oracle equivalence",
            Some(10.0),
            Box::new(|_| criterion_1(&models)),
        ),
        (
            "recurrence consistency",
            None,
            Box::new(|l| criterion_2(&models, l)),
        ),
        (
            "discounted and cumulative sums",
            None,
            Box::new(|_| criterion_3(&models)),
        ),
        (
            "ensemble reproduction",
            Some(30.0),
            Box::new(|_| criterion_4()),
        ),
        ("habit calibration", None, Box::new(criterion_5)),
        ("hump-shape law", None, Box::new(criterion_6)),
        ("restriction residuals", None, Box::new(|l| criterion_7(l))),
        ("determinism", None, Box::new(|_| criterion_8())),
    ];

    let mut failed = 0;
    for (i, (name, budget, check)) in criteria.into_iter().enumerate() {
        let t = Instant::now();
        let mut outcome = check(&mut ledger);
        let mut secs = t.elapsed().as_secs_f64();
        if i == 0 {
            secs += sampling;
        }
        if let Some(limit) = budget {
            if secs > limit {
                outcome.pass = false;
                outcome
                    .detail
                    .push_str(&format!("; over the {limit:.0} s budget"));
            }
        }
        failed += usize::from(!outcome.pass);
        println!(
            "criterion {} {} {name}: {} ({secs:.2} s)",
            i + 1,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
