use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mums_core::analytics::{self, Variable};
use mums_core::ensemble::{self, ChainConfig, TrackedVariable};
use mums_core::io::{self, ModelDocument, RunReport, SolveOutput};
use mums_core::nk::{self, NkParams};
use mums_core::{markov, MumsError, ShockImpulse, SolverOptions};

mod validate;

#[derive(Parser)]
#[command(
    name = "mums",
    version,
    about = "Markov-chain solver for linear rational-expectations models"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a model and print the Markov solution with its run report.
    Solve {
        model: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        shock: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Impulse responses as CSV.
    Irf {
        model: PathBuf,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        shock: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Present-discount-value multipliers of every series.
    Pdv {
        model: PathBuf,
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        shock: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Cumulative responses of every series.
    Cumsum {
        model: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        shock: Option<f64>,
        #[command(flatten)]
        out: Output,
    },
    /// Ensemble average of simulated chains as CSV. Threads: MUMS_THREADS (0 = all cores).
    Simulate {
        model: PathBuf,
        #[arg(long, default_value_t = ensemble::DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        horizon: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        shock: Option<f64>,
        /// Restrict output to these series (`z`, `k` or control names).
        #[arg(long = "variable")]
        variables: Vec<String>,
        #[command(flatten)]
        out: Output,
    },
    /// Cross-check closed form, recurrence and state-space iteration.
    Validate {
        model: PathBuf,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 200)]
        horizon: usize,
        #[arg(long, allow_negative_numbers = true)]
        shock: Option<f64>,
        /// Also check a simulated ensemble against the closed form.
        #[arg(long)]
        mc: bool,
        #[arg(long, default_value_t = ensemble::DEFAULT_RUNS)]
        runs: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Allowed ensemble deviation in standard errors.
        #[arg(long, default_value_t = 4.0)]
        band: f64,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Built-in example models.
    Example {
        #[command(subcommand)]
        example: Example,
    },
    /// Ensemble means for 1, 2, 10 and 50,000 runs of the ARMA(2,1) illustration.
    #[command(name = "figure1")]
    Illustration {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 40)]
        horizon: usize,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum Example {
    /// New Keynesian model with habits: derived statistics as JSON.
    NkHabits {
        #[command(flatten)]
        params: NkArgs,
        /// Also write stats.json, irf.csv and loci.csv here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long, default_value_t = 40)]
        horizon: usize,
    },
}

#[derive(Args)]
struct NkArgs {
    #[arg(long, default_value_t = NkParams::default().beta)]
    beta: f64,
    #[arg(long, default_value_t = NkParams::default().kappa)]
    kappa: f64,
    #[arg(long, default_value_t = NkParams::default().phi_pi)]
    phi_pi: f64,
    #[arg(long, default_value_t = NkParams::default().h)]
    h: f64,
    #[arg(long, default_value_t = NkParams::default().eta, allow_negative_numbers = true)]
    eta: f64,
    #[arg(long, default_value_t = NkParams::default().p)]
    p: f64,
    #[arg(long, default_value_t = NkParams::default().xi_i, allow_negative_numbers = true)]
    xi: f64,
}

#[derive(Args)]
struct Output {
    /// Write to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

const DEFAULT_HORIZON: usize = 40;
const DEFAULT_BETA: f64 = 0.99;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<MumsError> for Failure {
    fn from(err: MumsError) -> Self {
        let code = match err {
            MumsError::Invalid(_) | MumsError::Parameter { .. } | MumsError::Document(_) => 2,
            _ => 1,
        };
        Self {
            code,
            message: err.to_string(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load(path: &Path) -> CliResult<ModelDocument> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let doc = io::parse_document(&text)?;
    doc.spec().ensure_valid()?;
    Ok(doc)
}

fn shock_of(doc: &ModelDocument, flag: Option<f64>) -> CliResult<ShockImpulse> {
    Ok(ShockImpulse::new(flag.or(doc.shock).unwrap_or(1.0))?)
}

fn emit(out: &Output, text: &str) -> CliResult<()> {
    match &out.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display()))),
        None => stdout(text),
    }
}

/// Writes to stdout, treating a closed pipe as success.
fn stdout(text: &str) -> CliResult<()> {
    let mut lock = std::io::stdout().lock();
    let result = lock
        .write_all(text.as_bytes())
        .and_then(|_| {
            if text.ends_with('\n') {
                Ok(())
            } else {
                lock.write_all(b"\n")
            }
        })
        .and_then(|_| lock.flush());
    match result {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
            Err(Failure::input(format!("cannot write to stdout: {e}")))
        }
        _ => Ok(()),
    }
}

fn threads_from_env() -> CliResult<usize> {
    match std::env::var("MUMS_THREADS") {
        Ok(v) => v.trim().parse().map_err(|_| {
            Failure::input(format!(
                "MUMS_THREADS must be a non-negative integer, found `{v}`"
            ))
        }),
        Err(_) => Ok(0),
    }
}

fn all_variables(sol: &mums_core::MarkovSolution) -> Vec<Variable> {
    let mut vars = vec![Variable::Exogenous, Variable::State];
    vars.extend((0..sol.n_controls()).map(Variable::Control));
    vars
}

#[derive(Serialize)]
struct SeriesValue {
    variable: String,
    value: f64,
}

#[derive(Serialize)]
struct SeriesTable {
    q: f64,
    markov_valid: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    values: Vec<SeriesValue>,
    warnings: Vec<String>,
}

fn run(command: Command) -> CliResult<u8> {
    let opts = SolverOptions::default();
    match command {
        Command::Solve { model, shock, out } => {
            let doc = load(&model)?;
            let spec = doc.spec();
            let start = Instant::now();
            let (solution, root) = markov::solve(&spec, shock_of(&doc, shock)?, &opts)?;
            let elapsed = start.elapsed().as_secs_f64() * 1e3;
            let mut report = RunReport::new(
                &solution,
                &root,
                markov::verify_restrictions(&solution, &spec)?,
            );
            report.elapsed_ms = Some(elapsed);
            emit(&out, &io::to_json(&SolveOutput { solution, report }))?;
        }
        Command::Irf {
            model,
            horizon,
            shock,
            out,
        } => {
            let doc = load(&model)?;
            let (sol, _) = markov::solve(&doc.spec(), shock_of(&doc, shock)?, &opts)?;
            if !sol.markov_valid {
                eprintln!(
                    "warning: q = {} is not a probability; paths are algebraic only",
                    sol.q
                );
            }
            let h = horizon.or(doc.horizon).unwrap_or(DEFAULT_HORIZON);
            emit(&out, &io::irf_csv(&analytics::irf(&sol, h)))?;
        }
        Command::Pdv {
            model,
            beta,
            shock,
            out,
        } => {
            let doc = load(&model)?;
            let (sol, _) = markov::solve(&doc.spec(), shock_of(&doc, shock)?, &opts)?;
            let beta = beta.or(doc.beta).unwrap_or(DEFAULT_BETA);
            let values = all_variables(&sol)
                .into_iter()
                .map(|v| {
                    Ok(SeriesValue {
                        variable: v.name(&sol),
                        value: analytics::pdv(&sol, beta, v)?,
                    })
                })
                .collect::<Result<Vec<_>, MumsError>>()?;
            emit(&out, &io::to_json(&table(&sol, Some(beta), values)))?;
        }
        Command::Cumsum { model, shock, out } => {
            let doc = load(&model)?;
            let (sol, _) = markov::solve(&doc.spec(), shock_of(&doc, shock)?, &opts)?;
            let values = all_variables(&sol)
                .into_iter()
                .map(|v| {
                    Ok(SeriesValue {
                        variable: v.name(&sol),
                        value: analytics::cumsum(&sol, v)?,
                    })
                })
                .collect::<Result<Vec<_>, MumsError>>()?;
            emit(&out, &io::to_json(&table(&sol, None, values)))?;
        }
        Command::Simulate {
            model,
            runs,
            seed,
            horizon,
            shock,
            variables,
            out,
        } => {
            let doc = load(&model)?;
            let threads = threads_from_env()?;
            let (sol, _) = markov::solve(&doc.spec(), shock_of(&doc, shock)?, &opts)?;
            let h = horizon.or(doc.horizon).unwrap_or(DEFAULT_HORIZON);
            let mut config = ChainConfig::from_solution(&sol, runs, h, seed)?;
            if !variables.is_empty() {
                config.variables = select(&config.variables, &variables, &sol)?;
            }
            let ens = ensemble::ensemble_average_with_threads(&config, threads)?;
            emit(&out, &io::ensemble_csv(&ens))?;
        }
        Command::Validate {
            model,
            tol,
            horizon,
            shock,
            mc,
            runs,
            seed,
            band,
            json,
        } => {
            let doc = load(&model)?;
            let mc = mc.then_some(validate::McOptions {
                runs,
                seed,
                band,
                threads: threads_from_env()?,
            });
            let report =
                validate::run(&doc.spec(), shock_of(&doc, shock)?, horizon, tol, mc, &opts)?;
            if json {
                stdout(&io::to_json(&report))?;
            } else {
                stdout(&report.render())?;
            }
            return Ok(if report.pass { 0 } else { 1 });
        }
        Command::Example {
            example:
                Example::NkHabits {
                    params,
                    out_dir,
                    horizon,
                },
        } => nk_habits(params, out_dir, horizon, &opts)?,
        Command::Illustration { seed, horizon, out } => {
            let fig = ensemble::illustration_experiment(seed, horizon, threads_from_env()?)?;
            let mut text = String::from("n,reference");
            for panel in &fig.panels {
                text.push_str(&format!(",mean_j{0},se_j{0}", panel.runs));
            }
            text.push('\n');
            for n in 0..=fig.horizon {
                text.push_str(&format!("{n},{}", io::fmt_num(fig.reference[n])));
                for panel in &fig.panels {
                    text.push_str(&format!(
                        ",{},{}",
                        io::fmt_num(panel.mean[n]),
                        io::fmt_num(panel.stderr[n])
                    ));
                }
                text.push('\n');
            }
            emit(&out, &text)?;
        }
    }
    Ok(0)
}

fn table(
    sol: &mums_core::MarkovSolution,
    beta: Option<f64>,
    values: Vec<SeriesValue>,
) -> SeriesTable {
    let mut warnings = Vec::new();
    if !sol.markov_valid {
        warnings.push(format!(
            "q = {} is not a probability; values are algebraic only",
            sol.q
        ));
    }
    SeriesTable {
        q: sol.q,
        markov_valid: sol.markov_valid,
        beta,
        values,
        warnings,
    }
}

fn select(
    tracked: &[TrackedVariable],
    names: &[String],
    sol: &mums_core::MarkovSolution,
) -> CliResult<Vec<TrackedVariable>> {
    names
        .iter()
        .map(|name| {
            let var = Variable::parse(name, sol)
                .ok_or_else(|| Failure::input(format!("unknown variable `{name}`")))?;
            let canonical = var.name(sol);
            Ok(tracked
                .iter()
                .find(|t| t.name == canonical)
                .cloned()
                .expect("all series are tracked"))
        })
        .collect()
}

#[derive(Serialize)]
struct NkOutput {
    params: NkParams,
    stats: nk::NkDerivedStats,
    restrictions: mums_core::RestrictionReport,
    fixed_point: nk::FixedPointCheck,
    solution: mums_core::MarkovSolution,
}

fn nk_habits(
    args: NkArgs,
    out_dir: Option<PathBuf>,
    horizon: usize,
    opts: &SolverOptions,
) -> CliResult<()> {
    let params = NkParams {
        beta: args.beta,
        kappa: args.kappa,
        phi_pi: args.phi_pi,
        h: args.h,
        eta: args.eta,
        p: args.p,
        xi_i: args.xi,
    };
    let sol = nk::solve(&params, opts)?;
    let model = nk::build_model(&params)?;
    let output = NkOutput {
        params,
        stats: nk::derived_stats(&sol)?,
        restrictions: markov::verify_restrictions(&sol.markov, &model)?,
        fixed_point: nk::fixed_point_q_check(&params, sol.q())?,
        solution: sol.markov.clone(),
    };
    let json = io::to_json(&output);
    stdout(&json)?;
    if let Some(dir) = out_dir {
        let write = |name: &str, text: &str| {
            let path = dir.join(name);
            fs::write(&path, text)
                .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))
        };
        fs::create_dir_all(&dir)
            .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
        let baseline = nk::solve(&params.without_habits(), opts)?;
        let loci = nk::asad_loci(&sol, &baseline, &nk::default_grid())?;
        write("stats.json", &json)?;
        write(
            "irf.csv",
            &io::irf_csv(&analytics::irf(&sol.markov, horizon)),
        )?;
        write("loci.csv", &io::loci_csv(&loci))?;
    }
    Ok(())
}
