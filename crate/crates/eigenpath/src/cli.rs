//! Command-line front end: config ingestion, experiment orchestration,
//! sweeps with scaling fits, and CSV/JSON emission.
//!
//! Exit codes: 0 success, 1 bound violation under `--strict`, 2 config or
//! runtime error, 64 usage error.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::aqc_costs;
use crate::families;
use crate::ff_amplify::{self, FrustrationFreeSet};
use crate::ham_path::HamiltonianPath;
use crate::oracle;
use crate::qsa::{self, ObjectiveFunction};
use crate::report::{anchors, Scoreboard};
use crate::rm_engine::{self, DistPolicy, RmMode};
use crate::spectral;
use crate::verify;
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VIOLATION: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

#[derive(Parser, Debug)]
#[command(
    name = "eigenpath",
    version,
    about = "Numerical laboratory for eigenpath traversal and the randomization method"
)]
struct Cli {
    /// Exit with code 1 if any verified bound is violated.
    #[arg(long, global = true)]
    strict: bool,
    /// Worker threads for grid sweeps (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed for randomized components.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Write the aggregated verification scoreboard to this JSON file.
    #[arg(long, global = true)]
    scoreboard: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistArg {
    Gaussian,
    Exponential,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exact,
    Mc,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Grover,
    Random,
    Qubit,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate the path length and every bound on a grid; emit per-point CSV.
    Bounds {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the randomization method and emit the per-step trace.
    Rm {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, value_enum, default_value_t = DistArg::Gaussian)]
        dist: DistArg,
        /// Multiplier on 1/Δ for the distribution scale (defaults give ε′ = 1/3).
        #[arg(long)]
        sigma_scale: Option<f64>,
        #[arg(long, value_enum, default_value_t = ModeArg::Exact)]
        mode: ModeArg,
        /// Monte Carlo samples per step (mc mode).
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adiabatic and traversal cost baselines; optional integrator check.
    Aqc {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.0)]
        kappa: f64,
        /// Also integrate the evolution at T = t_aqc and check the bound.
        #[arg(long)]
        simulate: bool,
        #[arg(long, default_value_t = 1001)]
        grid: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Gap-amplify a frustration-free set and verify the √(Δ‖Π‖) bound.
    Amplify {
        /// JSON file with {"dim": .., "terms": [matrix, ...]}.
        #[arg(long, conflicts_with = "random")]
        config: Option<PathBuf>,
        /// Generate a random instance: DIM TERMS SEED.
        #[arg(long, num_args = 3, value_names = ["DIM", "TERMS", "SEED"])]
        random: Option<Vec<u64>>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Annealing-path analysis over a β grid.
    Qsa {
        #[arg(long)]
        objective: PathBuf,
        #[arg(long)]
        epsilon: f64,
        /// Final inverse temperature: "auto" or an explicit value.
        #[arg(long, default_value = "auto")]
        beta_final: String,
        /// Multiplier on the automatic β_q.
        #[arg(long, default_value_t = 1.0)]
        beta_scale: f64,
        #[arg(long, default_value_t = 41)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep a path family, measure costs, and fit the gap scaling.
    Sweep {
        #[arg(long, value_enum)]
        family: FamilyArg,
        #[arg(long, default_value_t = 2)]
        n_min: usize,
        #[arg(long, default_value_t = 6)]
        n_max: usize,
        /// Dimension for the random family.
        #[arg(long, default_value_t = 4)]
        dim: usize,
        /// Instances for the random family.
        #[arg(long, default_value_t = 8)]
        count: usize,
        /// Endpoint angles for the qubit family.
        #[arg(long, default_value_t = 0.5)]
        angle_min: f64,
        #[arg(long, default_value_t = 3.0)]
        angle_max: f64,
        #[arg(long, default_value_t = 6)]
        angle_steps: usize,
        #[arg(long, default_value_t = 0.2)]
        epsilon: f64,
        #[arg(long, default_value_t = 301)]
        grid: usize,
        #[arg(long)]
        out: PathBuf,
        /// Write the scaling-fit summary as JSON.
        #[arg(long)]
        summary: Option<PathBuf>,
    },
    /// Run the oracle suite and the full qubit-scale verification.
    Oracle {
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// Parse arguments and execute. Returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            ) =>
        {
            print!("{e}");
            return EXIT_OK;
        }
        Err(e) => {
            eprint!("{e}");
            return EXIT_USAGE;
        }
    };

    if let Some(threads) = cli.threads {
        // a pool may already exist when called twice in-process; that is fine
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }

    match dispatch(&cli) {
        Ok(scoreboard) => {
            if let Some(path) = &cli.scoreboard {
                if let Err(e) = fs::write(path, scoreboard.to_json()) {
                    eprintln!("error: cannot write scoreboard: {e}");
                    return EXIT_CONFIG;
                }
            }
            if cli.strict && !scoreboard.passes() {
                eprintln!(
                    "strict mode: {} bound violation(s)",
                    scoreboard.total_violations()
                );
                return EXIT_VIOLATION;
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_CONFIG
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Scoreboard> {
    match &cli.command {
        Command::Bounds { config, grid, out } => cmd_bounds(config, *grid, out),
        Command::Rm {
            config,
            epsilon,
            dist,
            sigma_scale,
            mode,
            samples,
            out,
        } => cmd_rm(
            config,
            *epsilon,
            *dist,
            *sigma_scale,
            *mode,
            *samples,
            cli.seed,
            out,
        ),
        Command::Aqc {
            config,
            epsilon,
            kappa,
            simulate,
            grid,
            out,
        } => cmd_aqc(config, *epsilon, *kappa, *simulate, *grid, out.as_deref()),
        Command::Amplify {
            config,
            random,
            out,
        } => cmd_amplify(config.as_deref(), random.as_deref(), out.as_deref()),
        Command::Qsa {
            objective,
            epsilon,
            beta_final,
            beta_scale,
            grid,
            out,
        } => cmd_qsa(objective, *epsilon, beta_final, *beta_scale, *grid, out),
        Command::Sweep {
            family,
            n_min,
            n_max,
            dim,
            count,
            angle_min,
            angle_max,
            angle_steps,
            epsilon,
            grid,
            out,
            summary,
        } => cmd_sweep(SweepSpec {
            family: *family,
            n_min: *n_min,
            n_max: *n_max,
            dim: *dim,
            count: *count,
            angle_min: *angle_min,
            angle_max: *angle_max,
            angle_steps: *angle_steps,
            epsilon: *epsilon,
            grid: *grid,
            seed: cli.seed,
            out: out.clone(),
            summary: summary.clone(),
        }),
        Command::Oracle { out } => cmd_oracle(cli.seed, out.as_deref()),
    }
}

fn load_path(config: &Path) -> Result<HamiltonianPath> {
    let text = fs::read_to_string(config)?;
    HamiltonianPath::from_json(&text)
}

fn write_lines(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let mut text = String::with_capacity(rows.len() * 64 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    fs::write(path, text)?;
    Ok(())
}

// ── subcommands ─────────────────────────────────────────────────────────

fn cmd_bounds(config: &Path, grid: usize, out: &Path) -> Result<Scoreboard> {
    let path = load_path(config)?;
    let report = spectral::compute_report(&path, grid)?;
    let rows: Vec<String> = report
        .samples
        .iter()
        .map(|p| {
            format!(
                "{},{},{},{},{},{},{}",
                p.s, p.energy, p.gap, p.dh_norm, p.ddh_norm, p.rate_norm, p.integrand
            )
        })
        .collect();
    write_lines(out, "s,energy,gap,dh_norm,ddh_norm,rate_norm,integrand", &rows)?;

    let mut sb = Scoreboard::new();
    verify::record_bounds(&mut sb, &report);
    println!("grid points: {}", report.grid_size);
    println!("L          = {:.9}", report.length);
    println!("L*         = {:.9}", report.bound_improved);
    println!("standard   = {:.9}", report.bound_standard);
    println!("general    = {:.9}", report.bound_general);
    if let Some(lin) = report.bound_linear {
        println!("linear     = {lin:.9}");
    }
    if let Some(ff) = report.bound_ff {
        println!("ff         = {ff:.9}");
    }
    if report.negative_integrand_points > 0 {
        eprintln!(
            "warning: integrand below -1e-8 at {} grid point(s); clipped to 0",
            report.negative_integrand_points
        );
    }
    Ok(sb)
}

fn policy_from_args(dist: DistArg, sigma_scale: Option<f64>) -> DistPolicy {
    let mut policy = match dist {
        DistArg::Gaussian => DistPolicy::gaussian_third(),
        DistArg::Exponential => DistPolicy::exponential_third(),
    };
    if let Some(scale) = sigma_scale {
        policy = policy.with_sigma_scale(scale);
    }
    policy
}

#[allow(clippy::too_many_arguments)]
fn cmd_rm(
    config: &Path,
    epsilon: f64,
    dist: DistArg,
    sigma_scale: Option<f64>,
    mode: ModeArg,
    samples: usize,
    seed: u64,
    out: &Path,
) -> Result<Scoreboard> {
    let path = load_path(config)?;
    let policy = policy_from_args(dist, sigma_scale);
    let mode = match mode {
        ModeArg::Exact => RmMode::Exact,
        ModeArg::Mc => RmMode::Mc { n_samples: samples },
    };
    let report = rm_engine::run_rm(&path, epsilon, &policy, mode, seed)?;
    let rows: Vec<String> = report
        .rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{},{},{},{}",
                r.j,
                r.s,
                r.gap,
                r.alpha,
                r.sin2_bound,
                r.pr,
                r.coherence,
                r.coherence_bound,
                r.eps_prime,
                r.step_cost,
                r.cum_cost
            )
        })
        .collect();
    write_lines(
        out,
        "j,s_j,gap,alpha_j,sin2_bound,pr_j,c_j,c_bound,eps_prime,step_cost,cum_cost",
        &rows,
    )?;

    let mut sb = Scoreboard::new();
    rm_engine::record_run(&mut sb, &report);
    println!("steps          = {}", report.rows.len());
    println!("L*             = {:.9}", report.l_star);
    println!("final fidelity = {:.9}", report.final_fidelity);
    println!("fidelity bound = {:.9}", report.fidelity_bound);
    println!("sum sin^2      = {:.9}", report.sum_sin2);
    println!("total cost     = {:.6}", report.total_cost);
    println!("cost bound     = {:.6}", report.cost_closed_form);
    Ok(sb)
}

fn cmd_aqc(
    config: &Path,
    epsilon: f64,
    kappa: f64,
    simulate: bool,
    grid: usize,
    out: Option<&Path>,
) -> Result<Scoreboard> {
    let path = load_path(config)?;
    let kappa_prime = (2.0 / std::f64::consts::PI).sqrt();
    let report = aqc_costs::cost_report(&path, epsilon, kappa, kappa_prime, grid)?;
    let mut sb = Scoreboard::new();

    #[derive(Serialize)]
    struct AqcOutput {
        #[serde(flatten)]
        costs: aqc_costs::CostReport,
        #[serde(skip_serializing_if = "Option::is_none")]
        simulated_fidelity: Option<f64>,
        #[serde(skip_serializing_if = "Option::is_none")]
        simulated_infidelity_within_epsilon: Option<bool>,
    }
    let mut output = AqcOutput {
        costs: report.clone(),
        simulated_fidelity: None,
        simulated_infidelity_within_epsilon: None,
    };
    if simulate {
        let run =
            aqc_costs::simulate_adiabatic_converged(&path, report.t_aqc, 1e-6, 256, 1 << 20)?;
        let ok = 1.0 - run.fidelity <= epsilon;
        sb.record(anchors::ADIABATIC_BOUND, 1.0 - run.fidelity, epsilon, ok);
        output.simulated_fidelity = Some(run.fidelity);
        output.simulated_infidelity_within_epsilon = Some(ok);
        println!(
            "simulated fidelity at T = t_aqc: {:.9} (steps {}, refinement {:.2e})",
            run.fidelity, run.steps, run.refinement_delta
        );
    }
    let text = serde_json::to_string_pretty(&output)?;
    match out {
        Some(p) => fs::write(p, &text)?,
        None => println!("{text}"),
    }
    Ok(sb)
}

fn cmd_amplify(
    config: Option<&Path>,
    random: Option<&[u64]>,
    out: Option<&Path>,
) -> Result<Scoreboard> {
    let set = match (config, random) {
        (Some(path), None) => {
            let text = fs::read_to_string(path)?;
            FrustrationFreeSet::from_json(&text)?
        }
        (None, Some(spec)) if spec.len() == 3 => {
            ff_amplify::generate_ff_ensemble(spec[0] as usize, spec[1] as usize, spec[2])?
        }
        _ => {
            return Err(Error::Config(
                "amplify needs exactly one of --config or --random DIM TERMS SEED".into(),
            ))
        }
    };
    let report = ff_amplify::amplify_report(&set)?;
    let mut sb = Scoreboard::new();
    sb.record(
        anchors::AMPLIFIED_GAP,
        report.bound_sqrt,
        report.delta_prime,
        report.holds,
    );
    let text = serde_json::to_string_pretty(&report)?;
    match out {
        Some(p) => fs::write(p, &text)?,
        None => println!("{text}"),
    }
    Ok(sb)
}

fn cmd_qsa(
    objective: &Path,
    epsilon: f64,
    beta_final: &str,
    beta_scale: f64,
    grid: usize,
    out: &Path,
) -> Result<Scoreboard> {
    let text = fs::read_to_string(objective)?;
    let obj = ObjectiveFunction::from_json(&text)?;
    let beta_q = match beta_final {
        "auto" => beta_scale * qsa::beta_final(&obj, epsilon)?,
        value => value
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("bad --beta-final value '{value}'")))?,
    };
    if beta_q <= 0.0 {
        return Err(Error::Domain("beta_final must be positive".into()));
    }
    let n = grid.max(2);
    let mut sb = Scoreboard::new();
    let mut rows = Vec::with_capacity(n);
    let chain_feasible = obj.len() <= 1 << 12;
    for k in 0..n {
        let beta = beta_q * k as f64 / (n - 1) as f64;
        let point = qsa::coherent_gibbs(&obj, beta)?;
        let (_, variance) = qsa::mean_and_variance(&obj, beta)?;
        let identity = qsa::rate_identity_check(&obj, beta, 1e-4)?;
        sb.record(
            anchors::GIBBS_RATE_IDENTITY,
            identity.rel_err,
            1e-6,
            identity.rel_err <= 1e-6,
        );
        let gap = if chain_feasible {
            qsa::metropolis_gap(&obj, beta)?
        } else {
            f64::NAN
        };
        rows.push(format!(
            "{},{},{},{},{},{},{}",
            beta,
            point.partition,
            point.mean_energy,
            variance,
            identity.lhs_fd,
            identity.rhs_variance,
            gap
        ));
    }
    write_lines(out, "beta,Z,mean_E,var_E,rate_lhs,rate_rhs,gap", &rows)?;

    let q = qsa::q_star(&obj, beta_q, epsilon)?;
    println!("beta_q   = {beta_q:.9}");
    println!("q* exact = {:.9}", q.exact);
    println!("q* cap   = {:.9}", q.cap);
    if chain_feasible {
        let gap_fn = |beta: f64| qsa::metropolis_gap(&obj, beta).unwrap_or(f64::NAN);
        let kappa_prime = (2.0 / std::f64::consts::PI).sqrt();
        let (t_qsa, t_old) = qsa::qsa_costs(&obj, epsilon, &gap_fn, kappa_prime, n)?;
        sb.record(anchors::QSA_COST, t_qsa, t_old, t_qsa <= t_old);
        println!("t_qsa    = {t_qsa:.6}");
        println!("t_old    = {t_old:.6}");
    }
    Ok(sb)
}

// ── sweeps and scaling fits ─────────────────────────────────────────────

struct SweepSpec {
    family: FamilyArg,
    n_min: usize,
    n_max: usize,
    dim: usize,
    count: usize,
    angle_min: f64,
    angle_max: f64,
    angle_steps: usize,
    epsilon: f64,
    grid: usize,
    seed: u64,
    out: PathBuf,
    summary: Option<PathBuf>,
}

/// Least-squares fit of `log T` against `log(1/Δ)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub points: usize,
}

/// Ordinary least squares on log–log pairs `(Δ, T)`. Requires at least 4
/// points with positive gap and cost.
pub fn fit_scaling(pairs: &[(f64, f64)]) -> Result<ScalingFit> {
    if pairs.len() < 4 {
        return Err(Error::Domain(format!(
            "scaling fit needs at least 4 points, got {}",
            pairs.len()
        )));
    }
    if pairs.iter().any(|&(gap, cost)| gap <= 0.0 || cost <= 0.0) {
        return Err(Error::Domain(
            "scaling fit needs positive gaps and costs".into(),
        ));
    }
    let xs: Vec<f64> = pairs.iter().map(|&(gap, _)| (1.0 / gap).ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|&(_, cost)| cost.ln()).collect();
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - xbar).powi(2)).sum();
    let sxy: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xbar) * (y - ybar))
        .sum();
    let syy: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
    if sxx <= 0.0 {
        return Err(Error::Domain("all gaps identical: cannot fit".into()));
    }
    let slope = sxy / sxx;
    let intercept = ybar - slope * xbar;
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| {
            let pred = intercept + slope * x;
            (y - pred).powi(2)
        })
        .sum();
    let r_squared = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(ScalingFit {
        slope,
        intercept,
        r_squared,
        points: pairs.len(),
    })
}

struct SweepRow {
    label: String,
    dim: usize,
    min_gap: f64,
    length: f64,
    l_star: f64,
    rm_cost: f64,
    rm_bound: f64,
    aqc_bound: f64,
    checks: Scoreboard,
}

fn sweep_point(
    path: &HamiltonianPath,
    label: String,
    epsilon: f64,
    grid: usize,
    seed: u64,
) -> Result<SweepRow> {
    let report = spectral::compute_report(path, grid)?;
    let min_gap = report
        .samples
        .iter()
        .fold(f64::INFINITY, |a, p| a.min(p.gap));
    let policy = DistPolicy::gaussian_third();
    let rm = rm_engine::run_rm_with(
        path,
        epsilon,
        &policy,
        RmMode::Exact,
        seed,
        rm_engine::RmOptions {
            l_star_grid: grid,
            substep_points: 5,
        },
    )?;
    let aqc_bound = aqc_costs::t_aqc(path, epsilon, 1.0, grid)?;
    let mut checks = Scoreboard::new();
    verify::record_bounds(&mut checks, &report);
    rm_engine::record_run(&mut checks, &rm);
    Ok(SweepRow {
        label,
        dim: path.dim(),
        min_gap,
        length: report.length,
        l_star: report.bound_improved,
        rm_cost: rm.total_cost,
        rm_bound: rm.cost_closed_form,
        aqc_bound,
        checks,
    })
}

fn cmd_sweep(spec: SweepSpec) -> Result<Scoreboard> {
    let points: Vec<(String, HamiltonianPath)> = match spec.family {
        FamilyArg::Grover => {
            if spec.n_min < 1 || spec.n_min > spec.n_max {
                return Err(Error::Config("need 1 <= n-min <= n-max".into()));
            }
            (spec.n_min..=spec.n_max)
                .map(|n| {
                    let marked = splitmix(spec.seed ^ n as u64) as usize % (1 << n);
                    Ok((format!("grover_n{n}"), families::grover_path(n, marked)?))
                })
                .collect::<Result<_>>()?
        }
        FamilyArg::Random => (0..spec.count)
            .map(|i| {
                let path = families::random_linear_path(spec.dim, splitmix(spec.seed ^ i as u64));
                Ok((format!("random_{i}"), path))
            })
            .collect::<Result<_>>()?,
        FamilyArg::Qubit => {
            if spec.angle_steps < 2 || spec.angle_min >= spec.angle_max {
                return Err(Error::Config("need angle-min < angle-max and >= 2 steps".into()));
            }
            (0..spec.angle_steps)
                .map(|k| {
                    let angle = spec.angle_min
                        + (spec.angle_max - spec.angle_min) * k as f64
                            / (spec.angle_steps - 1) as f64;
                    Ok((format!("qubit_a{angle:.4}"), families::qubit_angle_path(angle)))
                })
                .collect::<Result<_>>()?
        }
    };

    let rows: Vec<SweepRow> = points
        .par_iter()
        .map(|(label, path)| sweep_point(path, label.clone(), spec.epsilon, spec.grid, spec.seed))
        .collect::<Result<_>>()?;

    let csv_rows: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{},{},{}",
                r.label, r.dim, r.min_gap, r.length, r.l_star, r.rm_cost, r.rm_bound, r.aqc_bound
            )
        })
        .collect();
    write_lines(
        &spec.out,
        "label,dim,min_gap,length,l_star,rm_cost,rm_bound,aqc_bound",
        &csv_rows,
    )?;

    let mut sb = Scoreboard::aggregate(rows.iter().map(|r| &r.checks));

    #[derive(Serialize)]
    struct Summary {
        family: String,
        epsilon: f64,
        rm_fit: Option<ScalingFit>,
        aqc_fit: Option<ScalingFit>,
    }
    let mut summary = Summary {
        family: format!("{:?}", spec.family).to_lowercase(),
        epsilon: spec.epsilon,
        rm_fit: None,
        aqc_fit: None,
    };
    if !matches!(spec.family, FamilyArg::Random) && rows.len() >= 4 {
        let rm_pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.min_gap, r.rm_cost)).collect();
        let aqc_pairs: Vec<(f64, f64)> = rows.iter().map(|r| (r.min_gap, r.aqc_bound)).collect();
        summary.rm_fit = fit_scaling(&rm_pairs).ok();
        summary.aqc_fit = fit_scaling(&aqc_pairs).ok();
        if let Some(fit) = &summary.rm_fit {
            println!(
                "rm cost scaling:  slope {:.4} (R² {:.4}, {} points)",
                fit.slope, fit.r_squared, fit.points
            );
            sb.record(anchors::RM_TOTAL_COST, fit.slope, 2.2, fit.slope <= 2.2);
        }
        if let Some(fit) = &summary.aqc_fit {
            println!(
                "aqc bound scaling: slope {:.4} (R² {:.4}, {} points)",
                fit.slope, fit.r_squared, fit.points
            );
        }
    }
    if let Some(path) = &spec.summary {
        fs::write(path, serde_json::to_string_pretty(&summary)?)?;
    }
    Ok(sb)
}

fn splitmix(seed: u64) -> u64 {
    let mut z = seed.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn cmd_oracle(seed: u64, out: Option<&Path>) -> Result<Scoreboard> {
    let reports = oracle::run_oracle_suite(seed)?;
    let mut table = String::new();
    table.push_str(&format!(
        "{:<36} {:>14} {:>14} {:>10} {:>10} {:>6}\n",
        "oracle", "computed", "reference", "rel_err", "tol", "pass"
    ));
    let mut failures = 0;
    for r in &reports {
        if !r.pass {
            failures += 1;
        }
        table.push_str(&format!(
            "{:<36} {:>14.6e} {:>14.6e} {:>10.2e} {:>10.2e} {:>6}\n",
            r.name,
            r.computed,
            r.reference,
            r.rel_err,
            r.tolerance,
            if r.pass { "PASS" } else { "FAIL" }
        ));
    }
    print!("{table}");
    println!("oracle suite: {} checks, {failures} failure(s)", reports.len());

    let sb = verify::full_verification(seed)?;
    print!("{}", sb.render_table());
    println!(
        "verification: {} anchors, {} violation(s)",
        sb.entries.len(),
        sb.total_violations()
    );
    if let Some(path) = out {
        fs::write(path, sb.to_json())?;
    }
    let mut combined = sb;
    // fold oracle failures into the verdict so --strict notices them
    for r in &reports {
        combined.record(
            anchors::LOCAL_RATE_BOUND_ORACLES,
            r.rel_err,
            r.tolerance,
            r.pass,
        );
    }
    Ok(combined)
}

#[cfg(test)]
mod tests {
    use super::*;
    use tempfile::TempDir;

    fn write_qubit_config(dir: &TempDir) -> PathBuf {
        let path = families::qubit_x_to_z();
        let file = dir.path().join("qubit.json");
        fs::write(&file, path.to_json().unwrap()).unwrap();
        file
    }

    #[test]
    fn fit_recovers_exact_power_laws() {
        let gaps = [0.5f64, 0.25, 0.125, 0.0625, 0.03125];
        let quad: Vec<(f64, f64)> = gaps.iter().map(|&g| (g, g.powi(-2))).collect();
        let fit = fit_scaling(&quad).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-12);
        assert!((fit.r_squared - 1.0).abs() < 1e-12);
        let cubic: Vec<(f64, f64)> = gaps.iter().map(|&g| (g, g.powi(-3))).collect();
        let fit = fit_scaling(&cubic).unwrap();
        assert!((fit.slope - 3.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_input() {
        assert!(fit_scaling(&[(0.5, 1.0), (0.25, 2.0)]).is_err());
        assert!(fit_scaling(&[(0.5, 1.0), (0.5, 2.0), (0.5, 3.0), (0.5, 4.0)]).is_err());
        assert!(fit_scaling(&[(0.5, 1.0), (0.25, 2.0), (0.125, 0.0), (0.0625, 4.0)]).is_err());
    }

    #[test]
    fn bounds_subcommand_emits_grid_csv() {
        let dir = TempDir::new().unwrap();
        let config = write_qubit_config(&dir);
        let out = dir.path().join("bounds.csv");
        let code = run([
            "eigenpath",
            "bounds",
            "--config",
            config.to_str().unwrap(),
            "--grid",
            "101",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let text = fs::read_to_string(&out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "s,energy,gap,dh_norm,ddh_norm,rate_norm,integrand");
        assert_eq!(lines.len(), 102, "header plus one row per grid point");
    }

    #[test]
    fn rm_subcommand_final_fidelity_meets_bound() {
        let dir = TempDir::new().unwrap();
        let config = write_qubit_config(&dir);
        let out = dir.path().join("rm.csv");
        let code = run([
            "eigenpath",
            "--strict",
            "rm",
            "--config",
            config.to_str().unwrap(),
            "--epsilon",
            "0.1",
            "--mode",
            "exact",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK, "strict run must pass all step bounds");
        let text = fs::read_to_string(&out).unwrap();
        let last = text.lines().last().unwrap();
        let fidelity: f64 = last.split(',').nth(5).unwrap().parse().unwrap();
        assert!(fidelity >= 0.78889, "final fidelity {fidelity}");
    }

    #[test]
    fn unknown_flag_exits_usage() {
        let code = run(["eigenpath", "bounds", "--no-such-flag"]);
        assert_eq!(code, EXIT_USAGE);
    }

    #[test]
    fn missing_config_exits_config_error() {
        let code = run([
            "eigenpath",
            "bounds",
            "--config",
            "/nonexistent/path.json",
            "--out",
            "/tmp/never.csv",
        ]);
        assert_eq!(code, EXIT_CONFIG);
    }

    #[test]
    fn identical_seeds_reproduce_byte_identical_csv() {
        let dir = TempDir::new().unwrap();
        let config = write_qubit_config(&dir);
        let out1 = dir.path().join("a.csv");
        let out2 = dir.path().join("b.csv");
        for out in [&out1, &out2] {
            let code = run([
                "eigenpath",
                "--seed",
                "99",
                "rm",
                "--config",
                config.to_str().unwrap(),
                "--epsilon",
                "0.2",
                "--mode",
                "mc",
                "--samples",
                "200",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, EXIT_OK);
        }
        assert_eq!(
            fs::read(&out1).unwrap(),
            fs::read(&out2).unwrap(),
            "same (config, seed) must produce byte-identical output"
        );
    }

    #[test]
    fn amplify_random_reports_bound() {
        let dir = TempDir::new().unwrap();
        let out = dir.path().join("amp.json");
        let code = run([
            "eigenpath",
            "--strict",
            "amplify",
            "--random",
            "4",
            "2",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let report: ff_amplify::AmplifyReport =
            serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
        assert!(report.holds);
        assert!(report.delta_prime >= report.bound_sqrt - 1e-8);
    }

    #[test]
    fn qsa_subcommand_emits_beta_grid() {
        let dir = TempDir::new().unwrap();
        let obj = dir.path().join("obj.json");
        fs::write(&obj, r#"{"values": [-0.5, 0.5]}"#).unwrap();
        let out = dir.path().join("qsa.csv");
        let code = run([
            "eigenpath",
            "--strict",
            "qsa",
            "--objective",
            obj.to_str().unwrap(),
            "--epsilon",
            "0.1",
            "--grid",
            "11",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let text = fs::read_to_string(&out).unwrap();
        assert!(text.starts_with("beta,Z,mean_E,var_E,rate_lhs,rate_rhs,gap"));
        assert_eq!(text.lines().count(), 12);
    }
}
