//! `gasgen`: command-line front end for the estimation stack — model
//! validation, single-run simulation, Monte Carlo case sweeps, trace
//! re-aggregation, and the structural-guarantee suite.
//!
//! All substance lives in the library; this file only parses arguments,
//! wires files together, and prints summaries. Errors go to stderr as one
//! JSON object; the exit code is 2 for configuration problems, 3 for
//! runtime failures, and 1 when a verification suite runs but fails.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use gasgen_estimator::{gain_trace, mean_pass, EstimatorKind, FilterModel};
use gasgen_fdi::{classify_window, HealthClass};
use gasgen_harness::runner::{
    filter_steps, health_param_names, initial_covariance, run_seed, state_names, theta_map,
};
use gasgen_harness::trace::{write_index, write_run_trace, IndexEntry, TraceColumns};
use gasgen_harness::{
    confusion_csv, load_scenario, parse_estimators, reaggregate, render_tables, run_case,
    run_theorem_suite, CaseOptions, HarnessError, TheoremOptions,
};
use gasgen_model::GasGenModel;
use gasgen_plant::{simulate_run, DegradationMode, RunSpec};
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

#[derive(Parser)]
#[command(
    name = "gasgen",
    version,
    about = "Shaft-power-informed health estimation for an electrified gas generator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a model file and print its dimensions and operating point.
    ValidateModel {
        /// Path to the model JSON file.
        model: PathBuf,
    },
    /// Simulate one degraded run, filter it, and retain the trace.
    Simulate {
        /// Scenario configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the trace CSV and its index.
        #[arg(long, default_value = "out/sim")]
        out: PathBuf,
        /// Injected severity: healthy, minor, medium, or severe.
        #[arg(long, default_value = "medium")]
        class: String,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run a Monte Carlo case sweep.
    Case {
        /// Scenario configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for metrics, tables, and confusion matrices.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Master seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads (0 = one per CPU).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Keep every run's trajectories as CSV under `<out>/runs`.
        #[arg(long)]
        retain_traces: bool,
        /// Comma-separated estimator subset to run.
        #[arg(long, default_value = "pes,pens,mpes")]
        estimators: String,
    },
    /// Recompute sweep metrics from retained run traces.
    Report {
        /// Retained-runs directory (a sweep's `runs/` folder).
        #[arg(long)]
        runs: PathBuf,
        /// Where to write the recomputed metrics JSON; stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the structural-guarantee suite and write its report.
    Theorems {
        /// Scenario configuration file.
        #[arg(long)]
        config: PathBuf,
        /// Output directory for the report JSON.
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Monte Carlo runs behind the covariance comparison.
        #[arg(long, default_value_t = 10_000)]
        mc_runs: usize,
        /// Randomized models for the gain-equivalence stress.
        #[arg(long, default_value_t = 100)]
        random_models: usize,
        /// Worker threads (0 = one per CPU).
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("{}", err.to_json());
            std::process::exit(err.exit_code());
        }
    }
}

fn run(cli: Cli) -> Result<i32, HarnessError> {
    match cli.command {
        Command::ValidateModel { model } => validate_model(&model),
        Command::Simulate {
            config,
            out,
            class,
            seed,
        } => simulate(&config, &out, &class, seed),
        Command::Case {
            config,
            out,
            seed,
            jobs,
            retain_traces,
            estimators,
        } => case(&config, &out, seed, jobs, retain_traces, &estimators),
        Command::Report { runs, out } => report(&runs, out.as_deref()),
        Command::Theorems {
            config,
            out,
            mc_runs,
            random_models,
            jobs,
        } => theorems(&config, &out, mc_runs, random_models, jobs),
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn validate_model(path: &Path) -> Result<i32, HarnessError> {
    let model = GasGenModel::from_json_file(path)?;
    println!("model ok: {}", path.display());
    println!(
        "states {}, controls {}, sensors {}, health parameters {}",
        model.dims.n_x, model.dims.n_u, model.dims.n_y, model.dims.n_theta
    );
    println!(
        "operating point: rotor speed {} r/min, shaft power {} W",
        model.ss.x[0], model.ss.pe
    );
    Ok(0)
}

fn parse_class(text: &str) -> Result<HealthClass, HarnessError> {
    match text.trim().to_ascii_lowercase().as_str() {
        "healthy" => Ok(HealthClass::Healthy),
        "minor" => Ok(HealthClass::MinorFault),
        "medium" => Ok(HealthClass::MediumFault),
        "severe" => Ok(HealthClass::SevereFault),
        other => Err(HarnessError::Config {
            message: format!(
                "unknown class {other:?} (expected healthy, minor, medium, or severe)"
            ),
        }),
    }
}

fn simulate(
    config: &Path,
    out: &Path,
    class_text: &str,
    seed_override: Option<u64>,
) -> Result<i32, HarnessError> {
    let scenario = load_scenario(config)?;
    let cfg = &scenario.config;
    let sim_model = &scenario.model;
    let class = parse_class(class_text)?;
    let master_seed = seed_override.unwrap_or(cfg.seed);

    let est_model = match cfg.degradation_mode() {
        DegradationMode::Coupled { k_c, k_t } => sim_model.reduce_coupled(k_c, k_t)?,
        DegradationMode::Independent => sim_model.clone(),
    };
    let fm = FilterModel::new(&est_model)?;
    let n_x = est_model.dims.n_x;
    let n_theta = est_model.dims.n_theta;

    let load = cfg.load_params(sim_model.ss.pe);
    let pe_var = load.estimate_variance();
    let p_pe_t = cfg.placeholder_variance(&load);
    let pe_t = cfg.estimator.pe_t_dev;
    let p0 = initial_covariance(
        cfg.estimator.init_state_std,
        cfg.estimator.init_theta_std,
        n_x,
        n_theta,
    );
    let pes_trace = gain_trace(&fm, &p0, &vec![pe_var; cfg.horizon])?;
    let placeholder_trace = gain_trace(&fm, &p0, &vec![p_pe_t; cfg.horizon])?;

    let spec = RunSpec {
        class,
        mode: cfg.degradation_mode(),
        horizon: cfg.horizon,
        ramp_start: cfg.ramp_start,
        ramp_end: cfg.ramp_end,
        load,
        pi: cfg.pi_params(),
    };
    let run_id = 0usize;
    let seed = run_seed(master_seed, run_id);
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let record = simulate_run(sim_model, &spec, &mut rng)?;
    let steps = filter_steps(&record.traj);

    let init_mean = DVector::zeros(fm.n());
    let kinds = [
        ("pes", EstimatorKind::Pes, &pes_trace),
        (
            "pens",
            EstimatorKind::Pens { pe_t, p_pe_t },
            &placeholder_trace,
        ),
        ("mpes", EstimatorKind::Mpes { p_pe_t }, &placeholder_trace),
    ];
    let mut means_per_estimator = Vec::with_capacity(kinds.len());
    let mut variances = Vec::with_capacity(kinds.len());
    for (_, kind, trace) in &kinds {
        means_per_estimator.push(mean_pass(*kind, &fm, &init_mean, &trace.gains, &steps)?);
        variances.push(
            trace
                .posterior_covs
                .iter()
                .map(|p| p.diagonal())
                .collect::<Vec<_>>(),
        );
    }

    let coordinates = {
        let mut v = state_names(n_x);
        v.extend(health_param_names(n_theta));
        v
    };
    let columns = TraceColumns {
        state_names: state_names(n_x),
        param_names: health_param_names(n_theta),
        coordinates,
        estimators: kinds.iter().map(|(name, _, _)| name.to_string()).collect(),
    };
    let map = theta_map(sim_model.dims.n_theta, n_theta);
    fs::create_dir_all(out).map_err(io_err(out))?;
    let file = write_run_trace(
        out,
        run_id,
        class,
        &record,
        &map,
        &means_per_estimator,
        &variances,
        &columns,
    )?;
    write_index(
        out,
        &scenario.config_hash,
        master_seed,
        cfg,
        &columns,
        &[IndexEntry {
            file: file.clone(),
            run_id,
            seed,
            class: class.slug().to_string(),
            targets: record.plan.targets.clone(),
        }],
    )?;

    println!("simulated one {class} run at seed {seed}");
    println!("trace: {}", out.join(&file).display());
    let window_mean = |tail: &[f64]| tail.iter().sum::<f64>() / tail.len() as f64;
    for (j, name) in columns.param_names.iter().enumerate() {
        let truth_tail: Vec<f64> = record.traj.theta[cfg.horizon - cfg.window..]
            .iter()
            .map(|th| 1.0 + th[map[j]])
            .collect();
        let actual = classify_window(&truth_tail, truth_tail.len())?;
        print!(
            "{name}: true end multiplier {:.4} ({actual})",
            window_mean(&truth_tail)
        );
        for ((est_name, _, _), means) in kinds.iter().zip(&means_per_estimator) {
            let tail: Vec<f64> = means[cfg.horizon - cfg.window..]
                .iter()
                .map(|m| 1.0 + m[n_x + j])
                .collect();
            let predicted = classify_window(&tail, tail.len())?;
            print!("; {est_name} {:.4} ({predicted})", window_mean(&tail));
        }
        println!();
    }
    Ok(0)
}

fn case(
    config: &Path,
    out: &Path,
    seed: Option<u64>,
    jobs: usize,
    retain_traces: bool,
    estimators: &str,
) -> Result<i32, HarnessError> {
    let scenario = load_scenario(config)?;
    let opts = CaseOptions {
        estimators: parse_estimators(estimators)?,
        jobs,
        seed,
    };
    fs::create_dir_all(out).map_err(io_err(out))?;
    let runs_dir = out.join("runs");
    let result = run_case(
        &scenario,
        &opts,
        retain_traces.then_some(runs_dir.as_path()),
    )?;

    let metrics_path = out.join("metrics.json");
    fs::write(&metrics_path, serde_json::to_string_pretty(&result)?)
        .map_err(io_err(&metrics_path))?;
    let tables = render_tables(&result);
    let tables_path = out.join("tables.txt");
    fs::write(&tables_path, &tables).map_err(io_err(&tables_path))?;
    for (est, summary) in &result.classification {
        for (param, pc) in &summary.per_parameter {
            let path = out.join(format!("confusion_{param}_{est}.csv"));
            fs::write(&path, confusion_csv(&pc.confusion)).map_err(io_err(&path))?;
        }
    }

    print!("{tables}");
    println!("metrics: {}", metrics_path.display());
    if retain_traces {
        println!("retained traces: {}", runs_dir.display());
    }
    Ok(0)
}

fn report(runs: &Path, out: Option<&Path>) -> Result<i32, HarnessError> {
    let reagg = reaggregate(runs)?;
    let text = serde_json::to_string_pretty(&reagg)?;
    match out {
        Some(path) => {
            fs::write(path, &text).map_err(io_err(path))?;
            println!("report: {}", path.display());
        }
        None => println!("{text}"),
    }
    Ok(0)
}

fn theorems(
    config: &Path,
    out: &Path,
    mc_runs: usize,
    random_models: usize,
    jobs: usize,
) -> Result<i32, HarnessError> {
    let scenario = load_scenario(config)?;
    let opts = TheoremOptions {
        mc_runs,
        random_models,
        jobs,
        ..TheoremOptions::default()
    };
    let suite = run_theorem_suite(&scenario, &opts)?;

    fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join("theorem_report.json");
    fs::write(&path, serde_json::to_string_pretty(&suite)?).map_err(io_err(&path))?;

    let verdict = |pass: bool| if pass { "PASS" } else { "FAIL" };
    let ge = &suite.gain_equivalence;
    println!(
        "[{}] gain equivalence on scenario data: max gain dev {:.3e}, max covariance dev {:.3e} (tol {:.0e})",
        verdict(ge.pass),
        ge.max_gain_dev,
        ge.max_cov_dev,
        ge.tol
    );
    let ger = &suite.gain_equivalence_randomized;
    println!(
        "[{}] gain equivalence on {} randomized models x {} steps: max gain dev {:.3e}, max covariance dev {:.3e}",
        verdict(ger.pass),
        ger.n_models,
        ger.steps_per_model,
        ger.max_gain_dev,
        ger.max_cov_dev
    );
    let pi = &suite.placeholder_insensitivity;
    println!(
        "[{}] placeholder insensitivity: {} rungs, monotone {}, final deviation {:.3e} of state scale (tol {:.0e})",
        verdict(pi.pass),
        pi.rungs.len(),
        pi.monotone,
        pi.final_delta / pi.state_scale,
        pi.rel_tol
    );
    let ord = &suite.error_covariance_ordering;
    println!(
        "[{}] error-covariance ordering: min diagonal gap {:.3e}, after burn-in {:.3e}",
        verdict(ord.pass),
        ord.min_diag_gap,
        ord.min_diag_gap_after_burn_in
    );
    let mc = &suite.cee_vs_monte_carlo;
    for probe in &mc.probes {
        println!(
            "    step {}: Monte Carlo vs analytic relative deviation {:.4} (power-informed), {:.4} (placeholder gains)",
            probe.step, probe.max_rel_dev_pes, probe.max_rel_dev_mpes
        );
    }
    println!(
        "[{}] achieved covariance vs {} Monte Carlo runs (tol {})",
        verdict(mc.pass),
        mc.n_runs,
        mc.tol
    );
    println!("overall: {}", verdict(suite.pass));
    println!("report: {}", path.display());
    Ok(if suite.pass { 0 } else { 1 })
}
