use std::io::Write;

use qbm_sbs::average::default_samples;
use qbm_sbs::full::{default_window, time_average_numeric};
use qbm_sbs::pqml::{avg_analytic, avg_asymptotic, LARGE_SEPARATION_THRESHOLD};
use qbm_sbs::qml::{timescales, QmlParams};
use qbm_sbs::sbs::{formation_time, FactorModel, FullModel, PqmlModel, QmlModel};
use qbm_sbs::scan::{ScanPlan, ScanRow};
use qbm_sbs::{selftest, BathSpec, Factor, Partition, Scenario};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Regime, RunConfig};
use crate::error::CliError;
use crate::output;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Qml,
    Pqml,
    Full,
    Scan,
    Selftest,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Qml => "qml",
            Command::Pqml => "pqml",
            Command::Full => "full",
            Command::Scan => "scan",
            Command::Selftest => "selftest",
        }
    }
}

/// Runs `command`, writing files where the config says and a short report to
/// `log`.
pub fn run(command: Command, mut config: RunConfig, threads: Option<usize>, log: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Qml => config.regime = Regime::Qml,
        Command::Pqml => config.regime = Regime::Pqml,
        Command::Full | Command::Scan => config.regime = Regime::Full,
        Command::Selftest => {}
    }
    config.validate()?;
    match command {
        Command::Selftest => return run_selftest(&config, log),
        Command::Scan => return run_scan(&config, threads, log),
        _ => {}
    }

    let bath = config.build_bath()?;
    let partition = config.build_partition(bath.len())?;
    let series = match command {
        Command::Qml => qml_series(&config, &bath, &partition)?,
        Command::Pqml => pqml_series(&config, &bath, &partition)?,
        _ => full_series(&config, &bath, &partition)?,
    };

    let csv_path = &config.output.path;
    output::write_file(csv_path, &output::series_csv(&series.rows))?;
    let sidecar_path = config.sidecar_path();
    output::write_sidecar(&sidecar_path, &output::sidecar(command.name(), &config, series.results))?;
    report(log, format_args!("wrote {} ({} rows)", csv_path.display(), series.rows.len()))?;
    report(log, format_args!("wrote {}", sidecar_path.display()))
}

fn report(log: &mut dyn Write, msg: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    writeln!(log, "{msg}").map_err(|source| CliError::Io {
        path: "<stdout>".into(),
        source,
    })
}

struct Series {
    rows: Vec<(f64, f64, f64)>,
    results: Value,
}

fn observed(partition: &Partition) -> &[usize] {
    partition.first_macrofraction().expect("validated partition has a macrofraction")
}

fn time_grid(config: &RunConfig, default_t_max: Option<f64>) -> Result<Vec<f64>, CliError> {
    if let Some(times) = &config.run.times {
        return Ok(times.clone());
    }
    let t_max = config
        .run
        .t_max
        .or(default_t_max)
        .ok_or_else(|| CliError::Config("run.t_max: required when nothing decays".into()))?;
    let n = config.run.t_steps;
    Ok((0..=n).map(|i| t_max * (i as f64 / n as f64)).collect())
}

fn evaluate(model: &dyn FactorModel, times: &[f64]) -> Vec<(f64, f64, f64)> {
    times
        .iter()
        .map(|&t| {
            let (lg, lb) = model.ln_factors(t);
            (t, lg.exp(), lb.exp())
        })
        .collect()
}

fn formation(model: &dyn FactorModel, config: &RunConfig, times: &[f64]) -> Result<Value, CliError> {
    let t_max = times.iter().copied().fold(0.0, f64::max);
    if t_max <= 0.0 {
        return Ok(Value::Null);
    }
    let f = formation_time(model, config.run.epsilon, t_max, config.run.t_steps)?;
    Ok(json!(f))
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len() as f64;
    qbm_sbs::sum::compensated_sum(xs) / n
}

/// Ten periods of the slowest oscillator.
fn oscillation_t_max(bath: &BathSpec) -> f64 {
    let (lo, _) = bath.frequency_span(&[]);
    10.0 * 2.0 * std::f64::consts::PI / lo
}

fn qml_series(config: &RunConfig, bath: &BathSpec, partition: &Partition) -> Result<Series, CliError> {
    let units = config.units();
    let beta = config.qml.effective_beta(&units, config.env.temperature);
    let dx = config.system().separation();
    let params = QmlParams::new(dx, beta, bath.couplings().to_vec(), units)?;
    let c2_mean = mean(bath.couplings().iter().map(|c| c * c));
    let ts = timescales(dx, beta, c2_mean, &units)?;

    let model = QmlModel::new(&params, partition.unobserved(), observed(partition))?;
    let times = time_grid(config, ts.map(|ts| 2.0 * ts.tau_b))?;
    Ok(Series {
        rows: evaluate(&model, &times),
        results: json!({
            "beta": beta,
            "c2_mean": c2_mean,
            "timescales": ts,
            "unobserved_size": partition.unobserved().len(),
            "observed_size": observed(partition).len(),
            "formation": formation(&model, config, &times)?,
        }),
    })
}

fn asymptotic(s: &Scenario<'_>, idx: &[usize]) -> Value {
    match avg_asymptotic(s, idx, LARGE_SEPARATION_THRESHOLD) {
        Ok(v) => json!(v),
        Err(e) => json!({ "unavailable": e.to_string() }),
    }
}

fn pqml_series(config: &RunConfig, bath: &BathSpec, partition: &Partition) -> Result<Series, CliError> {
    let s = Scenario::new(bath, config.system(), config.env(), config.units());
    let (unobs, obs) = (partition.unobserved(), observed(partition));
    let model = PqmlModel::new(&s, unobs, obs)?;
    let times = time_grid(config, Some(oscillation_t_max(bath)))?;
    let avg_g = avg_analytic(&s, unobs)?;
    let avg_b = avg_analytic(&s, obs)?;
    Ok(Series {
        rows: evaluate(&model, &times),
        results: json!({
            "log_avg_gamma": avg_g.log_avg_gamma,
            "log_avg_b": avg_b.log_avg_b,
            "avg_gamma": avg_g.avg_gamma(),
            "avg_b": avg_b.avg_b(),
            "unobserved_terms": avg_g.terms,
            "observed_terms": avg_b.terms,
            "duplicate_frequencies": avg_g.duplicate_frequencies || avg_b.duplicate_frequencies,
            "log_avg_asymptotic_gamma": asymptotic(&s, unobs),
            "log_avg_asymptotic_b": asymptotic(&s, obs),
            "formation": formation(&model, config, &times)?,
        }),
    })
}

/// `(τ, n)` from the config, filling whichever is missing with its default.
fn window(config: &RunConfig, bath: &BathSpec, idx: &[usize]) -> (f64, usize) {
    let (tau0, n0) = default_window(bath, &config.system(), idx);
    match (config.run.tau, config.run.n_samples) {
        (Some(tau), Some(n)) => (tau, n),
        (Some(tau), None) => {
            let (_, hi) = bath.frequency_span(idx);
            (tau, default_samples(tau, 2.0 * (hi + config.system.omega)))
        }
        (None, Some(n)) => (tau0, n),
        (None, None) => (tau0, n0),
    }
}

fn full_series(config: &RunConfig, bath: &BathSpec, partition: &Partition) -> Result<Series, CliError> {
    let s = Scenario::new(bath, config.system(), config.env(), config.units());
    let (unobs, obs) = (partition.unobserved(), observed(partition));
    let model = FullModel::new(&s, unobs, obs)?;
    let times = time_grid(config, Some(oscillation_t_max(bath)))?;
    let all: Vec<usize> = unobs.iter().chain(obs).copied().collect();
    let (tau, n) = window(config, bath, &all);
    let g = time_average_numeric(Factor::Decoherence, &s, unobs, tau, n)?;
    let b = time_average_numeric(Factor::Distinguishability, &s, obs, tau, n)?;
    Ok(Series {
        rows: evaluate(&model, &times),
        results: json!({
            "avg_gamma": g.value,
            "avg_b": b.value,
            "indicator_gamma": g.indicator(),
            "indicator_b": b.indicator(),
            "tau": tau,
            "n_samples": n,
            "formation": formation(&model, config, &times)?,
        }),
    })
}

fn run_scan(config: &RunConfig, threads: Option<usize>, log: &mut dyn Write) -> Result<(), CliError> {
    let bath = config.build_bath()?;
    let partition = config.build_partition(bath.len())?;
    let explicit_window = match (config.run.tau, config.run.n_samples) {
        (None, None) => None,
        _ => {
            let mut all = partition.unobserved().to_vec();
            all.extend_from_slice(observed(&partition));
            Some(window(config, &bath, &all))
        }
    };
    let plan = ScanPlan::new(
        &bath,
        &config.system(),
        &config.units(),
        &partition,
        &config.run.temperatures,
        &config.run.squeezings,
        explicit_window,
    )?;

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("threads: must be at least one".into()));
        }
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| CliError::Config(format!("threads: {e}")))?;
    // Rows are independent and collected in order, so the result does not
    // depend on the thread count.
    let rows: Vec<ScanRow> = pool.install(|| (0..plan.n_rows()).into_par_iter().map(|j| plan.row(j)).collect());
    let grid = plan.assemble(rows)?;

    output::write_file(&config.output.path, &output::scan_csv(&grid))?;
    let sidecar_path = config.sidecar_path();
    let results = json!({
        "bath": grid.bath,
        "unobserved_size": grid.unobserved_size,
        "observed_size": grid.observed_size,
        "tau": grid.tau,
        "n_samples": grid.n_samples,
        "max_indicator": grid.max_indicator,
        "temperatures": grid.temperatures,
        "squeezings": grid.squeezings,
    });
    output::write_sidecar(&sidecar_path, &output::sidecar("scan", config, results))?;
    report(
        log,
        format_args!(
            "wrote {} ({} x {} grid, max indicator {:.3e})",
            config.output.path.display(),
            grid.temperatures.len(),
            grid.squeezings.len(),
            grid.max_indicator
        ),
    )?;
    report(log, format_args!("wrote {}", sidecar_path.display()))
}

fn run_selftest(config: &RunConfig, log: &mut dyn Write) -> Result<(), CliError> {
    let checks = selftest::run_all(config.bath.seed)?;
    for c in &checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        report(
            log,
            format_args!("{status} {:<36} deviation {:.3e} (tolerance {:.1e})", c.name, c.measured, c.tolerance),
        )?;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    if failed > 0 {
        return Err(CliError::Selftest {
            failed,
            total: checks.len(),
        });
    }
    Ok(())
}
