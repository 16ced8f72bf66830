use std::fs;
use std::path::Path;
use std::time::Instant;

use sumlab_core::harness::{check_q11, digest, render_csv, render_json_lines, CheckReport};
use sumlab_core::suites::{run_instance, run_suite, InstanceRun};
use sumlab_core::summing::{estimate_ideal_norm_lower, mixed_power_sup, nuclear_upper_bound, VectorFamily};
use sumlab_core::vfun::phi_norm;

use crate::config::{invalid, ConfigError, ScenarioConfig};
use crate::report::RunReport;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] sumlab_core::Error),
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
}

type Result<T> = std::result::Result<T, CommandError>;

fn write(dir: &Path, name: &str, contents: &str) -> Result<()> {
    let path = dir.join(name);
    fs::create_dir_all(dir)
        .and_then(|_| fs::write(&path, contents))
        .map_err(|source| CommandError::Write { path: path.display().to_string(), source })
}

fn to_json<T: serde::Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize to JSON");
    text.push('\n');
    text
}

fn finish(mut report: RunReport, start: Instant, out: &Path, name: &str) -> Result<RunReport> {
    report.passed = report.checks.iter().all(|c| c.pass);
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    write(out, name, &to_json(&report))?;
    Ok(report)
}

pub fn cmd_estimate_norm(config: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let operator = ScenarioConfig::require(&config.operator, "operator")?;
    let params = ScenarioConfig::require(&config.params, "params")?
        .validated()
        .map_err(|e| invalid("params", e))?;
    let search = sumlab_core::summing::FamilySearchConfig { seed: config.seed, ..config.search.clone() };
    let estimate = estimate_ideal_norm_lower(operator, &params, &search)?;
    let mut report = RunReport::new("estimate-norm", digest(config));
    report.estimates.push(estimate);
    finish(report, start, out, "estimate.json")
}

pub fn cmd_verify(config: &ScenarioConfig, suite_arg: &str, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let suite = suite_arg.parse().map_err(|e| invalid("suite", e))?;
    if config.suite.is_some_and(|s| s != suite) {
        return Err(invalid("suite", format!("config names {:?} but --suite is {suite}", config.suite.unwrap())).into());
    }
    let suite_config = config.suite_config();
    if suite_config.instances == 0 && config.instance.is_none() {
        return Err(invalid("instances", "must be at least 1").into());
    }
    let runs = match &config.instance {
        Some(instance) => {
            if instance.suite() != suite {
                return Err(invalid("instance", format!("instance belongs to suite {}", instance.suite())).into());
            }
            let index = config.index.unwrap_or(0);
            let reports = run_instance(instance, config.seed, index, &suite_config)?;
            vec![InstanceRun { index, instance: instance.clone(), reports }]
        }
        None => run_suite(suite, &suite_config)?,
    };

    let mut report = RunReport::new("verify", digest(config));
    for run in runs.iter().filter(|r| !r.passed()) {
        let replay = ScenarioConfig {
            suite: Some(suite),
            instance: Some(run.instance.clone()),
            index: Some(run.index),
            instances: None,
            out: None,
            ..config.clone()
        };
        write(out, &format!("{suite}-counterexample-{}.json", run.index), &to_json(&replay))?;
    }
    report.checks = runs.into_iter().flat_map(|r| r.reports).collect();
    write(out, &format!("{suite}.jsonl"), &render_json_lines(&report.checks)?)?;
    write(out, &format!("{suite}.csv"), &render_csv(&report.checks)?)?;
    finish(report, start, out, &format!("{suite}-report.json"))
}

/// One row of a σ sweep.
struct SweepRow {
    sigma: f64,
    phi: f64,
    phi_certified: bool,
    mixed: Option<f64>,
    q11: Option<CheckReport>,
}

pub fn cmd_sweep(config: &ScenarioConfig, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let f = ScenarioConfig::require(&config.function, "function")?;
    let p = *ScenarioConfig::require(&config.p, "p")?;
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid("p", format!("must be a finite number >= 1, got {p}")).into());
    }
    let grid = ScenarioConfig::require(&config.sigma_grid, "sigma_grid")?;
    if grid.is_empty() {
        return Err(invalid("sigma_grid", "must not be empty").into());
    }
    if let Some(bad) = grid.iter().find(|s| !(0.0..=1.0).contains(*s)) {
        return Err(invalid("sigma_grid", format!("values must lie in [0, 1], got {bad}")).into());
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(invalid("sigma_grid", "values must be sorted ascending").into());
    }
    if let Some(c) = config.c {
        if !(c > 0.0) || !c.is_finite() {
            return Err(invalid("C", format!("must be positive, got {c}")).into());
        }
    }
    let engine = &config.engine;
    let family = VectorFamily::new(f.space().clone(), f.values().to_vec())?;

    let mut rows = Vec::with_capacity(grid.len());
    for &sigma in grid {
        let phi = phi_norm(f, p, sigma, engine)?;
        let (mixed, q11) = if sigma < 1.0 {
            let mixed = mixed_power_sup(&family, p, sigma, engine)?.value;
            let q11 = match &config.operator {
                Some(u) => {
                    let c = config.c.unwrap_or_else(|| nuclear_upper_bound(u).value.powf(1.0 / (1.0 - sigma)));
                    Some(check_q11(u, f, sigma, c, engine, &config.tolerances)?.with_origin(config.seed, 0))
                }
                None => None,
            };
            (Some(mixed), q11)
        } else {
            (None, None)
        };
        rows.push(SweepRow { sigma, phi: phi.value, phi_certified: phi.certified, mixed, q11 });
    }

    let mut report = RunReport::new("sweep", digest(config));
    report.checks = rows.iter().filter_map(|r| r.q11.clone()).collect();
    let tolerance = config.tolerances.identity;
    for pair in rows.windows(2) {
        let check = CheckReport::inequality(
            format!("sweep_monotone[{}<={}]", pair[0].sigma, pair[1].sigma),
            pair[0].phi,
            pair[1].phi,
            1.0,
            tolerance,
            digest(&(f, p, pair[0].sigma, pair[1].sigma)),
        );
        report.checks.push(check.with_origin(config.seed, 0));
    }
    let monotone = report.checks.iter().filter(|c| c.check.starts_with("sweep_monotone")).all(|c| c.pass);
    if monotone {
        write(out, "sweep.csv", &render_sweep(&rows))?;
    } else {
        write(out, "sweep-counterexample.json", &to_json(&ScenarioConfig { out: None, ..config.clone() }))?;
    }
    finish(report, start, out, "sweep-report.json")
}

fn render_sweep(rows: &[SweepRow]) -> String {
    let float = |v: f64| format!("{v:.16e}");
    let opt = |v: Option<f64>| v.map(float).unwrap_or_default();
    let mut text = String::from("sigma,phi,phi_certified,mixed,q11_lhs,q11_rhs,q11_C,q11_margin,q11_pass\n");
    for r in rows {
        let q = r.q11.as_ref();
        let line = [
            float(r.sigma),
            float(r.phi),
            r.phi_certified.to_string(),
            opt(r.mixed),
            opt(q.map(|c| c.lhs)),
            opt(q.map(|c| c.rhs)),
            opt(q.map(|c| c.c)),
            opt(q.map(|c| c.margin)),
            q.map(|c| c.pass.to_string()).unwrap_or_default(),
        ]
        .join(",");
        text.push_str(&line);
        text.push('\n');
    }
    text
}
