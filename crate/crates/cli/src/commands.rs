use std::fmt;
use std::path::{Path, PathBuf};

use sensorscene_core::dataset::{load_dataset, make_folds, DatasetError};
use sensorscene_core::eval::{
    aggregate_importance, cross_validate, sweep as run_sweep, ClassifierKind, ClassifierSpec, EvalError, MetricReport,
    Mode, SpecOverrides, SweepGrid, SweepTable,
};
use sensorscene_core::linear::PenaltyKind;
use sensorscene_core::rng::rng_from_seed;
use sensorscene_core::sim::{simulate_campaign, SimConfig, SimError};
use sensorscene_core::{Dataset, FoldPlan};
use serde_json::json;

use crate::manifest::{file_artifact, sibling, RunManifest};
use crate::svg::{bar_chart, line_plot, Panel, Series};
use crate::Hyper;

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments, configuration or grid; exit code 2.
    Usage(String),
    /// I/O or failed computation; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => f.write_str(m),
        }
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        match e {
            EvalError::Spec(_) | EvalError::Grid(_) | EvalError::NoImportance(_) => CliError::Usage(e.to_string()),
            EvalError::GridPoint { ref source, .. } if matches!(**source, EvalError::Spec(_)) => {
                CliError::Usage(e.to_string())
            }
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Io(_) => CliError::Runtime(e.to_string()),
            SimError::UnknownKey(_)
            | SimError::DuplicateKey(_)
            | SimError::BadValue { .. }
            | SimError::ConfigSyntax { .. }
            | SimError::Invalid(_) => CliError::Usage(e.to_string()),
            _ => CliError::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

fn load(data: &Path) -> Result<Dataset, CliError> {
    load_dataset(data).map_err(|e: DatasetError| CliError::Runtime(format!("{}: {e}", data.display())))
}

fn parse_kind(classifier: &str) -> Result<ClassifierKind, CliError> {
    Ok(classifier.parse::<ClassifierKind>()?)
}

fn parse_mode(mode: &str) -> Result<Mode, CliError> {
    Ok(mode.parse::<Mode>()?)
}

/// Default hyperparameters of `kind` with the overrides of `hyper` applied.
pub fn build_spec(kind: ClassifierKind, hyper: &Hyper) -> Result<ClassifierSpec, CliError> {
    let penalty = match &hyper.penalty {
        Some(s) => Some(s.parse::<PenaltyKind>().map_err(|e| CliError::Usage(e.to_string()))?),
        None => None,
    };
    let overrides = SpecOverrides {
        n_trees: hyper.n_trees,
        m_try: hyper.m_try,
        rounds: hyper.rounds,
        depth: hyper.depth,
        penalty,
        lambda: hyper.lambda,
    };
    if let Some(name) = overrides.foreign_to(kind).first() {
        return Err(CliError::Usage(format!("--{} does not apply to {kind}", name.replace('_', "-"))));
    }
    Ok(ClassifierSpec::with_overrides(kind, &overrides)?)
}

fn plan(dataset: &Dataset, folds: usize, seed: u64) -> Result<FoldPlan, CliError> {
    make_folds(dataset, folds, &mut rng_from_seed(seed)).map_err(|e| CliError::Usage(e.to_string()))
}

fn finish(
    manifest: RunManifest,
    out: &Path,
    outputs: Vec<(PathBuf, Vec<u8>)>,
    summary: String,
) -> Result<String, CliError> {
    let manifest_path = manifest.write_outputs(out, &outputs)?;
    let mut lines = vec![summary];
    lines.extend(outputs.iter().map(|(p, _)| format!("wrote {}", p.display())));
    lines.push(format!("wrote {}", manifest_path.display()));
    Ok(lines.join("\n"))
}

pub fn simulate(seed: u64, config: Option<&Path>, out: &Path) -> Result<String, CliError> {
    let cfg = match config {
        Some(path) => SimConfig::from_file(path)?,
        None => SimConfig::default(),
    };
    cfg.validate()?;
    let dataset = simulate_campaign(seed, &cfg)?;
    let mut manifest = RunManifest::new(
        "simulate",
        seed,
        cfg.digest(),
        json!({ "config": config.map(|p| p.display().to_string()) }),
    );
    if let Some(path) = config {
        manifest.inputs.push(file_artifact(path)?);
    }
    let summary = format!(
        "simulated {} experiments, {} observations (seed {seed})",
        dataset.experiments.len(),
        dataset.n_observations()
    );
    finish(manifest, out, vec![(out.to_path_buf(), dataset.to_csv_string().into_bytes())], summary)
}

pub fn crossval(
    data: &Path,
    classifier: &str,
    mode: &str,
    seed: u64,
    out: &Path,
    hyper: &Hyper,
) -> Result<String, CliError> {
    let kind = parse_kind(classifier)?;
    let mode = parse_mode(mode)?;
    let spec = build_spec(kind, hyper)?;
    let dataset = load(data)?;
    let plan = plan(&dataset, hyper.folds, seed)?;
    let outcome = cross_validate(&dataset, &spec, &plan, mode, seed)?;

    let mut per_fold = String::from("fold,obs_error,exp_error\n");
    for f in &outcome.folds {
        per_fold.push_str(&format!("{},{},{}\n", f.fold, f.observation_error, f.experiment_error));
    }
    let report_json = serde_json::to_string_pretty(&outcome.report).expect("report serialises");
    let outputs = vec![
        (out.to_path_buf(), outcome.report.to_csv().into_bytes()),
        (sibling(out, "folds.csv"), plan.to_table().into_bytes()),
        (sibling(out, "per_fold.csv"), per_fold.into_bytes()),
        (sibling(out, "json"), report_json.into_bytes()),
    ];
    let mut manifest = RunManifest::new(
        "crossval",
        seed,
        dataset.provenance.config_digest.clone(),
        json!({ "classifier": kind.name(), "mode": mode.name(), "folds": hyper.folds, "hyperparameters": spec }),
    );
    manifest.inputs.push(file_artifact(data)?);
    let mut summary = format!("{}\n{}", MetricReport::table_header(mode), outcome.report.table_row());
    if outcome.report.warnings > 0 {
        summary.push_str(&format!("\nwarning: optimiser hit its iteration cap in {} fold(s)", outcome.report.warnings));
    }
    finish(manifest, out, outputs, summary)
}

fn sweep_svg(table: &SweepTable) -> String {
    let panel = |title: &str, obs: bool| Panel {
        title: title.to_string(),
        series: table
            .series()
            .into_iter()
            .map(|s| Series {
                name: format!("{} = {s}", table.series_name),
                points: table
                    .rows
                    .iter()
                    .filter(|r| r.series == s)
                    .map(|r| (r.x, if obs { r.observation_error.mean } else { r.experiment_error.mean }))
                    .collect(),
            })
            .collect(),
    };
    line_plot(
        &format!("{} sweep ({})", table.kind, table.mode),
        &[panel("observation error", true), panel("experiment error", false)],
        &table.x_name,
        "error",
        table.kind == ClassifierKind::Logreg,
    )
}

pub fn sweep(
    data: &Path,
    classifier: &str,
    grid: Option<&str>,
    mode: &str,
    seed: u64,
    out: &Path,
    hyper: &Hyper,
) -> Result<String, CliError> {
    let kind = parse_kind(classifier)?;
    let mode = parse_mode(mode)?;
    let grid = match grid {
        Some(text) => SweepGrid::parse(kind, text)?,
        None => SweepGrid::default_for(kind)?,
    };
    grid.validate()?;
    let template = build_spec(kind, hyper)?;
    let dataset = load(data)?;
    let plan = plan(&dataset, hyper.folds, seed)?;
    let table = run_sweep(&dataset, &template, &grid, &plan, mode, seed)?;

    let outputs = vec![
        (out.to_path_buf(), table.to_csv().into_bytes()),
        (sibling(out, "svg"), sweep_svg(&table).into_bytes()),
    ];
    let mut manifest = RunManifest::new(
        "sweep",
        seed,
        dataset.provenance.config_digest.clone(),
        json!({ "classifier": kind.name(), "mode": mode.name(), "folds": hyper.folds, "grid": grid, "template": template }),
    );
    manifest.inputs.push(file_artifact(data)?);
    let summary = format!("swept {} grid points of {kind} ({mode})", table.rows.len());
    finish(manifest, out, outputs, summary)
}

pub fn importance(
    data: &Path,
    classifier: &str,
    mode: &str,
    seed: u64,
    out: &Path,
    hyper: &Hyper,
) -> Result<String, CliError> {
    let kind = parse_kind(classifier)?;
    if kind.is_null() {
        return Err(EvalError::NoImportance(kind).into());
    }
    let mode = parse_mode(mode)?;
    let spec = build_spec(kind, hyper)?;
    let dataset = load(data)?;
    let plan = plan(&dataset, hyper.folds, seed)?;
    let outcome = cross_validate(&dataset, &spec, &plan, mode, seed)?;
    let report = aggregate_importance(&outcome.folds, mode)?;

    let groups: Vec<(String, Vec<f64>)> = if report.is_coefficients() {
        report.class_names.iter().cloned().zip(report.per_class.iter().cloned()).collect()
    } else {
        vec![("importance".to_string(), report.importance.clone())]
    };
    let y_label = if report.is_coefficients() { "mean |coefficient|" } else { "mean decrease in impurity" };
    let svg = bar_chart(&format!("{kind} variable importance ({mode})"), &report.variables, &groups, y_label);
    let outputs = vec![(out.to_path_buf(), report.to_csv().into_bytes()), (sibling(out, "svg"), svg.into_bytes())];
    let mut manifest = RunManifest::new(
        "importance",
        seed,
        dataset.provenance.config_digest.clone(),
        json!({ "classifier": kind.name(), "mode": mode.name(), "folds": hyper.folds, "hyperparameters": spec }),
    );
    manifest.inputs.push(file_artifact(data)?);
    let mut ranked: Vec<(&String, f64)> = report.variables.iter().zip(report.importance.iter().copied()).collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1));
    let top: Vec<String> = ranked.iter().take(5).map(|(n, v)| format!("{n}={v:.3}")).collect();
    let summary = format!("top variables: {}", top.join(", "));
    finish(manifest, out, outputs, summary)
}
