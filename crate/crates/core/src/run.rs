//! Run orchestration: build a simulation from a config, step it, write
//! `series.csv`, snapshots and `failure.json`.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ModelName, RunConfig, SchemeName};
use crate::diagnostics::{self, ConvergenceReport, TimeSeries};
use crate::error::{Error, Result};
use crate::io::{save_snapshot, write_series_csv, SeriesWriter};
use crate::models::{GenericModel, PartitionModel, VesicleModel};
use crate::spectral::{Grid, RealField};
use crate::steppers::{LagrangeApproach, Model, SchemeKind, SchemeState, Simulation, StepReport};

/// Process exit status.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Numerical = 1,
    Config = 2,
}

/// A numerical failure that stopped a run.
#[derive(Clone, Debug)]
pub struct Failure {
    /// Index of the step that failed (the state is at `step - 1`).
    pub step: usize,
    pub t: f64,
    pub error: Error,
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} (t = {:e}): {}", self.step, self.t, self.error)
    }
}

impl Failure {
    pub fn to_json(&self) -> serde_json::Value {
        let (multiplier, reason, trace) = match &self.error {
            Error::MultiplierFailure {
                multiplier,
                reason,
                trace,
            } => (Some(multiplier.clone()), reason.clone(), trace.clone()),
            other => (None, other.to_string(), Vec::new()),
        };
        serde_json::json!({
            "step": self.step,
            "t": self.t,
            "multiplier": multiplier,
            "reason": reason,
            "residual_trace": trace.iter().map(|v| if v.is_finite() { serde_json::json!(v) } else { serde_json::Value::Null }).collect::<Vec<_>>(),
            "message": self.error.to_string(),
        })
    }
}

pub fn build_grid(cfg: &RunConfig) -> Result<Grid> {
    Ok(Grid::new(&cfg.modes)?.with_dealiasing(cfg.dealias))
}

pub fn build_model(cfg: &RunConfig, grid: &Grid) -> Result<Model> {
    Ok(match cfg.model {
        ModelName::Generic => Model::Generic(GenericModel::with_presets(
            grid,
            cfg.kappa,
            cfg.potential,
            cfg.constraint,
            cfg.mobility_kind,
            cfg.mobility,
            cfg.c0,
        )?),
        ModelName::Vesicle => Model::Vesicle(VesicleModel::new(cfg.epsilon, cfg.mobility)?),
        ModelName::Partition => Model::Partition(PartitionModel::new(cfg.components, cfg.epsilon)?),
    })
}

pub fn build_simulation(cfg: &RunConfig) -> Result<Simulation> {
    cfg.validate().map_err(Error::Config)?;
    let grid = build_grid(cfg)?;
    let model = build_model(cfg, &grid)?;
    let fields = cfg.initial_condition()?.build(&grid)?;
    let want = if cfg.model == ModelName::Partition {
        cfg.components
    } else {
        1
    };
    if fields.len() != want {
        return Err(Error::Config(vec![format!(
            "ic.name = {} produces {} field(s), the model needs {want}",
            cfg.ic_name,
            fields.len()
        )]));
    }
    let state = match &model {
        Model::Generic(m) => {
            SchemeState::generic(m, fields.into_iter().next().expect("one"), cfg.dt)?
        }
        Model::Vesicle(m) => {
            SchemeState::vesicle(m, fields.into_iter().next().expect("one"), cfg.dt)?
        }
        Model::Partition(m) => SchemeState::partition(m, fields, cfg.dt)?,
    };
    let mut sim = Simulation::new(model, cfg.scheme_kind(), state)?;
    sim.newton = cfg.newton;
    Ok(sim)
}

fn has_eta(kind: SchemeKind) -> bool {
    matches!(
        kind,
        SchemeKind::Approach2
            | SchemeKind::Approach3
            | SchemeKind::Stabilized(_)
            | SchemeKind::PartitionBdf2(LagrangeApproach::Third)
            | SchemeKind::VesicleBdf2(LagrangeApproach::Second | LagrangeApproach::Third)
    )
}

/// In-memory result of [`simulate`].
#[derive(Clone, Debug)]
pub struct SimOutcome {
    pub series: TimeSeries,
    pub failure: Option<Failure>,
    /// Fields at the last successful step.
    pub fields: Vec<RealField>,
    pub steps_done: usize,
}

/// Step `cfg` to its final time. `on_step` sees the simulation after each
/// successful step. Numerical failures end the run and are returned in the
/// outcome; other errors propagate.
pub fn simulate(
    cfg: &RunConfig,
    mut on_step: impl FnMut(&Simulation, &StepReport) -> Result<()>,
) -> Result<SimOutcome> {
    let mut sim = build_simulation(cfg)?;
    let mut series = TimeSeries::for_model(&sim.model, has_eta(sim.kind));
    let mut failure = None;
    for step in 1..=cfg.steps() {
        match sim.advance() {
            Ok(rep) => {
                series.push_report(sim.state.t, &rep)?;
                on_step(&sim, &rep)?;
            }
            Err(e) if e.is_numerical() => {
                failure = Some(Failure {
                    step,
                    t: step as f64 * cfg.dt,
                    error: e,
                });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SimOutcome {
        series,
        failure,
        steps_done: sim.state.step,
        fields: sim.state.phi,
    })
}

/// Final fields of a run that must succeed.
pub fn final_state(cfg: &RunConfig) -> Result<Vec<RealField>> {
    let out = simulate(cfg, |_, _| Ok(()))?;
    match out.failure {
        Some(f) => Err(f.error),
        None => Ok(out.fields),
    }
}

fn write_json(path: &Path, v: &serde_json::Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn prepare_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))
}

pub fn snapshot_name(step: usize) -> String {
    format!("snap_{step:06}.cgf")
}

/// Run `cfg`, writing `series.csv`, snapshots and, on failure, `failure.json`
/// into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path) -> Result<ExitStatus> {
    prepare_dir(out_dir)?;
    let sim = build_simulation(cfg)?;
    let names = TimeSeries::for_model(&sim.model, has_eta(sim.kind))
        .names()
        .to_vec();
    fs::write(out_dir.join("config.used"), cfg.serialize())
        .map_err(|e| Error::Io(e.to_string()))?;
    if cfg.snapshot_stride > 0 {
        save_snapshot(&out_dir.join(snapshot_name(0)), &sim.state.phi, 0.0)?;
    }
    let mut writer = SeriesWriter::create(&out_dir.join("series.csv"), &names)?;
    let steps = cfg.steps();
    let mut row = Vec::new();
    let outcome = simulate(cfg, |sim, rep| {
        let mut tmp = TimeSeries::new(names.clone())?;
        tmp.push_report(sim.state.t, rep)?;
        row = tmp.row(0);
        let n = sim.state.step;
        if n % cfg.series_stride == 0 || n == steps {
            writer.append(&row)?;
        }
        if cfg.snapshot_stride > 0 && (n % cfg.snapshot_stride == 0 || n == steps) {
            save_snapshot(&out_dir.join(snapshot_name(n)), &sim.state.phi, sim.state.t)?;
        }
        Ok(())
    })?;
    match outcome.failure {
        None => Ok(ExitStatus::Success),
        Some(f) => {
            // keep the last good row even when it falls between strides
            if outcome.steps_done % cfg.series_stride != 0 && !row.is_empty() {
                writer.append(&row)?;
            }
            write_json(&out_dir.join("failure.json"), &f.to_json())?;
            Ok(ExitStatus::Numerical)
        }
    }
}

/// Convergence study with results written to `out_dir/convergence.csv` and
/// `convergence.json`. Runs that succeeded are persisted even if another
/// one fails.
pub fn converge(
    cfg: &RunConfig,
    dts: &[f64],
    ref_dt: f64,
    out_dir: &Path,
) -> Result<(ExitStatus, Option<ConvergenceReport>)> {
    prepare_dir(out_dir)?;
    let mut all: Vec<f64> = dts.to_vec();
    all.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    all.dedup();
    if all.is_empty() || !(ref_dt > 0.0) || ref_dt >= *all.last().expect("non-empty") {
        return Err(Error::Config(vec![
            "--ref-dt must be positive and below every --dts entry".into(),
        ]));
    }
    let mut cfgs = Vec::new();
    for &dt in all.iter().chain([ref_dt].iter()) {
        let mut c = cfg.clone();
        c.dt = dt;
        c.validate().map_err(Error::Config)?;
        cfgs.push(c);
    }
    let results = crate::steppers::par_map(&cfgs, |c| simulate(c, |_, _| Ok(())));
    let mut outcomes = Vec::new();
    for r in results {
        outcomes.push(r?);
    }
    let reference = outcomes.pop().expect("reference");
    let mut rows = Vec::new();
    let mut failed = Vec::new();
    if let Some(f) = &reference.failure {
        failed.push(serde_json::json!({ "dt": ref_dt, "failure": f.to_json() }));
    }
    for (dt, o) in all.iter().zip(&outcomes) {
        match (&o.failure, &reference.failure) {
            (Some(f), _) => failed.push(serde_json::json!({ "dt": dt, "failure": f.to_json() })),
            (None, None) => rows.push((
                *dt,
                diagnostics::linf_error_all(&o.fields, &reference.fields)?,
            )),
            (None, Some(_)) => {}
        }
    }
    let mut csv = String::from("dt,linf_error\n");
    for (dt, e) in &rows {
        csv.push_str(&format!(
            "{},{}\n",
            crate::io::format_f64(*dt),
            crate::io::format_f64(*e)
        ));
    }
    fs::write(out_dir.join("convergence.csv"), csv).map_err(|e| Error::Io(e.to_string()))?;
    let report = if failed.is_empty() {
        let scale = reference
            .fields
            .iter()
            .map(RealField::max_abs)
            .fold(0.0, f64::max);
        let floor = diagnostics::error_floor(scale);
        let (d, e): (Vec<f64>, Vec<f64>) = rows.iter().cloned().unzip();
        Some(ConvergenceReport {
            observed_order: diagnostics::fit_order(&d, &e, floor),
            dts: d,
            errors: e,
            floor,
        })
    } else {
        None
    };
    write_json(
        &out_dir.join("convergence.json"),
        &serde_json::json!({
            "ref_dt": ref_dt,
            "dts": rows.iter().map(|r| r.0).collect::<Vec<_>>(),
            "errors": rows.iter().map(|r| r.1).collect::<Vec<_>>(),
            "observed_order": report.as_ref().and_then(|r| r.observed_order),
            "floor": report.as_ref().map(|r| r.floor),
            "failures": failed,
        }),
    )?;
    let status = if report.is_some() {
        ExitStatus::Success
    } else {
        ExitStatus::Numerical
    };
    Ok((status, report))
}

/// Resolve an approach label against the base config: scheme names for the
/// generic model, `1`/`2`/`3` (or `approachN`) for the vesicle model.
pub fn config_for_approach(base: &RunConfig, label: &str) -> Result<RunConfig> {
    let mut c = base.clone();
    let digit = label.strip_prefix("approach").unwrap_or(label);
    match base.model {
        ModelName::Vesicle => match digit {
            "1" | "2" | "3" => c.approach = digit.parse().expect("digit"),
            _ => {
                return Err(Error::Config(vec![format!(
                    "vesicle approaches are 1, 2, 3; got '{label}'"
                )]))
            }
        },
        ModelName::Generic => {
            c.scheme = SchemeName::ALL
                .iter()
                .find(|(n, _)| *n == label || (label.len() == 1 && n.ends_with(label)))
                .map(|(_, s)| *s)
                .filter(|s| s.fits(ModelName::Generic))
                .ok_or_else(|| Error::Config(vec![format!("unknown generic scheme '{label}'")]))?;
        }
        ModelName::Partition => match digit {
            "1" | "3" => c.approach = digit.parse().expect("digit"),
            _ => {
                return Err(Error::Config(vec![format!(
                    "partition approaches are 1, 3; got '{label}'"
                )]))
            }
        },
    }
    c.validate().map_err(Error::Config)?;
    Ok(c)
}

/// Compare approaches; writes `series_<label>.csv` per approach,
/// `failure_<label>.json` for failed ones and `comparison.json`.
pub fn compare(
    cfg: &RunConfig,
    labels: &[String],
    out_dir: &Path,
) -> Result<(ExitStatus, diagnostics::Comparison)> {
    prepare_dir(out_dir)?;
    let cfgs = labels
        .iter()
        .map(|l| Ok((l.clone(), config_for_approach(cfg, l)?)))
        .collect::<Result<Vec<_>>>()?;
    let cmp = diagnostics::compare_approaches(&cfgs)?;
    let mut summary = Vec::new();
    for (run, (label, c)) in cmp.runs.iter().zip(&cfgs) {
        let path: PathBuf = out_dir.join(format!("series_{label}.csv"));
        let f =
            fs::File::create(&path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        write_series_csv(&run.series, f)?;
        let drift = drift_summary(&run.series);
        if let Some(msg) = &run.failure {
            write_json(
                &out_dir.join(format!("failure_{label}.json")),
                &serde_json::json!({ "approach": label, "dt": c.dt, "message": msg }),
            )?;
        }
        summary.push(serde_json::json!({
            "approach": label,
            "steps": run.series.len(),
            "failure": run.failure,
            "constraint_drift_from_first_step": drift,
        }));
    }
    write_json(
        &out_dir.join("comparison.json"),
        &serde_json::json!({
            "approaches": summary,
            "lambda_discrepancy": cmp.lambda_discrepancy.iter().map(|(a, b, d)| serde_json::json!({"a": a, "b": b, "max_abs": d})).collect::<Vec<_>>(),
        }),
    )?;
    Ok((ExitStatus::Success, cmp))
}

fn drift_summary(s: &TimeSeries) -> serde_json::Value {
    let mut m = serde_json::Map::new();
    for name in s.names() {
        if name == "A" || name == "H" || name.starts_with("N_") || name.ends_with("_bar") {
            let col = s.column(name).expect("listed");
            if let Some(&first) = col.first() {
                let d = col.iter().map(|v| (v - first).abs()).fold(0.0, f64::max);
                m.insert(name.clone(), serde_json::json!(d));
            }
        }
    }
    serde_json::Value::Object(m)
}
