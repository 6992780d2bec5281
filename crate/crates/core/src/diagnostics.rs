//! Time series bookkeeping, convergence studies and approach comparisons.

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::spectral::RealField;
use crate::steppers::{Model, StepReport};

/// Named, equal-length real columns; the first column is `t`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TimeSeries {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl TimeSeries {
    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.first().map(String::as_str) != Some("t") {
            return Err(Error::InvalidState(
                "the first time series column must be 't'".into(),
            ));
        }
        let columns = vec![Vec::new(); names.len()];
        Ok(Self { names, columns })
    }

    /// Columns matching what [`TimeSeries::push_report`] records for `model`.
    pub fn for_model(model: &Model, has_eta: bool) -> Self {
        let mut names: Vec<String> = vec![
            "t".into(),
            "E_original".into(),
            "E_modified_or_discrete".into(),
        ];
        let cons: Vec<String> = match model {
            Model::Generic(_) => vec!["H".into()],
            Model::Vesicle(_) => vec!["A".into(), "H".into()],
            Model::Partition(p) => (1..=p.components()).map(|j| format!("N_{j}")).collect(),
        };
        names.extend(cons.iter().cloned());
        names.extend(cons.iter().map(|c| format!("{c}_bar")));
        match model {
            Model::Partition(p) => {
                names.extend((1..=p.components()).map(|j| format!("lambda_{j}")))
            }
            _ => names.push("lambda".into()),
        }
        if has_eta {
            names.push("eta".into());
        }
        if matches!(model, Model::Vesicle(_)) {
            names.push("gamma".into());
        }
        names.extend(["newton_iters", "dissipation", "dissipation_residual"].map(String::from));
        Self::new(names).expect("starts with t")
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.columns[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.columns[i].as_slice())
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }

    pub fn push(&mut self, row: &[f64]) -> Result<()> {
        if row.len() != self.names.len() {
            return Err(Error::InvalidState(format!(
                "row has {} values for {} columns",
                row.len(),
                self.names.len()
            )));
        }
        if let Some(&last) = self.columns[0].last() {
            if !(row[0] > last) {
                return Err(Error::InvalidState(format!(
                    "time must increase: {} after {last}",
                    row[0]
                )));
            }
        }
        for (c, &v) in self.columns.iter_mut().zip(row) {
            c.push(v);
        }
        Ok(())
    }

    pub fn push_report(&mut self, t: f64, r: &StepReport) -> Result<()> {
        let mut row = vec![t, r.energy_original, r.energy_modified_or_discrete];
        row.extend(&r.constraints);
        row.extend(&r.surrogate_constraints);
        row.extend(&r.lambda);
        if self.column("eta").is_some() {
            row.push(r.eta.unwrap_or(f64::NAN));
        }
        if self.column("gamma").is_some() {
            row.push(r.gamma.unwrap_or(f64::NAN));
        }
        row.extend([r.newton_iters as f64, r.dissipation, r.dissipation_residual]);
        self.push(&row)
    }

    /// Steps at which `column` increases by more than `rel_tol (1 + |E|)`.
    pub fn monotonicity_violations(&self, column: &str, rel_tol: f64) -> Result<Vec<usize>> {
        let c = self
            .column(column)
            .ok_or_else(|| Error::InvalidState(format!("no column '{column}'")))?;
        Ok(increases(c, rel_tol))
    }

    /// Largest `|x - x_0|` over a column.
    pub fn max_drift(&self, column: &str, reference: f64) -> Option<f64> {
        self.column(column)
            .map(|c| c.iter().map(|v| (v - reference).abs()).fold(0.0, f64::max))
    }
}

/// Indices `i` with `e[i] - e[i-1] > rel_tol (1 + |e[i-1]|)`.
pub fn increases(e: &[f64], rel_tol: f64) -> Vec<usize> {
    (1..e.len())
        .filter(|&i| e[i] - e[i - 1] > rel_tol * (1.0 + e[i - 1].abs()))
        .collect()
}

/// Maximum pointwise difference.
pub fn linf_error(f: &RealField, g: &RealField) -> Result<f64> {
    Ok(f.zip_map(g, |a, b| a - b)?.max_abs())
}

/// Maximum over components.
pub fn linf_error_all(f: &[RealField], g: &[RealField]) -> Result<f64> {
    if f.len() != g.len() {
        return Err(Error::InvalidState("component count differs".into()));
    }
    f.iter()
        .zip(g)
        .try_fold(0.0, |acc, (a, b)| Ok(f64::max(acc, linf_error(a, b)?)))
}

/// Least-squares slope of `log e` against `log dt`, ignoring points with
/// `e <= floor`. `None` when fewer than two points remain.
pub fn fit_order(dts: &[f64], errors: &[f64], floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = dts
        .iter()
        .zip(errors)
        .filter(|(_, &e)| e > floor)
        .map(|(&d, &e)| (d.ln(), e.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), (x, y)| (a + x / n, b + y / n));
    let (sxy, sxx) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| {
        (a + (x - mx) * (y - my), b + (x - mx) * (x - mx))
    });
    if sxx == 0.0 {
        None
    } else {
        Some(sxy / sxx)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub dts: Vec<f64>,
    pub errors: Vec<f64>,
    /// `None` when every error sits at the round-off floor.
    pub observed_order: Option<f64>,
    pub floor: f64,
}

impl ConvergenceReport {
    /// Every error is within 10x of the round-off floor.
    pub fn at_floor(&self) -> bool {
        self.observed_order.is_none()
    }
}

/// Round-off floor used to exclude points from the order fit.
pub fn error_floor(scale: f64) -> f64 {
    10.0 * 1e-12 * scale.max(1.0)
}

/// Run `cfg` to its final time for each `dt` and for `ref_dt`, and fit the
/// L-infinity error against the reference. Runs execute concurrently.
pub fn run_convergence_study(
    cfg: &RunConfig,
    dts: &[f64],
    ref_dt: f64,
) -> Result<ConvergenceReport> {
    let mut sorted = dts.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).expect("finite"));
    sorted.dedup();
    if sorted.is_empty() || !(ref_dt > 0.0) || ref_dt >= *sorted.last().expect("non-empty") {
        return Err(Error::InvalidState(
            "reference dt must be positive and below every study dt".into(),
        ));
    }
    let mut all = sorted.clone();
    all.push(ref_dt);
    let cfgs = all
        .iter()
        .map(|&dt| {
            let mut c = cfg.clone();
            c.dt = dt;
            c.validate()
                .map_err(|e| Error::InvalidState(e.join("; ")))?;
            Ok(c)
        })
        .collect::<Result<Vec<_>>>()?;
    let finals = crate::steppers::par_map(&cfgs, crate::run::final_state);
    let mut finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = finals.pop().expect("reference run");
    let errors = finals
        .iter()
        .map(|f| linf_error_all(f, &reference))
        .collect::<Result<Vec<_>>>()?;
    let scale = reference.iter().map(RealField::max_abs).fold(0.0, f64::max);
    let floor = error_floor(scale);
    Ok(ConvergenceReport {
        observed_order: fit_order(&sorted, &errors, floor),
        dts: sorted,
        errors,
        floor,
    })
}

/// Outcome of one approach in a comparison.
#[derive(Clone, Debug)]
pub struct ApproachRun {
    pub label: String,
    pub series: TimeSeries,
    /// Failure message if the run stopped early.
    pub failure: Option<String>,
}

#[derive(Clone, Debug)]
pub struct Comparison {
    pub runs: Vec<ApproachRun>,
    /// Max `|lambda_a(t) - lambda_b(t)|` over the common time window for each
    /// pair `(a, b)` with matching time stamps. Empty for a single approach.
    pub lambda_discrepancy: Vec<(String, String, f64)>,
}

/// Max `|a(t) - b(t)|` over time stamps present in both series.
pub fn column_discrepancy(a: &TimeSeries, b: &TimeSeries, column: &str) -> Option<f64> {
    let (ta, ca) = (a.column("t")?, a.column(column)?);
    let (tb, cb) = (b.column("t")?, b.column(column)?);
    let mut j = 0;
    let mut worst: Option<f64> = None;
    for (i, &t) in ta.iter().enumerate() {
        while j < tb.len() && tb[j] < t - 1e-12 * t.abs().max(1.0) {
            j += 1;
        }
        if j < tb.len() && (tb[j] - t).abs() <= 1e-12 * t.abs().max(1.0) {
            let d = (ca[i] - cb[j]).abs();
            worst = Some(worst.map_or(d, |w: f64| w.max(d)));
        }
    }
    worst
}

/// Run each configuration (typically the same problem with different
/// schemes or approaches). Failing runs are kept with their partial series.
pub fn compare_approaches(cfgs: &[(String, RunConfig)]) -> Result<Comparison> {
    let runs = crate::steppers::par_map(cfgs, |(label, cfg)| {
        let out = crate::run::simulate(cfg, |_, _| Ok(()))?;
        Ok(ApproachRun {
            label: label.clone(),
            series: out.series,
            failure: out.failure.map(|f| f.to_string()),
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    let mut lambda_discrepancy = Vec::new();
    for i in 0..runs.len() {
        for j in i + 1..runs.len() {
            if let Some(d) = column_discrepancy(&runs[i].series, &runs[j].series, "lambda") {
                lambda_discrepancy.push((runs[i].label.clone(), runs[j].label.clone(), d));
            }
        }
    }
    Ok(Comparison {
        runs,
        lambda_discrepancy,
    })
}
