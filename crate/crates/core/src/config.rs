//! Run configuration: flat `key = value` lines, `#` comments.
//!
//! ```text
//! model = vesicle
//! scheme = vesicle_bdf2
//! scheme.approach = 1
//! grid.modes = 64, 64
//! time.dt = 1e-4
//! time.T = 0.1
//! model.epsilon = 6*pi/128
//! ic.name = two_circles_2d
//! ```
//!
//! Numbers accept `pi` as a factor (`pi`, `2pi`, `6*pi/128`).

use std::fmt::Write as _;
use std::path::PathBuf;

use crate::ic::InitialCondition;
use crate::models::{ConstraintDensity, Mobility, Potential};
use crate::multiplier::NewtonConfig;
use crate::steppers::{LagrangeApproach, SchemeKind, StabilizationParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ModelName {
    Generic,
    Vesicle,
    Partition,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SchemeName {
    LinearSav,
    Approach1,
    Approach2,
    Approach3,
    Stabilized,
    VesicleBdf2,
    PartitionBdf2,
}

impl ModelName {
    pub const ALL: [(&'static str, ModelName); 3] = [
        ("generic", ModelName::Generic),
        ("vesicle", ModelName::Vesicle),
        ("partition", ModelName::Partition),
    ];

    pub fn as_str(&self) -> &'static str {
        Self::ALL.iter().find(|(_, m)| m == self).expect("listed").0
    }
}

impl SchemeName {
    pub const ALL: [(&'static str, SchemeName); 7] = [
        ("linear_sav", SchemeName::LinearSav),
        ("approach1", SchemeName::Approach1),
        ("approach2", SchemeName::Approach2),
        ("approach3", SchemeName::Approach3),
        ("stabilized", SchemeName::Stabilized),
        ("vesicle_bdf2", SchemeName::VesicleBdf2),
        ("partition_bdf2", SchemeName::PartitionBdf2),
    ];

    pub fn as_str(&self) -> &'static str {
        Self::ALL.iter().find(|(_, m)| m == self).expect("listed").0
    }

    pub fn fits(&self, model: ModelName) -> bool {
        match self {
            SchemeName::VesicleBdf2 => model == ModelName::Vesicle,
            SchemeName::PartitionBdf2 => model == ModelName::Partition,
            _ => model == ModelName::Generic,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelName,
    pub scheme: SchemeName,
    /// Multiplier approach of the BDF2 schemes (1, 2 or 3).
    pub approach: u8,
    pub modes: Vec<usize>,
    pub dealias: bool,
    pub dt: f64,
    pub t_end: f64,
    pub epsilon: f64,
    pub mobility: f64,
    pub c0: f64,
    pub components: usize,
    pub kappa: f64,
    pub potential: Potential,
    pub constraint: ConstraintDensity,
    pub mobility_kind: Mobility,
    pub eps1: f64,
    pub eps2: f64,
    pub ic_name: String,
    pub ic_params: Vec<f64>,
    /// Interface width of tanh initial conditions; defaults to `epsilon`.
    pub ic_width: Option<f64>,
    pub seed: u64,
    pub out_dir: PathBuf,
    /// 0 disables snapshots.
    pub snapshot_stride: usize,
    pub series_stride: usize,
    pub newton: NewtonConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelName::Generic,
            scheme: SchemeName::Approach1,
            approach: 1,
            modes: vec![32, 32],
            dealias: false,
            dt: 1e-3,
            t_end: 1e-2,
            epsilon: 0.1,
            mobility: 1.0,
            c0: 1.0,
            components: 1,
            kappa: 1.0,
            potential: Potential::DoubleWell { scale: 1.0 },
            constraint: ConstraintDensity::Square,
            mobility_kind: Mobility::AllenCahn,
            eps1: 0.0,
            eps2: 0.0,
            ic_name: "smooth_trig".into(),
            ic_params: Vec::new(),
            ic_width: None,
            seed: 0,
            out_dir: PathBuf::from("out"),
            snapshot_stride: 0,
            series_stride: 1,
            newton: NewtonConfig::default(),
        }
    }
}

/// Parse a number with an optional `pi` factor: products and quotients of
/// decimal literals and `pi`.
pub fn parse_number(s: &str) -> Option<f64> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Ok(v) = s.parse::<f64>() {
        return Some(v);
    }
    let mut value = 1.0;
    let mut rest = s;
    let mut divide = false;
    loop {
        let end = rest.find(['*', '/']).unwrap_or(rest.len());
        let tok = rest[..end].trim();
        let factor = match tok {
            "pi" => std::f64::consts::PI,
            t if t.ends_with("pi") => {
                t[..t.len() - 2].trim().parse::<f64>().ok()? * std::f64::consts::PI
            }
            t => t.parse::<f64>().ok()?,
        };
        if divide {
            value /= factor;
        } else {
            value *= factor;
        }
        if end == rest.len() {
            return Some(value);
        }
        divide = rest.as_bytes()[end] == b'/';
        rest = &rest[end + 1..];
    }
}

fn fmt_f64(v: f64) -> String {
    format!("{v:?}")
}

fn fmt_list<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
}

/// Number of steps `T / dt` if it is an integer up to rounding.
pub fn step_count(t_end: f64, dt: f64) -> Option<usize> {
    let q = t_end / dt;
    let n = q.round();
    if n >= 1.0 && (q - n).abs() <= 64.0 * f64::EPSILON * n {
        Some(n as usize)
    } else {
        None
    }
}

impl RunConfig {
    /// Parse and validate; on failure returns every problem found.
    pub fn parse(text: &str) -> Result<Self, Vec<String>> {
        let mut cfg = RunConfig::default();
        let mut errs = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut have_eps = false;
        let mut scale = None;
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                errs.push(format!("line {}: expected 'key = value'", ln + 1));
                continue;
            };
            let (k, v) = (k.trim(), v.trim());
            if !seen.insert(k.to_string()) {
                errs.push(format!("line {}: duplicate key '{k}'", ln + 1));
                continue;
            }
            let bad = |what: &str| format!("line {}: {k}: {what}, got '{v}'", ln + 1);
            let num = |errs: &mut Vec<String>| -> Option<f64> {
                let r = parse_number(v);
                if r.is_none() {
                    errs.push(bad("expected a number"));
                }
                r
            };
            let uint = |errs: &mut Vec<String>| -> Option<usize> {
                let r = v.parse::<usize>().ok();
                if r.is_none() {
                    errs.push(bad("expected a non-negative integer"));
                }
                r
            };
            match k {
                "model" => match ModelName::ALL.iter().find(|(n, _)| *n == v) {
                    Some((_, m)) => cfg.model = *m,
                    None => errs.push(bad("expected generic | vesicle | partition")),
                },
                "scheme" => match SchemeName::ALL.iter().find(|(n, _)| *n == v) {
                    Some((_, s)) => cfg.scheme = *s,
                    None => errs.push(bad(&format!(
                        "expected one of {}",
                        SchemeName::ALL.map(|(n, _)| n).join(" | ")
                    ))),
                },
                "scheme.approach" => match v {
                    "1" | "2" | "3" => cfg.approach = v.parse().expect("digit"),
                    _ => errs.push(bad("expected 1, 2 or 3")),
                },
                "scheme.eps1" => cfg.eps1 = num(&mut errs).unwrap_or(cfg.eps1),
                "scheme.eps2" => cfg.eps2 = num(&mut errs).unwrap_or(cfg.eps2),
                "grid.modes" => {
                    let parsed: Option<Vec<usize>> =
                        v.split(',').map(|s| s.trim().parse().ok()).collect();
                    match parsed {
                        Some(m) if !m.is_empty() => cfg.modes = m,
                        _ => errs.push(bad("expected a comma-separated list of mode counts")),
                    }
                }
                "grid.dealias" => match v {
                    "true" => cfg.dealias = true,
                    "false" => cfg.dealias = false,
                    _ => errs.push(bad("expected true or false")),
                },
                "time.dt" => cfg.dt = num(&mut errs).unwrap_or(f64::NAN),
                "time.T" => cfg.t_end = num(&mut errs).unwrap_or(f64::NAN),
                "model.epsilon" => {
                    have_eps = true;
                    cfg.epsilon = num(&mut errs).unwrap_or(f64::NAN)
                }
                "model.M" => cfg.mobility = num(&mut errs).unwrap_or(f64::NAN),
                "model.C0" => cfg.c0 = num(&mut errs).unwrap_or(f64::NAN),
                "model.m" => cfg.components = uint(&mut errs).unwrap_or(0),
                "model.kappa" => cfg.kappa = num(&mut errs).unwrap_or(f64::NAN),
                "model.potential" => match v {
                    "zero" => cfg.potential = Potential::Zero,
                    "double_well" => cfg.potential = Potential::DoubleWell { scale: 1.0 },
                    _ => errs.push(bad("expected zero | double_well")),
                },
                // applied after all keys are read
                "model.potential_scale" => scale = num(&mut errs),
                "model.constraint" => match v {
                    "none" => cfg.constraint = ConstraintDensity::None,
                    "mass" => cfg.constraint = ConstraintDensity::Mass,
                    "square" => cfg.constraint = ConstraintDensity::Square,
                    _ => errs.push(bad("expected none | mass | square")),
                },
                "model.mobility" => match v {
                    "allen-cahn" => cfg.mobility_kind = Mobility::AllenCahn,
                    "cahn-hilliard" => cfg.mobility_kind = Mobility::CahnHilliard,
                    _ => errs.push(bad("expected allen-cahn | cahn-hilliard")),
                },
                "ic.name" => cfg.ic_name = v.to_string(),
                "ic.params" => {
                    if v.is_empty() {
                        cfg.ic_params.clear();
                    } else {
                        let parsed: Option<Vec<f64>> = v.split(',').map(parse_number).collect();
                        match parsed {
                            Some(p) => cfg.ic_params = p,
                            None => errs.push(bad("expected a comma-separated list of numbers")),
                        }
                    }
                }
                "ic.width" => cfg.ic_width = num(&mut errs),
                "ic.seed" => match v.parse::<u64>() {
                    Ok(s) => cfg.seed = s,
                    Err(_) => errs.push(bad("expected an unsigned integer")),
                },
                "output.dir" => cfg.out_dir = PathBuf::from(v),
                "output.snapshot_stride" => cfg.snapshot_stride = uint(&mut errs).unwrap_or(0),
                "output.series_stride" => cfg.series_stride = uint(&mut errs).unwrap_or(0),
                "newton.rel_tol" => cfg.newton.rel_tol = num(&mut errs).unwrap_or(f64::NAN),
                "newton.abs_tol" => cfg.newton.abs_tol = num(&mut errs).unwrap_or(f64::NAN),
                "newton.max_iters" => cfg.newton.max_iters = uint(&mut errs).unwrap_or(0),
                "newton.fd_step" => cfg.newton.fd_step = num(&mut errs).unwrap_or(f64::NAN),
                _ => errs.push(format!("line {}: unknown key '{k}'", ln + 1)),
            }
        }
        if let (Some(scale), Potential::DoubleWell { .. }) = (scale, cfg.potential) {
            cfg.potential = Potential::DoubleWell { scale };
        }
        for key in [
            "model",
            "scheme",
            "time.dt",
            "time.T",
            "grid.modes",
            "ic.name",
        ] {
            if !seen.contains(key) {
                errs.push(format!("missing required key '{key}'"));
            }
        }
        if !have_eps && cfg.model != ModelName::Generic {
            errs.push("missing required key 'model.epsilon'".into());
        }
        if cfg.model != ModelName::Partition && !seen.contains("model.m") {
            cfg.components = 1;
        }
        if let Err(mut v) = cfg.validate() {
            errs.append(&mut v);
        }
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(errs)
        }
    }

    /// Semantic checks shared by parsing and programmatic construction.
    pub fn validate(&self) -> Result<(), Vec<String>> {
        let mut errs = Vec::new();
        if !self.scheme.fits(self.model) {
            errs.push(format!(
                "scheme = {} is incompatible with model = {}",
                self.scheme.as_str(),
                self.model.as_str()
            ));
        }
        if self.modes.is_empty()
            || self.modes.len() > 3
            || self.modes.iter().any(|&n| n < 2 || n % 2 != 0)
        {
            errs.push(format!(
                "grid.modes: 1 to 3 even counts >= 2 expected, got {:?}",
                self.modes
            ));
        }
        let pos = |name: &str, v: f64, errs: &mut Vec<String>| {
            if !(v > 0.0 && v.is_finite()) {
                errs.push(format!("{name} must be positive, got {v}"));
            }
        };
        pos("time.dt", self.dt, &mut errs);
        pos("time.T", self.t_end, &mut errs);
        if self.dt > 0.0 && self.t_end > 0.0 && step_count(self.t_end, self.dt).is_none() {
            errs.push(format!(
                "time.T = {} is not an integer multiple of time.dt = {}",
                self.t_end, self.dt
            ));
        }
        pos("model.epsilon", self.epsilon, &mut errs);
        pos("model.M", self.mobility, &mut errs);
        pos("model.C0", self.c0, &mut errs);
        if !(self.kappa >= 0.0 && self.kappa.is_finite()) {
            errs.push(format!("model.kappa must be >= 0, got {}", self.kappa));
        }
        if self.scheme == SchemeName::PartitionBdf2 && self.approach == 2 {
            errs.push(
                "scheme.approach = 2 is not available for partition_bdf2 (use 1 or 3)".into(),
            );
        }
        if self.model == ModelName::Partition && self.components == 0 {
            errs.push("model.m must be >= 1".into());
        }
        if !(self.eps1 >= 0.0 && self.eps2 >= 0.0) {
            errs.push("scheme.eps1 and scheme.eps2 must be >= 0".into());
        }
        if self.series_stride == 0 {
            errs.push("output.series_stride must be >= 1".into());
        }
        if let Err(e) = self.newton.validate() {
            errs.push(format!("newton: {e}"));
        }
        if let Err(e) = self.initial_condition() {
            errs.push(format!("ic: {e}"));
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(errs)
        }
    }

    pub fn initial_condition(&self) -> crate::Result<InitialCondition> {
        InitialCondition::from_name(
            &self.ic_name,
            &self.ic_params,
            self.ic_width.unwrap_or(self.epsilon),
            self.components,
            self.seed,
        )
    }

    pub fn steps(&self) -> usize {
        step_count(self.t_end, self.dt).unwrap_or(0)
    }

    pub fn scheme_kind(&self) -> SchemeKind {
        match self.scheme {
            SchemeName::LinearSav => SchemeKind::LinearSav,
            SchemeName::Approach1 => SchemeKind::Approach1,
            SchemeName::Approach2 => SchemeKind::Approach2,
            SchemeName::Approach3 => SchemeKind::Approach3,
            SchemeName::Stabilized => SchemeKind::Stabilized(StabilizationParams {
                eps1: self.eps1,
                eps2: self.eps2,
            }),
            SchemeName::VesicleBdf2 => SchemeKind::VesicleBdf2(self.lagrange_approach()),
            SchemeName::PartitionBdf2 => SchemeKind::PartitionBdf2(self.lagrange_approach()),
        }
    }

    fn lagrange_approach(&self) -> LagrangeApproach {
        match self.approach {
            2 => LagrangeApproach::Second,
            3 => LagrangeApproach::Third,
            _ => LagrangeApproach::First,
        }
    }

    /// Canonical text form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("model", self.model.as_str().into());
        kv("scheme", self.scheme.as_str().into());
        kv("scheme.approach", self.approach.to_string());
        kv("scheme.eps1", fmt_f64(self.eps1));
        kv("scheme.eps2", fmt_f64(self.eps2));
        kv("grid.modes", fmt_list(&self.modes));
        kv("grid.dealias", self.dealias.to_string());
        kv("time.dt", fmt_f64(self.dt));
        kv("time.T", fmt_f64(self.t_end));
        kv("model.epsilon", fmt_f64(self.epsilon));
        kv("model.M", fmt_f64(self.mobility));
        kv("model.C0", fmt_f64(self.c0));
        kv("model.m", self.components.to_string());
        kv("model.kappa", fmt_f64(self.kappa));
        match self.potential {
            Potential::Zero => kv("model.potential", "zero".into()),
            Potential::DoubleWell { scale } => {
                kv("model.potential", "double_well".into());
                kv("model.potential_scale", fmt_f64(scale));
            }
        }
        kv(
            "model.constraint",
            match self.constraint {
                ConstraintDensity::None => "none",
                ConstraintDensity::Mass => "mass",
                ConstraintDensity::Square => "square",
            }
            .into(),
        );
        kv(
            "model.mobility",
            match self.mobility_kind {
                Mobility::AllenCahn => "allen-cahn",
                Mobility::CahnHilliard => "cahn-hilliard",
            }
            .into(),
        );
        kv("ic.name", self.ic_name.clone());
        kv(
            "ic.params",
            self.ic_params
                .iter()
                .map(|v| fmt_f64(*v))
                .collect::<Vec<_>>()
                .join(", "),
        );
        if let Some(w) = self.ic_width {
            kv("ic.width", fmt_f64(w));
        }
        kv("ic.seed", self.seed.to_string());
        kv("output.dir", self.out_dir.display().to_string());
        kv("output.snapshot_stride", self.snapshot_stride.to_string());
        kv("output.series_stride", self.series_stride.to_string());
        kv("newton.rel_tol", fmt_f64(self.newton.rel_tol));
        kv("newton.abs_tol", fmt_f64(self.newton.abs_tol));
        kv("newton.max_iters", self.newton.max_iters.to_string());
        kv("newton.fd_step", fmt_f64(self.newton.fd_step));
        s
    }
}
