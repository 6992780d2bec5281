//! Browser bindings: vesicle, partition and Allen-Cahn flows on small 2-D
//! grids, stepped from JavaScript and drawn on a canvas.

use cgflow::config::RunConfig;
use cgflow::run::build_simulation;
use cgflow::steppers::{Simulation, StepReport};
use wasm_bindgen::prelude::*;

#[wasm_bindgen]
pub struct Demo {
    sim: Simulation,
    last: Option<StepReport>,
    targets: Vec<f64>,
}

fn err(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn check_size(n: usize) -> Result<(), JsValue> {
    if (8..=256).contains(&n) && n % 2 == 0 {
        Ok(())
    } else {
        Err(err(format!(
            "grid size must be even and in 8..=256, got {n}"
        )))
    }
}

impl Demo {
    fn from_text(text: &str) -> Result<Demo, JsValue> {
        let cfg = RunConfig::parse(text).map_err(|e| err(e.join("; ")))?;
        let sim = build_simulation(&cfg).map_err(err)?;
        let targets = sim.state.targets.clone();
        Ok(Demo {
            sim,
            last: None,
            targets,
        })
    }
}

#[wasm_bindgen]
impl Demo {
    /// Two merging vesicles; `approach` is 1, 2 or 3.
    pub fn vesicle(n: usize, approach: u8, dt: f64) -> Result<Demo, JsValue> {
        check_size(n)?;
        Demo::from_text(&format!(
            "model = vesicle\nscheme = vesicle_bdf2\nscheme.approach = {approach}\ngrid.modes = {n}, {n}\n\
             time.dt = {dt:e}\ntime.T = {dt:e}\nmodel.epsilon = 6*pi/128\nic.name = two_circles_2d\n"
        ))
    }

    /// `m` normalized components relaxing from Voronoi markers.
    pub fn partition(
        n: usize,
        m: usize,
        epsilon: f64,
        dt: f64,
        seed: u32,
    ) -> Result<Demo, JsValue> {
        check_size(n)?;
        Demo::from_text(&format!(
            "model = partition\nscheme = partition_bdf2\nmodel.m = {m}\nmodel.epsilon = {epsilon:e}\n\
             grid.modes = {n}, {n}\ntime.dt = {dt:e}\ntime.T = {dt:e}\nic.name = partition_markers\nic.seed = {seed}\n"
        ))
    }

    /// Mass-conserving Allen-Cahn from random data; `scheme` is one of
    /// `linear_sav`, `approach1`, `approach2`, `approach3`.
    pub fn allen_cahn(
        n: usize,
        scheme: &str,
        kappa: f64,
        dt: f64,
        seed: u32,
    ) -> Result<Demo, JsValue> {
        check_size(n)?;
        Demo::from_text(&format!(
            "model = generic\nscheme = {scheme}\nmodel.kappa = {kappa:e}\nmodel.constraint = mass\n\
             model.mobility = allen-cahn\ngrid.modes = {n}, {n}\ntime.dt = {dt:e}\ntime.T = {dt:e}\n\
             ic.name = random_smooth\nic.params = 0, 0.8, 8\nic.seed = {seed}\n"
        ))
    }

    /// Advance up to `count` steps; returns how many succeeded. A multiplier
    /// failure after at least one step is returned as a short count; a
    /// failure on the first step is an error.
    pub fn step(&mut self, count: u32) -> Result<u32, JsValue> {
        for k in 0..count {
            match self.sim.advance() {
                Ok(r) => self.last = Some(r),
                Err(e) if k == 0 => return Err(err(e)),
                Err(_) => return Ok(k),
            }
        }
        Ok(count)
    }

    pub fn size(&self) -> usize {
        self.sim.state.field().grid().modes()[0]
    }

    pub fn time(&self) -> f64 {
        self.sim.state.t
    }

    pub fn steps(&self) -> usize {
        self.sim.state.step
    }

    /// Row-major values in [0, 1] for display: `(phi + 1) / 2` for the
    /// single-field models, index of the dominant component over
    /// `m - 1` for partitions.
    pub fn image(&self) -> Vec<f64> {
        let phis = &self.sim.state.phi;
        if phis.len() == 1 {
            return phis[0]
                .values()
                .iter()
                .map(|v| ((v + 1.0) * 0.5).clamp(0.0, 1.0))
                .collect();
        }
        let m = phis.len();
        (0..phis[0].values().len())
            .map(|i| {
                let best = (0..m)
                    .max_by(|&a, &b| phis[a].values()[i].total_cmp(&phis[b].values()[i]))
                    .unwrap_or(0);
                best as f64 / (m - 1) as f64
            })
            .collect()
    }

    /// Energy reported by the scheme (modified or discrete), NaN before the
    /// first step.
    pub fn energy(&self) -> f64 {
        self.last
            .as_ref()
            .map_or(f64::NAN, |r| r.energy_modified_or_discrete)
    }

    pub fn lambda(&self) -> Vec<f64> {
        self.last
            .as_ref()
            .map_or_else(Vec::new, |r| r.lambda.clone())
    }

    pub fn eta(&self) -> f64 {
        self.last.as_ref().and_then(|r| r.eta).unwrap_or(f64::NAN)
    }

    /// Largest relative deviation of the enforced constraints from their
    /// initial values.
    pub fn constraint_drift(&self) -> f64 {
        self.last.as_ref().map_or(0.0, |r| {
            r.constraint_residuals
                .iter()
                .zip(&self.targets)
                .map(|(d, t)| d.abs() / (1.0 + t.abs()))
                .fold(0.0, f64::max)
        })
    }
}
