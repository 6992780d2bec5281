//! Time steppers. Every scheme splits the step into a handful of
//! constant-coefficient solves and then resolves the scalar multipliers.
//!
//! Steppers are pure: they take the current [`SchemeState`] and return the
//! next one together with a [`StepReport`].

mod generic;
mod partition;
mod vesicle;

use crate::error::{Error, Result};
use crate::models::{GenericModel, PartitionModel, VesicleModel};
use crate::multiplier::NewtonConfig;
use crate::spectral::RealField;

pub use generic::{
    lambda_predictor_linear_sav, step_approach1, step_approach2_cn, step_approach3_cn,
    step_linear_sav, step_stabilized_cn,
};
pub use partition::step_partition_bdf2;
pub use vesicle::step_vesicle_bdf2;

/// Fields and scalars carried from one step to the next.
#[derive(Clone, Debug)]
pub struct SchemeState {
    /// `phi^n`, one entry per component.
    pub phi: Vec<RealField>,
    /// `phi^{n-1}`; absent before the first step.
    pub phi_prev: Option<Vec<RealField>>,
    /// SAV variable `r^n` (generic models only).
    pub r: Option<f64>,
    pub step: usize,
    pub t: f64,
    pub dt: f64,
    /// Constraint targets: `[H0]` (generic), `[A0, H0]` (vesicle), `||phi_j^0||^2` (partition).
    pub targets: Vec<f64>,
    /// Multipliers of the previous step; fallback predictor.
    pub last_lambda: Vec<f64>,
}

impl SchemeState {
    fn new(
        phi: Vec<RealField>,
        r: Option<f64>,
        dt: f64,
        targets: Vec<f64>,
        n_lambda: usize,
    ) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidState(format!(
                "time step must be positive, got {dt}"
            )));
        }
        let grid = phi[0].grid();
        if phi.iter().any(|p| p.grid() != grid) {
            return Err(Error::GridMismatch("initial fields".into()));
        }
        if phi.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("initial condition".into()));
        }
        Ok(Self {
            phi,
            phi_prev: None,
            r,
            step: 0,
            t: 0.0,
            dt,
            targets,
            last_lambda: vec![0.0; n_lambda],
        })
    }

    pub fn generic(model: &GenericModel, phi0: RealField, dt: f64) -> Result<Self> {
        if phi0.grid() != model.linear_op().grid() {
            return Err(Error::GridMismatch(
                "initial field and model operators".into(),
            ));
        }
        let r = model.sav_variable(&phi0)?;
        let h0 = model.constraint_value(&phi0);
        Self::new(vec![phi0], Some(r), dt, vec![h0], 1)
    }

    pub fn vesicle(model: &VesicleModel, phi0: RealField, dt: f64) -> Result<Self> {
        let (a0, h0) = model.constraints(&phi0);
        Self::new(vec![phi0], None, dt, vec![a0, h0], 1)
    }

    pub fn partition(model: &PartitionModel, phis: Vec<RealField>, dt: f64) -> Result<Self> {
        if phis.len() != model.components() {
            return Err(Error::InvalidState(format!(
                "expected {} components, got {}",
                model.components(),
                phis.len()
            )));
        }
        let norms = phis
            .iter()
            .map(|p| crate::spectral::inner_unchecked(p, p))
            .collect();
        let m = phis.len();
        Self::new(phis, None, dt, norms, m)
    }

    /// Single-component field `phi^n`.
    pub fn field(&self) -> &RealField {
        &self.phi[0]
    }

    fn advance(&self, phi: Vec<RealField>, r: Option<f64>, lambda: Vec<f64>) -> Result<Self> {
        if let Some(j) = phi.iter().position(|p| !p.is_finite()) {
            return Err(Error::NonFinite(format!(
                "field component {j} at step {}",
                self.step + 1
            )));
        }
        Ok(Self {
            phi_prev: Some(self.phi.clone()),
            phi,
            r,
            step: self.step + 1,
            t: (self.step + 1) as f64 * self.dt,
            dt: self.dt,
            targets: self.targets.clone(),
            last_lambda: lambda,
        })
    }

    /// `phi^{n-1}`, or `phi^n` itself before the first step.
    fn prev_or_current(&self) -> &[RealField] {
        self.phi_prev.as_deref().unwrap_or(&self.phi)
    }
}

/// Quantities produced by one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct StepReport {
    /// One multiplier per constraint (per component for partitions).
    pub lambda: Vec<f64>,
    pub eta: Option<f64>,
    pub gamma: Option<f64>,
    pub newton_iters: usize,
    /// Free energy of `phi^{n+1}`.
    pub energy_original: f64,
    /// The energy the scheme dissipates: SAV modified, stabilized, or the
    /// multistep discrete energy.
    pub energy_modified_or_discrete: f64,
    /// Constraint values of `phi^{n+1}` (same order as the targets).
    pub constraints: Vec<f64>,
    /// Constraint values of the surrogate field; equal to `constraints`
    /// for schemes that enforce on `phi^{n+1}` itself.
    pub surrogate_constraints: Vec<f64>,
    /// Enforced-field constraint minus target.
    pub constraint_residuals: Vec<f64>,
    /// `-dt (G mu, mu)`.
    pub dissipation: f64,
    /// Deviation from the scheme's discrete energy law (zero up to solver
    /// tolerance for the exactly dissipative schemes).
    pub dissipation_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilizationParams {
    pub eps1: f64,
    pub eps2: f64,
}

impl StabilizationParams {
    pub const NONE: Self = Self {
        eps1: 0.0,
        eps2: 0.0,
    };

    pub fn new(eps1: f64, eps2: f64) -> Result<Self> {
        if !(eps1 >= 0.0 && eps2 >= 0.0 && eps1.is_finite() && eps2.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "stabilization constants must be >= 0, got ({eps1}, {eps2})"
            )));
        }
        Ok(Self { eps1, eps2 })
    }
}

/// How the BDF2 schemes resolve their multipliers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LagrangeApproach {
    /// `eta = 1`; constraints enforced on `phi^{n+1}`.
    First,
    /// `eta` and the constraint multipliers solved together, constraints on
    /// `phi^{n+1}` (vesicle only).
    Second,
    /// Constraint multipliers from the surrogate `phi-bar`, then `eta` from
    /// the energy equation.
    Third,
}

/// Time-difference weights: `(c0 phi^{n+1} + c1 phi^n + c2 phi^{n-1}) / (2 dt)`
/// with explicit terms extrapolated as `e0 g^n + e1 g^{n-1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct MultistepWeights {
    pub c: [f64; 3],
    pub extrap: [f64; 2],
    /// Factor in front of `-dt ||mu||^2` in the discrete energy law.
    pub law_factor: f64,
}

impl MultistepWeights {
    pub const BDF2: Self = Self {
        c: [3.0, -4.0, 1.0],
        extrap: [2.0, -1.0],
        law_factor: 1.0,
    };
    pub const BACKWARD_EULER: Self = Self {
        c: [2.0, -2.0, 0.0],
        extrap: [1.0, 0.0],
        law_factor: 1.5,
    };
}

/// Scheme selector for [`Simulation`] and the bootstrap helper.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SchemeKind {
    LinearSav,
    Approach1,
    Approach2,
    Approach3,
    Stabilized(StabilizationParams),
    VesicleBdf2(LagrangeApproach),
    PartitionBdf2(LagrangeApproach),
}

impl SchemeKind {
    pub fn is_multistep(&self) -> bool {
        !matches!(self, SchemeKind::LinearSav | SchemeKind::Approach1)
    }
}

/// Model bundle for dispatch.
#[derive(Clone, Debug)]
pub enum Model {
    Generic(GenericModel),
    Vesicle(VesicleModel),
    Partition(PartitionModel),
}

/// First step of a multistep scheme, taken with first-order weights and
/// `phi^{-1} = phi^0`. Generic Crank-Nicolson schemes reuse their own
/// multiplier structure with first-order extrapolation, which keeps the
/// energy law of the scheme intact from step one.
pub fn bootstrap_first_step(
    state: &SchemeState,
    model: &Model,
    kind: SchemeKind,
    cfg: &NewtonConfig,
) -> Result<(SchemeState, StepReport)> {
    if state.step != 0 || state.phi_prev.is_some() {
        return Err(Error::InvalidState(
            "bootstrap is only valid at step 0".into(),
        ));
    }
    dispatch(state, model, kind, cfg, true)
}

fn dispatch(
    state: &SchemeState,
    model: &Model,
    kind: SchemeKind,
    cfg: &NewtonConfig,
    bootstrap: bool,
) -> Result<(SchemeState, StepReport)> {
    use SchemeKind::*;
    match (model, kind) {
        (Model::Generic(m), LinearSav) => step_linear_sav(state, m),
        (Model::Generic(m), Approach1) => step_approach1(state, m, cfg),
        (Model::Generic(m), Approach2) => {
            generic::step_cn(state, m, StabilizationParams::NONE, false, cfg, bootstrap)
        }
        (Model::Generic(m), Approach3) => {
            generic::step_cn(state, m, StabilizationParams::NONE, true, cfg, bootstrap)
        }
        (Model::Generic(m), Stabilized(s)) => generic::step_cn(state, m, s, false, cfg, bootstrap),
        (Model::Vesicle(m), VesicleBdf2(a)) => vesicle::step(state, m, a, cfg, bootstrap),
        (Model::Partition(m), PartitionBdf2(a)) => partition::step(state, m, a, cfg, bootstrap),
        (model, kind) => Err(Error::InvalidModel(format!(
            "scheme {kind:?} cannot be used with the {} model",
            match model {
                Model::Generic(_) => "generic",
                Model::Vesicle(_) => "vesicle",
                Model::Partition(_) => "partition",
            }
        ))),
    }
}

/// A running simulation: model, scheme and the current state.
#[derive(Clone, Debug)]
pub struct Simulation {
    pub model: Model,
    pub kind: SchemeKind,
    pub state: SchemeState,
    pub newton: NewtonConfig,
}

impl Simulation {
    pub fn new(model: Model, kind: SchemeKind, state: SchemeState) -> Result<Self> {
        let ok = matches!(
            (&model, kind),
            (Model::Generic(_), SchemeKind::LinearSav)
                | (Model::Generic(_), SchemeKind::Approach1)
                | (Model::Generic(_), SchemeKind::Approach2)
                | (Model::Generic(_), SchemeKind::Approach3)
                | (Model::Generic(_), SchemeKind::Stabilized(_))
                | (Model::Vesicle(_), SchemeKind::VesicleBdf2(_))
                | (Model::Partition(_), SchemeKind::PartitionBdf2(_))
        );
        if !ok {
            return Err(Error::InvalidModel(format!(
                "scheme {kind:?} does not match the model"
            )));
        }
        Ok(Self {
            model,
            kind,
            state,
            newton: NewtonConfig::default(),
        })
    }

    /// Advance one step, bootstrapping multistep schemes at step 0.
    /// On error the state is left untouched.
    pub fn advance(&mut self) -> Result<StepReport> {
        let bootstrap = self.kind.is_multistep() && self.state.phi_prev.is_none();
        let (next, report) =
            dispatch(&self.state, &self.model, self.kind, &self.newton, bootstrap)?;
        self.state = next;
        Ok(report)
    }
}

/// Map `f` over `jobs`, in parallel when the `parallel` feature is on.
pub(crate) fn par_map<T: Sync, R: Send>(jobs: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        jobs.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        jobs.iter().map(f).collect()
    }
}

pub(crate) fn require_prev(state: &SchemeState, bootstrap: bool) -> Result<()> {
    if bootstrap {
        if state.phi_prev.is_some() || state.step != 0 {
            return Err(Error::InvalidState(
                "bootstrap requested after the first step".into(),
            ));
        }
    } else if state.phi_prev.is_none() {
        return Err(Error::InvalidState(
            "multistep scheme needs phi^{n-1}; take a bootstrap step first".into(),
        ));
    }
    Ok(())
}

/// `scale * op^{-1} pre(rhs)` with a single forward/inverse transform pair.
pub(crate) fn solve_with(
    op: &crate::spectral::SpectralOperator,
    pre: Option<&crate::spectral::SpectralOperator>,
    rhs: &RealField,
    scale: f64,
) -> Result<RealField> {
    if op.grid() != rhs.grid() {
        return Err(Error::GridMismatch("solve right-hand side".into()));
    }
    let mut spec = rhs.spectrum();
    if let Some(p) = pre {
        p.apply_spectrum(&mut spec);
    }
    op.solve_spectrum(&mut spec)?;
    if scale != 1.0 {
        for s in spec.iter_mut() {
            *s *= scale;
        }
    }
    Ok(RealField::from_spectrum_unchecked(rhs.grid(), spec))
}

/// Newton settings for a residual whose natural magnitude is `scale`.
pub(crate) fn scaled_cfg(cfg: &NewtonConfig, scale: f64) -> NewtonConfig {
    NewtonConfig {
        abs_tol: cfg.rel_tol * scale,
        ..*cfg
    }
}
