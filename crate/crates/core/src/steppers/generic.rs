use super::{
    par_map, require_prev, scaled_cfg, solve_with, SchemeState, StabilizationParams, StepReport,
};
use crate::error::{Error, Result};
use crate::models::GenericModel;
use crate::multiplier::{linearized_lambda, newton_2d, newton_scalar, NewtonConfig};
use crate::spectral::{inner_unchecked, RealField, SpectralOperator};

fn check_state(state: &SchemeState, model: &GenericModel) -> Result<f64> {
    if state.phi.len() != 1 || state.targets.len() != 1 {
        return Err(Error::InvalidState(
            "generic schemes expect a single field and one target".into(),
        ));
    }
    if state.field().grid() != model.linear_op().grid() {
        return Err(Error::GridMismatch("state and model".into()));
    }
    state
        .r
        .ok_or_else(|| Error::InvalidState("SAV variable missing from the state".into()))
}

/// First-order SAV split: `phi = phi1 + lambda phi2`, `r = r1 + lambda r2`.
struct SavSplit {
    phi1: RealField,
    phi2: Option<RealField>,
    r1: f64,
    r2: f64,
    /// `F'(phi^n) / sqrt(int F(phi^n) + C0)`.
    b: RealField,
    /// `h'(phi^n)`.
    dn: RealField,
}

fn sav_split(state: &SchemeState, model: &GenericModel) -> Result<SavSplit> {
    let rn = check_state(state, model)?;
    let dt = state.dt;
    let phi_n = state.field();
    let grid = phi_n.grid();
    let g = model.mobility_op();
    let a = SpectralOperator::identity(grid).plus(&g.compose(model.linear_op())?.scaled(dt))?;
    let s = model.sav_variable(phi_n)?;
    let b = model.potential_derivative(phi_n).scaled(1.0 / s);
    let dn = model.constraint_derivative(phi_n);
    let active = model.constraint().is_active();

    let mut jobs: Vec<(&RealField, bool)> = vec![(phi_n, false), (&b, true)];
    if active {
        jobs.push((&dn, true));
    }
    let mut out = par_map(&jobs, |&(rhs, with_g)| {
        if with_g {
            solve_with(&a, Some(g), rhs, dt)
        } else {
            solve_with(&a, None, rhs, 1.0)
        }
    })
    .into_iter();
    let p = out.next().expect("job")?;
    let q = out.next().expect("job")?;
    let sol = out.next().transpose()?;

    let denom = 1.0 + 0.5 * inner_unchecked(&b, &q);
    let p_minus = p.lin_comb(1.0, phi_n, -1.0);
    let r1 = (rn + 0.5 * inner_unchecked(&b, &p_minus)) / denom;
    let phi1 = p.lin_comb(1.0, &q, -r1);
    let (phi2, r2) = match sol {
        Some(sv) => {
            let r2 = 0.5 * inner_unchecked(&b, &sv) / denom;
            (Some(sv.lin_comb(1.0, &q, -r2)), r2)
        }
        None => (None, 0.0),
    };
    Ok(SavSplit {
        phi1,
        phi2,
        r1,
        r2,
        b,
        dn,
    })
}

/// The multiplier of the linear SAV step from the same state:
/// `lambda = -(h'(phi^n), phi1 - phi^n) / (h'(phi^n), phi2)`.
pub fn lambda_predictor_linear_sav(state: &SchemeState, model: &GenericModel) -> Result<f64> {
    let split = sav_split(state, model)?;
    let phi2 = split
        .phi2
        .ok_or_else(|| Error::Degenerate("predictor: the model has no active constraint".into()))?;
    let diff = split.phi1.lin_comb(1.0, state.field(), -1.0);
    linearized_lambda(&split.dn, &diff, &phi2)
}

fn finish_sav(
    state: &SchemeState,
    model: &GenericModel,
    split: &SavSplit,
    lambda: f64,
    iters: usize,
) -> Result<(SchemeState, StepReport)> {
    let phi_n = state.field();
    let phi = match &split.phi2 {
        Some(p2) => split.phi1.lin_comb(1.0, p2, lambda),
        None => split.phi1.clone(),
    };
    let r = split.r1 + lambda * split.r2;
    let rn = state.r.expect("checked");

    // mu = L phi + r b - lambda h'(phi^n)
    let mut mu = model.linear_op().apply(&phi)?;
    mu.axpy(r, &split.b);
    mu.axpy(-lambda, &split.dn);
    let dissipation = -state.dt * model.mobility_op().quadratic_form(&mu)?;

    let dphi = phi.lin_comb(1.0, phi_n, -1.0);
    let e_mod_n = model.modified_energy(phi_n, rn);
    let e_mod = model.modified_energy(&phi, r);
    let law = e_mod - e_mod_n + model.quadratic_energy(&dphi) + (r - rn) * (r - rn)
        - lambda * inner_unchecked(&split.dn, &dphi);
    let h = model.constraint_value(&phi);
    let report = StepReport {
        lambda: vec![lambda],
        eta: None,
        gamma: None,
        newton_iters: iters,
        energy_original: model.energy(&phi),
        energy_modified_or_discrete: e_mod,
        constraints: vec![h],
        surrogate_constraints: vec![h],
        constraint_residuals: vec![h - state.targets[0]],
        dissipation,
        dissipation_residual: law - dissipation,
    };
    Ok((state.advance(vec![phi], Some(r), vec![lambda])?, report))
}

/// First-order linear SAV step with the linearized constraint
/// `(h'(phi^n), phi^{n+1} - phi^n) = 0`.
pub fn step_linear_sav(
    state: &SchemeState,
    model: &GenericModel,
) -> Result<(SchemeState, StepReport)> {
    let split = sav_split(state, model)?;
    let lambda = match &split.phi2 {
        Some(p2) => {
            let diff = split.phi1.lin_comb(1.0, state.field(), -1.0);
            linearized_lambda(&split.dn, &diff, p2)?
        }
        None => 0.0,
    };
    finish_sav(state, model, &split, lambda, 0)
}

/// First-order SAV step enforcing `H(phi^{n+1}) = H(phi^0)` exactly.
pub fn step_approach1(
    state: &SchemeState,
    model: &GenericModel,
    cfg: &NewtonConfig,
) -> Result<(SchemeState, StepReport)> {
    let split = sav_split(state, model)?;
    let (lambda, iters) = match &split.phi2 {
        Some(p2) => {
            let diff = split.phi1.lin_comb(1.0, state.field(), -1.0);
            let guess = linearized_lambda(&split.dn, &diff, p2).unwrap_or(state.last_lambda[0]);
            let h0 = state.targets[0];
            let h = model.constraint();
            let phi1 = split.phi1.values();
            let p2v = p2.values();
            let dv = state.field().grid().cell_volume();
            let res = |l: f64| -> f64 {
                let s: f64 = phi1.iter().zip(p2v).map(|(a, b)| h.value(a + l * b)).sum();
                s * dv - h0
            };
            let der = |l: f64| -> f64 {
                let s: f64 = phi1
                    .iter()
                    .zip(p2v)
                    .map(|(a, b)| h.derivative(a + l * b) * b)
                    .sum();
                s * dv
            };
            let rep = newton_scalar(res, Some(&der), guess, &scaled_cfg(cfg, 1.0 + h0.abs()))
                .map_err(|e| e.for_multiplier("lambda"))?;
            (rep.root, rep.iterations)
        }
        None => (0.0, 0),
    };
    finish_sav(state, model, &split, lambda, iters)
}

/// Crank-Nicolson split `phi = phi1 + eta phi2 + lambda phi3`.
struct CnSplit {
    phi1: RealField,
    phi2: RealField,
    phi3: RealField,
    /// `F'(phi*)`, `phi* = (3 phi^n - phi^{n-1}) / 2`.
    fstar: RealField,
    /// `(3 h'(phi^n) - h'(phi^{n-1})) / 2`.
    dstar: RealField,
    stab_op: SpectralOperator,
}

fn cn_split(
    state: &SchemeState,
    model: &GenericModel,
    stab: StabilizationParams,
    bootstrap: bool,
) -> Result<CnSplit> {
    check_state(state, model)?;
    require_prev(state, bootstrap)?;
    let dt = state.dt;
    let phi_n = state.field();
    let phi_p = &state.prev_or_current()[0];
    let grid = phi_n.grid();
    let g = model.mobility_op();
    let l = model.linear_op();
    let gl = g.compose(l)?;
    let stab_op = SpectralOperator::identity(grid)
        .scaled(stab.eps1)
        .plus(&l.scaled(stab.eps2))?;
    let gs = g.compose(&stab_op)?;
    let b_op = SpectralOperator::identity(grid)
        .plus(&gl.scaled(0.5 * dt))?
        .plus(&gs.scaled(1.0 / dt))?;
    let explicit_op = SpectralOperator::identity(grid).plus(&gl.scaled(-0.5 * dt))?;

    let (e0, e1) = if bootstrap { (1.0, 0.0) } else { (1.5, -0.5) };
    let phi_star = phi_n.lin_comb(e0, phi_p, e1);
    let fstar = model.potential_derivative(&phi_star);
    let dstar =
        model
            .constraint_derivative(phi_n)
            .lin_comb(e0, &model.constraint_derivative(phi_p), e1);

    // rhs of phi1: (I - dt/2 GL) phi^n + GS (2 phi^n - phi^{n-1}) / dt
    let second = phi_n.lin_comb(2.0, phi_p, -1.0);
    enum Job<'a> {
        First(&'a RealField, &'a RealField),
        Forced(&'a RealField, f64),
    }
    let jobs = [
        Job::First(phi_n, &second),
        Job::Forced(&fstar, -dt),
        Job::Forced(&dstar, dt),
    ];
    let mut out = par_map(&jobs, |job| match job {
        Job::First(pn, sec) => {
            let mut rhs = explicit_op.apply(pn)?;
            if stab.eps1 != 0.0 || stab.eps2 != 0.0 {
                rhs.axpy(1.0 / dt, &gs.apply(sec)?);
            }
            solve_with(&b_op, None, &rhs, 1.0)
        }
        Job::Forced(f, s) => solve_with(&b_op, Some(g), f, *s),
    })
    .into_iter();
    Ok(CnSplit {
        phi1: out.next().expect("job")?,
        phi2: out.next().expect("job")?,
        phi3: out.next().expect("job")?,
        fstar,
        dstar,
        stab_op,
    })
}

/// Pointwise sums over `phi = base + a u + b w` needed by the residuals
/// and their Jacobians.
#[derive(Default)]
struct Sums {
    h: f64,
    f: f64,
    hu: f64,
    hw: f64,
    fu: f64,
    fw: f64,
}

fn sums(
    model: &GenericModel,
    base: &RealField,
    u: &RealField,
    w: &RealField,
    a: f64,
    b: f64,
) -> Sums {
    let (pot, con) = (model.potential(), model.constraint());
    let mut s = Sums::default();
    for ((x0, x1), x2) in base.values().iter().zip(u.values()).zip(w.values()) {
        let v = x0 + a * x1 + b * x2;
        let (dh, df) = (con.derivative(v), pot.derivative(v));
        s.h += con.value(v);
        s.f += pot.value(v);
        s.hu += dh * x1;
        s.hw += dh * x2;
        s.fu += df * x1;
        s.fw += df * x2;
    }
    let dv = base.grid().cell_volume();
    s.h *= dv;
    s.f *= dv;
    s.hu *= dv;
    s.hw *= dv;
    s.fu *= dv;
    s.fw *= dv;
    s
}

/// Shared Crank-Nicolson step. `third` selects the surrogate-based
/// multiplier resolution; otherwise `(eta, lambda)` are solved jointly.
pub(crate) fn step_cn(
    state: &SchemeState,
    model: &GenericModel,
    stab: StabilizationParams,
    third: bool,
    cfg: &NewtonConfig,
    bootstrap: bool,
) -> Result<(SchemeState, StepReport)> {
    let sp = cn_split(state, model, stab, bootstrap)?;
    let phi_n = state.field();
    let h0 = state.targets[0];
    let active = model.constraint().is_active();
    if active && sp.phi3.max_abs() <= 1e-14 * (1.0 + sp.dstar.max_abs()) {
        // e.g. a mass constraint under H^{-1} mobility: conserved by the flow
        // already, and lambda is not determined
        return Err(Error::Degenerate(
            "the mobility annihilates h'(phi); lambda has no effect on the step".into(),
        ));
    }
    let has_potential = !model.potential().is_zero();
    let fn_int = model.potential_integral(phi_n);
    let e_scale = 1.0 + fn_int.abs() + model.quadratic_energy(phi_n).abs();
    let h_scale = 1.0 + h0.abs();

    // inner products against phi - phi^n = (phi1 - phi^n) + eta phi2 + lambda phi3
    let d1 = sp.phi1.lin_comb(1.0, phi_n, -1.0);
    let (f1, f2, f3) = (
        inner_unchecked(&sp.fstar, &d1),
        inner_unchecked(&sp.fstar, &sp.phi2),
        inner_unchecked(&sp.fstar, &sp.phi3),
    );
    let (g1, g2, g3) = (
        inner_unchecked(&sp.dstar, &d1),
        inner_unchecked(&sp.dstar, &sp.phi2),
        inner_unchecked(&sp.dstar, &sp.phi3),
    );
    // energy-equation residual given the pointwise integral of F at (eta, lambda)
    let energy_res = |f_int: f64, eta: f64, lam: f64| -> f64 {
        let fd = f1 + eta * f2 + lam * f3;
        let gd = g1 + eta * g2 + lam * g3;
        f_int - fn_int - eta * fd + lam * gd
    };
    let predictor = || -> f64 {
        let base = d1.lin_comb(1.0, &sp.phi2, 1.0);
        linearized_lambda(&sp.dstar, &base, &sp.phi3).unwrap_or(state.last_lambda[0])
    };

    let mut iters = 0;
    let (eta, lambda, surrogate_h) = if third {
        let lambda = if active {
            let base = sp.phi1.lin_comb(1.0, &sp.phi2, 1.0);
            let zero = RealField::zeros(base.grid());
            let rep = newton_scalar(
                |l| sums(model, &base, &sp.phi3, &zero, l, 0.0).h - h0,
                Some(&|l| sums(model, &base, &sp.phi3, &zero, l, 0.0).hu),
                predictor(),
                &scaled_cfg(cfg, h_scale),
            )
            .map_err(|e| e.for_multiplier("lambda"))?;
            iters += rep.iterations;
            rep.root
        } else {
            0.0
        };
        let eta = if has_potential {
            let base = sp.phi1.lin_comb(1.0, &sp.phi3, lambda);
            let zero = RealField::zeros(base.grid());
            let res = |e: f64| energy_res(sums(model, &base, &sp.phi2, &zero, e, 0.0).f, e, lambda);
            let der = |e: f64| {
                let s = sums(model, &base, &sp.phi2, &zero, e, 0.0);
                s.fu - (f1 + e * f2 + lambda * f3) - e * f2 + lambda * g2
            };
            let rep = newton_scalar(res, Some(&der), 1.0, &scaled_cfg(cfg, e_scale))
                .map_err(|e| e.for_multiplier("eta"))?;
            iters += rep.iterations;
            rep.root
        } else {
            1.0
        };
        let bar = sp
            .phi1
            .lin_comb(1.0, &sp.phi2, 1.0)
            .lin_comb(1.0, &sp.phi3, lambda);
        (eta, lambda, Some(model.constraint_value(&bar)))
    } else {
        match (active, has_potential) {
            (true, true) => {
                let res = |e: f64, l: f64| -> [f64; 2] {
                    let s = sums(model, &sp.phi1, &sp.phi2, &sp.phi3, e, l);
                    [(s.h - h0) / h_scale, energy_res(s.f, e, l) / e_scale]
                };
                let jac = |e: f64, l: f64| -> [[f64; 2]; 2] {
                    let s = sums(model, &sp.phi1, &sp.phi2, &sp.phi3, e, l);
                    let fd = f1 + e * f2 + l * f3;
                    [
                        [s.hu / h_scale, s.hw / h_scale],
                        [
                            (s.fu - fd - e * f2 + l * g2) / e_scale,
                            (s.fw - e * f3 + l * g3 + (g1 + e * g2 + l * g3)) / e_scale,
                        ],
                    ]
                };
                let rep = newton_2d(res, Some(&jac), (1.0, predictor()), &scaled_cfg(cfg, 1.0))
                    .map_err(|e| e.for_multiplier("eta/lambda"))?;
                iters += rep.iterations;
                (rep.root.0, rep.root.1, None)
            }
            (true, false) => {
                let zero = RealField::zeros(phi_n.grid());
                let rep = newton_scalar(
                    |l| sums(model, &sp.phi1, &sp.phi3, &zero, l, 0.0).h - h0,
                    Some(&|l| sums(model, &sp.phi1, &sp.phi3, &zero, l, 0.0).hu),
                    predictor(),
                    &scaled_cfg(cfg, h_scale),
                )
                .map_err(|e| e.for_multiplier("lambda"))?;
                iters += rep.iterations;
                (1.0, rep.root, None)
            }
            (false, true) => {
                let zero = RealField::zeros(phi_n.grid());
                let res =
                    |e: f64| energy_res(sums(model, &sp.phi1, &sp.phi2, &zero, e, 0.0).f, e, 0.0);
                let der = |e: f64| {
                    let s = sums(model, &sp.phi1, &sp.phi2, &zero, e, 0.0);
                    s.fu - (f1 + e * f2) - e * f2
                };
                let rep = newton_scalar(res, Some(&der), 1.0, &scaled_cfg(cfg, e_scale))
                    .map_err(|e| e.for_multiplier("eta"))?;
                iters += rep.iterations;
                (rep.root, 0.0, None)
            }
            (false, false) => (1.0, 0.0, None),
        }
    };

    let phi = sp
        .phi1
        .lin_comb(1.0, &sp.phi2, eta)
        .lin_comb(1.0, &sp.phi3, lambda);

    // mu^{n+1/2} rebuilt from the scheme equation
    let phi_p = &state.prev_or_current()[0];
    let second_diff = phi.lin_comb(1.0, phi_n, -2.0).lin_comb(1.0, phi_p, 1.0);
    let mut mu = model.linear_op().apply(&phi.lin_comb(0.5, phi_n, 0.5))?;
    if stab.eps1 != 0.0 || stab.eps2 != 0.0 {
        mu.axpy(
            1.0 / (state.dt * state.dt),
            &sp.stab_op.apply(&second_diff)?,
        );
    }
    mu.axpy(eta, &sp.fstar);
    mu.axpy(-lambda, &sp.dstar);
    let dissipation = -state.dt * model.mobility_op().quadratic_form(&mu)?;

    let dt = state.dt;
    let v_new = phi.lin_comb(1.0 / dt, phi_n, -1.0 / dt);
    let v_old = phi_n.lin_comb(1.0 / dt, phi_p, -1.0 / dt);
    let kinetic = |v: &RealField| 0.5 * sp.stab_op.quadratic_form(v).expect("same grid");
    let e_new = model.energy(&phi);
    let e_old = model.energy(phi_n);
    let es_new = e_new + kinetic(&v_new);
    let es_old = e_old + kinetic(&v_old);
    let law = es_new - es_old + kinetic(&v_new.lin_comb(1.0, &v_old, -1.0));

    let h = model.constraint_value(&phi);
    let enforced = surrogate_h.unwrap_or(h);
    let report = StepReport {
        lambda: vec![lambda],
        eta: Some(eta),
        gamma: None,
        newton_iters: iters,
        energy_original: e_new,
        energy_modified_or_discrete: es_new,
        constraints: vec![h],
        surrogate_constraints: vec![enforced],
        constraint_residuals: vec![enforced - h0],
        dissipation,
        dissipation_residual: law - dissipation,
    };
    Ok((state.advance(vec![phi], state.r, vec![lambda])?, report))
}

/// Second-order Crank-Nicolson step resolving `(eta, lambda)` jointly.
pub fn step_approach2_cn(
    state: &SchemeState,
    model: &GenericModel,
    cfg: &NewtonConfig,
) -> Result<(SchemeState, StepReport)> {
    step_cn(state, model, StabilizationParams::NONE, false, cfg, false)
}

/// Second-order Crank-Nicolson step: `lambda` from the surrogate
/// `phi1 + phi2 + lambda phi3`, then `eta` from the energy equation.
pub fn step_approach3_cn(
    state: &SchemeState,
    model: &GenericModel,
    cfg: &NewtonConfig,
) -> Result<(SchemeState, StepReport)> {
    step_cn(state, model, StabilizationParams::NONE, true, cfg, false)
}

/// Approach-2 step with the `eps1 phi_tt + eps2 L phi_tt` stabilization.
pub fn step_stabilized_cn(
    state: &SchemeState,
    model: &GenericModel,
    stab: StabilizationParams,
    cfg: &NewtonConfig,
) -> Result<(SchemeState, StepReport)> {
    step_cn(state, model, stab, false, cfg, false)
}
