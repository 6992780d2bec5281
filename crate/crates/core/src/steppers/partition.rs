use super::{
    par_map, require_prev, scaled_cfg, solve_with, LagrangeApproach, MultistepWeights, SchemeState,
    StepReport,
};
use crate::error::{Error, Result};
use crate::models::PartitionModel;
use crate::multiplier::{newton_scalar, solve_constraint_quadratic, NewtonConfig};
use crate::spectral::{inner_unchecked, RealField, SpectralOperator};

/// BDF2 step of the norm-preserving partition flow.
///
/// With [`LagrangeApproach::First`] `eta = 1` and the norms hold for
/// `phi^{n+1}` itself; with [`LagrangeApproach::Third`] they hold for the
/// surrogate and `eta` enforces the discrete energy law.
pub fn step_partition_bdf2(
    state: &SchemeState,
    model: &PartitionModel,
    approach: LagrangeApproach,
    cfg: &NewtonConfig,
) -> Result<(SchemeState, StepReport)> {
    step(state, model, approach, cfg, false)
}

pub(crate) fn step(
    state: &SchemeState,
    model: &PartitionModel,
    approach: LagrangeApproach,
    cfg: &NewtonConfig,
    bootstrap: bool,
) -> Result<(SchemeState, StepReport)> {
    if approach == LagrangeApproach::Second {
        return Err(Error::InvalidModel(
            "the partition scheme supports the first and third approaches".into(),
        ));
    }
    let m = model.components();
    if state.phi.len() != m || state.targets.len() != m {
        return Err(Error::InvalidState(format!(
            "partition scheme expects {m} components and norms"
        )));
    }
    require_prev(state, bootstrap)?;
    let w = if bootstrap {
        MultistepWeights::BACKWARD_EULER
    } else {
        MultistepWeights::BDF2
    };
    let [c0, c1, c2] = w.c;
    let [e0, e1] = w.extrap;
    let dt = state.dt;
    let phi_n = &state.phi;
    let phi_p = state.prev_or_current();
    let grid = phi_n[0].grid();

    let f_n: Vec<RealField> = (0..m)
        .map(|j| model.interaction_derivative(phi_n, j))
        .collect::<Result<_>>()?;
    let f_star: Vec<RealField> = if bootstrap {
        f_n
    } else {
        (0..m)
            .map(|j| Ok(f_n[j].lin_comb(e0, &model.interaction_derivative(phi_p, j)?, e1)))
            .collect::<Result<_>>()?
    };
    let phi_star: Vec<RealField> = (0..m)
        .map(|j| phi_n[j].lin_comb(e0, &phi_p[j], e1))
        .collect();

    let b_op = SpectralOperator::const_coeff(grid, c0 / (2.0 * dt), -1.0, 0.0);
    let rhs0: Vec<RealField> = (0..m)
        .map(|j| phi_n[j].lin_comb(-c1 / (2.0 * dt), &phi_p[j], -c2 / (2.0 * dt)))
        .collect();
    let jobs: Vec<(&RealField, f64)> = (0..m)
        .flat_map(|j| [(&rhs0[j], 1.0), (&phi_star[j], 1.0), (&f_star[j], -1.0)])
        .collect();
    let mut solved = par_map(&jobs, |&(rhs, s)| solve_with(&b_op, None, rhs, s))
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter();
    let mut psi = Vec::with_capacity(m);
    for _ in 0..m {
        let p0 = solved.next().expect("job");
        let p1 = solved.next().expect("job");
        let p2 = solved.next().expect("job");
        psi.push((p0, p1, p2));
    }

    // per-component norm constraint on the surrogate psi0 + lambda psi1 + psi2
    let mut lambdas = Vec::with_capacity(m);
    for (j, (p0, p1, p2)) in psi.iter().enumerate() {
        let s = p0.lin_comb(1.0, p2, 1.0);
        let target = state.targets[j];
        let a = inner_unchecked(p1, p1);
        let b = 2.0 * inner_unchecked(p1, &s);
        let c = inner_unchecked(&s, &s) - target;
        let pn = &phi_n[j];
        let den = inner_unchecked(pn, p1);
        let predictor = if den.abs() > 1e-14 * a.sqrt() * target.sqrt() {
            (0.5 * (target + inner_unchecked(pn, pn)) - inner_unchecked(pn, &s)) / den
        } else {
            state.last_lambda[j]
        };
        lambdas.push(
            solve_constraint_quadratic(a, b, c, predictor)
                .map_err(|e| e.for_multiplier(&format!("lambda_{j}")))?,
        );
    }

    let base: Vec<RealField> = psi
        .iter()
        .zip(&lambdas)
        .map(|((p0, p1, _), &l)| p0.lin_comb(1.0, p1, l))
        .collect();
    let dir: Vec<RealField> = psi.iter().map(|(_, _, p2)| p2.clone()).collect();

    let f_int_n = model.interaction(phi_n)?;
    let f_int_p = if bootstrap {
        f_int_n
    } else {
        model.interaction(phi_p)?
    };
    let no_forcing =
        approach == LagrangeApproach::First || m == 1 || f_star.iter().all(|f| f.max_abs() == 0.0);
    let mut iters = 0;
    let eta = if no_forcing {
        1.0
    } else {
        // sum_j (f*_j, D_j) = fb + eta f2 and sum_j lambda_j (phi*_j, D_j) = pb + eta p2
        let (mut fb, mut f2, mut pb, mut p2) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..m {
            let d_base = base[j].lin_comb(c0, &phi_n[j].lin_comb(c1, &phi_p[j], c2), 1.0);
            fb += inner_unchecked(&f_star[j], &d_base);
            f2 += c0 * inner_unchecked(&f_star[j], &dir[j]);
            pb += lambdas[j] * inner_unchecked(&phi_star[j], &d_base);
            p2 += c0 * lambdas[j] * inner_unchecked(&phi_star[j], &dir[j]);
        }
        let f_const = c1 * f_int_n + c2 * f_int_p;
        let res = |e: f64| {
            let (f, _) = model.interaction_along(&base, &dir, e);
            c0 * f + f_const - e * (fb + e * f2) + pb + e * p2
        };
        let der = |e: f64| {
            let (_, df) = model.interaction_along(&base, &dir, e);
            c0 * df - fb - 2.0 * e * f2 + p2
        };
        let scale = 1.0 + f_int_n.abs() + model.gradient_energy(phi_n)?;
        let rep =
            newton_scalar(res, Some(&der), 1.0, &scaled_cfg(cfg, scale)).map_err(|e| match e {
                Error::MultiplierFailure { reason, trace, .. } => Error::multiplier(
                    "eta",
                    format!("energy equation has no usable root near 1 ({reason})"),
                    trace,
                ),
                other => other,
            })?;
        iters += rep.iterations;
        rep.root
    };

    let phi: Vec<RealField> = base
        .iter()
        .zip(&dir)
        .map(|(b, d)| b.lin_comb(1.0, d, eta))
        .collect();
    let bar: Vec<RealField> = base
        .iter()
        .zip(&dir)
        .map(|(b, d)| b.lin_comb(1.0, d, 1.0))
        .collect();

    let grad_energy = |fs: &[RealField]| model.gradient_energy(fs);
    let combo = |a: &[RealField], x: f64, b: &[RealField], y: f64| -> Vec<RealField> {
        a.iter().zip(b).map(|(u, v)| u.lin_comb(x, v, y)).collect()
    };
    let f_int_new = model.interaction(&phi)?;
    let e_new = 0.5 * (grad_energy(&phi)? + grad_energy(&combo(&phi, 2.0, phi_n, -1.0))?)
        + 0.5 * (3.0 * f_int_new - f_int_n);
    let e_old = 0.5 * (grad_energy(phi_n)? + grad_energy(&combo(phi_n, 2.0, phi_p, -1.0))?)
        + 0.5 * (3.0 * f_int_n - f_int_p);
    let mut dissipation = 0.0;
    let mut second = Vec::with_capacity(m);
    for j in 0..m {
        let mu = phi[j]
            .lin_comb(c0, &phi_n[j].lin_comb(c1, &phi_p[j], c2), 1.0)
            .scaled(-1.0 / (2.0 * dt));
        dissipation -= dt * inner_unchecked(&mu, &mu);
        second.push(
            phi[j]
                .lin_comb(1.0, &phi_n[j], -2.0)
                .lin_comb(1.0, &phi_p[j], 1.0),
        );
    }
    let law = e_new - e_old + 0.5 * grad_energy(&second)?;

    let constraints: Vec<f64> = phi.iter().map(|p| inner_unchecked(p, p)).collect();
    let surrogate: Vec<f64> = bar.iter().map(|p| inner_unchecked(p, p)).collect();
    let residuals = surrogate
        .iter()
        .zip(&state.targets)
        .map(|(s, t)| s - t)
        .collect();
    let report = StepReport {
        lambda: lambdas.clone(),
        eta: (approach == LagrangeApproach::Third).then_some(eta),
        gamma: None,
        newton_iters: iters,
        energy_original: model.energy(&phi)?,
        energy_modified_or_discrete: e_new,
        constraints,
        surrogate_constraints: surrogate,
        constraint_residuals: residuals,
        dissipation,
        dissipation_residual: law - w.law_factor * dissipation,
    };
    Ok((state.advance(phi, None, lambdas)?, report))
}
