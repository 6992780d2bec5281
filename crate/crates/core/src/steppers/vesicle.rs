use super::{
    par_map, require_prev, scaled_cfg, solve_with, LagrangeApproach, MultistepWeights, SchemeState,
    StepReport,
};
use crate::error::{Error, Result};
use crate::models::{FieldWithGradient, VesicleModel};
use crate::multiplier::{linearized_lambda, newton_2d, newton_scalar, NewtonConfig};
use crate::spectral::{inner_unchecked, integrate, RealField, SpectralOperator};

/// BDF2 step of the vesicle model.
///
/// The explicit variational derivatives enter with their mean removed; the
/// difference is absorbed by the volume multiplier, so the volume constraint
/// holds for `phi^{n+1}` and for the surrogate simultaneously. The reported
/// `gamma` is converted back to the unprojected form.
pub fn step_vesicle_bdf2(
    state: &SchemeState,
    model: &VesicleModel,
    approach: LagrangeApproach,
    cfg: &NewtonConfig,
) -> Result<(SchemeState, StepReport)> {
    step(state, model, approach, cfg, false)
}

fn mean(f: &RealField) -> f64 {
    f.sum() / f.values().len() as f64
}

pub(crate) fn step(
    state: &SchemeState,
    model: &VesicleModel,
    approach: LagrangeApproach,
    cfg: &NewtonConfig,
    bootstrap: bool,
) -> Result<(SchemeState, StepReport)> {
    if state.phi.len() != 1 || state.targets.len() != 2 {
        return Err(Error::InvalidState(
            "vesicle scheme expects one field and targets [A0, H0]".into(),
        ));
    }
    require_prev(state, bootstrap)?;
    let w = if bootstrap {
        MultistepWeights::BACKWARD_EULER
    } else {
        MultistepWeights::BDF2
    };
    let [c0, c1, c2] = w.c;
    let [e0, e1] = w.extrap;
    let (a0, h0) = (state.targets[0], state.targets[1]);
    let dt = state.dt;
    let m = model.mobility();
    let phi_n = state.field();
    let phi_p = &state.prev_or_current()[0];
    let grid = phi_n.grid();

    // explicit derivatives, extrapolated as sequences
    let (q_star, d_star) = if bootstrap {
        (model.dq_dphi(phi_n), model.dh_dphi(phi_n))
    } else {
        let ders = par_map(&[phi_n, phi_p], |p| (model.dq_dphi(p), model.dh_dphi(p)));
        let (qn, dn) = &ders[0];
        let (qp, dp) = &ders[1];
        (qn.lin_comb(e0, qp, e1), dn.lin_comb(e0, dp, e1))
    };
    let (mq, md) = (mean(&q_star), mean(&d_star));
    let q = q_star.map(|v| v - mq);
    let d = d_star.map(|v| v - md);

    let a_coef = c0 / (2.0 * dt);
    let b_op = SpectralOperator::const_coeff(grid, a_coef, 0.0, m * model.epsilon());
    let rhs1 = phi_n.lin_comb(-c1 / (2.0 * dt), phi_p, -c2 / (2.0 * dt));
    let jobs = [(&rhs1, 1.0), (&q, -m), (&d, -m)];
    let mut out = par_map(&jobs, |&(rhs, s)| solve_with(&b_op, None, rhs, s)).into_iter();
    let phi1 = out.next().expect("job")?;
    let phi2 = out.next().expect("job")?;
    let phi4 = out.next().expect("job")?;
    let phi3_value = -m / a_coef;

    // volume: A(phi1) + gamma A(phi3) = A0, independent of eta and lambda
    let gamma_t = (a0 - integrate(&phi1)) / (phi3_value * grid.domain_volume());
    let base = phi1.map(|v| v + gamma_t * phi3_value);

    let base_g = FieldWithGradient::new(base);
    let p2_g = FieldWithGradient::new(phi2);
    let p4_g = FieldWithGradient::new(phi4);
    let field_at = |eta: f64, lam: f64| {
        FieldWithGradient::combine(&[(1.0, &base_g), (eta, &p2_g), (lam, &p4_g)])
    };

    let h_scale = 1.0 + h0.abs();
    let qn_int = model.q_energy(phi_n);
    let qp_int = if bootstrap {
        qn_int
    } else {
        model.q_energy(phi_p)
    };
    let q_const = c1 * qn_int + c2 * qp_int;
    let e_scale = 1.0 + qn_int.abs() + model.laplacian_energy(phi_n);

    // (q, D) and (d, D) as affine functions of (eta, lambda)
    let d_rest = phi_n.lin_comb(c1, phi_p, c2);
    let d_base = base_g.field.lin_comb(c0, &d_rest, 1.0);
    let (qb, q2, q4) = (
        inner_unchecked(&q, &d_base),
        c0 * inner_unchecked(&q, &p2_g.field),
        c0 * inner_unchecked(&q, &p4_g.field),
    );
    let (db, d2, d4) = (
        inner_unchecked(&d, &d_base),
        c0 * inner_unchecked(&d, &p2_g.field),
        c0 * inner_unchecked(&d, &p4_g.field),
    );
    // energy equation residual and its partial derivatives
    let energy_eq = |eta: f64, lam: f64| -> (f64, f64, f64) {
        let f = field_at(eta, lam);
        let qd = qb + eta * q2 + lam * q4;
        let dd = db + eta * d2 + lam * d4;
        let r = c0 * model.q_energy_of(&f) + q_const - eta * qd - lam * dd;
        let r_eta = c0 * model.q_directional(&f, &p2_g) - qd - eta * q2 - lam * d2;
        let r_lam = c0 * model.q_directional(&f, &p4_g) - eta * q4 - dd - lam * d4;
        (r, r_eta, r_lam)
    };

    let predictor = || {
        let diff = FieldWithGradient::combine(&[(1.0, &base_g), (1.0, &p2_g)])
            .field
            .lin_comb(1.0, phi_n, -1.0);
        linearized_lambda(&d, &diff, &p4_g.field).unwrap_or(state.last_lambda[0])
    };
    let area_lambda = |eta: f64, cfg: &NewtonConfig| {
        newton_scalar(
            |l| model.area_of(&field_at(eta, l)) - h0,
            Some(&|l| model.area_directional(&field_at(eta, l), &p4_g)),
            predictor(),
            &scaled_cfg(cfg, h_scale),
        )
        .map_err(|e| e.for_multiplier("lambda"))
    };

    let no_q = q.max_abs() == 0.0;
    let mut iters = 0;
    let (eta, lambda) = match approach {
        LagrangeApproach::First => {
            let rep = area_lambda(1.0, cfg)?;
            iters += rep.iterations;
            (1.0, rep.root)
        }
        LagrangeApproach::Third => {
            let rep = area_lambda(1.0, cfg)?;
            iters += rep.iterations;
            let lam = rep.root;
            let eta = if no_q {
                1.0
            } else {
                let rep = newton_scalar(
                    |e| energy_eq(e, lam).0,
                    Some(&|e| energy_eq(e, lam).1),
                    1.0,
                    &scaled_cfg(cfg, e_scale),
                )
                .map_err(|e| match e {
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
            (eta, lam)
        }
        LagrangeApproach::Second => {
            if no_q {
                let rep = area_lambda(1.0, cfg)?;
                iters += rep.iterations;
                (1.0, rep.root)
            } else {
                let res = |e: f64, l: f64| -> [f64; 2] {
                    [
                        (model.area_of(&field_at(e, l)) - h0) / h_scale,
                        energy_eq(e, l).0 / e_scale,
                    ]
                };
                let jac = |e: f64, l: f64| -> [[f64; 2]; 2] {
                    let f = field_at(e, l);
                    let (_, re, rl) = energy_eq(e, l);
                    [
                        [
                            model.area_directional(&f, &p2_g) / h_scale,
                            model.area_directional(&f, &p4_g) / h_scale,
                        ],
                        [re / e_scale, rl / e_scale],
                    ]
                };
                let rep = newton_2d(res, Some(&jac), (1.0, predictor()), &scaled_cfg(cfg, 1.0))
                    .map_err(|e| e.for_multiplier("eta/lambda"))?;
                iters += rep.iterations;
                rep.root
            }
        }
    };

    let new = field_at(eta, lambda);
    let bar = field_at(1.0, lambda);
    let phi = new.field;

    let lap_energy = |f: &RealField| model.laplacian_energy(f);
    let discrete = |x: &RealField, y: &RealField, qx: f64, qy: f64| {
        0.5 * (lap_energy(x) + lap_energy(&x.lin_comb(2.0, y, -1.0))) + 0.5 * (3.0 * qx - qy)
    };
    let q_new = model.q_energy(&phi);
    let e_new = discrete(&phi, phi_n, q_new, qn_int);
    let e_old = discrete(phi_n, phi_p, qn_int, qp_int);
    let mu = phi.lin_comb(c0, &d_rest, 1.0).scaled(-1.0 / (2.0 * dt * m));
    let dissipation = -dt * m * inner_unchecked(&mu, &mu);
    let second_diff = phi.lin_comb(1.0, phi_n, -2.0).lin_comb(1.0, phi_p, 1.0);
    let law = e_new - e_old + 0.5 * lap_energy(&second_diff);

    let constraints = vec![
        integrate(&phi),
        model.area_of(&FieldWithGradient::new(phi.clone())),
    ];
    let surrogate = vec![integrate(&bar.field), model.area_of(&bar)];
    let enforced = match approach {
        LagrangeApproach::Third => &surrogate,
        _ => &constraints,
    };
    let report = StepReport {
        lambda: vec![lambda],
        eta: match approach {
            LagrangeApproach::First => None,
            _ => Some(eta),
        },
        gamma: Some(gamma_t - eta * mq - lambda * md),
        newton_iters: iters,
        energy_original: lap_energy(&phi) + q_new,
        energy_modified_or_discrete: e_new,
        constraint_residuals: vec![enforced[0] - a0, enforced[1] - h0],
        constraints,
        surrogate_constraints: surrogate,
        dissipation,
        dissipation_residual: law - w.law_factor * dissipation,
    };
    Ok((state.advance(vec![phi], None, vec![lambda])?, report))
}
