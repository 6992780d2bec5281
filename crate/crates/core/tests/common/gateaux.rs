//! Variational derivatives against central differences of the discrete
//! functionals along random smooth directions.

use super::smooth_field;
use cgflow::models::{
    ConstraintDensity, FieldWithGradient, GenericModel, Mobility, PartitionModel, Potential,
    VesicleModel,
};
use cgflow::spectral::{inner, Grid, RealField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DIRECTIONS: usize = 10;
const TOL: f64 = 1e-5;

/// Random band-limited direction.
fn direction(grid: &Grid, rng: &mut ChaCha8Rng) -> RealField {
    let terms: Vec<(f64, f64, f64, f64)> = (0..6)
        .map(|_| {
            (
                rng.gen_range(-1.0..1.0),
                rng.gen_range(0..5) as f64,
                rng.gen_range(0..5) as f64,
                rng.gen_range(0.0..6.3),
            )
        })
        .collect();
    RealField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|&(a, k, l, p)| a * (k * x[0] + l * x[1] + p).cos())
            .sum()
    })
}

/// Compare `(grad, v)` with the central difference of `f` along `v`.
fn check(name: &str, f: impl Fn(&RealField) -> f64, grad: &RealField, phi: &RealField, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for k in 0..DIRECTIONS {
        let v = direction(phi.grid(), &mut rng);
        let h = 1e-5;
        let fd = (f(&phi.lin_comb(1.0, &v, h)) - f(&phi.lin_comb(1.0, &v, -h))) / (2.0 * h);
        let an = inner(grad, &v).unwrap();
        let err = (fd - an).abs() / an.abs().max(fd.abs()).max(1.0);
        assert!(
            err <= TOL,
            "{name}, direction {k}: analytic {an:e}, difference quotient {fd:e}"
        );
    }
}

fn grid() -> Grid {
    Grid::new(&[16, 16]).unwrap()
}

fn vesicle_field(g: &Grid) -> RealField {
    RealField::from_fn(g, |x| {
        (1.5 - (x[0] * x[0] + 0.6 * x[1] * x[1]).sqrt()).tanh() + 0.1 * (2.0 * x[1]).sin()
    })
}

pub fn bending_nonlinearity_derivative() {
    let g = grid();
    let model = VesicleModel::new(0.7, 1.0).unwrap();
    let phi = vesicle_field(&g);
    check("dQ", |p| model.q_energy(p), &model.dq_dphi(&phi), &phi, 1);
}

pub fn area_derivative() {
    let g = grid();
    let model = VesicleModel::new(0.7, 1.0).unwrap();
    let phi = vesicle_field(&g);
    check(
        "dH",
        |p| model.constraints(p).1,
        &model.dh_dphi(&phi),
        &phi,
        2,
    );
}

pub fn directional_helpers_agree_with_gradients() {
    let g = grid();
    let model = VesicleModel::new(0.7, 1.0).unwrap();
    let phi = vesicle_field(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let fg = FieldWithGradient::new(phi.clone());
    for _ in 0..DIRECTIONS {
        let v = direction(&g, &mut rng);
        let vg = FieldWithGradient::new(v.clone());
        let q = inner(&model.dq_dphi(&phi), &v).unwrap();
        let h = inner(&model.dh_dphi(&phi), &v).unwrap();
        assert!((model.q_directional(&fg, &vg) - q).abs() <= 1e-10 * (1.0 + q.abs()));
        assert!((model.area_directional(&fg, &vg) - h).abs() <= 1e-10 * (1.0 + h.abs()));
    }
}

pub fn partition_interaction_derivatives() {
    let g = grid();
    let m = 3;
    let model = PartitionModel::new(m, 0.3).unwrap();
    let phis: Vec<RealField> = (0..m)
        .map(|j| smooth_field(&g, j as u64 + 5, 0.5, 0.4))
        .collect();
    for j in 0..m {
        let grad = model.interaction_derivative(&phis, j).unwrap();
        let f = |p: &RealField| {
            let mut all = phis.clone();
            all[j] = p.clone();
            model.interaction(&all).unwrap()
        };
        check(&format!("dF/dphi_{j}"), f, &grad, &phis[j], 10 + j as u64);
    }
}

pub fn generic_potential_and_constraint_derivatives() {
    let g = grid();
    let phi = smooth_field(&g, 9, 0.2, 0.5);
    for con in [ConstraintDensity::Mass, ConstraintDensity::Square] {
        let model = GenericModel::with_presets(
            &g,
            1.0,
            Potential::DoubleWell { scale: 3.0 },
            con,
            Mobility::AllenCahn,
            1.0,
            1.0,
        )
        .unwrap();
        check(
            "dF",
            |p| model.potential_integral(p),
            &model.potential_derivative(&phi),
            &phi,
            20,
        );
        check(
            "dh",
            |p| model.constraint_value(p),
            &model.constraint_derivative(&phi),
            &phi,
            21,
        );
    }
}

/// Every check with its name.
pub const ALL: &[(&str, fn())] = &[
    (
        "bending_nonlinearity_derivative",
        bending_nonlinearity_derivative,
    ),
    ("area_derivative", area_derivative),
    (
        "directional_helpers_agree_with_gradients",
        directional_helpers_agree_with_gradients,
    ),
    (
        "partition_interaction_derivatives",
        partition_interaction_derivatives,
    ),
    (
        "generic_potential_and_constraint_derivatives",
        generic_potential_and_constraint_derivatives,
    ),
];
