//! One step of every scheme against the same step equations solved
//! monolithically with dense matrices and a generic Newton iteration.

use super::{dw, dw1, dw2, linf, newton_continued, newton_staged, smooth_field, stack, Dense};
use cgflow::models::{
    ConstraintDensity, GenericModel, Mobility, PartitionModel, Potential, VesicleModel,
};
use cgflow::spectral::{Grid, RealField};
use cgflow::steppers::{
    LagrangeApproach, Model, SchemeKind, SchemeState, Simulation, StabilizationParams, StepReport,
};
use nalgebra::{DMatrix, DVector};

const TOL: f64 = 1e-8;

fn close(a: f64, b: f64, what: &str) {
    assert!(
        (a - b).abs() <= TOL * (1.0 + a.abs().max(b.abs())),
        "{what}: {a} vs {b}"
    );
}

fn close_vec(a: &DVector<f64>, b: &DVector<f64>, what: &str) {
    let e = linf(a, b);
    assert!(e <= TOL * (1.0 + a.amax()), "{what}: max difference {e:e}");
}

// ---------------------------------------------------------------- generic

struct GenericDense {
    d: Dense,
    l: DMatrix<f64>,
    g: DMatrix<f64>,
    scale: f64,
    con: ConstraintDensity,
    c0: f64,
}

impl GenericDense {
    fn new(
        grid: &Grid,
        kappa: f64,
        scale: f64,
        con: ConstraintDensity,
        mob: Mobility,
        m: f64,
        c0: f64,
    ) -> Self {
        let d = Dense::new(grid);
        let l = &d.lap * (-kappa);
        let g = match mob {
            Mobility::AllenCahn => DMatrix::identity(d.n, d.n) * m,
            Mobility::CahnHilliard => &d.lap * (-m),
        };
        Self {
            d,
            l,
            g,
            scale,
            con,
            c0,
        }
    }

    fn fp(&self, u: &DVector<f64>) -> DVector<f64> {
        u.map(|x| self.scale * dw1(x))
    }

    fn f_int(&self, u: &DVector<f64>) -> f64 {
        self.d.dv * u.iter().map(|&x| self.scale * dw(x)).sum::<f64>()
    }

    fn h(&self, u: &DVector<f64>) -> f64 {
        self.d.dv * u.iter().map(|&x| self.con.value(x)).sum::<f64>()
    }

    fn hp(&self, u: &DVector<f64>) -> DVector<f64> {
        u.map(|x| self.con.derivative(x))
    }
}

fn generic_sim(
    kind: SchemeKind,
    con: ConstraintDensity,
    mob: Mobility,
    dt: f64,
) -> (Simulation, GenericDense) {
    let grid = Grid::new(&[8, 8]).unwrap();
    let (kappa, scale, m, c0) = (0.5, 2.0, 1.0, 1.0);
    let model = GenericModel::with_presets(
        &grid,
        kappa,
        Potential::DoubleWell { scale },
        con,
        mob,
        m,
        c0,
    )
    .unwrap();
    let phi0 = smooth_field(&grid, 3, 0.1, 0.4);
    let state = SchemeState::generic(&model, phi0, dt).unwrap();
    let sim = Simulation::new(Model::Generic(model), kind, state).unwrap();
    (sim, GenericDense::new(&grid, kappa, scale, con, mob, m, c0))
}

/// First-order SAV step; `exact` enforces `H(phi) = H0` instead of the
/// linearized constraint. Unknowns `(phi, r, lambda)`.
fn sav_oracle(
    o: &GenericDense,
    phi_n: &DVector<f64>,
    rn: f64,
    dt: f64,
    h0: f64,
    exact: bool,
) -> (DVector<f64>, f64, f64) {
    let n = o.d.n;
    let b = o.fp(phi_n) / (o.f_int(phi_n) + o.c0).sqrt();
    let dn = o.hp(phi_n);
    let res = |x: &DVector<f64>, pinned: bool| {
        let phi = x.rows(0, n).into_owned();
        let (r, lam) = (x[n], x[n + 1]);
        let mu = &o.l * &phi + &b * r - &dn * lam;
        let eq = (&phi - phi_n) / dt + &o.g * mu;
        let sav = r - rn - 0.5 * o.d.inner(&b, &(&phi - phi_n));
        let con = if pinned {
            lam
        } else if exact {
            o.h(&phi) - h0
        } else {
            o.d.inner(&dn, &(&phi - phi_n))
        };
        stack(&[&eq, &DVector::from_vec(vec![sav, con])])
    };
    let x = newton_continued(res, stack(&[phi_n, &DVector::from_vec(vec![rn, 0.0])]));
    (x.rows(0, n).into_owned(), x[n], x[n + 1])
}

/// Crank-Nicolson step with extrapolation weights `(e0, e1)`.
/// Unknowns `(phi, eta, lambda)`, plus the surrogate when `third`.
#[allow(clippy::too_many_arguments)]
fn cn_oracle(
    o: &GenericDense,
    phi_n: &DVector<f64>,
    phi_p: &DVector<f64>,
    (e0, e1): (f64, f64),
    dt: f64,
    (eps1, eps2): (f64, f64),
    third: bool,
    h0: f64,
) -> (DVector<f64>, f64, f64) {
    let n = o.d.n;
    let s_op = DMatrix::<f64>::identity(n, n) * eps1 + &o.l * eps2;
    let star = phi_n * e0 + phi_p * e1;
    let fstar = o.fp(&star);
    let dstar = o.hp(phi_n) * e0 + o.hp(phi_p) * e1;
    let eq = |phi: &DVector<f64>, eta: f64, lam: f64| {
        let mu = &o.l * (phi + phi_n) * 0.5
            + &s_op * (phi - phi_n * 2.0 + phi_p) / (dt * dt)
            + &fstar * eta
            - &dstar * lam;
        (phi - phi_n) / dt + &o.g * mu
    };
    let energy = |phi: &DVector<f64>, eta: f64, lam: f64| {
        let dphi = phi - phi_n;
        o.f_int(phi) - o.f_int(phi_n) - eta * o.d.inner(&fstar, &dphi)
            + lam * o.d.inner(&dstar, &dphi)
    };
    if third {
        // stages: multipliers pinned, surrogate constraint with eta = 1, full
        let res = |x: &DVector<f64>, stage: usize| {
            let phi = x.rows(0, n).into_owned();
            let bar = x.rows(n, n).into_owned();
            let (eta, lam) = (x[2 * n], x[2 * n + 1]);
            let con = if stage == 0 { lam } else { o.h(&bar) - h0 };
            let en = if stage < 2 {
                eta - 1.0
            } else {
                energy(&phi, eta, lam)
            };
            let tail = DVector::from_vec(vec![con, en]);
            stack(&[&eq(&phi, eta, lam), &eq(&bar, 1.0, lam), &tail])
        };
        let x = newton_staged(
            res,
            3,
            stack(&[phi_n, phi_n, &DVector::from_vec(vec![1.0, 0.0])]),
        );
        (x.rows(0, n).into_owned(), x[2 * n], x[2 * n + 1])
    } else {
        let res = |x: &DVector<f64>, pinned: bool| {
            let phi = x.rows(0, n).into_owned();
            let (eta, lam) = (x[n], x[n + 1]);
            let tail = if pinned {
                DVector::from_vec(vec![lam, eta - 1.0])
            } else {
                DVector::from_vec(vec![o.h(&phi) - h0, energy(&phi, eta, lam)])
            };
            stack(&[&eq(&phi, eta, lam), &tail])
        };
        let x = newton_continued(res, stack(&[phi_n, &DVector::from_vec(vec![1.0, 0.0])]));
        (x.rows(0, n).into_owned(), x[n], x[n + 1])
    }
}

fn check_sav(kind: SchemeKind, con: ConstraintDensity, mob: Mobility) {
    let dt = 1e-2;
    let (mut sim, o) = generic_sim(kind, con, mob, dt);
    let h0 = sim.state.targets[0];
    for step in 0..3 {
        let phi_n = o.d.vec(sim.state.field());
        let rn = sim.state.r.unwrap();
        let rep = sim.advance().unwrap();
        let (phi, r, lam) = sav_oracle(&o, &phi_n, rn, dt, h0, kind == SchemeKind::Approach1);
        close_vec(
            &o.d.vec(sim.state.field()),
            &phi,
            &format!("phi, step {step}"),
        );
        close(sim.state.r.unwrap(), r, "r");
        close(rep.lambda[0], lam, "lambda");
    }
}

fn check_cn(
    kind: SchemeKind,
    stab: (f64, f64),
    third: bool,
    con: ConstraintDensity,
    mob: Mobility,
) {
    let dt = 1e-3;
    let (mut sim, o) = generic_sim(kind, con, mob, dt);
    let h0 = sim.state.targets[0];
    for step in 0..3 {
        let phi_n = o.d.vec(sim.state.field());
        let (phi_p, w) = match &sim.state.phi_prev {
            None => (phi_n.clone(), (1.0, 0.0)),
            Some(p) => (o.d.vec(&p[0]), (1.5, -0.5)),
        };
        let rep = sim.advance().unwrap();
        let (phi, eta, lam) = cn_oracle(&o, &phi_n, &phi_p, w, dt, stab, third, h0);
        close_vec(
            &o.d.vec(sim.state.field()),
            &phi,
            &format!("phi, step {step}"),
        );
        close(rep.eta.unwrap(), eta, "eta");
        close(rep.lambda[0], lam, "lambda");
    }
}

pub fn linear_sav_step_matches_dense_solve() {
    check_sav(
        SchemeKind::LinearSav,
        ConstraintDensity::Square,
        Mobility::AllenCahn,
    );
    check_sav(
        SchemeKind::LinearSav,
        ConstraintDensity::Mass,
        Mobility::AllenCahn,
    );
}

pub fn approach1_step_matches_dense_solve() {
    check_sav(
        SchemeKind::Approach1,
        ConstraintDensity::Square,
        Mobility::AllenCahn,
    );
    check_sav(
        SchemeKind::Approach1,
        ConstraintDensity::Square,
        Mobility::CahnHilliard,
    );
}

pub fn approach2_steps_match_dense_solve() {
    check_cn(
        SchemeKind::Approach2,
        (0.0, 0.0),
        false,
        ConstraintDensity::Square,
        Mobility::AllenCahn,
    );
    check_cn(
        SchemeKind::Approach2,
        (0.0, 0.0),
        false,
        ConstraintDensity::Square,
        Mobility::CahnHilliard,
    );
}

pub fn approach3_steps_match_dense_solve() {
    check_cn(
        SchemeKind::Approach3,
        (0.0, 0.0),
        true,
        ConstraintDensity::Square,
        Mobility::AllenCahn,
    );
    check_cn(
        SchemeKind::Approach3,
        (0.0, 0.0),
        true,
        ConstraintDensity::Square,
        Mobility::CahnHilliard,
    );
}

pub fn stabilized_steps_match_dense_solve() {
    let stab = (1e-3, 2e-4);
    let kind = SchemeKind::Stabilized(StabilizationParams::new(stab.0, stab.1).unwrap());
    check_cn(
        kind,
        stab,
        false,
        ConstraintDensity::Square,
        Mobility::AllenCahn,
    );
    check_cn(
        kind,
        stab,
        false,
        ConstraintDensity::Square,
        Mobility::CahnHilliard,
    );
}

// ---------------------------------------------------------------- vesicle

struct VesicleDense {
    d: Dense,
    bilap: DMatrix<f64>,
    eps: f64,
    m: f64,
}

impl VesicleDense {
    fn q_int(&self, u: &DVector<f64>) -> f64 {
        let e = self.eps;
        let e2 = e * e;
        let g2 = self.d.grad_sq(u);
        let s: f64 = (0..u.len())
            .map(|i| {
                let g = dw1(u[i]);
                0.5 * e * (6.0 / e2 * u[i] * u[i] * g2[i] + g * g / (e2 * e2) - 2.0 / e2 * g2[i])
            })
            .sum();
        s * self.d.dv
    }

    /// Gradient of `q_int / dv`, written with explicit transposes.
    fn q_grad(&self, u: &DVector<f64>) -> DVector<f64> {
        let e = self.eps;
        let e2 = e * e;
        let g2 = self.d.grad_sq(u);
        let mut out = DVector::from_fn(u.len(), |i, _| {
            0.5 * e * (12.0 / e2 * u[i] * g2[i] + 2.0 / (e2 * e2) * dw1(u[i]) * dw2(u[i]))
        });
        let c = u.map(|x| 0.5 * e * (12.0 / e2 * x * x - 4.0 / e2));
        for d in &self.d.d {
            out += d.transpose() * c.component_mul(&(d * u));
        }
        out
    }

    fn area(&self, u: &DVector<f64>) -> f64 {
        let g2 = self.d.grad_sq(u);
        self.d.dv
            * (0..u.len())
                .map(|i| 0.5 * self.eps * g2[i] + dw(u[i]) / self.eps)
                .sum::<f64>()
    }

    fn area_grad(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = u.map(|x| dw1(x) / self.eps);
        for d in &self.d.d {
            out += d.transpose() * (d * u) * self.eps;
        }
        out
    }
}

fn vesicle_setup(n: usize, approach: LagrangeApproach, dt: f64) -> (Simulation, VesicleDense) {
    let grid = Grid::new(&[n, n]).unwrap();
    let (eps, m) = (0.6, 1.0);
    let model = VesicleModel::new(eps, m).unwrap();
    let phi0 = RealField::from_fn(&grid, |x| {
        (1.6 - (x[0] * x[0] + 1.4 * x[1] * x[1]).sqrt()).tanh() * 0.9 - 0.05
    });
    let state = SchemeState::vesicle(&model, phi0, dt).unwrap();
    let sim = Simulation::new(
        Model::Vesicle(model),
        SchemeKind::VesicleBdf2(approach),
        state,
    )
    .unwrap();
    let d = Dense::new(&grid);
    let bilap = &d.lap * &d.lap;
    (sim, VesicleDense { d, bilap, eps, m })
}

/// Unknowns `(phi, gamma, eta, lambda)` and, for the third approach, the
/// surrogate with its own volume multiplier.
#[allow(clippy::too_many_arguments)]
fn vesicle_oracle(
    o: &VesicleDense,
    phi_n: &DVector<f64>,
    phi_p: &DVector<f64>,
    c: [f64; 3],
    e: [f64; 2],
    dt: f64,
    targets: (f64, f64),
    approach: LagrangeApproach,
) -> (DVector<f64>, f64, f64, f64) {
    let n = o.d.n;
    let (a0, h0) = targets;
    let qs = o.q_grad(phi_n) * e[0] + o.q_grad(phi_p) * e[1];
    let ds = o.area_grad(phi_n) * e[0] + o.area_grad(phi_p) * e[1];
    let rest = phi_n * c[1] + phi_p * c[2];
    let q_rest = c[1] * o.q_int(phi_n) + c[2] * o.q_int(phi_p);
    let eq = |phi: &DVector<f64>, gamma: f64, eta: f64, lam: f64| {
        let mu = &o.bilap * phi * o.eps + &qs * eta + &ds * lam + DVector::repeat(n, gamma);
        (phi * c[0] + &rest) / (2.0 * dt) + mu * o.m
    };
    let energy = |phi: &DVector<f64>, eta: f64, lam: f64| {
        let dd = phi * c[0] + &rest;
        c[0] * o.q_int(phi) + q_rest - eta * o.d.inner(&qs, &dd) - lam * o.d.inner(&ds, &dd)
    };
    let sc = |v: f64| DVector::from_vec(vec![v]);
    match approach {
        LagrangeApproach::First | LagrangeApproach::Second => {
            let second = approach == LagrangeApproach::Second;
            let res = |x: &DVector<f64>, pinned: bool| {
                let phi = x.rows(0, n).into_owned();
                let (gamma, eta, lam) = (x[n], x[n + 1], x[n + 2]);
                let last = if second && !pinned {
                    energy(&phi, eta, lam)
                } else {
                    eta - 1.0
                };
                let area = if pinned { lam } else { o.area(&phi) - h0 };
                let tail = DVector::from_vec(vec![o.d.integral(&phi) - a0, area, last]);
                stack(&[&eq(&phi, gamma, eta, lam), &tail])
            };
            let x = newton_continued(
                res,
                stack(&[phi_n, &DVector::from_vec(vec![0.0, 1.0, 0.0])]),
            );
            (x.rows(0, n).into_owned(), x[n], x[n + 1], x[n + 2])
        }
        LagrangeApproach::Third => {
            let res = |x: &DVector<f64>, stage: usize| {
                let phi = x.rows(0, n).into_owned();
                let bar = x.rows(n, n).into_owned();
                let (gamma, gbar, eta, lam) = (x[2 * n], x[2 * n + 1], x[2 * n + 2], x[2 * n + 3]);
                let area = if stage == 0 { lam } else { o.area(&bar) - h0 };
                let energy = if stage < 2 {
                    eta - 1.0
                } else {
                    energy(&phi, eta, lam)
                };
                stack(&[
                    &eq(&phi, gamma, eta, lam),
                    &eq(&bar, gbar, 1.0, lam),
                    &sc(o.d.integral(&phi) - a0),
                    &sc(o.d.integral(&bar) - a0),
                    &sc(area),
                    &sc(energy),
                ])
            };
            let x = newton_staged(
                res,
                3,
                stack(&[phi_n, phi_n, &DVector::from_vec(vec![0.0, 0.0, 1.0, 0.0])]),
            );
            (
                x.rows(0, n).into_owned(),
                x[2 * n],
                x[2 * n + 2],
                x[2 * n + 3],
            )
        }
    }
}

fn check_vesicle(n: usize, approach: LagrangeApproach) {
    let dt = 1e-3;
    let (mut sim, o) = vesicle_setup(n, approach, dt);
    let targets = (sim.state.targets[0], sim.state.targets[1]);
    for step in 0..3 {
        let phi_n = o.d.vec(sim.state.field());
        let (phi_p, c, e) = match &sim.state.phi_prev {
            None => (phi_n.clone(), [2.0, -2.0, 0.0], [1.0, 0.0]),
            Some(p) => (o.d.vec(&p[0]), [3.0, -4.0, 1.0], [2.0, -1.0]),
        };
        let rep: StepReport = sim.advance().unwrap();
        let (phi, gamma, eta, lam) =
            vesicle_oracle(&o, &phi_n, &phi_p, c, e, dt, targets, approach);
        close_vec(
            &o.d.vec(sim.state.field()),
            &phi,
            &format!("phi, step {step}"),
        );
        close(rep.lambda[0], lam, "lambda");
        close(rep.gamma.unwrap(), gamma, "gamma");
        if approach != LagrangeApproach::First {
            close(rep.eta.unwrap(), eta, "eta");
        }
    }
}

pub fn vesicle_first_approach_matches_dense_solve() {
    check_vesicle(8, LagrangeApproach::First);
    check_vesicle(16, LagrangeApproach::First);
}

pub fn vesicle_second_approach_matches_dense_solve() {
    check_vesicle(8, LagrangeApproach::Second);
}

pub fn vesicle_third_approach_matches_dense_solve() {
    check_vesicle(8, LagrangeApproach::Third);
}

// -------------------------------------------------------------- partition

fn partition_grad(u: &[DVector<f64>], j: usize, eps: f64) -> DVector<f64> {
    let mut others = DVector::zeros(u[j].len());
    for (i, v) in u.iter().enumerate() {
        if i != j {
            others += v.component_mul(v);
        }
    }
    u[j].component_mul(&others) * (2.0 / (eps * eps))
}

fn partition_int(u: &[DVector<f64>], eps: f64, dv: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..u.len() {
        for j in 0..i {
            s += u[i].component_mul(&u[i]).dot(&u[j].component_mul(&u[j]));
        }
    }
    s * dv / (eps * eps)
}

fn check_partition(approach: LagrangeApproach) {
    let grid = Grid::new(&[8, 8]).unwrap();
    let (m, eps, dt) = (3, 0.8, 1e-3);
    let model = PartitionModel::new(m, eps).unwrap();
    let phis: Vec<RealField> = (0..m)
        .map(|j| smooth_field(&grid, j as u64 + 1, 0.6, 0.3))
        .collect();
    let state = SchemeState::partition(&model, phis, dt).unwrap();
    let targets = state.targets.clone();
    let mut sim = Simulation::new(
        Model::Partition(model),
        SchemeKind::PartitionBdf2(approach),
        state,
    )
    .unwrap();
    let d = Dense::new(&grid);
    let n = d.n;
    let b_lap = d.lap.clone();
    for step in 0..3 {
        let phi_n: Vec<DVector<f64>> = sim.state.phi.iter().map(|f| d.vec(f)).collect();
        let (phi_p, c, e) = match &sim.state.phi_prev {
            None => (phi_n.clone(), [2.0, -2.0, 0.0], [1.0, 0.0]),
            Some(p) => (
                p.iter().map(|f| d.vec(f)).collect(),
                [3.0, -4.0, 1.0],
                [2.0, -1.0],
            ),
        };
        let star: Vec<DVector<f64>> = (0..m)
            .map(|j| &phi_n[j] * e[0] + &phi_p[j] * e[1])
            .collect();
        let fstar: Vec<DVector<f64>> = (0..m)
            .map(|j| partition_grad(&phi_n, j, eps) * e[0] + partition_grad(&phi_p, j, eps) * e[1])
            .collect();
        let f_rest =
            c[1] * partition_int(&phi_n, eps, d.dv) + c[2] * partition_int(&phi_p, eps, d.dv);
        let rest: Vec<DVector<f64>> = (0..m)
            .map(|j| &phi_n[j] * c[1] + &phi_p[j] * c[2])
            .collect();
        let eq = |u: &DVector<f64>, j: usize, lam: f64, eta: f64| {
            (u * c[0] + &rest[j]) / (2.0 * dt) - &b_lap * u - &star[j] * lam + &fstar[j] * eta
        };
        let third = approach == LagrangeApproach::Third;
        // layout: phi_j (m n), bar_j (m n), lambda_j (m), eta
        let res = |x: &DVector<f64>, stage: usize| {
            let phi: Vec<DVector<f64>> = (0..m).map(|j| x.rows(j * n, n).into_owned()).collect();
            let bar: Vec<DVector<f64>> = (0..m)
                .map(|j| x.rows((m + j) * n, n).into_owned())
                .collect();
            let lam: Vec<f64> = (0..m).map(|j| x[2 * m * n + j]).collect();
            let eta = x[2 * m * n + m];
            let mut parts = Vec::new();
            for j in 0..m {
                parts.push(eq(&phi[j], j, lam[j], eta));
                parts.push(eq(&bar[j], j, lam[j], 1.0));
            }
            let mut tail: Vec<f64> = (0..m)
                .map(|j| {
                    if stage == 0 {
                        lam[j]
                    } else {
                        d.inner(&bar[j], &bar[j]) - targets[j]
                    }
                })
                .collect();
            tail.push(if third && stage == 2 {
                let mut s = c[0] * partition_int(&phi, eps, d.dv) + f_rest;
                for j in 0..m {
                    let dd = &phi[j] * c[0] + &rest[j];
                    s += -eta * d.inner(&fstar[j], &dd) + lam[j] * d.inner(&star[j], &dd);
                }
                s
            } else {
                eta - 1.0
            });
            let tail = DVector::from_vec(tail);
            let mut refs: Vec<&DVector<f64>> = parts.iter().collect();
            refs.push(&tail);
            stack(&refs)
        };
        let mut x0 = Vec::new();
        for _ in 0..2 {
            for p in &phi_n {
                x0.extend_from_slice(p.as_slice());
            }
        }
        x0.extend(std::iter::repeat(0.0).take(m));
        x0.push(1.0);
        let x = newton_staged(res, 3, DVector::from_vec(x0));

        let rep = sim.advance().unwrap();
        for j in 0..m {
            let phi_j = x.rows(j * n, n).into_owned();
            close_vec(
                &d.vec(&sim.state.phi[j]),
                &phi_j,
                &format!("phi_{j}, step {step}"),
            );
            close(rep.lambda[j], x[2 * m * n + j], "lambda_j");
        }
        if third {
            close(rep.eta.unwrap(), x[2 * m * n + m], "eta");
        }
    }
}

pub fn partition_first_approach_matches_dense_solve() {
    check_partition(LagrangeApproach::First);
}

pub fn partition_third_approach_matches_dense_solve() {
    check_partition(LagrangeApproach::Third);
}

/// Every check with its name.
pub const ALL: &[(&str, fn())] = &[
    (
        "linear_sav_step_matches_dense_solve",
        linear_sav_step_matches_dense_solve,
    ),
    (
        "approach1_step_matches_dense_solve",
        approach1_step_matches_dense_solve,
    ),
    (
        "approach2_steps_match_dense_solve",
        approach2_steps_match_dense_solve,
    ),
    (
        "approach3_steps_match_dense_solve",
        approach3_steps_match_dense_solve,
    ),
    (
        "stabilized_steps_match_dense_solve",
        stabilized_steps_match_dense_solve,
    ),
    (
        "vesicle_first_approach_matches_dense_solve",
        vesicle_first_approach_matches_dense_solve,
    ),
    (
        "vesicle_second_approach_matches_dense_solve",
        vesicle_second_approach_matches_dense_solve,
    ),
    (
        "vesicle_third_approach_matches_dense_solve",
        vesicle_third_approach_matches_dense_solve,
    ),
    (
        "partition_first_approach_matches_dense_solve",
        partition_first_approach_matches_dense_solve,
    ),
    (
        "partition_third_approach_matches_dense_solve",
        partition_third_approach_matches_dense_solve,
    ),
];
