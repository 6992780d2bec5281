//! Dense reference implementations used by the integration tests.
//!
//! Differentiation matrices are assembled directly from the trigonometric
//! interpolant on each axis and combined with Kronecker products, so they
//! share nothing with the FFT code paths under test.

#![allow(dead_code)]

use std::f64::consts::PI;

use cgflow::spectral::{Grid, RealField};
use nalgebra::{DMatrix, DVector};

/// 1-D first derivative, Nyquist mode dropped.
fn d1_1d(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    let half = n as i64 / 2;
    DMatrix::from_fn(n, n, |j, l| {
        let x = (j as f64 - l as f64) * h;
        let s: f64 = (-half + 1..half)
            .map(|k| -(k as f64) * (k as f64 * x).sin())
            .sum();
        s / n as f64
    })
}

/// 1-D second derivative with every mode, Nyquist included.
fn d2_1d(n: usize) -> DMatrix<f64> {
    let h = 2.0 * PI / n as f64;
    let half = n as i64 / 2;
    DMatrix::from_fn(n, n, |j, l| {
        let x = (j as f64 - l as f64) * h;
        let s: f64 = (-half..half)
            .map(|k| -((k * k) as f64) * (k as f64 * x).cos())
            .sum();
        s / n as f64
    })
}

/// Lift a 1-D operator to `axis` of a row-major grid.
fn lift(op: &DMatrix<f64>, axis: usize, modes: &[usize]) -> DMatrix<f64> {
    let mut out = DMatrix::<f64>::identity(1, 1);
    for (a, &n) in modes.iter().enumerate() {
        let factor = if a == axis {
            op.clone()
        } else {
            DMatrix::identity(n, n)
        };
        out = out.kronecker(&factor);
    }
    out
}

/// Dense matrices for the operators of a periodic grid.
pub struct Dense {
    pub grid: Grid,
    pub n: usize,
    /// Cell volume.
    pub dv: f64,
    pub d: Vec<DMatrix<f64>>,
    pub lap: DMatrix<f64>,
}

impl Dense {
    pub fn new(grid: &Grid) -> Self {
        let modes = grid.modes().to_vec();
        let d = (0..modes.len())
            .map(|a| lift(&d1_1d(modes[a]), a, &modes))
            .collect();
        let n = grid.len();
        let mut lap = DMatrix::zeros(n, n);
        for a in 0..modes.len() {
            lap += lift(&d2_1d(modes[a]), a, &modes);
        }
        let dv = modes.iter().map(|&m| 2.0 * PI / m as f64).product();
        Self {
            grid: grid.clone(),
            n,
            dv,
            d,
            lap,
        }
    }

    pub fn vec(&self, f: &RealField) -> DVector<f64> {
        DVector::from_column_slice(f.values())
    }

    pub fn field(&self, v: &DVector<f64>) -> RealField {
        RealField::from_values(&self.grid, v.as_slice().to_vec()).unwrap()
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        self.dv * a.dot(b)
    }

    pub fn integral(&self, a: &DVector<f64>) -> f64 {
        self.dv * a.sum()
    }

    /// `sum_a (D_a u)^2`.
    pub fn grad_sq(&self, u: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.n);
        for d in &self.d {
            let g = d * u;
            out += g.component_mul(&g);
        }
        out
    }

    /// `sum_a D_a D_a`.
    pub fn div_grad(&self) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.n, self.n);
        for d in &self.d {
            out += d * d;
        }
        out
    }
}

pub fn map(v: &DVector<f64>, f: impl Fn(f64) -> f64) -> DVector<f64> {
    v.map(f)
}

pub fn dw(x: f64) -> f64 {
    0.25 * (x * x - 1.0) * (x * x - 1.0)
}

pub fn dw1(x: f64) -> f64 {
    x * x * x - x
}

pub fn dw2(x: f64) -> f64 {
    3.0 * x * x - 1.0
}

/// Newton's method with a central-difference Jacobian and a dense LU solve.
pub fn newton(f: impl Fn(&DVector<f64>) -> DVector<f64>, x0: DVector<f64>) -> DVector<f64> {
    let mut x = x0;
    let n = x.len();
    for _ in 0..40 {
        let r = f(&x);
        let mut jac = DMatrix::zeros(r.len(), n);
        for k in 0..n {
            let h = 1e-6 * (1.0 + x[k].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[k] += h;
            xm[k] -= h;
            let col = (f(&xp) - f(&xm)) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let dx = jac.lu().solve(&(-&r)).expect("oracle Jacobian is singular");
        x += &dx;
        if dx.amax() <= 1e-12 * (1.0 + x.amax()) {
            return x;
        }
    }
    let r = f(&x);
    assert!(
        r.amax() < 1e-9,
        "oracle Newton did not converge, residual {}",
        r.amax()
    );
    x
}

/// Smooth random-looking field built from a few Fourier modes.
pub fn smooth_field(grid: &Grid, seed: u64, mean: f64, amp: f64) -> RealField {
    let s = seed as f64;
    RealField::from_fn(grid, |x| {
        let mut v = mean;
        for k in 1..=3 {
            let kf = k as f64;
            let ph = 0.7 * s + 1.3 * kf;
            v += amp / kf
                * ((kf * x[0] + ph).cos() * (0.5 + 0.1 * s).sin()
                    + (kf * x[1] - 0.4 * ph).sin() * 0.8
                    + ((kf * (x[0] + x[1]) + s).cos()) * 0.3
                    + (kf * x[2] + ph).sin() * 0.2);
        }
        v
    })
}

/// Concatenate vectors.
pub fn stack(parts: &[&DVector<f64>]) -> DVector<f64> {
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = DVector::zeros(n);
    let mut o = 0;
    for p in parts {
        out.rows_mut(o, p.len()).copy_from(p);
        o += p.len();
    }
    out
}

pub fn linf(a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a - b).amax()
}

/// Two-stage Newton: first with the multipliers pinned at their neutral
/// values (`f(x, true)`), then the full system from there, so the iteration
/// lands on the root continuously connected to the unconstrained step.
pub fn newton_continued(
    f: impl Fn(&DVector<f64>, bool) -> DVector<f64>,
    x0: DVector<f64>,
) -> DVector<f64> {
    let x1 = newton(|x| f(x, true), x0);
    newton(|x| f(x, false), x1)
}

/// Newton continuation through `stages` versions of a system; stage
/// `stages - 1` is the full one.
pub fn newton_staged(
    f: impl Fn(&DVector<f64>, usize) -> DVector<f64>,
    stages: usize,
    x0: DVector<f64>,
) -> DVector<f64> {
    (0..stages).fold(x0, |x, s| newton(|y| f(y, s), x))
}

pub mod gateaux;
pub mod oracles;
