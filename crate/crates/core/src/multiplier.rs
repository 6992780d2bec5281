//! Scalar and two-variable root finders for the Lagrange multipliers.
//!
//! Failures are hard errors carrying the iterate trace; the steppers surface
//! them unchanged so the caller can retry with a smaller time step.

use crate::error::{Error, Result};
use crate::spectral::{inner_unchecked, RealField};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_iters: usize,
    /// Relative step for central-difference derivatives.
    pub fd_step: f64,
}

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_iters: 50,
            fd_step: 1e-7,
        }
    }
}

impl NewtonConfig {
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0 && self.fd_step > 0.0) || self.max_iters == 0
        {
            return Err(Error::InvalidState(format!(
                "invalid Newton configuration {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MultiplierSolveReport<T> {
    pub root: T,
    pub iterations: usize,
    pub residual: f64,
    pub predictor_used: T,
}

// Stagnated iterates are accepted if the residual is within this factor of
// the requested tolerance (the residual is at its round-off floor).
const STAGNATION_SLACK: f64 = 1e4;

fn stagnated(step: f64, x: f64) -> bool {
    step.abs() <= 4.0 * f64::EPSILON * (1.0 + x.abs())
}

/// Newton iteration for `residual(x) = 0` with backtracking, falling back to
/// bisection on an expanding bracket around `guess`.
pub fn newton_scalar(
    residual: impl Fn(f64) -> f64,
    derivative: Option<&dyn Fn(f64) -> f64>,
    guess: f64,
    cfg: &NewtonConfig,
) -> Result<MultiplierSolveReport<f64>> {
    cfg.validate()?;
    let r0 = residual(guess);
    if !r0.is_finite() {
        return Err(Error::multiplier(
            "scalar root",
            "residual not finite at the initial guess",
            vec![guess, r0],
        ));
    }
    let tol = cfg.abs_tol + cfg.rel_tol * r0.abs();
    let mut trace = vec![guess, r0];
    let mut x = guess;
    let mut r = r0;
    let deriv = |x: f64| -> f64 {
        match derivative {
            Some(d) => d(x),
            None => {
                let h = cfg.fd_step * x.abs().max(1.0);
                (residual(x + h) - residual(x - h)) / (2.0 * h)
            }
        }
    };

    // one extra full step once within tolerance: with quadratic convergence
    // it costs a residual evaluation and removes the tolerance from the root
    let polish = |x: f64, r: f64| -> (f64, f64, usize) {
        if r == 0.0 {
            return (x, r, 0);
        }
        let d = deriv(x);
        if !(d.is_finite() && d != 0.0) {
            return (x, r, 0);
        }
        let xn = x - r / d;
        let rn = residual(xn);
        if rn.is_finite() && rn.abs() <= r.abs() {
            (xn, rn, 1)
        } else {
            (x, r, 0)
        }
    };

    for it in 0..cfg.max_iters {
        if r.abs() <= tol {
            let (x, r, extra) = polish(x, r);
            return Ok(MultiplierSolveReport {
                root: x,
                iterations: it + extra,
                residual: r.abs(),
                predictor_used: guess,
            });
        }
        let d = deriv(x);
        if !(d.is_finite() && d != 0.0) {
            break;
        }
        let step = -r / d;
        if stagnated(step, x) {
            if r.abs() <= STAGNATION_SLACK * tol {
                return Ok(MultiplierSolveReport {
                    root: x,
                    iterations: it + 1,
                    residual: r.abs(),
                    predictor_used: guess,
                });
            }
            break;
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let xn = x + alpha * step;
            let rn = residual(xn);
            if rn.is_finite() && rn.abs() < r.abs() {
                x = xn;
                r = rn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        trace.push(x);
        trace.push(r);
        if !accepted {
            if r.abs() <= STAGNATION_SLACK * tol {
                return Ok(MultiplierSolveReport {
                    root: x,
                    iterations: it + 1,
                    residual: r.abs(),
                    predictor_used: guess,
                });
            }
            break;
        }
    }
    if r.abs() <= tol {
        let (x, r, _) = polish(x, r);
        return Ok(MultiplierSolveReport {
            root: x,
            iterations: cfg.max_iters,
            residual: r.abs(),
            predictor_used: guess,
        });
    }
    bisection_fallback(&residual, guess, tol, cfg, trace)
}

fn bisection_fallback(
    residual: &impl Fn(f64) -> f64,
    guess: f64,
    tol: f64,
    cfg: &NewtonConfig,
    mut trace: Vec<f64>,
) -> Result<MultiplierSolveReport<f64>> {
    let mut half = 1.0;
    let mut bracket = None;
    for _ in 0..=10 {
        let (lo, hi) = (guess - half, guess + half);
        let (flo, fhi) = (residual(lo), residual(hi));
        if flo.is_finite() && fhi.is_finite() && flo * fhi <= 0.0 {
            bracket = Some((lo, hi, flo));
            break;
        }
        half *= 2.0;
    }
    let Some((mut lo, mut hi, mut flo)) = bracket else {
        return Err(Error::multiplier(
            "scalar root",
            "Newton diverged and no bracket was found",
            trace,
        ));
    };
    let max = cfg.max_iters.max(200);
    for it in 0..max {
        let mid = 0.5 * (lo + hi);
        let fm = residual(mid);
        if fm.abs() <= tol || (hi - lo) <= 4.0 * f64::EPSILON * (1.0 + mid.abs()) {
            return Ok(MultiplierSolveReport {
                root: mid,
                iterations: cfg.max_iters + it + 1,
                residual: fm.abs(),
                predictor_used: guess,
            });
        }
        if fm * flo <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
    }
    trace.push(lo);
    trace.push(hi);
    Err(Error::multiplier(
        "scalar root",
        "bisection did not converge",
        trace,
    ))
}

/// Newton iteration for two residuals in two unknowns. Rows should be scaled
/// by the caller so that a common tolerance is meaningful.
pub fn newton_2d(
    residuals: impl Fn(f64, f64) -> [f64; 2],
    jacobian: Option<&dyn Fn(f64, f64) -> [[f64; 2]; 2]>,
    guess: (f64, f64),
    cfg: &NewtonConfig,
) -> Result<MultiplierSolveReport<(f64, f64)>> {
    cfg.validate()?;
    let norm = |r: [f64; 2]| r[0].abs().max(r[1].abs());
    let (mut x, mut y) = guess;
    let mut r = residuals(x, y);
    if !(r[0].is_finite() && r[1].is_finite()) {
        return Err(Error::multiplier(
            "coupled pair",
            "residual not finite at the initial guess",
            vec![x, y],
        ));
    }
    let tol = cfg.abs_tol + cfg.rel_tol * norm(r);
    let mut trace = vec![x, y, norm(r)];
    let jac = |x: f64, y: f64| -> [[f64; 2]; 2] {
        match jacobian {
            Some(j) => j(x, y),
            None => {
                let hx = cfg.fd_step * x.abs().max(1.0);
                let hy = cfg.fd_step * y.abs().max(1.0);
                let (a, b) = (residuals(x + hx, y), residuals(x - hx, y));
                let (c, d) = (residuals(x, y + hy), residuals(x, y - hy));
                [
                    [(a[0] - b[0]) / (2.0 * hx), (c[0] - d[0]) / (2.0 * hy)],
                    [(a[1] - b[1]) / (2.0 * hx), (c[1] - d[1]) / (2.0 * hy)],
                ]
            }
        }
    };
    let polish = |x: f64, y: f64, r: [f64; 2]| -> (f64, f64, [f64; 2], usize) {
        if norm(r) == 0.0 {
            return (x, y, r, 0);
        }
        let j = jac(x, y);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if !(det.is_finite() && det != 0.0) {
            return (x, y, r, 0);
        }
        let xn = x - (j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let yn = y - (-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        let rn = residuals(xn, yn);
        if rn[0].is_finite() && rn[1].is_finite() && norm(rn) <= norm(r) {
            (xn, yn, rn, 1)
        } else {
            (x, y, r, 0)
        }
    };
    for it in 0..cfg.max_iters {
        if norm(r) <= tol {
            let (x, y, r, extra) = polish(x, y, r);
            return Ok(MultiplierSolveReport {
                root: (x, y),
                iterations: it + extra,
                residual: norm(r),
                predictor_used: guess,
            });
        }
        let j = jac(x, y);
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let scale = (j[0][0].abs() + j[0][1].abs()) * (j[1][0].abs() + j[1][1].abs());
        if !(det.is_finite()) || det.abs() < 1e-14 * scale || scale == 0.0 {
            trace.push(det);
            return Err(Error::multiplier(
                "coupled pair",
                "singular Jacobian",
                trace,
            ));
        }
        let dx = -(j[1][1] * r[0] - j[0][1] * r[1]) / det;
        let dy = -(-j[1][0] * r[0] + j[0][0] * r[1]) / det;
        if stagnated(dx, x) && stagnated(dy, y) {
            if norm(r) <= STAGNATION_SLACK * tol {
                return Ok(MultiplierSolveReport {
                    root: (x, y),
                    iterations: it + 1,
                    residual: norm(r),
                    predictor_used: guess,
                });
            }
            return Err(Error::multiplier("coupled pair", "Newton stagnated", trace));
        }
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let (xn, yn) = (x + alpha * dx, y + alpha * dy);
            let rn = residuals(xn, yn);
            if rn[0].is_finite() && rn[1].is_finite() && norm(rn) < norm(r) {
                x = xn;
                y = yn;
                r = rn;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        trace.extend([x, y, norm(r)]);
        if !accepted {
            if norm(r) <= STAGNATION_SLACK * tol {
                return Ok(MultiplierSolveReport {
                    root: (x, y),
                    iterations: it + 1,
                    residual: norm(r),
                    predictor_used: guess,
                });
            }
            return Err(Error::multiplier(
                "coupled pair",
                "line search failed",
                trace,
            ));
        }
    }
    if norm(r) <= tol {
        let (x, y, r, _) = polish(x, y, r);
        return Ok(MultiplierSolveReport {
            root: (x, y),
            iterations: cfg.max_iters,
            residual: norm(r),
            predictor_used: guess,
        });
    }
    Err(Error::multiplier(
        "coupled pair",
        "no convergence within the iteration budget",
        trace,
    ))
}

/// Real root of `a x^2 + b x + c = 0` closest to `predictor`.
pub fn solve_constraint_quadratic(a: f64, b: f64, c: f64, predictor: f64) -> Result<f64> {
    let m = a.abs().max(b.abs()).max(c.abs());
    if !(m.is_finite()) {
        return Err(Error::NonFinite("quadratic coefficients".into()));
    }
    if m == 0.0 || (a.abs() < 1e-14 * m && b.abs() < 1e-14 * m) {
        return Err(Error::Degenerate(format!(
            "quadratic ({a:e}) x^2 + ({b:e}) x + ({c:e})"
        )));
    }
    let (a, b, c) = (a / m, b / m, c / m);
    if a == 0.0 {
        return Ok(-c / b);
    }
    let mut disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        if disc > -1e-14 * (b * b + (4.0 * a * c).abs()) {
            disc = 0.0;
        } else {
            return Err(Error::multiplier(
                "quadratic constraint",
                format!("negative discriminant {disc:e}; constraint unreachable at this time step"),
                vec![a, b, c],
            ));
        }
    }
    let q = -0.5 * (b + b.signum() * disc.sqrt());
    let q = if q == 0.0 { -0.5 * disc.sqrt() } else { q };
    let r1 = q / a;
    let r2 = if q != 0.0 { c / q } else { r1 };
    Ok(if (r1 - predictor).abs() <= (r2 - predictor).abs() {
        r1
    } else {
        r2
    })
}

/// Multiplier of the linearized constraint `(dH, phi1 + lambda phi2 - phi_n) = 0`:
/// `lambda = -(dH, phi1 - phi_n) / (dH, phi2)`.
pub fn linearized_lambda(
    dh: &RealField,
    phi1_minus_phin: &RealField,
    phi2: &RealField,
) -> Result<f64> {
    let num = inner_unchecked(dh, phi1_minus_phin);
    let den = inner_unchecked(dh, phi2);
    let scale = dh.max_abs() * phi2.max_abs() * dh.grid().domain_volume();
    if !(den.abs() > 1e-14 * scale) || scale == 0.0 {
        return Err(Error::Degenerate(format!("predictor denominator {den:e}")));
    }
    Ok(-num / den)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn scalar_examples() {
        let cfg = NewtonConfig::default();
        let rep = newton_scalar(|x| x * x - 1.0, Some(&|x| 2.0 * x), 0.9, &cfg).unwrap();
        assert_relative_eq!(rep.root, 1.0, max_relative = 1e-14);
        assert!(rep.iterations <= 6);

        let rep = newton_scalar(|x| x - 3.25, None, -17.0, &cfg).unwrap();
        assert_relative_eq!(rep.root, 3.25, max_relative = 1e-12);
        assert!(rep.iterations <= 2);
        let rep = newton_scalar(|x| x - 3.25, Some(&|_| 1.0), -17.0, &cfg).unwrap();
        assert_eq!(rep.iterations, 1);
        assert_eq!(rep.root, 3.25);
    }

    #[test]
    fn scalar_failure_carries_trace() {
        let cfg = NewtonConfig::default();
        match newton_scalar(|x| x * x + 1.0, None, 0.3, &cfg) {
            Err(Error::MultiplierFailure { trace, .. }) => assert!(!trace.is_empty()),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn bisection_rescues_flat_derivative() {
        // derivative vanishes at the guess
        let cfg = NewtonConfig::default();
        let rep = newton_scalar(|x| x * x * x - 0.5, Some(&|x| 3.0 * x * x), 0.0, &cfg).unwrap();
        assert_relative_eq!(rep.root, 0.5f64.cbrt(), max_relative = 1e-10);
    }

    #[test]
    fn two_dimensional_examples() {
        let cfg = NewtonConfig::default();
        let rep = newton_2d(|x, y| [x + y - 2.0, x - y], None, (0.0, 0.0), &cfg).unwrap();
        assert!(rep.iterations <= 1 || (rep.root.0 - 1.0).abs() < 1e-12);
        assert_relative_eq!(rep.root.0, 1.0, max_relative = 1e-10);
        assert_relative_eq!(rep.root.1, 1.0, max_relative = 1e-10);
        let exact = |_: f64, _: f64| [[1.0, 1.0], [1.0, -1.0]];
        let rep = newton_2d(|x, y| [x + y - 2.0, x - y], Some(&exact), (0.0, 0.0), &cfg).unwrap();
        assert_eq!(rep.iterations, 1);

        let rep = newton_2d(|x, y| [x * x - 1.0, y - x], None, (0.9, 0.9), &cfg).unwrap();
        assert_relative_eq!(rep.root.0, 1.0, max_relative = 1e-12);
        assert_relative_eq!(rep.root.1, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn singular_jacobian_is_an_error() {
        let cfg = NewtonConfig::default();
        let r = newton_2d(
            |x, y| [x + y - 1.0, 2.0 * x + 2.0 * y - 3.0],
            None,
            (0.0, 0.0),
            &cfg,
        );
        assert!(matches!(r, Err(Error::MultiplierFailure { .. })));
    }

    #[test]
    fn quadratic_examples() {
        assert_eq!(
            solve_constraint_quadratic(0.0, 2.0, -4.0, 123.0).unwrap(),
            2.0
        );
        // roots 0.1 and 50
        let r = solve_constraint_quadratic(1.0, -50.1, 5.0, 0.12).unwrap();
        assert_relative_eq!(r, 0.1, max_relative = 1e-12);
        let r = solve_constraint_quadratic(1.0, 0.0, -4.0, -1.9).unwrap();
        assert_relative_eq!(r, -2.0, max_relative = 1e-15);
        assert!(matches!(
            solve_constraint_quadratic(1.0, 0.0, 4.0, 0.0),
            Err(Error::MultiplierFailure { .. })
        ));
        assert!(matches!(
            solve_constraint_quadratic(0.0, 0.0, 1.0, 0.0),
            Err(Error::Degenerate(_))
        ));
    }

    proptest! {
        #[test]
        fn quadratic_is_scale_invariant(
            r1 in -10.0f64..10.0,
            r2 in -10.0f64..10.0,
            lead in prop_oneof![-5.0f64..-0.1, 0.1f64..5.0],
            s in prop_oneof![-1e6f64..-1e-6, 1e-6f64..1e6],
            pred in -12.0f64..12.0,
        ) {
            let (a, b, c) = (lead, -lead * (r1 + r2), lead * r1 * r2);
            let x = solve_constraint_quadratic(a, b, c, pred);
            let y = solve_constraint_quadratic(s * a, s * b, s * c, pred);
            match (x, y) {
                (Ok(x), Ok(y)) => prop_assert!((x - y).abs() <= 1e-9 * (1.0 + x.abs())),
                (Err(_), Err(_)) => {}
                (x, y) => prop_assert!(false, "inconsistent: {:?} {:?}", x, y),
            }
        }

        #[test]
        fn monotone_cubics_always_solve(
            a in 0.01f64..3.0,
            b in 0.0f64..3.0,
            root in -5.0f64..5.0,
            guess in -8.0f64..8.0,
        ) {
            // f(x) = a (x - root)^3 + b (x - root) is strictly increasing
            let f = |x: f64| a * (x - root).powi(3) + b * (x - root);
            let cfg = NewtonConfig::default().with_abs_tol(1e-10);
            let rep = newton_scalar(f, None, guess, &cfg).unwrap();
            prop_assert!(f(rep.root).abs() <= 1e-10 + 1e-12 * f(guess).abs() * 1e4);
        }
    }
}
