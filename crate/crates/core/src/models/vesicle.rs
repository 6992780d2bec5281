use crate::error::{Error, Result};
use crate::spectral::{div_grad, divergence, gradient, integrate, RealField, SpectralOperator};

use super::{double_well, double_well_prime, double_well_second};

/// Phase-field vesicle membrane with bending energy
/// `E_b = eps/2 int (-Lap phi + G(phi)/eps^2)^2`, `G = phi^3 - phi`,
/// constrained volume `A = int phi` and surface area
/// `H = int eps/2 |grad phi|^2 + F(phi)/eps`.
///
/// The bending energy is split as `eps/2 ||Lap phi||^2 + int Q(phi)`; the
/// steppers treat the first part implicitly and `Q` through a multiplier.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VesicleModel {
    epsilon: f64,
    mobility: f64,
}

/// Field values with their spectral gradient, for pointwise functionals.
#[derive(Clone, Debug)]
pub struct FieldWithGradient {
    pub field: RealField,
    pub grad: Vec<RealField>,
}

impl FieldWithGradient {
    pub fn new(field: RealField) -> Self {
        let grad = gradient(&field);
        Self { field, grad }
    }

    /// `sum_i c_i x_i` of fields with gradients; gradients combine linearly.
    pub fn combine(terms: &[(f64, &FieldWithGradient)]) -> Self {
        let (c0, first) = terms[0];
        let mut field = first.field.scaled(c0);
        let mut grad: Vec<RealField> = first.grad.iter().map(|g| g.scaled(c0)).collect();
        for &(c, t) in &terms[1..] {
            field.axpy(c, &t.field);
            for (g, tg) in grad.iter_mut().zip(&t.grad) {
                g.axpy(c, tg);
            }
        }
        Self { field, grad }
    }
}

impl VesicleModel {
    pub fn new(epsilon: f64, mobility: f64) -> Result<Self> {
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        if !(mobility > 0.0 && mobility.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "mobility must be > 0, got {mobility}"
            )));
        }
        Ok(Self { epsilon, mobility })
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn mobility(&self) -> f64 {
        self.mobility
    }

    /// `w = -Lap phi + G(phi) / eps^2`.
    pub fn chemical_w(&self, phi: &RealField) -> RealField {
        let lap = SpectralOperator::laplacian(phi.grid())
            .apply(phi)
            .expect("operator on field grid");
        let e2 = self.epsilon * self.epsilon;
        lap.zip_map_unchecked(phi, |l, p| -l + double_well_prime(p) / e2)
    }

    /// `E_b = eps/2 int w^2`.
    pub fn bending_energy(&self, phi: &RealField) -> f64 {
        let w = self.chemical_w(phi);
        0.5 * self.epsilon * integrate(&w.map(|v| v * v))
    }

    /// `eps/2 ||Lap phi||^2` (exact in Fourier space).
    pub fn laplacian_energy(&self, phi: &RealField) -> f64 {
        0.5 * self.epsilon
            * SpectralOperator::bilaplacian(phi.grid())
                .quadratic_form(phi)
                .expect("operator on field grid")
    }

    /// Density of `Q` from `phi` and `|grad phi|^2`.
    fn q_density(&self, p: f64, g2: f64) -> f64 {
        let e = self.epsilon;
        let e2 = e * e;
        let gg = double_well_prime(p);
        0.5 * e * (6.0 / e2 * p * p * g2 + gg * gg / (e2 * e2) - 2.0 / e2 * g2)
    }

    fn grad_sq_at(grad: &[RealField], i: usize) -> f64 {
        grad.iter().map(|g| g.values()[i] * g.values()[i]).sum()
    }

    /// `int Q(phi)` from a field with its gradient.
    pub fn q_energy_of(&self, fg: &FieldWithGradient) -> f64 {
        let vals = fg.field.values();
        let s: f64 = (0..vals.len())
            .map(|i| self.q_density(vals[i], Self::grad_sq_at(&fg.grad, i)))
            .sum();
        s * fg.field.grid().cell_volume()
    }

    /// `int Q(phi)`, the non-quadratic part of the bending energy.
    pub fn q_energy(&self, phi: &RealField) -> f64 {
        self.q_energy_of(&FieldWithGradient::new(phi.clone()))
    }

    /// `dQ/dphi = eps/2 [12/eps^2 phi |grad phi|^2 - 12/eps^2 div(phi^2 grad phi)
    ///   + 2/eps^4 G G' + 4/eps^2 Lap phi]`, with `Lap = div grad` so that it is
    /// the exact gradient of the discrete `int Q`.
    pub fn dq_dphi(&self, phi: &RealField) -> RealField {
        let e = self.epsilon;
        let e2 = e * e;
        let grad = gradient(phi);
        let flux: Vec<RealField> = grad
            .iter()
            .map(|g| g.zip_map_unchecked(phi, |gv, p| p * p * gv))
            .collect();
        let div_flux = divergence(&flux).expect("gradient components");
        let lap = div_grad(phi);
        let vals = phi.values();
        let mut out = RealField::zeros(phi.grid());
        for (i, o) in out.values_mut().iter_mut().enumerate() {
            let p = vals[i];
            let g2 = Self::grad_sq_at(&grad, i);
            *o = 0.5
                * e
                * (12.0 / e2 * p * g2 - 12.0 / e2 * div_flux.values()[i]
                    + 2.0 / (e2 * e2) * double_well_prime(p) * double_well_second(p)
                    + 4.0 / e2 * lap.values()[i]);
        }
        out.dealias_if_enabled();
        out
    }

    /// `(dQ/dphi (phi), v)` computed pointwise from gradients.
    pub fn q_directional(&self, phi: &FieldWithGradient, v: &FieldWithGradient) -> f64 {
        let e = self.epsilon;
        let e2 = e * e;
        let pv = phi.field.values();
        let vv = v.field.values();
        let d = phi.grad.len();
        let mut s = 0.0;
        for i in 0..pv.len() {
            let p = pv[i];
            let g2 = Self::grad_sq_at(&phi.grad, i);
            let dq_dp = 0.5
                * e
                * (12.0 / e2 * p * g2
                    + 2.0 / (e2 * e2) * double_well_prime(p) * double_well_second(p));
            let coef_g = 0.5 * e * (12.0 / e2 * p * p - 4.0 / e2);
            let mut gv = 0.0;
            for a in 0..d {
                gv += phi.grad[a].values()[i] * v.grad[a].values()[i];
            }
            s += dq_dp * vv[i] + coef_g * gv;
        }
        s * phi.field.grid().cell_volume()
    }

    /// Volume `A` and surface area `H`.
    pub fn constraints(&self, phi: &RealField) -> (f64, f64) {
        let fg = FieldWithGradient::new(phi.clone());
        (integrate(phi), self.area_of(&fg))
    }

    /// `H` from a field with its gradient.
    pub fn area_of(&self, fg: &FieldWithGradient) -> f64 {
        let e = self.epsilon;
        let vals = fg.field.values();
        let s: f64 = (0..vals.len())
            .map(|i| 0.5 * e * Self::grad_sq_at(&fg.grad, i) + double_well(vals[i]) / e)
            .sum();
        s * fg.field.grid().cell_volume()
    }

    /// `(dH/dphi (phi), v)` computed pointwise from gradients.
    pub fn area_directional(&self, phi: &FieldWithGradient, v: &FieldWithGradient) -> f64 {
        let e = self.epsilon;
        let pv = phi.field.values();
        let vv = v.field.values();
        let mut s = 0.0;
        for i in 0..pv.len() {
            let mut gv = 0.0;
            for a in 0..phi.grad.len() {
                gv += phi.grad[a].values()[i] * v.grad[a].values()[i];
            }
            s += e * gv + double_well_prime(pv[i]) * vv[i] / e;
        }
        s * phi.field.grid().cell_volume()
    }

    /// `dH/dphi = -eps div grad phi + F'(phi)/eps`.
    pub fn dh_dphi(&self, phi: &RealField) -> RealField {
        let e = self.epsilon;
        let mut out =
            div_grad(phi).zip_map_unchecked(phi, |l, p| -e * l + double_well_prime(p) / e);
        out.dealias_if_enabled();
        out
    }
}
