use crate::error::{Error, Result};
use crate::spectral::{integrate, RealField, SpectralOperator};

/// Norm-preserving optimal partition model with `m` components,
/// `E = sum_j 1/2 ||grad phi_j||^2 + int F(phi)` and
/// `F = 1/eps^2 sum_{i} sum_{j<i} phi_i^2 phi_j^2`, each `||phi_j||^2` held fixed.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PartitionModel {
    components: usize,
    epsilon: f64,
}

impl PartitionModel {
    pub fn new(components: usize, epsilon: f64) -> Result<Self> {
        if components == 0 {
            return Err(Error::InvalidModel(
                "partition needs at least one component".into(),
            ));
        }
        if !(epsilon > 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "epsilon must be > 0, got {epsilon}"
            )));
        }
        Ok(Self {
            components,
            epsilon,
        })
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn check(&self, phis: &[RealField]) -> Result<()> {
        if phis.len() != self.components {
            return Err(Error::InvalidState(format!(
                "expected {} components, got {}",
                self.components,
                phis.len()
            )));
        }
        let grid = phis[0].grid();
        if phis.iter().any(|p| p.grid() != grid) {
            return Err(Error::GridMismatch("partition components".into()));
        }
        Ok(())
    }

    /// Pointwise interaction density.
    pub fn interaction_density(&self, phis: &[RealField]) -> Result<RealField> {
        self.check(phis)?;
        let inv = 1.0 / (self.epsilon * self.epsilon);
        let mut out = RealField::zeros(phis[0].grid());
        let n = out.values().len();
        let o = out.values_mut();
        for idx in 0..n {
            // sum_{i<j} a_i a_j = ((sum a)^2 - sum a^2) / 2 with a = phi^2
            let (mut s, mut s2) = (0.0, 0.0);
            for p in phis {
                let a = p.values()[idx] * p.values()[idx];
                s += a;
                s2 += a * a;
            }
            o[idx] = inv * 0.5 * (s * s - s2).max(0.0);
        }
        Ok(out)
    }

    /// `int F(phi) >= 0`.
    pub fn interaction(&self, phis: &[RealField]) -> Result<f64> {
        Ok(integrate(&self.interaction_density(phis)?))
    }

    /// `dF/dphi_j = 2/eps^2 phi_j sum_{i != j} phi_i^2`.
    pub fn interaction_derivative(&self, phis: &[RealField], j: usize) -> Result<RealField> {
        self.check(phis)?;
        if j >= self.components {
            return Err(Error::InvalidState(format!(
                "component index {j} out of range for m = {}",
                self.components
            )));
        }
        let c = 2.0 / (self.epsilon * self.epsilon);
        let mut out = RealField::zeros(phis[0].grid());
        for (idx, o) in out.values_mut().iter_mut().enumerate() {
            let others: f64 = phis
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != j)
                .map(|(_, p)| p.values()[idx] * p.values()[idx])
                .sum();
            *o = c * phis[j].values()[idx] * others;
        }
        out.dealias_if_enabled();
        Ok(out)
    }

    /// `int F(base + eta dir)` and its derivative in `eta`, in one pass.
    pub(crate) fn interaction_along(
        &self,
        base: &[RealField],
        dir: &[RealField],
        eta: f64,
    ) -> (f64, f64) {
        let inv = 1.0 / (self.epsilon * self.epsilon);
        let n = base[0].values().len();
        let mut vals = vec![0.0; base.len()];
        let (mut f, mut df) = (0.0, 0.0);
        for idx in 0..n {
            let (mut s, mut s2) = (0.0, 0.0);
            for (j, v) in vals.iter_mut().enumerate() {
                *v = base[j].values()[idx] + eta * dir[j].values()[idx];
                let a = *v * *v;
                s += a;
                s2 += a * a;
            }
            f += inv * 0.5 * (s * s - s2).max(0.0);
            for (j, v) in vals.iter().enumerate() {
                df += 2.0 * inv * v * (s - v * v) * dir[j].values()[idx];
            }
        }
        let dv = base[0].grid().cell_volume();
        (f * dv, df * dv)
    }

    /// `sum_j 1/2 ||grad phi_j||^2`, evaluated as `1/2 (-Lap phi_j, phi_j)`.
    pub fn gradient_energy(&self, phis: &[RealField]) -> Result<f64> {
        self.check(phis)?;
        let lap = SpectralOperator::isotropic(phis[0].grid(), |k2| k2);
        Ok(phis
            .iter()
            .map(|p| 0.5 * lap.quadratic_form(p).expect("same grid"))
            .sum())
    }

    pub fn energy(&self, phis: &[RealField]) -> Result<f64> {
        Ok(self.gradient_energy(phis)? + self.interaction(phis)?)
    }
}
