use crate::error::{Error, Result};
use crate::spectral::{integrate, RealField, SpectralOperator};

use super::{double_well, double_well_prime, double_well_second};

/// Nonlinear bulk potential `F`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Potential {
    Zero,
    /// `scale * (phi^2 - 1)^2 / 4`.
    DoubleWell {
        scale: f64,
    },
}

impl Potential {
    pub fn value(&self, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::DoubleWell { scale } => scale * double_well(x),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::DoubleWell { scale } => scale * double_well_prime(x),
        }
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        match *self {
            Potential::Zero => 0.0,
            Potential::DoubleWell { scale } => scale * double_well_second(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Potential::Zero)
    }
}

/// Pointwise density `h` of the global constraint `H = int h(phi)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintDensity {
    /// No constraint; the multiplier is pinned to zero.
    None,
    /// `h = phi` (mass).
    Mass,
    /// `h = phi^2` (squared L2 norm).
    Square,
}

impl ConstraintDensity {
    pub fn value(&self, x: f64) -> f64 {
        match self {
            ConstraintDensity::None => 0.0,
            ConstraintDensity::Mass => x,
            ConstraintDensity::Square => x * x,
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match self {
            ConstraintDensity::None => 0.0,
            ConstraintDensity::Mass => 1.0,
            ConstraintDensity::Square => 2.0 * x,
        }
    }

    pub fn second_derivative(&self, _x: f64) -> f64 {
        match self {
            ConstraintDensity::Square => 2.0,
            _ => 0.0,
        }
    }

    pub fn is_active(&self) -> bool {
        !matches!(self, ConstraintDensity::None)
    }
}

/// Mobility presets for the relaxation operator `G`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mobility {
    /// `G = M I` (L2 gradient flow).
    AllenCahn,
    /// `G = -M Laplacian` (H^-1 gradient flow).
    CahnHilliard,
}

/// Single-component model `E = int 1/2 L phi . phi + F(phi)` with one
/// constraint `int h(phi) = const` and relaxation operator `G`.
#[derive(Clone, Debug)]
pub struct GenericModel {
    linear_op: SpectralOperator,
    mobility_op: SpectralOperator,
    potential: Potential,
    constraint: ConstraintDensity,
    c0: f64,
}

impl GenericModel {
    pub fn new(
        linear_op: SpectralOperator,
        mobility_op: SpectralOperator,
        potential: Potential,
        constraint: ConstraintDensity,
        c0: f64,
    ) -> Result<Self> {
        if linear_op.grid() != mobility_op.grid() {
            return Err(Error::GridMismatch("linear and mobility operators".into()));
        }
        if !linear_op.is_nonnegative() {
            return Err(Error::InvalidModel(
                "linear operator must have a nonnegative real symbol".into(),
            ));
        }
        if !mobility_op.is_nonnegative() {
            return Err(Error::InvalidModel(
                "mobility operator must have a nonnegative real symbol".into(),
            ));
        }
        if !(c0 > 0.0 && c0.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "C0 must be positive, got {c0}"
            )));
        }
        Ok(Self {
            linear_op,
            mobility_op,
            potential,
            constraint,
            c0,
        })
    }

    /// `L = -kappa Laplacian` with an Allen-Cahn (`M I`) or Cahn-Hilliard
    /// (`-M Laplacian`) mobility.
    pub fn with_presets(
        grid: &crate::spectral::Grid,
        kappa: f64,
        potential: Potential,
        constraint: ConstraintDensity,
        mobility: Mobility,
        m: f64,
        c0: f64,
    ) -> Result<Self> {
        if !(kappa >= 0.0) {
            return Err(Error::InvalidModel(format!(
                "kappa must be >= 0, got {kappa}"
            )));
        }
        if !(m > 0.0) {
            return Err(Error::InvalidModel(format!(
                "mobility must be > 0, got {m}"
            )));
        }
        let linear = SpectralOperator::isotropic(grid, |k2| kappa * k2);
        let mob = match mobility {
            Mobility::AllenCahn => SpectralOperator::isotropic(grid, |_| m),
            Mobility::CahnHilliard => SpectralOperator::isotropic(grid, |k2| m * k2),
        };
        Self::new(linear, mob, potential, constraint, c0)
    }

    pub fn linear_op(&self) -> &SpectralOperator {
        &self.linear_op
    }

    pub fn mobility_op(&self) -> &SpectralOperator {
        &self.mobility_op
    }

    pub fn potential(&self) -> Potential {
        self.potential
    }

    pub fn constraint(&self) -> ConstraintDensity {
        self.constraint
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    /// `int F(phi)`.
    pub fn potential_integral(&self, phi: &RealField) -> f64 {
        integrate(&phi.map(|v| self.potential.value(v)))
    }

    /// `F'(phi)` pointwise.
    pub fn potential_derivative(&self, phi: &RealField) -> RealField {
        let mut f = phi.map(|v| self.potential.derivative(v));
        f.dealias_if_enabled();
        f
    }

    /// `1/2 (L phi, phi)`.
    pub fn quadratic_energy(&self, phi: &RealField) -> f64 {
        0.5 * self
            .linear_op
            .quadratic_form(phi)
            .expect("field on model grid")
    }

    /// Original free energy `int 1/2 L phi . phi + F(phi)`.
    pub fn energy(&self, phi: &RealField) -> f64 {
        self.quadratic_energy(phi) + self.potential_integral(phi)
    }

    /// SAV modified energy `1/2 (L phi, phi) + r^2`.
    pub fn modified_energy(&self, phi: &RealField, r: f64) -> f64 {
        self.quadratic_energy(phi) + r * r
    }

    /// `sqrt(int F(phi) + C0)`; errors instead of taking the root of a negative number.
    pub fn sav_variable(&self, phi: &RealField) -> Result<f64> {
        let arg = self.potential_integral(phi) + self.c0;
        if !(arg > 0.0) {
            return Err(Error::SavPositivity(arg));
        }
        Ok(arg.sqrt())
    }

    /// `H(phi) = int h(phi)`.
    pub fn constraint_value(&self, phi: &RealField) -> f64 {
        integrate(&phi.map(|v| self.constraint.value(v)))
    }

    /// `dH/dphi = h'(phi)`.
    pub fn constraint_derivative(&self, phi: &RealField) -> RealField {
        phi.map(|v| self.constraint.derivative(v))
    }
}
