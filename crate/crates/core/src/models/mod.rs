//! Energy bundles for the three constrained gradient-flow problems.
//!
//! Each model is immutable after construction and only evaluates functionals
//! and their variational derivatives; time stepping lives in
//! [`crate::steppers`].

mod generic;
mod partition;
mod vesicle;

pub use generic::{ConstraintDensity, GenericModel, Mobility, Potential};
pub use partition::PartitionModel;
pub use vesicle::{FieldWithGradient, VesicleModel};

/// Double-well `F(x) = (x^2 - 1)^2 / 4`.
pub fn double_well(x: f64) -> f64 {
    let s = x * x - 1.0;
    0.25 * s * s
}

/// `F'(x) = x^3 - x`.
pub fn double_well_prime(x: f64) -> f64 {
    x * x * x - x
}

/// `F''(x) = 3x^2 - 1`.
pub fn double_well_second(x: f64) -> f64 {
    3.0 * x * x - 1.0
}
