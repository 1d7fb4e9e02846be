mod catalogue;
mod oscillators;
mod plasma;
mod relativistic;

pub use catalogue::{Family, ModelSpec};
pub use oscillators::{
    harmonic, hopf_potential, involution_hamiltonian, transformed_oscillator, Function2, Gradient2,
    Transformation, SINGULAR_TRANSFORMATION,
};
pub use plasma::{plasma_calibrated, plasma_family, plasma_radial};
pub use relativistic::{
    relativistic_plasma, relativistic_reduced, DopingProfile, RelativisticReduced,
};
