mod doping;
mod involution;
pub mod quadrature;
mod sabatini;

pub use doping::{check_positivity_fails, doping_profile_candidate, doping_sign_radius};
pub use involution::{
    build_involution_potential, InvolutionPotential, InvolutionSpec, INVOLUTION_CHECK_POINTS,
    INVOLUTION_TOL,
};
pub use sabatini::{
    calibrated_plasma_lienard, plasma_lienard, relativistic_lienard, sabatini_tau,
    sabatini_verdict, LienardSpec, SabatiniOutcome, SabatiniVerdict, ScalarFn, TAU_QUADRATURE_TOL,
};
