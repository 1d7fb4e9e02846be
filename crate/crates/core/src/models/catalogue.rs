use std::sync::Arc;

use crate::criteria::build_involution_potential;
use crate::criteria::{
    calibrated_plasma_lienard, relativistic_lienard, InvolutionSpec, LienardSpec,
};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::system::SystemDef;

use super::{
    harmonic, hopf_potential, involution_hamiltonian, plasma_calibrated, plasma_radial,
    relativistic_plasma, transformed_oscillator, DopingProfile, Transformation,
};

/// One-parameter family of initial data `h -> (x0, Y0)`.
pub type Family<T> = Arc<dyn Fn(T) -> (T, Vec<T>) + Send + Sync>;

/// A model of the zoo with its parameters.
#[derive(Clone, Debug)]
pub enum ModelSpec<T: Real> {
    PlasmaRadial {
        d: u32,
    },
    PlasmaCalibrated {
        d: u32,
        gamma: T,
    },
    Relativistic {
        profile: DopingProfile<T>,
    },
    RelativisticReduced {
        profile: DopingProfile<T>,
        x0: T,
        p0: T,
        e0: T,
        window: (T, T),
    },
    HopfPotential,
    Harmonic,
    Transformed {
        transformation: Transformation<T>,
    },
    InvolutionHamiltonian {
        involution: InvolutionSpec<T>,
    },
}

impl<T: Real> ModelSpec<T> {
    pub fn kind(&self) -> &'static str {
        match self {
            Self::PlasmaRadial { .. } => "plasma_radial",
            Self::PlasmaCalibrated { .. } => "plasma_calibrated",
            Self::Relativistic { .. } => "relativistic",
            Self::RelativisticReduced { .. } => "relativistic_reduced",
            Self::HopfPotential => "hopf_potential",
            Self::Harmonic => "harmonic",
            Self::Transformed { .. } => "transformed",
            Self::InvolutionHamiltonian { .. } => "involution_hamiltonian",
        }
    }

    /// The characteristic system. The reduced relativistic model is a plain
    /// second-order field, not a characteristic system, and is refused here.
    pub fn system(&self) -> Result<SystemDef<T>> {
        match self {
            Self::PlasmaRadial { d } => plasma_radial(*d),
            Self::PlasmaCalibrated { d, gamma } => plasma_calibrated(*d, *gamma),
            Self::Relativistic { profile } => relativistic_plasma(profile.clone()),
            Self::RelativisticReduced { .. } => Err(Error::InvalidParameter(
                "relativistic_reduced is a scalar second-order model without a characteristic system".into(),
            )),
            Self::HopfPotential => Ok(hopf_potential()),
            Self::Harmonic => Ok(harmonic()),
            Self::Transformed { transformation } => transformed_oscillator(transformation.clone()),
            Self::InvolutionHamiltonian { involution } => {
                Ok(involution_hamiltonian(&build_involution_potential(involution)))
            }
        }
    }

    /// Default amplitude family used by period maps.
    pub fn family(&self) -> Family<T> {
        match self {
            Self::PlasmaRadial { .. } | Self::PlasmaCalibrated { .. } => {
                Arc::new(|h| (T::one(), vec![T::zero(), h]))
            }
            // Momentum amplitude, zero field.
            Self::Relativistic { profile } => {
                let x0 = match profile {
                    DopingProfile::Candidate { x0, .. } => *x0,
                    _ => T::zero(),
                };
                Arc::new(move |h| (x0, vec![h, T::zero()]))
            }
            Self::RelativisticReduced { x0, .. } => {
                let x0 = *x0;
                Arc::new(move |h| (x0, vec![h]))
            }
            Self::HopfPotential | Self::InvolutionHamiltonian { .. } => {
                Arc::new(|h| (h, vec![T::zero()]))
            }
            Self::Harmonic | Self::Transformed { .. } => {
                Arc::new(|h| (T::one(), vec![h, T::zero()]))
            }
        }
    }

    /// Lienard reduction, when the model has one.
    pub fn lienard(&self) -> Option<LienardSpec<T>> {
        match self {
            Self::PlasmaRadial { d } => Some(calibrated_plasma_lienard(
                T::from_count(*d as usize),
                T::zero(),
            )),
            Self::PlasmaCalibrated { d, gamma } => Some(calibrated_plasma_lienard(
                T::from_count(*d as usize),
                *gamma,
            )),
            Self::Relativistic {
                profile: DopingProfile::Constant(c),
            } => relativistic_lienard(*c).ok(),
            _ => None,
        }
    }
}
