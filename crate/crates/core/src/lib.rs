// NaN-rejecting checks are written as `!(a > b)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod criteria;
pub mod error;
pub mod field;
pub mod integrate;
pub mod isochrony;
pub mod models;
pub mod scalar;
pub mod system;
pub mod variational;

pub use error::{Error, Result};
pub use scalar::Real;

pub type System = system::SystemDef<f64>;
pub type Config = integrate::IntegratorConfig<f64>;
pub type Trajectory = integrate::Trajectory<f64>;
pub type PeriodMap = isochrony::PeriodMap<f64>;
pub type MonodromyResult = isochrony::MonodromyResult<f64>;
pub type Classification = isochrony::Classification<f64>;
pub type BlowupReport = variational::BlowupReport<f64>;
pub type RiccatiSpec = variational::RiccatiSpec<f64>;
pub type LienardSpec = criteria::LienardSpec<f64>;
pub type InvolutionSpec = criteria::InvolutionSpec<f64>;
pub type ModelSpec = models::ModelSpec<f64>;
pub type InitialProfile = field::InitialProfile<f64>;
pub type FieldSnapshot = field::FieldSnapshot<f64>;
pub type CrossingReport = field::CrossingReport<f64>;
