//! Forward maps for the three case studies, with their closed forms.

pub mod beam;
pub mod identity;
pub mod sho;

pub use beam::{
    beam_performance, beam_roots, mode_shape, BeamConfig, BeamMap, BeamModel, BeamPerformance, ModeValue, Response,
    RmsProfile,
};
pub use identity::{identity_analytic, identity_stationarity, IdentityAnalytic, IdentityCase, IdentityMap};
pub use sho::{sho_response, ShoMap};
