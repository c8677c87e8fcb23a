//! Rotationally symmetric self-shrinkers of mean curvature flow, constructed
//! by shooting geodesics of the Angenent metric in the upper half-plane.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod export;
pub mod integrator;
pub mod model;
mod rk;
pub mod segment;
pub mod shooting;
pub mod verify;

pub use error::{Error, Result};
pub use integrator::{integrate, Direction, EventKind, IntegratorSettings, ProfileCurve, Termination};
pub use model::{AmbientConfig, GeodesicState, InitialData, Reference};
