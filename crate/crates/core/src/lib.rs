//! Modelling, geometric control and stability certificates for four
//! quadrotors carrying a rigid load on elastic cables.
//!
//! * [`manifold`] — SO(3)/S² primitives and error functions.
//! * [`dynamics_full`] — elastic-cable model (30 DOF).
//! * [`dynamics_reduced`] — inelastic model (26 DOF), slow manifold, boundary layer.
//! * [`controller`] — hierarchical geometric tracking controller.
//! * [`certificate`] — Lyapunov bounding matrices, Schur tests and gain search.
//! * [`disturbance`] — bounded disturbances and the ultimate-bound estimate.
//! * [`integrator`] — Lie-group Runge–Kutta integration of either model.

pub mod certificate;
pub mod controller;
pub mod disturbance;
pub mod dynamics_full;
pub mod dynamics_reduced;
pub mod error;
pub mod integrator;
pub mod manifold;
pub mod model;
pub mod trajectory;

pub use error::{Error, Result};
pub use manifold::{Mat3, RotationMatrix, SkewMatrix, UnitVector, Vec3};
pub use model::{
    CableState, ControlInput, FullState, LinkState, LoadAccel, LoadState, PhysicalParams, QuadAttitude,
    ReducedState, SlowView, N,
};
