//! Jet-bundle models of physical systems.
//!
//! Kinematical states are sections of first-order jet bundles, stored as
//! symbolic [`expr::Expr`] components. Their integrability is measured with
//! the Spencer operator and contact forms ([`jet`]), they are paired with
//! dynamical states through virtual work ([`dynamics`], [`lagrangian`]), and
//! balance principles are checked as residual sweeps over parameter grids
//! ([`grid`]). Worked instantiations cover point and rigid-body mechanics
//! ([`mechanics`]), continua ([`continuum`]), waves ([`wave`]) and pre-metric
//! electromagnetism ([`em`]).

pub mod continuum;
pub mod dynamics;
pub mod em;
pub mod expr;
pub mod grid;
pub mod jet;
pub mod lagrangian;
pub mod mechanics;
pub mod wave;

pub use expr::{Binding, Expr};
pub use grid::{Axis, GridMax, ParamDomain};
