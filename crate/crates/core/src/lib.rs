//! Contour dynamics for 2D Euler vortex patches with Lagrangian winding diagnostics.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod geometry;
pub mod output;
pub mod point;
pub mod tracers;
pub mod velocity;

pub use error::{Error, Result};
pub use point::Vec2;
