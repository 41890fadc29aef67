//! Weighted power-series rings in one variable `t` over ℂ, the
//! `∂̄`-equation with plurisubharmonic weights, and Runge-type
//! approximation of sections.
//!
//! - [`norm_family`]: families `h ↦ ‖t^j‖_h` and their six structural checks.
//! - [`series`]: truncated series with norm-tracked products, inverses and
//!   division by `t`.
//! - [`weierstrass`]: division `f = q·g + r` in `x_1, …, x_n, t`.
//! - [`level`]: level functions `h(|z|)` and the weights `W_j`.
//! - [`dbar`]: weighted least-squares solves of `∂̄u = ω` on a grid.
//! - [`approximation`]: polynomial approximation over nested blocks.
//! - [`harness`]: configuration, reports and the acceptance suite behind the
//!   `wdvr` binary.

pub mod approximation;
pub mod dbar;
pub mod error;
pub mod grid;
pub mod harness;
pub mod level;
pub mod norm_family;
pub mod series;
pub mod weierstrass;

pub use error::{Error, Result};
