//! Crossterm-free time-frequency representations.
//!
//! The crate is organised bottom-up:
//!
//! - [`signals`] synthesizes multicomponent FM signals and adds seeded noise.
//! - [`tfr`] computes the instantaneous auto-correlation (IAF), the
//!   Wigner-Ville distribution (WVD), the ambiguity function (AF) and the
//!   ideal crossterm-free label image.
//! - [`dataset`] draws random two-component signals and persists labelled
//!   `(WVD, ideal TFR)` image pairs.
//! - [`dcnn`] is a from-scratch convolutional network (same-size convolutions,
//!   ReLU, MSE loss, backpropagation, Adam) that maps WVD images to ideal TFRs.
//! - [`baselines`] holds the sparse-recovery comparison methods (per-instant
//!   OMP on the tapered IAF and masked-AF ℓ1 proximal reconstruction).
//! - [`eval`] implements the NMSE metric, the three reference case studies,
//!   the comparison table and PGM rendering.
//! - [`cli`] backs the `tfnet` binary.
//!
//! See `examples/` for one runnable program per capability.

pub mod baselines;
pub mod cli;
pub mod dataset;
pub mod dcnn;
mod error;
pub mod eval;
pub mod matrix;
pub mod seed;
pub mod signals;
pub mod tfr;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use signals::{ComplexSeries, Component, NoiseLevel, PhaseLaw, SignalModel};
pub use tfr::TfImage;
