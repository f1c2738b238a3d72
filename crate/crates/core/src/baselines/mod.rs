//! Sparse-recovery comparison methods.
//!
//! - [`omp_tfr`]: per-time-instant orthogonal matching pursuit on the IAF
//!   row, with a fixed Gaussian lag taper applied to both the row and the
//!   DFT atoms (a weighted least-squares fit).
//! - [`l1prox_tfr`]: ISTA reconstruction of the TF image from the AF samples
//!   inside a small centred rectangle.

mod l1prox;
mod omp;

pub use l1prox::{af_mask, ista, l1prox_run, l1prox_tfr, soft_threshold, IstaOutcome, L1ProxConfig};
pub use omp::{lag_weights, omp_row, omp_tfr, OmpConfig, RowFit};
