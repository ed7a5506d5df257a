//! Off-grid direction-of-arrival estimation for compressive uniform linear arrays.
//!
//! The crate is organised around four pieces:
//!
//! * [`array_model`]: ULA steering and gradient vectors, grid dictionaries and
//!   synthetic measurements `Y = ΦA(ν)X + ΦN̄` at a calibrated SNR.
//! * [`projection_design`]: mutual-coherence diagnostics and constant-modulus
//!   gradient descent on the normalized Gram error, with soft-threshold
//!   shrinking of the error matrix, plus DFT and random baselines.
//! * [`estimator`]: simultaneous OMP on the grid followed by gradient OMP
//!   (GOMP), a sequential first-order refinement of every frequency.
//! * [`bench`]: Monte Carlo drivers, metrics, configuration and CSV output.
//!
//! Complex matrices are `nalgebra` dense matrices of [`C64`].

pub mod array_model;
pub mod bench;
pub mod error;
pub mod estimator;
pub mod linalg;
pub mod projection_design;

pub use error::{Error, Result};
pub use linalg::{CMatrix, CVector, C64};
