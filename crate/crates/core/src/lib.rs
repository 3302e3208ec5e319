//! Stability toolkit for the traveling wave of a two-regime credit-rating
//! migration model with a free rating threshold.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is pure
//! computation: parameter validation, the closed-form wave, the dispersion
//! relation of the linearized operator, an explicit resolvent, a front-fixed
//! time stepper and the weighted norms used to measure convergence. File
//! formats and the command line live in the `ratingwave` crate.
#![cfg_attr(not(test), no_std)]

extern crate alloc;

mod math;

pub mod coupled;
pub mod dispersion;
pub mod error;
pub mod grid;
pub mod norms;
pub mod params;
pub mod resolvent;
pub mod sim;
pub mod tridiag;
pub mod wave;

pub use error::{Error, Result};
pub use grid::{Grid, HalfLinePair};
pub use params::{DerivedParams, FinancialParams, Side};
pub use wave::{InterfaceMaps, WaveProfile};

/// Complex numbers used throughout the spectral code.
pub type C64 = num_complex::Complex<f64>;
