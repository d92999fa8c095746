//! Pseudospectral laboratory for weakly nonlinear, weakly dispersive surface
//! waves over an uneven bottom in two horizontal dimensions.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bathymetry;
pub mod cascade;
pub mod config;
pub mod dynamics;
pub mod error;
pub mod grid;
pub mod jet;
pub mod oracle;
pub mod params;
pub mod potential;
pub mod reduction;
pub mod runner;
pub mod scalar;
pub mod snapshot;
pub mod spectral;
pub mod spectral1d;
pub mod surface_tension;

pub use bathymetry::{Bathymetry, SampledBathymetry, TrigTerm};
pub use dynamics::{Boussinesq, Diagnostics, StepperConfig, WaveState};
pub use error::{Error, HarmonicLabel, Result};
pub use grid::{Field1D, Field2D, Grid1D, Grid2D};
pub use params::{nondimensionalize, validate_regime, Regime, SmallParams};
pub use spectral::{OperatorSymbol, Spectral, Spectrum};
pub use spectral1d::Spectral1D;
