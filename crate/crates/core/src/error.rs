use std::fmt;

use thiserror::Error;

use crate::config::ConfigError;
use crate::snapshot::SnapshotError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A harmonic `e^{i(Kx x + Ky y - Ω t)}` identified by its wavenumbers and frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicLabel {
    pub kx: f64,
    pub ky: f64,
    pub omega: f64,
}

impl fmt::Display for HarmonicLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(Kx={:.6}, Ky={:.6}, Omega={:.6})",
            self.kx, self.ky, self.omega
        )
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("derivative order {order} exceeds the cap of {max}")]
    OrderTooHigh { order: usize, max: usize },
    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),
    #[error("operator symbol is singular at mode ({jx}, {jy}): |P| = {value:e}")]
    SingularSymbol { jx: i64, jy: i64, value: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("surface slope too large: 1/(1 + α²β η_x² + α²γ η_y²) drops to {min_reciprocal}, guard is 0.5")]
    SlopeTooLarge { min_reciprocal: f64 },
    #[error(
        "Picard iteration did not converge after {iters} iterations (last update {last_update:e})"
    )]
    PicardDiverged { iters: usize, last_update: f64 },
    #[error("state became non-finite at t = {t}")]
    NonFiniteState { t: f64 },
    #[error("derivative f_(x{x} y{y} t{t}) is not available from this jet")]
    MissingDerivative { x: u8, y: u8, t: u8 },
    #[error("unsupported regime: {0}")]
    UnsupportedRegime(String),
    #[error("Bond number tau = {tau} is not negligible; eta cannot be expressed through f alone")]
    TauNotNegligible { tau: f64 },
    #[error(
        "bathymetry kind `{0}` has no finite harmonic expansion; use the time-stepped fallback"
    )]
    NonHarmonicBathymetry(String),
    #[error("resonant forcing at harmonic {harmonic}: |D| = {denominator:e}")]
    ResonantForcing {
        harmonic: HarmonicLabel,
        denominator: f64,
    },
    #[error("mode ({jx}, {jy}) is not representable on the grid: {reason}")]
    OffGridMode {
        jx: i64,
        jy: i64,
        reason: &'static str,
    },
    #[error("bathymetry: {0}")]
    Bathymetry(String),
    #[error("soliton tail {tail:e} at the periodic seam is not negligible")]
    TailNotNegligible { tail: f64 },
    #[error("series truncation too high: M = {m} needs derivative order {order} > {max}")]
    SeriesTooLong { m: usize, order: usize, max: usize },
    #[error("oracle: {0}")]
    Oracle(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Snapshot(#[from] SnapshotError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Process exit code: 2 for configuration errors, 3 for numerical
    /// instability, 4 for resonance, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::NonFiniteState { .. } | Error::PicardDiverged { .. } | Error::NonFinite(_) => 3,
            Error::ResonantForcing { .. } => 4,
            _ => 1,
        }
    }

    /// Short machine-readable tag for the error kind.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidGrid(_) => "invalid-grid",
            Error::GridMismatch => "grid-mismatch",
            Error::OrderTooHigh { .. } => "order-too-high",
            Error::NonFinite(_) => "non-finite",
            Error::SingularSymbol { .. } => "singular-symbol",
            Error::InvalidParameter(_) => "invalid-parameter",
            Error::SlopeTooLarge { .. } => "slope-too-large",
            Error::PicardDiverged { .. } => "picard-diverged",
            Error::NonFiniteState { .. } => "non-finite-state",
            Error::MissingDerivative { .. } => "missing-derivative",
            Error::UnsupportedRegime(_) => "unsupported-regime",
            Error::TauNotNegligible { .. } => "tau-not-negligible",
            Error::NonHarmonicBathymetry(_) => "non-harmonic-bathymetry",
            Error::ResonantForcing { .. } => "resonant-forcing",
            Error::OffGridMode { .. } => "off-grid-mode",
            Error::Bathymetry(_) => "bathymetry",
            Error::TailNotNegligible { .. } => "tail-not-negligible",
            Error::SeriesTooLong { .. } => "series-too-long",
            Error::Oracle(_) => "oracle",
            Error::Config(e) => e.code(),
            Error::Snapshot(e) => e.code(),
            Error::Io(_) => "io",
        }
    }
}
