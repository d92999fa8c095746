//! Shared fixtures for the kernel benchmarks.

use std::f64::consts::PI;

use b2p1_core::surface_tension::StMode;
use b2p1_core::{
    Bathymetry, Boussinesq, Field2D, Grid2D, Regime, SmallParams, StepperConfig, TrigTerm,
    WaveState,
};

/// Square periodic grid of side `4π` with `n²` points.
pub fn grid(n: usize) -> Grid2D {
    Grid2D::square(n, 4.0 * PI).expect("benchmark grid")
}

/// Smooth band-limited test field.
pub fn field(g: Grid2D) -> Field2D {
    Field2D::from_fn(g, |x, y| {
        (x).cos() * (0.5 * y).sin() + 0.3 * (2.0 * x + y).sin()
    })
}

/// Pair model over a sinusoidal bottom with all parameters at 0.1.
pub fn model(n: usize, r: Regime) -> Boussinesq {
    let g = grid(n);
    let bath = Bathymetry::Trig {
        h0: 0.5,
        terms: vec![TrigTerm {
            jx: 1,
            jy: 0,
            a_cos: 0.3,
            a_sin: 0.0,
        }],
    };
    let p = SmallParams::uniform(0.1).expect("parameters");
    Boussinesq::new(
        g,
        bath.sample(&g).expect("bottom"),
        p,
        r,
        StMode::Approx,
        StepperConfig::from_cfl(&g, 0.5).expect("dt"),
    )
    .expect("model")
}

/// Gaussian hump at rest.
pub fn state(g: Grid2D) -> WaveState {
    let c = g.lx() / 2.0;
    let eta = Field2D::from_fn(g, |x, y| {
        0.5 * (-((x - c).powi(2) + (y - c).powi(2)) / 4.0).exp()
    });
    WaveState::new(eta, Field2D::zeros(g), 0.0).expect("state")
}
