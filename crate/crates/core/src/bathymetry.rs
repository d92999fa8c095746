//! Bottom profiles `h(x, y)` and their slopes.
//!
//! Flat and trigonometric bottoms carry exact derivatives. Piecewise-linear
//! profiles in x use the exact slope away from kinks (the mean of the one-sided
//! slopes at a kink); only grid-sampled bottoms are differentiated spectrally.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D};
use crate::params::SmallParams;
use crate::spectral::Spectral;

/// One term `a_cos cos(kx x + ky y) + a_sin sin(kx x + ky y)` with
/// `kx = 2π jx / Lx`, `ky = 2π jy / Ly`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrigTerm {
    pub jx: i64,
    pub jy: i64,
    pub a_cos: f64,
    pub a_sin: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Bathymetry {
    Flat {
        h0: f64,
    },
    /// Periodic piecewise-linear profile in x through `(x, h)` knots, sorted
    /// by x in `[0, Lx)` and closed by wrapping from the last knot to the first.
    PiecewiseLinearX {
        knots: Vec<(f64, f64)>,
    },
    /// `h0 + Σ terms`.
    Trig {
        h0: f64,
        terms: Vec<TrigTerm>,
    },
    Sampled {
        h: Field2D,
    },
}

/// `h` and its exact (or spectral, for sampled kinds) slopes on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledBathymetry {
    pub h: Field2D,
    pub hx: Field2D,
    pub hy: Field2D,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SampledBathymetry1D {
    pub h: Field1D,
    pub hx: Field1D,
}

impl Bathymetry {
    pub fn flat() -> Self {
        Bathymetry::Flat { h0: 1.0 }
    }

    /// Periodic tent in x: zero at `x = 0`, peak 1 at `x = Lx/2`.
    pub fn tent(lx: f64) -> Self {
        Bathymetry::PiecewiseLinearX {
            knots: vec![(0.0, 0.0), (lx / 2.0, 1.0)],
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Bathymetry::Flat { .. } => "flat",
            Bathymetry::PiecewiseLinearX { .. } => "piecewise-linear",
            Bathymetry::Trig { .. } => "trig",
            Bathymetry::Sampled { .. } => "grid-sampled",
        }
    }

    pub fn is_y_invariant(&self) -> bool {
        match self {
            Bathymetry::Flat { .. } | Bathymetry::PiecewiseLinearX { .. } => true,
            Bathymetry::Trig { terms, .. } => terms.iter().all(|t| t.jy == 0),
            Bathymetry::Sampled { h } => {
                let g = h.grid();
                (1..g.ny()).all(|j| h.row(j) == h.row(0))
            }
        }
    }

    /// Value and x-slope of a piecewise-linear profile at `x`.
    fn pwl_eval(knots: &[(f64, f64)], lx: f64, x: f64) -> (f64, f64) {
        let n = knots.len();
        let seg = |i: usize| {
            let (x0, h0) = knots[i];
            let (mut x1, h1) = knots[(i + 1) % n];
            if i + 1 == n {
                x1 += lx;
            }
            (x0, h0, x1, h1)
        };
        let slope = |i: usize| {
            let (x0, h0, x1, h1) = seg(i);
            (h1 - h0) / (x1 - x0)
        };
        let xm = x.rem_euclid(lx);
        let shifted = if xm < knots[0].0 { xm + lx } else { xm };
        let i = (0..n)
            .rev()
            .find(|&i| knots[i].0 <= shifted)
            .unwrap_or(n - 1);
        let (x0, h0, _, _) = seg(i);
        let s = slope(i);
        let value = h0 + s * (shifted - x0);
        let tol = 1e-12 * lx;
        let at_kink = (shifted - x0).abs() < tol;
        let dx = if at_kink {
            0.5 * (s + slope((i + n - 1) % n))
        } else {
            s
        };
        (value, dx)
    }

    fn check_knots(knots: &[(f64, f64)], lx: f64) -> Result<()> {
        if knots.len() < 2 {
            return Err(Error::Bathymetry(
                "piecewise-linear profile needs at least two knots".into(),
            ));
        }
        for w in knots.windows(2) {
            if !(w[1].0 > w[0].0) {
                return Err(Error::Bathymetry(
                    "knot abscissae must be strictly increasing".into(),
                ));
            }
        }
        let (first, last) = (knots[0].0, knots[knots.len() - 1].0);
        if first < 0.0 || last >= lx {
            return Err(Error::Bathymetry(format!(
                "knots must lie in [0, Lx) = [0, {lx}); a profile that does not close periodically needs a tent or windowed shape"
            )));
        }
        Ok(())
    }

    pub fn sample(&self, grid: &Grid2D) -> Result<SampledBathymetry> {
        let out = match self {
            Bathymetry::Flat { h0 } => SampledBathymetry {
                h: Field2D::constant(*grid, *h0),
                hx: Field2D::zeros(*grid),
                hy: Field2D::zeros(*grid),
            },
            Bathymetry::PiecewiseLinearX { knots } => {
                Self::check_knots(knots, grid.lx())?;
                let lx = grid.lx();
                SampledBathymetry {
                    h: Field2D::from_fn(*grid, |x, _| Self::pwl_eval(knots, lx, x).0),
                    hx: Field2D::from_fn(*grid, |x, _| Self::pwl_eval(knots, lx, x).1),
                    hy: Field2D::zeros(*grid),
                }
            }
            Bathymetry::Trig { h0, terms } => {
                let (cx, cy) = ((grid.nx() / 3) as i64, (grid.ny() / 3) as i64);
                if let Some(t) = terms.iter().find(|t| t.jx.abs() > cx || t.jy.abs() > cy) {
                    return Err(Error::OffGridMode {
                        jx: t.jx,
                        jy: t.jy,
                        reason: "bathymetry mode outside the 2/3 band",
                    });
                }
                let k = |t: &TrigTerm| {
                    (
                        2.0 * PI * t.jx as f64 / grid.lx(),
                        2.0 * PI * t.jy as f64 / grid.ly(),
                    )
                };
                SampledBathymetry {
                    h: Field2D::from_fn(*grid, |x, y| {
                        h0 + terms
                            .iter()
                            .map(|t| {
                                let (kx, ky) = k(t);
                                let th = kx * x + ky * y;
                                t.a_cos * th.cos() + t.a_sin * th.sin()
                            })
                            .sum::<f64>()
                    }),
                    hx: Field2D::from_fn(*grid, |x, y| {
                        terms
                            .iter()
                            .map(|t| {
                                let (kx, ky) = k(t);
                                let th = kx * x + ky * y;
                                kx * (t.a_sin * th.cos() - t.a_cos * th.sin())
                            })
                            .sum()
                    }),
                    hy: Field2D::from_fn(*grid, |x, y| {
                        terms
                            .iter()
                            .map(|t| {
                                let (kx, ky) = k(t);
                                let th = kx * x + ky * y;
                                ky * (t.a_sin * th.cos() - t.a_cos * th.sin())
                            })
                            .sum()
                    }),
                }
            }
            Bathymetry::Sampled { h } => {
                if h.grid() != grid {
                    return Err(Error::GridMismatch);
                }
                let sp = Spectral::new(*grid);
                let s = sp.forward(h)?;
                SampledBathymetry {
                    h: h.clone(),
                    hx: sp.deriv_of(&s, 1, 0)?,
                    hy: sp.deriv_of(&s, 0, 1)?,
                }
            }
        };
        let m = out.h.max_abs();
        if m > 1.0 + 1e-12 {
            return Err(Error::Bathymetry(format!(
                "max|h| = {m} exceeds the normalization max|h| <= 1"
            )));
        }
        Ok(out)
    }

    /// 1D sampling along x for y-invariant profiles.
    pub fn sample_1d(&self, grid: &Grid1D) -> Result<SampledBathymetry1D> {
        if !self.is_y_invariant() {
            return Err(Error::Bathymetry(format!(
                "{} bottom depends on y; no 1D restriction",
                self.kind()
            )));
        }
        let g2 = Grid2D::new(grid.n(), 16, grid.l(), 1.0)?;
        let s = match self {
            Bathymetry::Sampled { h } => {
                // Restrict the stored row to a 2D field of matching x-grid.
                let hg = h.grid();
                if hg.nx() != grid.n() || hg.lx() != grid.l() {
                    return Err(Error::GridMismatch);
                }
                let row = h.row(0).to_vec();
                let s1 = crate::spectral1d::Spectral1D::new(*grid);
                let h1 = Field1D::from_values(*grid, row)?;
                let hx = s1.deriv(&h1, 1)?;
                return Ok(SampledBathymetry1D { h: h1, hx });
            }
            _ => self.sample(&g2)?,
        };
        Ok(SampledBathymetry1D {
            h: Field1D::from_values(*grid, s.h.row(0).to_vec())?,
            hx: Field1D::from_values(*grid, s.hx.row(0).to_vec())?,
        })
    }

    /// Harmonic content `(jx, jy, complex amplitude)` of `h` such that
    /// `h = Σ c e^{i(kx x + ky y)}`; only flat and trigonometric kinds qualify.
    pub fn harmonics(&self) -> Result<Vec<(i64, i64, num_complex::Complex64)>> {
        use num_complex::Complex64 as C;
        match self {
            Bathymetry::Flat { h0 } => Ok(vec![(0, 0, C::new(*h0, 0.0))]),
            Bathymetry::Trig { h0, terms } => {
                let mut out = vec![(0, 0, C::new(*h0, 0.0))];
                for t in terms {
                    // a cos θ + b sin θ = ((a - ib)/2) e^{iθ} + ((a + ib)/2) e^{-iθ}
                    out.push((t.jx, t.jy, C::new(t.a_cos / 2.0, -t.a_sin / 2.0)));
                    out.push((-t.jx, -t.jy, C::new(t.a_cos / 2.0, t.a_sin / 2.0)));
                }
                Ok(out)
            }
            other => Err(Error::NonHarmonicBathymetry(other.kind().into())),
        }
    }
}

/// The bottom must stay below the undisturbed surface: `delta max|h| < 1`.
pub fn check_depth(b: &SampledBathymetry, p: &SmallParams) -> Result<()> {
    let m = p.delta * b.h.max_abs();
    if m >= 1.0 {
        return Err(Error::Bathymetry(format!(
            "delta*max|h| = {m} >= 1: the bottom pierces the surface"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flat_has_zero_slopes() {
        let g = Grid2D::new(16, 16, 1.0, 1.0).unwrap();
        let s = Bathymetry::flat().sample(&g).unwrap();
        assert!(s.h.values().iter().all(|&v| v == 1.0));
        assert!(s.hx.values().iter().all(|&v| v == 0.0));
        assert!(s.hy.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn trig_single_mode_slope() {
        let g = Grid2D::new(32, 16, 5.0, 1.0).unwrap();
        let b = Bathymetry::Trig {
            h0: 0.0,
            terms: vec![TrigTerm {
                jx: 1,
                jy: 0,
                a_cos: 1.0,
                a_sin: 0.0,
            }],
        };
        let s = b.sample(&g).unwrap();
        let k = 2.0 * PI / 5.0;
        let exact = Field2D::from_fn(g, |x, _| -k * (k * x).sin());
        assert!(s.hx.max_abs_diff(&exact) < 1e-14);
        assert!(s.hy.max_abs() == 0.0);
    }

    #[test]
    fn tent_slope_matches_analytic_away_from_kinks() {
        let lx = 10.0;
        let g = Grid2D::new(256, 16, lx, 1.0).unwrap();
        let s = Bathymetry::tent(lx).sample(&g).unwrap();
        for i in 0..g.nx() {
            let x = g.x(i);
            let expect = if x < lx / 2.0 { 2.0 / lx } else { -2.0 / lx };
            if (x - lx / 2.0).abs() > 2.0 * g.dx() && x > 2.0 * g.dx() {
                assert!((s.hx.get(i, 0) - expect).abs() < 1e-2);
            }
        }
        assert!((s.h.max() - 1.0).abs() < 1e-15);
        // Spectral differentiation of the sampled tent rings at the kinks.
        let sp = Spectral::new(g);
        let spectral_hx = sp.deriv(&s.h, 1, 0).unwrap();
        assert!(spectral_hx.max_abs_diff(&s.hx) > 1e-2);
    }

    #[test]
    fn non_periodic_knots_rejected() {
        let g = Grid2D::new(16, 16, 1.0, 1.0).unwrap();
        let b = Bathymetry::PiecewiseLinearX {
            knots: vec![(0.0, 0.0), (1.2, 1.0)],
        };
        assert!(b.sample(&g).is_err());
    }

    #[test]
    fn depth_check() {
        let g = Grid2D::new(16, 16, 1.0, 1.0).unwrap();
        let s = Bathymetry::flat().sample(&g).unwrap();
        assert!(check_depth(&s, &SmallParams::uniform(0.5).unwrap()).is_ok());
    }

    #[test]
    fn harmonics_reconstruct_profile() {
        let b = Bathymetry::Trig {
            h0: 0.2,
            terms: vec![TrigTerm {
                jx: 1,
                jy: 2,
                a_cos: 0.3,
                a_sin: -0.4,
            }],
        };
        let g = Grid2D::new(16, 16, 2.0, 3.0).unwrap();
        let s = b.sample(&g).unwrap();
        let hs = b.harmonics().unwrap();
        let rec = Field2D::from_fn(g, |x, y| {
            hs.iter()
                .map(|&(jx, jy, c)| {
                    let th = 2.0 * PI * (jx as f64 * x / 2.0 + jy as f64 * y / 3.0);
                    (c * num_complex::Complex64::new(th.cos(), th.sin())).re
                })
                .sum()
        });
        assert!(rec.max_abs_diff(&s.h) < 1e-14);
    }
}
