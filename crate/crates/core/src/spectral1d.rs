//! One-dimensional counterpart of [`crate::spectral`], built on the same
//! real-to-complex plans so that y-invariant 2D runs and 1D runs agree to
//! round-off.

use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};

use crate::error::{Error, Result};
use crate::grid::{Field1D, Grid1D};
use crate::spectral::{OperatorSymbol, MAX_DERIV_ORDER};

#[derive(Clone)]
pub struct Spectral1D {
    grid: Grid1D,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
}

impl std::fmt::Debug for Spectral1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral1D")
            .field("grid", &self.grid)
            .finish()
    }
}

/// Normalized half spectrum, `n/2 + 1` coefficients.
pub type Spectrum1D = Vec<Complex64>;

impl Spectral1D {
    pub fn new(grid: Grid1D) -> Self {
        let mut p = RealFftPlanner::<f64>::new();
        Self {
            grid,
            r2c: p.plan_fft_forward(grid.n()),
            c2r: p.plan_fft_inverse(grid.n()),
        }
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn forward(&self, u: &Field1D) -> Result<Spectrum1D> {
        if *u.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        if !u.is_finite() {
            return Err(Error::NonFinite("spectral forward transform"));
        }
        let n = self.grid.n();
        let mut input = u.values().to_vec();
        let mut out = self.r2c.make_output_vec();
        let mut scratch = self.r2c.make_scratch_vec();
        self.r2c
            .process_with_scratch(&mut input, &mut out, &mut scratch)
            .expect("sized by plan");
        let norm = 1.0 / n as f64;
        for c in &mut out {
            *c *= norm;
        }
        Ok(out)
    }

    pub fn inverse(&self, spec: &[Complex64]) -> Field1D {
        let mut work = spec.to_vec();
        let last = work.len() - 1;
        work[0].im = 0.0;
        work[last].im = 0.0;
        let mut out = vec![0.0; self.grid.n()];
        let mut scratch = self.c2r.make_scratch_vec();
        self.c2r
            .process_with_scratch(&mut work, &mut out, &mut scratch)
            .expect("sized by plan");
        Field1D::from_values(self.grid, out).expect("sized")
    }

    pub fn deriv_spectrum(&self, spec: &[Complex64], order: usize) -> Result<Spectrum1D> {
        if order > MAX_DERIV_ORDER {
            return Err(Error::OrderTooHigh {
                order,
                max: MAX_DERIV_ORDER,
            });
        }
        let nyq = self.grid.n() / 2;
        Ok(spec
            .iter()
            .enumerate()
            .map(|(j, &c)| {
                if order == 0 {
                    return c;
                }
                if j == nyq && order % 2 == 1 {
                    return Complex64::new(0.0, 0.0);
                }
                let k = self.grid.k(j as i64);
                let mag = k.powi(order as i32);
                let f = match order % 4 {
                    0 => Complex64::new(mag, 0.0),
                    1 => Complex64::new(0.0, mag),
                    2 => Complex64::new(-mag, 0.0),
                    _ => Complex64::new(0.0, -mag),
                };
                c * f
            })
            .collect())
    }

    pub fn deriv(&self, u: &Field1D, order: usize) -> Result<Field1D> {
        let s = self.forward(u)?;
        Ok(self.inverse(&self.deriv_spectrum(&s, order)?))
    }

    /// Solve `P(∂x) v = u`; only the `∂x`-terms of `sym` contribute.
    pub fn invert_symbol(
        &self,
        u: &Field1D,
        sym: &OperatorSymbol,
        tol_denom: Option<f64>,
    ) -> Result<Field1D> {
        let tol = tol_denom.unwrap_or_else(|| sym.default_tol());
        let mut s = self.forward(u)?;
        for (j, c) in s.iter_mut().enumerate() {
            let p = sym.value(self.grid.k(j as i64), 0.0);
            if p.abs() < tol {
                if c.norm() < tol {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    return Err(Error::SingularSymbol {
                        jx: j as i64,
                        jy: 0,
                        value: p.abs(),
                    });
                }
            } else {
                *c /= p;
            }
        }
        Ok(self.inverse(&s))
    }

    pub fn dealias_spectrum(&self, s: &mut [Complex64]) {
        let cut = self.grid.n() / 3;
        for c in s.iter_mut().skip(cut + 1) {
            *c = Complex64::new(0.0, 0.0);
        }
    }

    pub fn dealias(&self, u: &Field1D) -> Result<Field1D> {
        let mut s = self.forward(u)?;
        self.dealias_spectrum(&mut s);
        Ok(self.inverse(&s))
    }

    pub fn product(&self, a: &Field1D, b: &Field1D) -> Result<Field1D> {
        self.dealias(&a.mul(b))
    }

    /// Same filter as the 2D kernel restricted to the x factor. A y-invariant
    /// 2D field only carries `jy = 0`, where the y factor is exactly one.
    pub fn filter_spectrum(&self, s: &mut [Complex64], strength: f64) {
        let h = (self.grid.n() / 2) as f64;
        for (j, c) in s.iter_mut().enumerate() {
            let rx = (j as f64 / h).powi(36);
            *c *= Complex64::new((-strength * rx).exp(), 0.0);
        }
    }

    pub fn filter(&self, u: &Field1D, strength: f64) -> Result<Field1D> {
        let mut s = self.forward(u)?;
        self.filter_spectrum(&mut s, strength);
        Ok(self.inverse(&s))
    }

    /// Fraction of energy outside the 2/3 band.
    pub fn tail_fraction(&self, s: &[Complex64]) -> f64 {
        let n = self.grid.n();
        let cut = n / 3;
        let (mut tot, mut tail) = (0.0, 0.0);
        for (j, c) in s.iter().enumerate() {
            let w = if j == 0 || j == n / 2 { 1.0 } else { 2.0 };
            let e = w * c.norm_sqr();
            tot += e;
            if j > cut {
                tail += e;
            }
        }
        if tot == 0.0 {
            0.0
        } else {
            tail / tot
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn derivatives_of_single_mode() {
        let g = Grid1D::new(32, 3.0).unwrap();
        let sp = Spectral1D::new(g);
        let k = 2.0 * PI * 2.0 / 3.0;
        let u = Field1D::from_fn(g, |x| (k * x).sin());
        let d3 = sp.deriv(&u, 3).unwrap();
        let exact = Field1D::from_fn(g, |x| -k.powi(3) * (k * x).cos());
        assert!(d3.zip_map(&exact, |a, b| a - b).max_abs() < 1e-10);
    }

    #[test]
    fn helmholtz_round_trip() {
        let g = Grid1D::new(48, 10.0).unwrap();
        let sp = Spectral1D::new(g);
        let sym = OperatorSymbol::identity()
            .with(2, 0, -0.05)
            .unwrap()
            .with(4, 0, 0.001)
            .unwrap();
        let u = Field1D::from_fn(g, |x| {
            (2.0 * PI * x / 10.0).cos() + 0.3 * (6.0 * PI * x / 10.0).sin()
        });
        let v = sp.invert_symbol(&u, &sym, None).unwrap();
        let back = sp
            .deriv(&v, 2)
            .unwrap()
            .scale(-0.05)
            .zip_map(&sp.deriv(&v, 4).unwrap().scale(0.001), |a, b| a + b)
            .zip_map(&v, |a, b| a + b);
        assert!(back.zip_map(&u, |a, b| a - b).max_abs() < 1e-12);
    }

    #[test]
    fn dealias_kills_high_modes() {
        let g = Grid1D::new(24, 1.0).unwrap();
        let sp = Spectral1D::new(g);
        let u = Field1D::from_fn(g, |x| (2.0 * PI * 9.0 * x).cos());
        assert!(sp.dealias(&u).unwrap().max_abs() < 1e-14);
        let v = Field1D::from_fn(g, |x| (2.0 * PI * 8.0 * x).cos());
        assert!(sp.dealias(&v).unwrap().zip_map(&v, |a, b| a - b).max_abs() < 1e-14);
    }
}
