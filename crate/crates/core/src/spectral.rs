//! Fourier differentiation, symbol inversion, dealiasing and filtering on a
//! periodic [`Grid2D`].
//!
//! Real-to-complex transforms run along x (the contiguous direction), complex
//! transforms along y. A [`Spectrum`] stores `(nx/2 + 1) x ny` normalized
//! coefficients with the kx index fastest, so that
//! `u(x, y) = Σ c[jx, my] exp(i (kx x + ky y))` with Hermitian symmetry implied
//! for the negative-kx half.

use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::grid::{mode_index, Field2D, Grid2D};

/// Highest total derivative order `ox + oy` accepted by [`Spectral::deriv`].
pub const MAX_DERIV_ORDER: usize = 8;

/// Spectral coefficients of a real field.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Grid2D,
    data: Vec<Complex64>,
}

impl Spectrum {
    pub fn zeros(grid: Grid2D) -> Self {
        let nxh = grid.nx() / 2 + 1;
        Self {
            grid,
            data: vec![Complex64::new(0.0, 0.0); nxh * grid.ny()],
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Half-spectrum width `nx/2 + 1`.
    pub fn nxh(&self) -> usize {
        self.grid.nx() / 2 + 1
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    /// Coefficient of signed mode `(jx, jy)`, using Hermitian symmetry for `jx < 0`.
    pub fn coeff(&self, jx: i64, jy: i64) -> Complex64 {
        let nx = self.grid.nx() as i64;
        let ny = self.grid.ny() as i64;
        let (jx, jy, conj) = if jx < 0 {
            (-jx, -jy, true)
        } else {
            (jx, jy, false)
        };
        if jx > nx / 2 || jy.abs() > ny / 2 {
            return Complex64::new(0.0, 0.0);
        }
        let row = jy.rem_euclid(ny) as usize;
        let c = self.data[jx as usize + self.nxh() * row];
        if conj {
            c.conj()
        } else {
            c
        }
    }

    pub fn add_scaled(&mut self, s: f64, other: &Spectrum) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b * s;
        }
    }

    /// Multiply every coefficient by `m(kx, ky, jx, jy)`.
    pub fn apply(&mut self, m: impl Fn(f64, f64, i64, i64) -> Complex64) {
        let nxh = self.nxh();
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for my in 0..ny {
            let jy = mode_index(my, ny);
            let ky = self.grid.ky(jy);
            for jx in 0..nxh {
                let kx = self.grid.kx(jx as i64);
                let jxs = mode_index(jx, nx);
                let c = &mut self.data[jx + nxh * my];
                *c *= m(kx, ky, jxs, jy);
            }
        }
    }

    /// Fraction of `Σ|c|²` (with Hermitian weights) held in modes outside the
    /// 2/3 band in either direction.
    pub fn tail_fraction(&self) -> f64 {
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let (cx, cy) = ((nx / 3) as i64, (ny / 3) as i64);
        let nxh = self.nxh();
        let mut total = 0.0;
        let mut tail = 0.0;
        for my in 0..ny {
            let jy = mode_index(my, ny);
            for jx in 0..nxh {
                let w = if jx == 0 || (jx == nx / 2) { 1.0 } else { 2.0 };
                let e = w * self.data[jx + nxh * my].norm_sqr();
                total += e;
                if jx as i64 > cx || jy.abs() > cy {
                    tail += e;
                }
            }
        }
        if total == 0.0 {
            0.0
        } else {
            tail / total
        }
    }
}

/// Separable derivative multiplier `(i kx)^ox (i ky)^oy`, with the Nyquist
/// mode of every odd-order direction zeroed.
fn deriv_factor(k: f64, order: usize, is_nyquist: bool) -> Complex64 {
    if order == 0 {
        return Complex64::new(1.0, 0.0);
    }
    if is_nyquist && order % 2 == 1 {
        return Complex64::new(0.0, 0.0);
    }
    let mag = k.powi(order as i32);
    match order % 4 {
        0 => Complex64::new(mag, 0.0),
        1 => Complex64::new(0.0, mag),
        2 => Complex64::new(-mag, 0.0),
        _ => Complex64::new(0.0, -mag),
    }
}

/// Constant-coefficient operator `Σ c_ab ∂x^a ∂y^b` with even `a`, `b`.
///
/// Its Fourier symbol `P(kx, ky) = Σ c_ab (i kx)^a (i ky)^b` is real, e.g.
/// `c0 - c20 kx² - c02 ky² + c40 kx⁴ + c22 kx² ky² + c04 ky⁴`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSymbol {
    terms: Vec<(u8, u8, f64)>,
}

impl OperatorSymbol {
    pub fn identity() -> Self {
        Self::constant(1.0)
    }

    pub fn constant(c0: f64) -> Self {
        Self {
            terms: vec![(0, 0, c0)],
        }
    }

    /// Add `coef ∂x^ox ∂y^oy`. Orders must be even with `ox + oy <= 6`.
    pub fn with(mut self, ox: u8, oy: u8, coef: f64) -> Result<Self> {
        if !ox.is_multiple_of(2) || !oy.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "operator symbol term d_x^{ox} d_y^{oy} must have even orders"
            )));
        }
        if ox as usize + oy as usize > 6 {
            return Err(Error::OrderTooHigh {
                order: ox as usize + oy as usize,
                max: 6,
            });
        }
        if let Some(t) = self.terms.iter_mut().find(|t| t.0 == ox && t.1 == oy) {
            t.2 += coef;
        } else {
            self.terms.push((ox, oy, coef));
        }
        Ok(self)
    }

    pub fn c0(&self) -> f64 {
        self.terms
            .iter()
            .filter(|t| t.0 == 0 && t.1 == 0)
            .map(|t| t.2)
            .sum()
    }

    pub fn terms(&self) -> &[(u8, u8, f64)] {
        &self.terms
    }

    pub fn value(&self, kx: f64, ky: f64) -> f64 {
        self.terms
            .iter()
            .map(|&(a, b, c)| {
                let sx = if (a / 2) % 2 == 0 { 1.0 } else { -1.0 };
                let sy = if (b / 2) % 2 == 0 { 1.0 } else { -1.0 };
                c * sx * sy * kx.powi(a as i32) * ky.powi(b as i32)
            })
            .sum()
    }

    /// Default singularity tolerance `1e-12 max(1, |c0|)`.
    pub fn default_tol(&self) -> f64 {
        1e-12 * self.c0().abs().max(1.0)
    }
}

/// FFT plans for one grid. Plans are shared and immutable; every call
/// allocates its own scratch.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid2D,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    fwd_y: Arc<dyn Fft<f64>>,
    inv_y: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: Grid2D) -> Self {
        let mut rp = RealFftPlanner::<f64>::new();
        let mut cp = FftPlanner::<f64>::new();
        Self {
            grid,
            r2c: rp.plan_fft_forward(grid.nx()),
            c2r: rp.plan_fft_inverse(grid.nx()),
            fwd_y: cp.plan_fft_forward(grid.ny()),
            inv_y: cp.plan_fft_inverse(grid.ny()),
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    /// Forward transform with `1/(nx ny)` normalization.
    pub fn forward(&self, field: &Field2D) -> Result<Spectrum> {
        if *field.grid() != self.grid {
            return Err(Error::GridMismatch);
        }
        field.ensure_finite("spectral forward transform")?;
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let nxh = nx / 2 + 1;
        let mut out = Spectrum::zeros(self.grid);
        let mut row_in = vec![0.0; nx];
        let mut scratch = self.r2c.make_scratch_vec();
        for j in 0..ny {
            row_in.copy_from_slice(field.row(j));
            let dst = &mut out.data[j * nxh..(j + 1) * nxh];
            self.r2c
                .process_with_scratch(&mut row_in, dst, &mut scratch)
                .expect("r2c sizes are fixed by the plan");
        }
        let mut col = vec![Complex64::new(0.0, 0.0); ny];
        let mut yscratch = vec![Complex64::new(0.0, 0.0); self.fwd_y.get_inplace_scratch_len()];
        let norm = 1.0 / (nx as f64 * ny as f64);
        for jx in 0..nxh {
            for (m, c) in col.iter_mut().enumerate() {
                *c = out.data[jx + nxh * m];
            }
            self.fwd_y.process_with_scratch(&mut col, &mut yscratch);
            for (m, c) in col.iter().enumerate() {
                out.data[jx + nxh * m] = c * norm;
            }
        }
        Ok(out)
    }

    pub fn inverse(&self, spec: &Spectrum) -> Field2D {
        assert_eq!(*spec.grid(), self.grid, "grid mismatch");
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        let nxh = nx / 2 + 1;
        let mut work = spec.data.clone();
        let mut col = vec![Complex64::new(0.0, 0.0); ny];
        let mut yscratch = vec![Complex64::new(0.0, 0.0); self.inv_y.get_inplace_scratch_len()];
        for jx in 0..nxh {
            for (m, c) in col.iter_mut().enumerate() {
                *c = work[jx + nxh * m];
            }
            self.inv_y.process_with_scratch(&mut col, &mut yscratch);
            for (m, c) in col.iter().enumerate() {
                work[jx + nxh * m] = *c;
            }
        }
        let mut values = vec![0.0; nx * ny];
        let mut scratch = self.c2r.make_scratch_vec();
        for j in 0..ny {
            let src = &mut work[j * nxh..(j + 1) * nxh];
            src[0].im = 0.0;
            src[nxh - 1].im = 0.0;
            self.c2r
                .process_with_scratch(src, &mut values[j * nx..(j + 1) * nx], &mut scratch)
                .expect("c2r sizes are fixed by the plan");
        }
        Field2D::from_values(self.grid, values).expect("length matches grid")
    }

    fn check_order(ox: usize, oy: usize) -> Result<()> {
        if ox + oy > MAX_DERIV_ORDER {
            return Err(Error::OrderTooHigh {
                order: ox + oy,
                max: MAX_DERIV_ORDER,
            });
        }
        Ok(())
    }

    /// `∂x^ox ∂y^oy` applied in spectral space.
    pub fn deriv_spectrum(&self, spec: &Spectrum, ox: usize, oy: usize) -> Result<Spectrum> {
        Self::check_order(ox, oy)?;
        let mut out = spec.clone();
        if ox == 0 && oy == 0 {
            return Ok(out);
        }
        let (nx, ny) = (self.grid.nx() as i64, self.grid.ny() as i64);
        out.apply(|kx, ky, jx, jy| {
            deriv_factor(kx, ox, jx == nx / 2) * deriv_factor(ky, oy, jy == ny / 2)
        });
        Ok(out)
    }

    /// Exact Fourier derivative `∂x^ox ∂y^oy field`.
    pub fn deriv(&self, field: &Field2D, ox: usize, oy: usize) -> Result<Field2D> {
        Self::check_order(ox, oy)?;
        let spec = self.forward(field)?;
        Ok(self.inverse(&self.deriv_spectrum(&spec, ox, oy)?))
    }

    /// Derivative of an already transformed field.
    pub fn deriv_of(&self, spec: &Spectrum, ox: usize, oy: usize) -> Result<Field2D> {
        Ok(self.inverse(&self.deriv_spectrum(spec, ox, oy)?))
    }

    /// Apply a constant-coefficient operator.
    pub fn apply_symbol(&self, field: &Field2D, sym: &OperatorSymbol) -> Result<Field2D> {
        let mut spec = self.forward(field)?;
        spec.apply(|kx, ky, _, _| Complex64::new(sym.value(kx, ky), 0.0));
        Ok(self.inverse(&spec))
    }

    /// Solve `P(∂) u = rhs` mode by mode in spectral space.
    pub fn invert_symbol_spectrum(
        &self,
        spec: &Spectrum,
        sym: &OperatorSymbol,
        tol_denom: f64,
    ) -> Result<Spectrum> {
        let mut out = spec.clone();
        let nxh = out.nxh();
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for my in 0..ny {
            let jy = mode_index(my, ny);
            let ky = self.grid.ky(jy);
            for jx in 0..nxh {
                let kx = self.grid.kx(jx as i64);
                let p = sym.value(kx, ky);
                let c = &mut out.data[jx + nxh * my];
                if p.abs() < tol_denom {
                    if c.norm() < tol_denom {
                        *c = Complex64::new(0.0, 0.0);
                    } else {
                        return Err(Error::SingularSymbol {
                            jx: mode_index(jx, nx),
                            jy,
                            value: p.abs(),
                        });
                    }
                } else {
                    *c /= p;
                }
            }
        }
        Ok(out)
    }

    /// Solve `P(∂) u = field`. `tol_denom = None` uses [`OperatorSymbol::default_tol`].
    pub fn invert_symbol(
        &self,
        field: &Field2D,
        sym: &OperatorSymbol,
        tol_denom: Option<f64>,
    ) -> Result<Field2D> {
        let tol = tol_denom.unwrap_or_else(|| sym.default_tol());
        let spec = self.forward(field)?;
        Ok(self.inverse(&self.invert_symbol_spectrum(&spec, sym, tol)?))
    }

    /// Zero every mode with `|index| > floor(n/3)` in either direction.
    pub fn dealias_spectrum(&self, spec: &mut Spectrum) {
        let (cx, cy) = ((self.grid.nx() / 3) as i64, (self.grid.ny() / 3) as i64);
        spec.apply(|_, _, jx, jy| {
            if jx.abs() > cx || jy.abs() > cy {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(1.0, 0.0)
            }
        });
    }

    /// 2/3-rule projection.
    pub fn dealias(&self, field: &Field2D) -> Result<Field2D> {
        let mut spec = self.forward(field)?;
        self.dealias_spectrum(&mut spec);
        Ok(self.inverse(&spec))
    }

    /// Pointwise product followed by the 2/3-rule projection.
    pub fn product(&self, a: &Field2D, b: &Field2D) -> Result<Field2D> {
        self.dealias(&a.mul(b))
    }

    /// Separable exponential filter `σ(jx/(nx/2)) σ(jy/(ny/2))` with
    /// `σ(r) = exp(-strength r^36)`.
    pub fn filter_spectrum(&self, spec: &mut Spectrum, strength: f64) {
        let (hx, hy) = ((self.grid.nx() / 2) as f64, (self.grid.ny() / 2) as f64);
        spec.apply(|_, _, jx, jy| {
            let rx = (jx.abs() as f64 / hx).powi(36);
            let ry = (jy.abs() as f64 / hy).powi(36);
            Complex64::new((-strength * (rx + ry)).exp(), 0.0)
        });
    }

    pub fn filter(&self, field: &Field2D, strength: f64) -> Result<Field2D> {
        let mut spec = self.forward(field)?;
        self.filter_spectrum(&mut spec, strength);
        Ok(self.inverse(&spec))
    }
}

impl Spectral {
    /// `acc += coef ∂x^ox ∂y^oy src` in spectral space.
    pub fn accumulate(
        &self,
        acc: &mut Spectrum,
        src: &Spectrum,
        ox: usize,
        oy: usize,
        coef: f64,
    ) -> Result<()> {
        Self::check_order(ox, oy)?;
        if coef == 0.0 {
            return Ok(());
        }
        let nxh = acc.nxh();
        let (nx, ny) = (self.grid.nx(), self.grid.ny());
        for my in 0..ny {
            let jy = mode_index(my, ny);
            let fy = deriv_factor(self.grid.ky(jy), oy, jy == (ny / 2) as i64) * coef;
            for jx in 0..nxh {
                let fx = deriv_factor(self.grid.kx(jx as i64), ox, jx == nx / 2);
                let i = jx + nxh * my;
                acc.data[i] += src.data[i] * fx * fy;
            }
        }
        Ok(())
    }

    /// Spectrum of the pointwise product `a b`, 2/3-projected when `dealias`.
    pub fn product_spectrum(&self, a: &Field2D, b: &Field2D, dealias: bool) -> Result<Spectrum> {
        let mut s = self.forward(&a.mul(b))?;
        if dealias {
            self.dealias_spectrum(&mut s);
        }
        Ok(s)
    }

    /// Divide by the symbol mode by mode, as in [`Spectral::invert_symbol`].
    pub fn divide_symbol(
        &self,
        spec: &mut Spectrum,
        sym: &OperatorSymbol,
        tol_denom: f64,
    ) -> Result<()> {
        *spec = self.invert_symbol_spectrum(spec, sym, tol_denom)?;
        Ok(())
    }
}

/// Periodic quadrature `Σ v dx dy`.
pub fn integral(field: &Field2D) -> f64 {
    field.integral()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid() -> Grid2D {
        Grid2D::new(32, 24, 3.0, 2.0).unwrap()
    }

    #[test]
    fn first_derivative_of_single_mode() {
        let g = grid();
        let sp = Spectral::new(g);
        let k = 2.0 * PI / g.lx();
        let u = Field2D::from_fn(g, |x, _| (k * x).sin());
        let du = sp.deriv(&u, 1, 0).unwrap();
        let exact = Field2D::from_fn(g, |x, _| k * (k * x).cos());
        assert!(du.max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn mixed_derivative_of_product_mode() {
        // Round-off in empty modes is amplified by kx² ky at the corner of the
        // spectrum, so the absolute 1e-12 bound needs unit-order wavenumbers.
        let g = Grid2D::square(32, 2.0 * PI).unwrap();
        let sp = Spectral::new(g);
        let (kx, ky) = (4.0 * PI / g.lx(), 2.0 * PI / g.ly());
        let u = Field2D::from_fn(g, |x, y| (kx * x).cos() * (ky * y).sin());
        let d = sp.deriv(&u, 2, 1).unwrap();
        // d²/dx² cos = -kx² cos, d/dy sin = ky cos
        let exact = Field2D::from_fn(g, |x, y| -kx * kx * (kx * x).cos() * ky * (ky * y).cos());
        assert!(d.max_abs_diff(&exact) < 1e-12);
    }

    #[test]
    fn constant_has_zero_derivatives() {
        let g = grid();
        let sp = Spectral::new(g);
        let u = Field2D::constant(g, 3.7);
        for (a, b) in [(1, 0), (0, 1), (2, 2), (3, 5)] {
            assert!(sp.deriv(&u, a, b).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn order_cap_and_nonfinite_input() {
        let g = grid();
        let sp = Spectral::new(g);
        let u = Field2D::constant(g, 1.0);
        assert!(matches!(
            sp.deriv(&u, 5, 4),
            Err(Error::OrderTooHigh { .. })
        ));
        let mut bad = u.clone();
        bad.values_mut()[3] = f64::NAN;
        assert!(matches!(sp.deriv(&bad, 1, 0), Err(Error::NonFinite(_))));
    }

    #[test]
    fn odd_derivative_kills_nyquist() {
        let g = grid();
        let sp = Spectral::new(g);
        let u = Field2D::from_fn(g, |x, _| (PI * x / g.dx()).cos());
        assert!(sp.deriv(&u, 1, 0).unwrap().max_abs() < 1e-12);
        let uxx = sp.deriv(&u, 2, 0).unwrap();
        let kn = PI / g.dx();
        assert!(uxx.max_abs_diff(&u.scale(-kn * kn)) < 1e-9);
    }

    #[test]
    fn identity_symbol_is_identity() {
        let g = grid();
        let sp = Spectral::new(g);
        let u = Field2D::from_fn(g, |x, y| {
            (2.0 * PI * x / g.lx()).sin() + (2.0 * PI * y / g.ly()).cos()
        });
        let v = sp
            .invert_symbol(&u, &OperatorSymbol::identity(), None)
            .unwrap();
        assert!(v.max_abs_diff(&u) < 1e-14);
    }

    #[test]
    fn helmholtz_inverse_single_mode() {
        let g = grid();
        let sp = Spectral::new(g);
        let beta = 0.1;
        let k = 2.0 * PI / g.lx();
        let sym = OperatorSymbol::identity().with(2, 0, -beta / 2.0).unwrap();
        let u = Field2D::from_fn(g, |x, _| (k * x).cos());
        let v = sp.invert_symbol(&u, &sym, None).unwrap();
        let exact = u.scale(1.0 / (1.0 + beta / 2.0 * k * k));
        assert!(v.max_abs_diff(&exact) < 1e-14);
    }

    #[test]
    fn singular_symbol_is_reported() {
        let g = grid();
        let sp = Spectral::new(g);
        let k = 2.0 * PI / g.lx();
        // 1 + ∂xx / k² vanishes on the first x mode.
        let sym = OperatorSymbol::identity()
            .with(2, 0, 1.0 / (k * k))
            .unwrap();
        let u = Field2D::from_fn(g, |x, _| (k * x).cos());
        assert!(matches!(
            sp.invert_symbol(&u, &sym, None),
            Err(Error::SingularSymbol { jx: 1, jy: 0, .. })
        ));
        // The same symbol is fine on fields without that mode.
        let w = Field2D::from_fn(g, |x, _| (2.0 * k * x).cos());
        assert!(sp.invert_symbol(&w, &sym, None).is_ok());
    }

    #[test]
    fn dealias_keeps_resolved_modes_and_kills_nyquist() {
        let g = grid();
        let sp = Spectral::new(g);
        let low = Field2D::from_fn(g, |x, y| {
            (2.0 * PI * 10.0 * x / g.lx()).cos() * (2.0 * PI * 8.0 * y / g.ly()).sin()
        });
        assert!(sp.dealias(&low).unwrap().max_abs_diff(&low) < 1e-13);
        let nyq = Field2D::from_fn(g, |x, _| (PI * x / g.dx()).cos());
        assert!(sp.dealias(&nyq).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn dealias_removes_exactly_the_aliased_energy() {
        // Modes 7 and 9 on nx = 24 (cut = 8): their product holds modes 2 and 16;
        // 16 aliases onto -8 (kept, |-8| <= 8)... so use 7 and 10 instead:
        // cos7 cos10 = (cos3 + cos17)/2, and 17 aliases to -7 which is kept.
        // The clean case: the square of mode 10 (beyond the band) = (1 + cos20)/2,
        // 20 aliases to -4. A band-limited pair (7, 8) gives (cos1 + cos15)/2 with
        // 15 > 8 removed: removed energy = (1/2)² / 2 over the unit-mean square.
        let g = Grid2D::new(24, 16, 1.0, 1.0).unwrap();
        let sp = Spectral::new(g);
        let c = |m: f64| Field2D::from_fn(g, move |x, _| (2.0 * PI * m * x).cos());
        let prod = c(7.0).mul(&c(8.0));
        let kept = sp.dealias(&prod).unwrap();
        // mean square of 0.5 cos(15x) is 0.125
        let removed = (prod.l2_norm().powi(2) - kept.l2_norm().powi(2)) / g.area();
        assert!((removed - 0.125).abs() < 1e-14);
        assert!(kept.max_abs_diff(&c(1.0).scale(0.5)) < 1e-14);
    }

    #[test]
    fn integral_examples() {
        let g = Grid2D::square(32, 2.0 * PI).unwrap();
        let u = Field2D::from_fn(g, |x, y| 1.0 + 0.3 * x.cos() * y.cos());
        assert!((integral(&u) - 4.0 * PI * PI).abs() < 1e-12);
        let s = Field2D::from_fn(g, |x, _| x.sin());
        assert!(integral(&s).abs() < 1e-14);
    }

    #[test]
    fn mixed_radix_grid() {
        let g = Grid2D::new(30, 18, 2.0, 1.0).unwrap();
        let sp = Spectral::new(g);
        let k = 2.0 * PI * 3.0 / g.lx();
        let u = Field2D::from_fn(g, |x, y| (k * x).sin() * (2.0 * PI * y).cos());
        let d = sp.deriv(&u, 1, 0).unwrap();
        let exact = Field2D::from_fn(g, |x, y| k * (k * x).cos() * (2.0 * PI * y).cos());
        assert!(d.max_abs_diff(&exact) < 1e-12);
    }
}
