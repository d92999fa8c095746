//! Truncated vertical power series of the velocity potential,
//!
//! `φ = Σ_m (-1)^m z^{2m}/(2m)! L^m f + Σ_m (-1)^m z^{2m+1}/(2m+1)! L^m F`,
//! `L = β∂xx + γ∂yy`, and the regime-specific bottom relation for `F`.

use num_complex::Complex64;

use crate::bathymetry::SampledBathymetry;
use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::params::{Regime, SmallParams};
use crate::spectral::{Spectral, MAX_DERIV_ORDER};

/// Largest series truncation supported.
pub const MAX_SERIES: usize = 3;

/// `F` from `f` at the regime's retained order; products are dealiased.
pub fn bottom_f(
    sp: &Spectral,
    f: &Field2D,
    bath: &SampledBathymetry,
    p: &SmallParams,
    r: Regime,
) -> Result<Field2D> {
    if p.delta == 0.0 {
        return Ok(Field2D::zeros(*f.grid()));
    }
    let s = sp.forward(f)?;
    let fx = sp.deriv_of(&s, 1, 0)?;
    let fy = sp.deriv_of(&s, 0, 1)?;
    let bd = p.beta * p.delta;
    let g = p.ratio();
    // (h u)_x in divergence form, dealiased product then exact derivative.
    let div_x = |u: &Field2D| -> Result<Field2D> { sp.deriv(&sp.product(&bath.h, u)?, 1, 0) };
    let div_y = |u: &Field2D| -> Result<Field2D> { sp.deriv(&sp.product(&bath.h, u)?, 0, 1) };
    let out = match r {
        Regime::Case1 => {
            // βδ[h_x f_x + G h_y f_y + h(f_xx + G f_yy)], expanded as printed.
            let lap = &sp.deriv_of(&s, 2, 0)? + &sp.deriv_of(&s, 0, 2)?.scale(g);
            let mut acc = sp.product(&bath.hx, &fx)?;
            acc.axpy(g, &sp.product(&bath.hy, &fy)?);
            acc += &sp.product(&bath.h, &lap)?;
            acc.scale(bd)
        }
        Regime::Case2 => {
            let mut acc = div_x(&fx)?;
            acc.axpy(g, &div_y(&fy)?);
            acc.scale(bd)
        }
        Regime::Case3 | Regime::Case3ST => div_x(&fx)?.scale(bd),
        Regime::Case4 => {
            let mut acc = div_x(&fx)?.scale(bd);
            acc.axpy(p.gamma * p.delta, &div_y(&fy)?);
            acc
        }
    };
    Ok(out)
}

#[derive(Debug, Clone)]
pub struct PotentialSeries {
    pub f: Field2D,
    pub big_f: Field2D,
    pub m: usize,
    pub params: SmallParams,
}

/// Coefficient of `L^m f` (odd = false) or `L^m F` (odd = true) in `∂z^dz φ`
/// as a function of `z`: derivative of `(-1)^m z^n / n!`, `n = 2m (+1)`.
fn z_coeff(m: usize, odd: bool, dz: usize, z: f64) -> f64 {
    let n = 2 * m + odd as usize;
    if dz > n {
        return 0.0;
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let p = n - dz;
    let fact: f64 = (1..=p).map(|i| i as f64).product();
    sign * z.powi(p as i32) / fact
}

impl PotentialSeries {
    pub fn new(f: Field2D, big_f: Field2D, m: usize, params: SmallParams) -> Result<Self> {
        if f.grid() != big_f.grid() {
            return Err(Error::GridMismatch);
        }
        if m > MAX_SERIES {
            return Err(Error::SeriesTooLong {
                m,
                order: 2 * m + 2,
                max: MAX_DERIV_ORDER,
            });
        }
        Ok(Self {
            f,
            big_f,
            m,
            params,
        })
    }

    /// `∂x^ox ∂y^oy L^k u` for `k = 0..=M`.
    fn l_powers(&self, sp: &Spectral, u: &Field2D, ox: usize, oy: usize) -> Result<Vec<Field2D>> {
        let order = 2 * self.m + ox + oy;
        if order > MAX_DERIV_ORDER {
            return Err(Error::SeriesTooLong {
                m: self.m,
                order,
                max: MAX_DERIV_ORDER,
            });
        }
        let (b, g) = (self.params.beta, self.params.gamma);
        let base = sp.deriv_spectrum(&sp.forward(u)?, ox, oy)?;
        let mut out = Vec::with_capacity(self.m + 1);
        let mut cur = base;
        for k in 0..=self.m {
            out.push(sp.inverse(&cur));
            if k < self.m {
                cur.apply(|kx, ky, _, _| Complex64::new(-(b * kx * kx + g * ky * ky), 0.0));
            }
        }
        Ok(out)
    }

    /// `∂x^ox ∂y^oy ∂z^dz φ` at the pointwise height `z(x, y)`.
    pub fn eval_at(
        &self,
        sp: &Spectral,
        ox: usize,
        oy: usize,
        dz: usize,
        z: &Field2D,
    ) -> Result<Field2D> {
        let ef = self.l_powers(sp, &self.f, ox, oy)?;
        let of = self.l_powers(sp, &self.big_f, ox, oy)?;
        let n = z.values().len();
        let vals = (0..n)
            .map(|i| {
                let zi = z.values()[i];
                (0..=self.m)
                    .map(|m| {
                        z_coeff(m, false, dz, zi) * ef[m].values()[i]
                            + z_coeff(m, true, dz, zi) * of[m].values()[i]
                    })
                    .sum()
            })
            .collect();
        Field2D::from_values(*z.grid(), vals)
    }

    pub fn phi_eval(&self, sp: &Spectral, z: f64) -> Result<Field2D> {
        self.eval_at(sp, 0, 0, 0, &Field2D::constant(*self.f.grid(), z))
    }

    /// `β φ_xx + γ φ_yy + φ_zz` at height `z`.
    pub fn laplace_residual(&self, sp: &Spectral, z: f64) -> Result<Field2D> {
        let zf = Field2D::constant(*self.f.grid(), z);
        let mut r = self.eval_at(sp, 2, 0, 0, &zf)?.scale(self.params.beta);
        r.axpy(self.params.gamma, &self.eval_at(sp, 0, 2, 0, &zf)?);
        r += &self.eval_at(sp, 0, 0, 2, &zf)?;
        Ok(r)
    }

    /// `φ_z - βδ h_x φ_x - γδ h_y φ_y` at `z = δh`.
    pub fn bottom_residual(&self, sp: &Spectral, bath: &SampledBathymetry) -> Result<Field2D> {
        let p = &self.params;
        let zb = bath.h.scale(p.delta);
        let mut r = self.eval_at(sp, 0, 0, 1, &zb)?;
        r -= &bath
            .hx
            .mul(&self.eval_at(sp, 1, 0, 0, &zb)?)
            .scale(p.beta * p.delta);
        r -= &bath
            .hy
            .mul(&self.eval_at(sp, 0, 1, 0, &zb)?)
            .scale(p.gamma * p.delta);
        Ok(r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialResiduals {
    pub laplace: f64,
    pub bottom: f64,
}

/// Max-norm Laplace residual over `z_samples` and bottom residual at `z = δh`.
pub fn potential_residuals(
    sp: &Spectral,
    ps: &PotentialSeries,
    bath: &SampledBathymetry,
    z_samples: &[f64],
) -> Result<PotentialResiduals> {
    let mut laplace: f64 = 0.0;
    for &z in z_samples {
        if !(0.0..=1.0).contains(&z) {
            return Err(Error::InvalidParameter(format!(
                "z sample {z} outside [0, 1]"
            )));
        }
        laplace = laplace.max(ps.laplace_residual(sp, z)?.max_abs());
    }
    let bottom = ps.bottom_residual(sp, bath)?.max_abs();
    Ok(PotentialResiduals { laplace, bottom })
}
