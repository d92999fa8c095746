//! Providers of mixed space-time derivatives `∂x^a ∂y^b ∂t^c f` on a grid.

use std::cell::RefCell;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::spectral::{Spectral, Spectrum};

/// Largest total order a jet serves.
pub const MAX_JET_ORDER: u8 = 8;
/// Largest time order a jet serves.
pub const MAX_JET_TIME_ORDER: u8 = 3;

pub trait JetProvider {
    fn grid(&self) -> &Grid2D;
    /// Samples of `∂x^a ∂y^b ∂t^c f`.
    fn deriv(&self, a: u8, b: u8, c: u8) -> Result<Field2D>;
}

fn check_request(a: u8, b: u8, c: u8, max_t: u8) -> Result<()> {
    if a as u32 + b as u32 + c as u32 > MAX_JET_ORDER as u32 || c > max_t {
        return Err(Error::MissingDerivative { x: a, y: b, t: c });
    }
    Ok(())
}

/// One component `amp · cos(kx x + ky y − ω t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Wave {
    pub amp: f64,
    pub kx: f64,
    pub ky: f64,
    pub omega: f64,
    pub phase: f64,
}

impl Wave {
    /// `∂x^a ∂y^b ∂t^c` at a point.
    pub fn deriv_at(&self, a: u8, b: u8, c: u8, x: f64, y: f64, t: f64) -> f64 {
        let n = (a + b + c) as i32;
        let theta = self.kx * x + self.ky * y - self.omega * t + self.phase;
        let scale = self.amp
            * self.kx.powi(a as i32)
            * self.ky.powi(b as i32)
            * (-self.omega).powi(c as i32);
        let v = match n.rem_euclid(4) {
            0 => theta.cos(),
            1 => -theta.sin(),
            2 => -theta.cos(),
            _ => theta.sin(),
        };
        scale * v
    }
}

/// Constant plus a finite sum of plane waves, sampled at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneWaveJet {
    pub grid: Grid2D,
    pub offset: f64,
    pub waves: Vec<Wave>,
    pub t: f64,
}

impl PlaneWaveJet {
    pub fn new(grid: Grid2D, waves: Vec<Wave>, t: f64) -> Self {
        Self {
            grid,
            offset: 0.0,
            waves,
            t,
        }
    }

    pub fn at_time(&self, t: f64) -> Self {
        Self { t, ..self.clone() }
    }

    pub fn value_at(&self, a: u8, b: u8, c: u8, x: f64, y: f64) -> f64 {
        let base = if a + b + c == 0 { self.offset } else { 0.0 };
        base + self
            .waves
            .iter()
            .map(|w| w.deriv_at(a, b, c, x, y, self.t))
            .sum::<f64>()
    }
}

impl JetProvider for PlaneWaveJet {
    fn grid(&self) -> &Grid2D {
        &self.grid
    }

    fn deriv(&self, a: u8, b: u8, c: u8) -> Result<Field2D> {
        check_request(a, b, c, MAX_JET_TIME_ORDER)?;
        Ok(Field2D::from_fn(self.grid, |x, y| {
            self.value_at(a, b, c, x, y)
        }))
    }
}

/// Jet backed by a closure `(a, b, c, x, y) -> ∂x^a ∂y^b ∂t^c f(x, y)`.
pub struct AnalyticJet<F: Fn(u8, u8, u8, f64, f64) -> f64> {
    grid: Grid2D,
    func: F,
}

impl<F: Fn(u8, u8, u8, f64, f64) -> f64> AnalyticJet<F> {
    pub fn new(grid: Grid2D, func: F) -> Self {
        Self { grid, func }
    }
}

impl<F: Fn(u8, u8, u8, f64, f64) -> f64> JetProvider for AnalyticJet<F> {
    fn grid(&self) -> &Grid2D {
        &self.grid
    }

    fn deriv(&self, a: u8, b: u8, c: u8) -> Result<Field2D> {
        check_request(a, b, c, MAX_JET_TIME_ORDER)?;
        Ok(Field2D::from_fn(self.grid, |x, y| {
            (self.func)(a, b, c, x, y)
        }))
    }
}

/// Jet of a numerically evolved state: spatial derivatives are spectral, time
/// levels come from stored `f`, `f_t` and an equation-supplied `f_tt`.
pub struct NumericJet {
    sp: Spectral,
    levels: Vec<Spectrum>,
    cache: RefCell<HashMap<(u8, u8, u8), Field2D>>,
}

impl NumericJet {
    /// `levels[c]` holds `∂t^c f`.
    pub fn new(sp: Spectral, levels: &[&Field2D]) -> Result<Self> {
        let specs = levels
            .iter()
            .map(|f| sp.forward(f))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sp,
            levels: specs,
            cache: RefCell::new(HashMap::new()),
        })
    }

    pub fn time_levels(&self) -> usize {
        self.levels.len()
    }
}

impl JetProvider for NumericJet {
    fn grid(&self) -> &Grid2D {
        self.sp.grid()
    }

    fn deriv(&self, a: u8, b: u8, c: u8) -> Result<Field2D> {
        check_request(a, b, c, MAX_JET_TIME_ORDER)?;
        let spec = self
            .levels
            .get(c as usize)
            .ok_or(Error::MissingDerivative { x: a, y: b, t: c })?;
        if let Some(v) = self.cache.borrow().get(&(a, b, c)) {
            return Ok(v.clone());
        }
        let v = self.sp.deriv_of(spec, a as usize, b as usize)?;
        self.cache.borrow_mut().insert((a, b, c), v.clone());
        Ok(v)
    }
}
