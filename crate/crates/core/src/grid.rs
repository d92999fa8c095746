//! Periodic grids and the real-valued fields that live on them.

use std::f64::consts::PI;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use crate::error::{Error, Result};

/// Signed mode index for storage position `j` of an `n`-point transform.
/// The Nyquist position `n/2` maps to `+n/2`.
#[inline]
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j <= n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

/// Uniform periodic grid on `[0, Lx) x [0, Ly)`, x index fastest.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    nx: usize,
    ny: usize,
    lx: f64,
    ly: f64,
}

impl Grid2D {
    pub fn new(nx: usize, ny: usize, lx: f64, ly: f64) -> Result<Self> {
        for (name, n) in [("nx", nx), ("ny", ny)] {
            if n < 16 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "{name} = {n} must be even and >= 16"
                )));
            }
        }
        for (name, l) in [("Lx", lx), ("Ly", ly)] {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("{name} = {l} must be positive")));
            }
        }
        Ok(Self { nx, ny, lx, ly })
    }

    /// Square `n x n` grid of side `l`.
    pub fn square(n: usize, l: f64) -> Result<Self> {
        Self::new(n, n, l, l)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn ny(&self) -> usize {
        self.ny
    }
    pub fn lx(&self) -> f64 {
        self.lx
    }
    pub fn ly(&self) -> f64 {
        self.ly
    }
    pub fn dx(&self) -> f64 {
        self.lx / self.nx as f64
    }
    pub fn dy(&self) -> f64 {
        self.ly / self.ny as f64
    }
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }
    pub fn y(&self, j: usize) -> f64 {
        j as f64 * self.dy()
    }
    /// Wavenumber `2π m / Lx` of signed x-mode `m`.
    pub fn kx(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.lx
    }
    pub fn ky(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.ly
    }
    pub fn area(&self) -> f64 {
        self.lx * self.ly
    }
}

/// Real scalar field on a [`Grid2D`]; `values[i + nx * j]` holds the sample at `(x_i, y_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Field2D {
    grid: Grid2D,
    values: Vec<f64>,
}

impl Field2D {
    pub fn zeros(grid: Grid2D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    pub fn constant(grid: Grid2D, c: f64) -> Self {
        Self {
            grid,
            values: vec![c; grid.len()],
        }
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for j in 0..grid.ny() {
            let y = grid.y(j);
            for i in 0..grid.nx() {
                values.push(f(grid.x(i), y));
            }
        }
        Self { grid, values }
    }

    pub fn from_values(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i + self.grid.nx() * j]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn ensure_finite(&self, what: &'static str) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn same_grid(&self, other: &Field2D) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field2D {
        Field2D {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Field2D, f: impl Fn(f64, f64) -> f64) -> Field2D {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field2D {
            grid: self.grid,
            values,
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Field2D) -> Field2D {
        self.zip_map(other, |a, b| a * b)
    }

    pub fn scale(&self, s: f64) -> Field2D {
        self.map(|v| v * s)
    }

    /// `self += s * other`
    pub fn axpy(&mut self, s: f64, other: &Field2D) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Field2D) -> f64 {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Periodic quadrature `Σ v dx dy`, exact for band-limited fields.
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx() * self.grid.dy()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx() * self.grid.dy()).sqrt()
    }

    /// Field with x and y exchanged; requires a square grid.
    pub fn transpose(&self) -> Result<Field2D> {
        let g = self.grid;
        if g.nx() != g.ny() || g.lx() != g.ly() {
            return Err(Error::InvalidGrid("transpose needs a square grid".into()));
        }
        let n = g.nx();
        let mut values = vec![0.0; g.len()];
        for j in 0..n {
            for i in 0..n {
                values[j + n * i] = self.values[i + n * j];
            }
        }
        Ok(Field2D { grid: g, values })
    }

    /// Row `j` (fixed y) as a slice.
    pub fn row(&self, j: usize) -> &[f64] {
        let nx = self.grid.nx();
        &self.values[j * nx..(j + 1) * nx]
    }
}

impl Add for &Field2D {
    type Output = Field2D;
    fn add(self, rhs: &Field2D) -> Field2D {
        self.zip_map(rhs, |a, b| a + b)
    }
}

impl Sub for &Field2D {
    type Output = Field2D;
    fn sub(self, rhs: &Field2D) -> Field2D {
        self.zip_map(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &Field2D {
    type Output = Field2D;
    fn mul(self, rhs: f64) -> Field2D {
        self.scale(rhs)
    }
}

impl Neg for &Field2D {
    type Output = Field2D;
    fn neg(self) -> Field2D {
        self.scale(-1.0)
    }
}

impl AddAssign<&Field2D> for Field2D {
    fn add_assign(&mut self, rhs: &Field2D) {
        self.axpy(1.0, rhs);
    }
}

impl SubAssign<&Field2D> for Field2D {
    fn sub_assign(&mut self, rhs: &Field2D) {
        self.axpy(-1.0, rhs);
    }
}

/// Uniform periodic 1D grid on `[0, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    n: usize,
    l: f64,
}

impl Grid1D {
    pub fn new(n: usize, l: f64) -> Result<Self> {
        if n < 16 || !n.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be even and >= 16"
            )));
        }
        if !(l.is_finite() && l > 0.0) {
            return Err(Error::InvalidGrid(format!("L = {l} must be positive")));
        }
        Ok(Self { n, l })
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn l(&self) -> f64 {
        self.l
    }
    pub fn dx(&self) -> f64 {
        self.l / self.n as f64
    }
    pub fn x(&self, i: usize) -> f64 {
        i as f64 * self.dx()
    }
    pub fn k(&self, m: i64) -> f64 {
        2.0 * PI * m as f64 / self.l
    }
}

impl From<&Grid2D> for Grid1D {
    fn from(g: &Grid2D) -> Self {
        Grid1D {
            n: g.nx(),
            l: g.lx(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Field1D {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field1D {
    pub fn zeros(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n()],
        }
    }
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: (0..grid.n()).map(|i| f(grid.x(i))).collect(),
        }
    }
    pub fn from_values(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() {
            return Err(Error::InvalidGrid(format!(
                "expected {} values, got {}",
                grid.n(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }
    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
    pub fn map(&self, f: impl Fn(f64) -> f64) -> Field1D {
        Field1D {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }
    pub fn zip_map(&self, other: &Field1D, f: impl Fn(f64, f64) -> f64) -> Field1D {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Field1D {
            grid: self.grid,
            values,
        }
    }
    pub fn mul(&self, other: &Field1D) -> Field1D {
        self.zip_map(other, |a, b| a * b)
    }
    pub fn scale(&self, s: f64) -> Field1D {
        self.map(|v| v * s)
    }
    pub fn axpy(&mut self, s: f64, other: &Field1D) {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += s * b;
        }
    }
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.grid.dx()
    }
    pub fn l2_norm(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() * self.grid.dx()).sqrt()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_odd_or_small_grids() {
        assert!(Grid2D::new(15, 16, 1.0, 1.0).is_err());
        assert!(Grid2D::new(16, 14, 1.0, 1.0).is_err());
        assert!(Grid2D::new(16, 16, 0.0, 1.0).is_err());
        assert!(Grid2D::new(18, 16, 1.0, 2.0).is_ok());
    }

    #[test]
    fn mode_indices_wrap() {
        let idx: Vec<i64> = (0..8).map(|j| mode_index(j, 8)).collect();
        assert_eq!(idx, vec![0, 1, 2, 3, 4, -3, -2, -1]);
    }

    #[test]
    fn points_exclude_endpoint() {
        let g = Grid2D::new(16, 16, 2.0, 4.0).unwrap();
        assert_eq!(g.x(0), 0.0);
        assert!((g.x(15) - 2.0 * 15.0 / 16.0).abs() < 1e-15);
        assert!((g.y(8) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn integral_of_constant() {
        let g = Grid2D::new(16, 32, 3.0, 5.0).unwrap();
        let f = Field2D::constant(g, 2.5);
        assert!((f.integral() - 2.5 * 15.0).abs() < 1e-12);
    }
}
