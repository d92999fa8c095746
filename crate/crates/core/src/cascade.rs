//! First-order perturbation cascade about exact solutions of the linear wave
//! equation `f_xx + (γ/β) f_yy − f_tt = 0`, carried out in harmonic space.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::bathymetry::{Bathymetry, SampledBathymetry};
use crate::error::{Error, HarmonicLabel, Result};
use crate::grid::{Field2D, Grid2D};
use crate::jet::{JetProvider, MAX_JET_ORDER};
use crate::oracle::plan::{emit_evaluator, golden_plan, Form};
use crate::oracle::printed;
use crate::oracle::termsum::{Base, Monomial};
use crate::params::{Regime, SmallParams};

/// Default resonance tolerance: `|D| < tol_res · max(1, Ω²)` is resonant.
pub const DEFAULT_TOL_RES: f64 = 1e-8;
/// Harmonics with `|D| < NEAR_RESONANCE · max(1, Ω²)` are reported as amplified.
pub const NEAR_RESONANCE: f64 = 1e-3;
/// Source harmonics below this fraction of the largest amplitude are treated as empty.
pub const NEGLIGIBLE_AMPLITUDE: f64 = 1e-12;

/// One zeroth-order component `amp · cos(kx x + ky y − branch·ω t + phase)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlaneComponent {
    pub jx: i64,
    pub jy: i64,
    pub amp: f64,
    pub phase: f64,
    /// `+1` or `-1`.
    pub branch: i8,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct PlaneWaveSpec {
    pub components: Vec<PlaneComponent>,
}

/// Harmonic `e^{i(Kx x + Ky y − Ω t)}` with `Ω = Σ n_i ω_i` over the base frequencies.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HarmonicKey {
    pub jx: i64,
    pub jy: i64,
    pub freq: Vec<i32>,
}

impl HarmonicKey {
    fn add(&self, o: &HarmonicKey) -> HarmonicKey {
        HarmonicKey {
            jx: self.jx + o.jx,
            jy: self.jy + o.jy,
            freq: self.freq.iter().zip(&o.freq).map(|(a, b)| a + b).collect(),
        }
    }
}

/// Finite sum of harmonics with amplitudes polynomial in t
/// (`amps[k]` multiplies `t^k`).
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicField {
    grid: Grid2D,
    base: Vec<f64>,
    terms: BTreeMap<HarmonicKey, Vec<Complex64>>,
}

fn poly_add(a: &mut Vec<Complex64>, b: &[Complex64], s: Complex64) {
    if a.len() < b.len() {
        a.resize(b.len(), Complex64::new(0.0, 0.0));
    }
    a.iter_mut().zip(b).for_each(|(x, y)| *x += s * y);
}

fn poly_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_norm(p: &[Complex64]) -> f64 {
    p.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

impl HarmonicField {
    pub fn zero(grid: Grid2D, base: Vec<f64>) -> Self {
        Self {
            grid,
            base,
            terms: BTreeMap::new(),
        }
    }

    /// Static field from bottom harmonics (requires a harmonic bathymetry kind).
    pub fn from_bathymetry(grid: Grid2D, base: Vec<f64>, b: &Bathymetry) -> Result<Self> {
        let mut f = Self::zero(grid, base);
        let n = f.base.len();
        for (jx, jy, c) in b.harmonics()? {
            f.push(
                HarmonicKey {
                    jx,
                    jy,
                    freq: vec![0; n],
                },
                &[c],
            );
        }
        Ok(f)
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn base_frequencies(&self) -> &[f64] {
        &self.base
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&HarmonicKey, &[Complex64])> {
        self.terms.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn push(&mut self, key: HarmonicKey, amp: &[Complex64]) {
        poly_add(
            self.terms.entry(key).or_default(),
            amp,
            Complex64::new(1.0, 0.0),
        );
    }

    pub fn kx(&self, k: &HarmonicKey) -> f64 {
        self.grid.kx(k.jx)
    }

    pub fn ky(&self, k: &HarmonicKey) -> f64 {
        self.grid.ky(k.jy)
    }

    pub fn omega(&self, k: &HarmonicKey) -> f64 {
        k.freq
            .iter()
            .zip(&self.base)
            .map(|(&n, w)| n as f64 * w)
            .sum()
    }

    pub fn label(&self, k: &HarmonicKey) -> HarmonicLabel {
        HarmonicLabel {
            kx: self.kx(k),
            ky: self.ky(k),
            omega: self.omega(k),
        }
    }

    /// Largest amplitude coefficient.
    pub fn max_amplitude(&self) -> f64 {
        self.terms
            .values()
            .map(|p| poly_norm(p))
            .fold(0.0, f64::max)
    }

    fn compatible(&self, o: &HarmonicField) -> Result<()> {
        if self.grid != o.grid || self.base != o.base {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    pub fn add_scaled(&self, s: f64, o: &HarmonicField) -> Result<HarmonicField> {
        self.compatible(o)?;
        let mut out = self.clone();
        for (k, p) in &o.terms {
            poly_add(
                out.terms.entry(k.clone()).or_default(),
                p,
                Complex64::new(s, 0.0),
            );
        }
        Ok(out)
    }

    pub fn scale(&self, s: f64) -> HarmonicField {
        let mut out = self.clone();
        out.terms.values_mut().flatten().for_each(|c| *c *= s);
        out
    }

    pub fn mul(&self, o: &HarmonicField) -> Result<HarmonicField> {
        self.compatible(o)?;
        let mut out = Self::zero(self.grid, self.base.clone());
        for (ka, pa) in &self.terms {
            for (kb, pb) in &o.terms {
                out.push(ka.add(kb), &poly_mul(pa, pb));
            }
        }
        Ok(out)
    }

    /// `∂x^a ∂y^b ∂t^c`.
    pub fn deriv(&self, a: u8, b: u8, c: u8) -> HarmonicField {
        let mut out = Self::zero(self.grid, self.base.clone());
        for (k, p) in &self.terms {
            let sx = Complex64::new(0.0, self.kx(k)).powu(a as u32)
                * Complex64::new(0.0, self.ky(k)).powu(b as u32);
            let mi = Complex64::new(0.0, -self.omega(k));
            let mut q = p.clone();
            for _ in 0..c {
                // ∂t (q e^{-iΩt}) = (q' − iΩ q) e^{-iΩt}
                let mut next: Vec<Complex64> = q.iter().map(|v| mi * v).collect();
                for (j, v) in q.iter().enumerate().skip(1) {
                    next[j - 1] += *v * j as f64;
                }
                q = next;
            }
            q.iter_mut().for_each(|v| *v *= sx);
            out.push(k.clone(), &q);
        }
        out
    }

    /// Samples at time t: `(real part, max |imaginary part|)`.
    pub fn evaluate_complex(&self, t: f64) -> (Field2D, f64) {
        let g = self.grid;
        let (nx, ny) = (g.nx(), g.ny());
        let mut re = vec![0.0; g.len()];
        let mut im = vec![0.0; g.len()];
        for (k, p) in &self.terms {
            let mut amp = Complex64::new(0.0, 0.0);
            let mut tk = 1.0;
            for c in p {
                amp += c * tk;
                tk *= t;
            }
            amp *= Complex64::from_polar(1.0, -self.omega(k) * t);
            if amp == Complex64::new(0.0, 0.0) {
                continue;
            }
            let ex: Vec<Complex64> = (0..nx)
                .map(|i| Complex64::from_polar(1.0, self.kx(k) * g.x(i)))
                .collect();
            for j in 0..ny {
                let ey = amp * Complex64::from_polar(1.0, self.ky(k) * g.y(j));
                for (i, e) in ex.iter().enumerate() {
                    let v = ey * e;
                    re[i + nx * j] += v.re;
                    im[i + nx * j] += v.im;
                }
            }
        }
        let imag = im.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        (Field2D::from_values(g, re).expect("grid length"), imag)
    }

    pub fn evaluate(&self, t: f64) -> Field2D {
        self.evaluate_complex(t).0
    }

    pub fn jet(&self, t: f64) -> HarmonicJet<'_> {
        HarmonicJet { field: self, t }
    }

    /// `u_xx + (γ/β) u_yy − u_tt`.
    pub fn wave_operator(&self, ratio: f64) -> Result<HarmonicField> {
        self.deriv(2, 0, 0)
            .add_scaled(ratio, &self.deriv(0, 2, 0))?
            .add_scaled(-1.0, &self.deriv(0, 0, 2))
    }
}

/// Exact jet of a harmonic field at a fixed time.
pub struct HarmonicJet<'a> {
    field: &'a HarmonicField,
    t: f64,
}

impl JetProvider for HarmonicJet<'_> {
    fn grid(&self) -> &Grid2D {
        &self.field.grid
    }

    fn deriv(&self, a: u8, b: u8, c: u8) -> Result<Field2D> {
        if a as u32 + b as u32 + c as u32 > MAX_JET_ORDER as u32 {
            return Err(Error::MissingDerivative { x: a, y: b, t: c });
        }
        Ok(self.field.deriv(a, b, c).evaluate(self.t))
    }
}

/// `ω = sqrt(kx² + (γ/β) ky²)` of one component.
pub fn dispersion(grid: &Grid2D, jx: i64, jy: i64, ratio: f64) -> f64 {
    let (kx, ky) = (grid.kx(jx), grid.ky(jy));
    (kx * kx + ratio * ky * ky).sqrt()
}

/// The zeroth-order solution as a harmonic field. Components sharing a
/// frequency share a base index.
pub fn zeroth_solution(
    spec: &PlaneWaveSpec,
    grid: Grid2D,
    p: &SmallParams,
) -> Result<HarmonicField> {
    let ratio = p.ratio();
    let (cx, cy) = ((grid.nx() / 3) as i64, (grid.ny() / 3) as i64);
    let mut base: Vec<f64> = Vec::new();
    let mut index = Vec::new();
    for c in &spec.components {
        if c.jx.abs() > cx || c.jy.abs() > cy {
            return Err(Error::OffGridMode {
                jx: c.jx,
                jy: c.jy,
                reason: "outside the dealias band",
            });
        }
        if c.branch != 1 && c.branch != -1 {
            return Err(Error::InvalidParameter(format!(
                "branch sign {} (expected +1 or -1)",
                c.branch
            )));
        }
        if !(c.amp.is_finite() && c.phase.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite amplitude or phase".into(),
            ));
        }
        let w = dispersion(&grid, c.jx, c.jy, ratio);
        let i = match base.iter().position(|&b| b == w) {
            Some(i) => i,
            None => {
                base.push(w);
                base.len() - 1
            }
        };
        index.push(i);
    }
    let n = base.len();
    let mut f = HarmonicField::zero(grid, base);
    for (c, &i) in spec.components.iter().zip(&index) {
        let mut freq = vec![0; n];
        freq[i] = c.branch as i32;
        let half = Complex64::from_polar(c.amp / 2.0, c.phase);
        f.push(
            HarmonicKey {
                jx: c.jx,
                jy: c.jy,
                freq: freq.clone(),
            },
            &[half],
        );
        f.push(
            HarmonicKey {
                jx: -c.jx,
                jy: -c.jy,
                freq: freq.iter().map(|v| -v).collect(),
            },
            &[half.conj()],
        );
    }
    Ok(f)
}

/// Which right-hand side to use for the γ-correction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourceForm {
    /// As typeset: `(γ/β) f_4y − ½ f_yytt + 2 f_xxyy`.
    Printed,
    /// Split of the first-order single equation: `(γ/6β) f_4y − ½ f_yytt + ⅓ f_xxyy`.
    #[default]
    Consistent,
}

impl std::str::FromStr for SourceForm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(SourceForm::Printed),
            "consistent" => Ok(SourceForm::Consistent),
            _ => Err(Error::InvalidParameter(format!(
                "source form `{s}` (expected printed or consistent)"
            ))),
        }
    }
}

/// Right-hand sides of the four correction equations `W u = S`.
#[derive(Debug, Clone, PartialEq)]
pub struct Sources {
    pub a: HarmonicField,
    pub b: HarmonicField,
    pub g: HarmonicField,
    pub d: HarmonicField,
}

pub fn correction_sources(
    f0: &HarmonicField,
    bath: &Bathymetry,
    p: &SmallParams,
    form: SourceForm,
) -> Result<Sources> {
    let gr = p.ratio();
    let d = |a, b, c| f0.deriv(a, b, c);
    let (fx, fy, ft) = (d(1, 0, 0), d(0, 1, 0), d(0, 0, 1));
    let lap_x = fx
        .mul(&d(1, 0, 1))?
        .scale(2.0)
        .add_scaled(1.0, &ft.mul(&d(2, 0, 0))?)?;
    let lap_y = fy
        .mul(&d(0, 1, 1))?
        .scale(2.0)
        .add_scaled(1.0, &ft.mul(&d(0, 2, 0))?)?;
    let a = lap_x.add_scaled(gr, &lap_y)?;
    let b = d(2, 0, 2).scale(-0.5).add_scaled(1.0 / 6.0, &d(4, 0, 0))?;
    let (c4y, cxy) = match form {
        SourceForm::Printed => (gr, 2.0),
        SourceForm::Consistent => (gr / 6.0, 1.0 / 3.0),
    };
    let g = d(0, 4, 0)
        .scale(c4y)
        .add_scaled(-0.5, &d(0, 2, 2))?
        .add_scaled(cxy, &d(2, 2, 0))?;
    let d_src = if p.delta == 0.0 {
        HarmonicField::zero(f0.grid, f0.base.clone())
    } else {
        let h = HarmonicField::from_bathymetry(f0.grid, f0.base.clone(), bath)?;
        h.mul(&fx)?
            .deriv(1, 0, 0)
            .add_scaled(gr, &h.mul(&fy)?.deriv(0, 1, 0))?
    };
    Ok(Sources { a, b, g, d: d_src })
}

/// Treatment of source harmonics on the dispersion surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ResonancePolicy {
    /// Fail with [`Error::ResonantForcing`].
    #[default]
    Reject,
    /// Accept the secular particular solution (amplitude growing in t).
    Secular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub tol_res: f64,
    pub policy: ResonancePolicy,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            tol_res: DEFAULT_TOL_RES,
            policy: ResonancePolicy::Reject,
        }
    }
}

/// A harmonic close to the dispersion surface and its amplification `max(1, Ω²)/|D|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NearResonance {
    pub harmonic: HarmonicLabel,
    pub amplification: f64,
}

fn denominator(f: &HarmonicField, k: &HarmonicKey, ratio: f64) -> (f64, f64) {
    let (kx, ky, w) = (f.kx(k), f.ky(k), f.omega(k));
    (w * w - kx * kx - ratio * ky * ky, (w * w).max(1.0))
}

fn significant(source: &HarmonicField) -> impl Iterator<Item = (&HarmonicKey, &Vec<Complex64>)> {
    let floor = NEGLIGIBLE_AMPLITUDE * source.max_amplitude();
    source
        .terms
        .iter()
        .filter(move |(_, p)| poly_norm(p) > floor)
}

/// Particular solution of `u_xx + (γ/β) u_yy − u_tt = S` with no homogeneous part.
pub fn solve_correction(
    source: &HarmonicField,
    p: &SmallParams,
    opts: SolveOptions,
) -> Result<HarmonicField> {
    let ratio = p.ratio();
    let mut out = HarmonicField::zero(source.grid, source.base.clone());
    for (k, s) in significant(source) {
        let (dd, scale) = denominator(source, k, ratio);
        let w = source.omega(k);
        let n = s.len();
        let zero = Complex64::new(0.0, 0.0);
        let two_iw = Complex64::new(0.0, 2.0 * w);
        // L q = D q + 2iΩ q' − q''
        let q = if dd.abs() >= opts.tol_res * scale {
            let mut q = vec![zero; n + 2];
            for j in (0..n).rev() {
                q[j] = (s[j] - two_iw * (j as f64 + 1.0) * q[j + 1]
                    + (j as f64 + 2.0) * (j as f64 + 1.0) * q[j + 2])
                    / dd;
            }
            q.truncate(n);
            q
        } else if opts.policy == ResonancePolicy::Reject {
            return Err(Error::ResonantForcing {
                harmonic: source.label(k),
                denominator: dd.abs(),
            });
        } else if k.freq.iter().all(|&v| v == 0) {
            let mut q = vec![zero; n + 2];
            for j in (0..n).rev() {
                q[j + 2] = -s[j] / ((j as f64 + 2.0) * (j as f64 + 1.0));
            }
            q
        } else {
            let mut q = vec![zero; n + 2];
            for j in (0..n).rev() {
                q[j + 1] = (s[j] + (j as f64 + 2.0) * (j as f64 + 1.0) * q[j + 2])
                    / (two_iw * (j as f64 + 1.0));
            }
            q.truncate(n + 1);
            q
        };
        out.push(k.clone(), &q);
    }
    Ok(out)
}

/// Source harmonics with amplification above `1/NEAR_RESONANCE` that are not resonant.
pub fn near_resonances(
    source: &HarmonicField,
    p: &SmallParams,
    tol_res: f64,
) -> Vec<NearResonance> {
    let ratio = p.ratio();
    significant(source)
        .filter_map(|(k, _)| {
            let (dd, scale) = denominator(source, k, ratio);
            let rel = dd.abs() / scale;
            (rel >= tol_res && rel < NEAR_RESONANCE).then(|| NearResonance {
                harmonic: source.label(k),
                amplification: 1.0 / rel,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corrections {
    pub a: HarmonicField,
    pub b: HarmonicField,
    pub g: HarmonicField,
    pub d: HarmonicField,
}

pub fn solve_all(s: &Sources, p: &SmallParams, opts: SolveOptions) -> Result<Corrections> {
    Ok(Corrections {
        a: solve_correction(&s.a, p, opts)?,
        b: solve_correction(&s.b, p, opts)?,
        g: solve_correction(&s.g, p, opts)?,
        d: solve_correction(&s.d, p, opts)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Composite {
    /// `f⁰ + α a + β b + γ g + δ d`.
    pub f: HarmonicField,
    pub eta: Field2D,
    pub t: f64,
}

/// Compose the corrected f and recover η at time t.
pub fn compose_and_surface(
    f0: &HarmonicField,
    c: &Corrections,
    p: &SmallParams,
    t: f64,
) -> Result<Composite> {
    let f = f0
        .add_scaled(p.alpha, &c.a)?
        .add_scaled(p.beta, &c.b)?
        .add_scaled(p.gamma, &c.g)?
        .add_scaled(p.delta, &c.d)?;
    let plan = emit_evaluator(&printed::eta_recovery(Regime::Case1)?);
    let jet = f.jet(t);
    let eta = plan.evaluate_with(p, &mut |m: &Monomial| match m.base {
        Base::F => jet.deriv(m.a, m.b, m.c),
        _ => Err(Error::Oracle(format!(
            "unexpected factor {m} in the recovery formula"
        ))),
    })?;
    Ok(Composite { f, eta, t })
}

/// Sup-norm residuals of the first-order single equation on `f⁰` and on the composite.
pub fn residual_reduction(
    f0: &HarmonicField,
    composite: &HarmonicField,
    bath: &SampledBathymetry,
    p: &SmallParams,
    t: f64,
) -> Result<(f64, f64)> {
    let plan = golden_plan(Regime::Case1, Form::Consistent)?;
    let r0 = plan.evaluate(&f0.jet(t), bath, p)?.max_abs();
    let r1 = plan.evaluate(&composite.jet(t), bath, p)?.max_abs();
    Ok((r0, r1))
}

/// Time-stepped `δ`-correction for bottoms without a harmonic expansion:
/// RK4 on `d_tt = d_xx + (γ/β) d_yy − S_d(t)` from rest, spectral in space.
pub fn solve_d_numeric(
    f0: &HarmonicField,
    bath: &SampledBathymetry,
    p: &SmallParams,
    t_end: f64,
    dt: f64,
) -> Result<(Field2D, Field2D)> {
    use crate::spectral::Spectral;
    if !(dt > 0.0 && t_end >= 0.0 && dt.is_finite() && t_end.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "time stepping needs dt > 0 and t_end >= 0 (got {dt}, {t_end})"
        )));
    }
    let grid = *f0.grid();
    if *bath.h.grid() != grid {
        return Err(Error::GridMismatch);
    }
    let sp = Spectral::new(grid);
    let gr = p.ratio();
    let (fx, fy, fxx, fyy) = (
        f0.deriv(1, 0, 0),
        f0.deriv(0, 1, 0),
        f0.deriv(2, 0, 0),
        f0.deriv(0, 2, 0),
    );
    let source = |t: f64| {
        let mut s = bath.hx.mul(&fx.evaluate(t));
        s.axpy(1.0, &bath.h.mul(&fxx.evaluate(t)));
        s.axpy(gr, &bath.hy.mul(&fy.evaluate(t)));
        s.axpy(gr, &bath.h.mul(&fyy.evaluate(t)));
        s
    };
    let accel = |d: &Field2D, t: f64| -> Result<Field2D> {
        let mut a = sp.deriv(d, 2, 0)?;
        a.axpy(gr, &sp.deriv(d, 0, 2)?);
        a.axpy(-1.0, &source(t));
        Ok(a)
    };
    let steps = (t_end / dt).ceil() as usize;
    let h = if steps == 0 {
        0.0
    } else {
        t_end / steps as f64
    };
    let mut d = Field2D::zeros(grid);
    let mut v = Field2D::zeros(grid);
    for n in 0..steps {
        let t = n as f64 * h;
        let shift = |u: &Field2D, k: &Field2D, s: f64| {
            let mut w = u.clone();
            w.axpy(s, k);
            w
        };
        let (k1d, k1v) = (v.clone(), accel(&d, t)?);
        let (k2d, k2v) = (
            shift(&v, &k1v, h / 2.0),
            accel(&shift(&d, &k1d, h / 2.0), t + h / 2.0)?,
        );
        let (k3d, k3v) = (
            shift(&v, &k2v, h / 2.0),
            accel(&shift(&d, &k2d, h / 2.0), t + h / 2.0)?,
        );
        let (k4d, k4v) = (shift(&v, &k3v, h), accel(&shift(&d, &k3d, h), t + h)?);
        for (u, k) in [
            (&mut d, [&k1d, &k2d, &k3d, &k4d]),
            (&mut v, [&k1v, &k2v, &k3v, &k4v]),
        ] {
            u.axpy(h / 6.0, k[0]);
            u.axpy(h / 3.0, k[1]);
            u.axpy(h / 3.0, k[2]);
            u.axpy(h / 6.0, k[3]);
        }
        if !(d.is_finite() && v.is_finite()) {
            return Err(Error::NonFiniteState { t: t + h });
        }
    }
    Ok((d, v))
}
