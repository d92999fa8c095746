//! (1+1)-dimensional pairs in `(η, w = f_x)`, the KdV equation over an uneven
//! bottom, soliton initial data and the 2D → 1D reduction check.

use std::cell::RefCell;

use num_complex::Complex64;

use crate::bathymetry::SampledBathymetry1D;
use crate::dynamics::{dynamic_operator, Boussinesq, StepperConfig, WaveState};
use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D, Grid1D};
use crate::params::{Regime, SmallParams};
use crate::spectral::OperatorSymbol;
use crate::spectral1d::{Spectral1D, Spectrum1D};
use crate::surface_tension::StMode;

/// Right-going compatibility `w = η + C1 α η² + C2 β η_xx`, fixed by the
/// radiation scan in the tests.
pub const SOLITON_C1: f64 = -0.25;
pub const SOLITON_C2: f64 = 1.0 / 3.0;
/// Largest admissible `sech²` value at the periodic seam.
pub const SOLITON_TAIL: f64 = 1e-12;

/// What to evolve in 1D.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model1D {
    Pair(Regime),
    /// `η_t + η_x + (3/2)α η η_x + c η_xxx − (δ/4)(2h η_x + h_x η) = 0` with
    /// `c = β/6`, or the bare `1/6` when `as_printed`.
    KdvUneven {
        as_printed: bool,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct State1D {
    pub eta: Field1D,
    /// `f_x`; unused by [`Model1D::KdvUneven`].
    pub w: Field1D,
    pub t: f64,
}

impl State1D {
    pub fn new(eta: Field1D, w: Field1D, t: f64) -> Result<Self> {
        if eta.grid() != w.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(Self { eta, w, t })
    }

    pub fn rest(grid: Grid1D) -> Self {
        Self {
            eta: Field1D::zeros(grid),
            w: Field1D::zeros(grid),
            t: 0.0,
        }
    }

    pub fn grid(&self) -> &Grid1D {
        self.eta.grid()
    }
}

#[derive(Debug, Clone)]
pub struct Rhs1D {
    pub eta_t: Field1D,
    pub w_t: Field1D,
    pub picard_iters: usize,
}

fn zeros(n: usize) -> Spectrum1D {
    vec![Complex64::new(0.0, 0.0); n]
}

fn axpy(acc: &mut [Complex64], s: f64, x: &[Complex64]) {
    acc.iter_mut().zip(x).for_each(|(a, b)| *a += s * b);
}

/// 1D model on a fixed grid and bottom; mirrors [`Boussinesq`] on y-invariant fields.
#[derive(Debug)]
pub struct Boussinesq1D {
    sp: Spectral1D,
    bath: SampledBathymetry1D,
    p: SmallParams,
    model: Model1D,
    st_mode: StMode,
    cfg: StepperConfig,
    op: OperatorSymbol,
    last_wt: RefCell<Option<Spectrum1D>>,
}

impl Boussinesq1D {
    pub fn new(
        grid: Grid1D,
        bath: SampledBathymetry1D,
        p: SmallParams,
        model: Model1D,
        st_mode: StMode,
        cfg: StepperConfig,
    ) -> Result<Self> {
        if *bath.h.grid() != grid {
            return Err(Error::GridMismatch);
        }
        if p.delta * bath.h.max_abs() >= 1.0 {
            return Err(Error::Bathymetry(format!(
                "delta max|h| = {} reaches the undisturbed surface",
                p.delta * bath.h.max_abs()
            )));
        }
        let op = match model {
            Model1D::Pair(r) => dynamic_operator(&p, r),
            Model1D::KdvUneven { .. } => OperatorSymbol::identity(),
        };
        Ok(Self {
            sp: Spectral1D::new(grid),
            bath,
            p,
            model,
            st_mode,
            cfg: cfg.validated()?,
            op,
            last_wt: RefCell::new(None),
        })
    }

    pub fn spectral(&self) -> &Spectral1D {
        &self.sp
    }

    pub fn model(&self) -> Model1D {
        self.model
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    fn d(&self, s: &[Complex64], k: usize) -> Result<Field1D> {
        Ok(self.sp.inverse(&self.sp.deriv_spectrum(s, k)?))
    }

    fn prod(&self, a: &Field1D, b: &Field1D) -> Result<Spectrum1D> {
        let mut s = self.sp.forward(&a.mul(b))?;
        if self.cfg.dealias {
            self.sp.dealias_spectrum(&mut s);
        }
        Ok(s)
    }

    /// `acc += c ∂x^k src`.
    fn acc(&self, acc: &mut [Complex64], src: &[Complex64], k: usize, c: f64) -> Result<()> {
        if c != 0.0 {
            axpy(acc, c, &self.sp.deriv_spectrum(src, k)?);
        }
        Ok(())
    }

    fn solve(&self, rhs: &[Complex64]) -> Result<Spectrum1D> {
        let tol = self.op.default_tol();
        let g = self.sp.grid();
        rhs.iter()
            .enumerate()
            .map(|(j, &c)| {
                let p = self.op.value(g.k(j as i64), 0.0);
                if p.abs() < tol {
                    if c.norm() < tol {
                        Ok(Complex64::new(0.0, 0.0))
                    } else {
                        Err(Error::SingularSymbol {
                            jx: j as i64,
                            jy: 0,
                            value: p.abs(),
                        })
                    }
                } else {
                    Ok(c / p)
                }
            })
            .collect()
    }

    fn st_exact_1d(&self, es: &[Complex64]) -> Result<Field1D> {
        let (ex, exx) = (self.d(es, 1)?, self.d(es, 2)?);
        let a2b = self.p.alpha * self.p.alpha * self.p.beta;
        let mut min_recip = f64::INFINITY;
        let vals = ex
            .values()
            .iter()
            .zip(exx.values())
            .map(|(&x, &xx)| {
                let den = 1.0 + a2b * x * x;
                min_recip = min_recip.min(1.0 / den);
                -self.p.tau * self.p.beta * xx / (den * den.sqrt())
            })
            .collect();
        if min_recip < 0.5 {
            return Err(Error::SlopeTooLarge {
                min_reciprocal: min_recip,
            });
        }
        self.sp
            .dealias(&Field1D::from_values(*self.sp.grid(), vals)?)
    }

    pub fn rhs(&self, s: &State1D) -> Result<Rhs1D> {
        if s.grid() != self.sp.grid() {
            return Err(Error::GridMismatch);
        }
        let SmallParams {
            alpha: a,
            beta: b,
            delta: d,
            tau,
            ..
        } = self.p;
        let n = self.sp.grid().n() / 2 + 1;
        let es = self.sp.forward(&s.eta)?;
        let h = &self.bath.h;
        let r = match self.model {
            Model1D::KdvUneven { as_printed } => {
                let c = if as_printed { 1.0 / 6.0 } else { b / 6.0 };
                let mut acc = zeros(n);
                self.acc(&mut acc, &es, 1, 1.0)?;
                self.acc(&mut acc, &self.prod(&s.eta, &s.eta)?, 1, 0.75 * a)?;
                self.acc(&mut acc, &es, 3, c)?;
                if d != 0.0 {
                    let ex = self.d(&es, 1)?;
                    axpy(&mut acc, -d / 2.0, &self.prod(h, &ex)?);
                    axpy(&mut acc, -d / 4.0, &self.prod(&self.bath.hx, &s.eta)?);
                }
                acc.iter_mut().for_each(|c| *c = -*c);
                let eta_t = self.sp.inverse(&acc);
                return Ok(Rhs1D {
                    eta_t,
                    w_t: Field1D::zeros(*self.sp.grid()),
                    picard_iters: 0,
                });
            }
            Model1D::Pair(r) => r,
        };
        let ws = self.sp.forward(&s.w)?;

        // Kinematic bracket K, η_t = −K.
        let mut k = zeros(n);
        self.acc(&mut k, &ws, 1, 1.0)?;
        self.acc(&mut k, &self.prod(&s.eta, &s.w)?, 1, a)?;
        if d != 0.0 {
            self.acc(&mut k, &self.prod(h, &s.w)?, 1, -d)?;
        }
        self.acc(&mut k, &ws, 3, -b / 6.0)?;
        if matches!(r, Regime::Case2 | Regime::Case3 | Regime::Case3ST) {
            self.acc(&mut k, &ws, 5, -b * b / 120.0)?;
        }
        if r == Regime::Case2 {
            self.acc(
                &mut k,
                &self.prod(&s.eta, &self.d(&ws, 2)?)?,
                1,
                -a * b / 2.0,
            )?;
        }
        k.iter_mut().for_each(|c| *c = -*c);
        let eta_t = self.sp.inverse(&k);

        // x-derivative of the dynamic right side, P w_t = ∂x R.
        let mut rs = zeros(n);
        axpy(&mut rs, -1.0, &es);
        axpy(&mut rs, -a / 2.0, &self.prod(&s.w, &s.w)?);
        if matches!(r, Regime::Case3ST | Regime::Case4) && tau != 0.0 {
            match self.st_mode {
                StMode::Approx => self.acc(&mut rs, &es, 2, tau * b)?,
                StMode::Exact => axpy(&mut rs, -1.0, &self.sp.forward(&self.st_exact_1d(&es)?)?),
            }
        }
        if r == Regime::Case2 {
            let (wx, wxx) = (self.d(&ws, 1)?, self.d(&ws, 2)?);
            axpy(&mut rs, -a * b / 2.0, &self.prod(&wx, &wx)?);
            axpy(&mut rs, a * b / 2.0, &self.prod(&s.w, &wxx)?);
        }
        let base = self.sp.deriv_spectrum(&rs, 1)?;
        let mut iters = 0;
        let wt = if r != Regime::Case2 {
            self.solve(&base)?
        } else {
            let mut cur = match self.last_wt.borrow().as_ref() {
                Some(v) => v.clone(),
                None => self.solve(&base)?,
            };
            let mut prev = self.sp.inverse(&cur);
            let mut last_update = f64::INFINITY;
            loop {
                if iters >= self.cfg.picard_max_iters {
                    return Err(Error::PicardDiverged { iters, last_update });
                }
                iters += 1;
                // + αβ (η w_xt)_x
                let mut rhs = base.clone();
                self.acc(&mut rhs, &self.prod(&s.eta, &self.d(&cur, 1)?)?, 1, a * b)?;
                let next = self.solve(&rhs)?;
                let field = self.sp.inverse(&next);
                if !field.is_finite() {
                    return Err(Error::PicardDiverged { iters, last_update });
                }
                last_update = field.zip_map(&prev, |x, y| x - y).max_abs();
                cur = next;
                prev = field;
                if last_update < self.cfg.picard_tol {
                    break;
                }
            }
            *self.last_wt.borrow_mut() = Some(cur.clone());
            cur
        };
        Ok(Rhs1D {
            eta_t,
            w_t: self.sp.inverse(&wt),
            picard_iters: iters,
        })
    }

    /// Classical RK4 step followed by the optional filter.
    pub fn step(&self, s: &State1D) -> Result<State1D> {
        let dt = self.cfg.dt;
        let t = s.t;
        let guard = |r: Result<Rhs1D>| match r {
            Ok(o) if o.eta_t.is_finite() && o.w_t.is_finite() => Ok(o),
            Ok(_) | Err(Error::NonFinite(_)) => Err(Error::NonFiniteState { t }),
            Err(e) => Err(e),
        };
        let stage = |k: &Rhs1D, h: f64| {
            let mut eta = s.eta.clone();
            eta.axpy(h, &k.eta_t);
            let mut w = s.w.clone();
            w.axpy(h, &k.w_t);
            State1D { eta, w, t: t + h }
        };
        let k1 = guard(self.rhs(s))?;
        let k2 = guard(self.rhs(&stage(&k1, dt / 2.0)))?;
        let k3 = guard(self.rhs(&stage(&k2, dt / 2.0)))?;
        let k4 = guard(self.rhs(&stage(&k3, dt)))?;
        let combine = |u: &Field1D, a: &Field1D, b: &Field1D, c: &Field1D, d: &Field1D| {
            let vals = (0..u.values().len())
                .map(|i| {
                    u.values()[i]
                        + dt / 6.0
                            * (a.values()[i]
                                + 2.0 * b.values()[i]
                                + 2.0 * c.values()[i]
                                + d.values()[i])
                })
                .collect();
            Field1D::from_values(*u.grid(), vals).expect("sized")
        };
        let mut eta = combine(&s.eta, &k1.eta_t, &k2.eta_t, &k3.eta_t, &k4.eta_t);
        let mut w = combine(&s.w, &k1.w_t, &k2.w_t, &k3.w_t, &k4.w_t);
        if !(eta.is_finite() && w.is_finite()) {
            return Err(Error::NonFiniteState { t: t + dt });
        }
        if let Some(st) = self.cfg.filter {
            eta = self.sp.filter(&eta, st)?;
            w = self.sp.filter(&w, st)?;
        }
        Ok(State1D { eta, w, t: t + dt })
    }
}

/// `η = A sech²((x − x0)/Δ)`, `Δ = sqrt(4β/(3αA))`, with the right-going `w`.
pub fn soliton_init(grid: Grid1D, amp: f64, p: &SmallParams, x0: f64) -> Result<State1D> {
    let (a, b) = (p.alpha, p.beta);
    if !(a * b > 0.0) || !(amp > 0.0 && amp.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "soliton needs alpha beta > 0 and amp > 0 (got alpha = {a}, beta = {b}, amp = {amp})"
        )));
    }
    let width = soliton_width(amp, p);
    let l = grid.l();
    // Distance to the seam is at least L/2 from the periodic image of x0.
    let sech2 = |u: f64| {
        let c = u.cosh();
        1.0 / (c * c)
    };
    let tail = sech2(l / 2.0 / width);
    if tail > SOLITON_TAIL {
        return Err(Error::TailNotNegligible { tail });
    }
    let eta = Field1D::from_fn(grid, |x| {
        let mut dx = (x - x0).rem_euclid(l);
        if dx > l / 2.0 {
            dx -= l;
        }
        amp * sech2(dx / width)
    });
    let sp = Spectral1D::new(grid);
    let exx = sp.deriv(&eta, 2)?;
    let mut w = eta.clone();
    w.axpy(SOLITON_C1 * a, &eta.mul(&eta));
    w.axpy(SOLITON_C2 * b, &exx);
    Ok(State1D { eta, w, t: 0.0 })
}

pub fn soliton_width(amp: f64, p: &SmallParams) -> f64 {
    (4.0 * p.beta / (3.0 * p.alpha * amp)).sqrt()
}

/// Crest speed `1 + α A / 2` of the KdV soliton.
pub fn soliton_speed(amp: f64, p: &SmallParams) -> f64 {
    1.0 + p.alpha * amp / 2.0
}

/// Position of the maximum, refined on the trigonometric interpolant.
pub fn crest_position(sp: &Spectral1D, eta: &Field1D) -> Result<f64> {
    let g = *sp.grid();
    let (i, _) = eta
        .values()
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |m, (i, &v)| if v > m.1 { (i, v) } else { m },
        );
    let s = sp.forward(eta)?;
    let n = g.n();
    // Real series Σ w_j Re(c_j e^{i k_j x}); weights 2 except DC and Nyquist.
    let eval = |x: f64, order: u32| -> f64 {
        s.iter()
            .enumerate()
            .map(|(j, c)| {
                let w = if j == 0 || j == n / 2 { 1.0 } else { 2.0 };
                let k = g.k(j as i64);
                let ik = Complex64::new(0.0, k).powu(order);
                w * (c * ik * Complex64::from_polar(1.0, k * x)).re
            })
            .sum()
    };
    let mut x = g.x(i);
    for _ in 0..50 {
        let (d1, d2) = (eval(x, 1), eval(x, 2));
        if d2 >= 0.0 {
            break;
        }
        let step = d1 / d2;
        x -= step.clamp(-g.dx(), g.dx());
        if step.abs() < 1e-14 * g.l() {
            break;
        }
    }
    Ok(x.rem_euclid(g.l()))
}

/// Relative L² distance between `eta` shifted by `-shift` and `reference`.
pub fn shape_drift(sp: &Spectral1D, eta: &Field1D, reference: &Field1D, shift: f64) -> Result<f64> {
    let g = *sp.grid();
    let s: Vec<Complex64> = sp
        .forward(eta)?
        .iter()
        .enumerate()
        .map(|(j, c)| c * Complex64::from_polar(1.0, g.k(j as i64) * shift))
        .collect();
    let back = sp.inverse(&s);
    Ok(back.zip_map(reference, |a, b| a - b).l2_norm() / reference.l2_norm())
}

/// Outcome of evolving y-invariant 2D data next to its 1D restriction.
#[derive(Debug, Clone, PartialEq)]
pub struct ReductionReport {
    /// False when the 2D data or bottom depend on y; nothing is run then.
    pub reducible: bool,
    pub steps: usize,
    /// `max |η_2D(x, y, t) − η_1D(x, t)|` over all steps.
    pub max_diff: f64,
    /// Largest y-variance of the 2D elevation over all steps.
    pub max_y_variance: f64,
    /// Initial y-variance (non-zero flags a non-reducible configuration).
    pub initial_y_variance: f64,
}

/// Largest over x of the variance of `u(x, ·)` along y.
pub fn y_variance(u: &Field2D) -> f64 {
    let g = u.grid();
    let (nx, ny) = (g.nx(), g.ny());
    (0..nx)
        .map(|i| {
            let col: Vec<f64> = (0..ny).map(|j| u.get(i, j)).collect();
            let mean = col.iter().sum::<f64>() / ny as f64;
            col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / ny as f64
        })
        .fold(0.0, f64::max)
}

fn is_y_invariant(u: &Field2D) -> bool {
    let g = u.grid();
    (1..g.ny()).all(|j| u.row(j) == u.row(0))
}

/// Evolve `state` with the 2D pair and its first row with the 1D pair for
/// `steps` steps, comparing elevations after every step.
pub fn reduction_check(
    model: &Boussinesq,
    state: &WaveState,
    steps: usize,
) -> Result<ReductionReport> {
    let bath = model.bathymetry();
    let initial_y_variance = y_variance(&state.eta).max(y_variance(&state.f));
    let reducible =
        is_y_invariant(&state.eta) && is_y_invariant(&state.f) && is_y_invariant(&bath.h);
    if !reducible {
        return Ok(ReductionReport {
            reducible,
            steps: 0,
            max_diff: f64::NAN,
            max_y_variance: initial_y_variance,
            initial_y_variance,
        });
    }
    let g2 = *state.grid();
    let g1 = Grid1D::new(g2.nx(), g2.lx())?;
    let row = |u: &Field2D| Field1D::from_values(g1, u.row(0).to_vec());
    let bath1 = SampledBathymetry1D {
        h: row(&bath.h)?,
        hx: row(&bath.hx)?,
    };
    let m1 = Boussinesq1D::new(
        g1,
        bath1,
        *model.params(),
        Model1D::Pair(model.regime()),
        model.st_mode(),
        *model.config(),
    )?;
    let sp1 = m1.spectral();
    let mut s2 = state.clone();
    let mut s1 = State1D::new(row(&state.eta)?, sp1.deriv(&row(&state.f)?, 1)?, state.t)?;
    let (mut max_diff, mut max_var) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        s2 = model.step(&s2)?;
        s1 = m1.step(&s1)?;
        let nx = g2.nx();
        for j in 0..g2.ny() {
            for i in 0..nx {
                max_diff = max_diff.max((s2.eta.get(i, j) - s1.eta.values()[i]).abs());
            }
        }
        max_var = max_var.max(y_variance(&s2.eta));
    }
    Ok(ReductionReport {
        reducible,
        steps,
        max_diff,
        max_y_variance: max_var,
        initial_y_variance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bathymetry::{Bathymetry, TrigTerm};
    use crate::grid::Grid2D;
    use std::f64::consts::PI;

    fn model(r: Model1D, p: SmallParams, n: usize, l: f64, dt: f64) -> Boussinesq1D {
        let g = Grid1D::new(n, l).unwrap();
        let bath = Bathymetry::flat().sample_1d(&g).unwrap();
        Boussinesq1D::new(
            g,
            bath,
            p,
            r,
            StMode::Approx,
            StepperConfig::new(dt).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn rest_is_fixed() {
        let p = SmallParams::uniform(0.1).unwrap().with_tau(0.2).unwrap();
        for m in [
            Model1D::Pair(Regime::Case1),
            Model1D::Pair(Regime::Case2),
            Model1D::Pair(Regime::Case3ST),
            Model1D::KdvUneven { as_printed: false },
        ] {
            let b = model(m, p, 32, 10.0, 0.1);
            let r = b.rhs(&State1D::rest(*b.spectral().grid())).unwrap();
            assert_eq!(r.eta_t.max_abs() + r.w_t.max_abs(), 0.0);
        }
    }

    #[test]
    fn long_wave_speed_tends_to_one() {
        let p = SmallParams::new(1e-12, 0.1, 0.1, 0.0).unwrap();
        let l = 200.0;
        let b = model(Model1D::Pair(Regime::Case1), p, 32, l, 0.5);
        let g = *b.spectral().grid();
        let k = 2.0 * PI / l;
        let s = State1D::new(
            Field1D::from_fn(g, |x| (k * x).cos()),
            Field1D::from_fn(g, |x| (k * x).cos()),
            0.0,
        )
        .unwrap();
        // Linear dispersion of the pair: ω² = k² (1 + βk²/6) / (1 + βk²/2).
        let bk = p.beta * k * k;
        let c = ((1.0 + bk / 6.0) / (1.0 + bk / 2.0)).sqrt();
        assert!((c - 1.0).abs() < 1e-3);
        let r = b.rhs(&s).unwrap();
        let want = Field1D::from_fn(g, |x| k * (k * x).sin());
        assert!(r.eta_t.zip_map(&want, |a, b| a - b).max_abs() < 1e-3 * k);
    }

    #[test]
    fn case3st_matches_case3_without_tension() {
        let p = SmallParams::new(0.05, 0.1, 0.05, 0.1).unwrap();
        let g = Grid1D::new(32, 20.0).unwrap();
        let bath = Bathymetry::Trig {
            h0: 0.5,
            terms: vec![TrigTerm {
                jx: 1,
                jy: 0,
                a_cos: 0.3,
                a_sin: 0.0,
            }],
        }
        .sample_1d(&g)
        .unwrap();
        let cfg = StepperConfig::new(0.05).unwrap();
        let s = State1D::new(
            Field1D::from_fn(g, |x| 0.3 * (2.0 * PI * x / 20.0).cos()),
            Field1D::from_fn(g, |x| 0.2 * (4.0 * PI * x / 20.0).sin()),
            0.0,
        )
        .unwrap();
        let a = Boussinesq1D::new(
            g,
            bath.clone(),
            p,
            Model1D::Pair(Regime::Case3),
            StMode::Exact,
            cfg,
        )
        .unwrap();
        let b = Boussinesq1D::new(
            g,
            bath,
            p,
            Model1D::Pair(Regime::Case3ST),
            StMode::Exact,
            cfg,
        )
        .unwrap();
        let (ra, rb) = (a.rhs(&s).unwrap(), b.rhs(&s).unwrap());
        assert_eq!(ra.eta_t, rb.eta_t);
        assert_eq!(ra.w_t, rb.w_t);
    }

    #[test]
    fn soliton_width_and_tail() {
        let p = SmallParams::uniform(0.1).unwrap();
        assert!((soliton_width(1.0, &p) - (4.0f64 / 3.0).sqrt()).abs() < 1e-15);
        let short = Grid1D::new(64, 10.0).unwrap();
        assert!(matches!(
            soliton_init(short, 1.0, &p, 5.0),
            Err(Error::TailNotNegligible { .. })
        ));
        assert!(soliton_width(1e-12, &p) > 1e5);
    }

    #[test]
    fn soliton_solves_kdv() {
        // Substitute the travelling sech² profile into the KdV right side:
        // η_t = −V η_x must hold pointwise.
        let p = SmallParams::new(0.1, 0.1, 0.1, 0.0).unwrap();
        let g = Grid1D::new(1024, 80.0).unwrap();
        let s = soliton_init(g, 1.0, &p, 40.0).unwrap();
        let b = model(
            Model1D::KdvUneven { as_printed: false },
            p,
            1024,
            80.0,
            0.01,
        );
        let r = b.rhs(&s).unwrap();
        let ex = b.spectral().deriv(&s.eta, 1).unwrap();
        let v = soliton_speed(1.0, &p);
        let res = r.eta_t.zip_map(&ex, |a, b| a + v * b).max_abs();
        assert!(res < 1e-10, "{res}");
    }

    #[test]
    fn crest_refinement() {
        let g = Grid1D::new(128, 40.0).unwrap();
        let sp = Spectral1D::new(g);
        let x0 = 17.123;
        let u = Field1D::from_fn(g, |x| (-(x - x0) * (x - x0) / 4.0).exp());
        assert!((crest_position(&sp, &u).unwrap() - x0).abs() < 1e-9);
        assert!(shape_drift(&sp, &u, &u, 0.0).unwrap() < 1e-15);
    }

    #[test]
    fn kdv_invariants_flat() {
        let p = SmallParams::new(0.1, 0.1, 0.1, 0.0).unwrap();
        let b = model(Model1D::KdvUneven { as_printed: false }, p, 256, 80.0, 0.01);
        let g = *b.spectral().grid();
        let mut s = soliton_init(g, 1.0, &p, 40.0).unwrap();
        let (m0, e0) = (s.eta.integral(), s.eta.l2_norm());
        for _ in 0..2000 {
            s = b.step(&s).unwrap();
        }
        assert!((s.eta.integral() - m0).abs() < 1e-10);
        assert!((s.eta.l2_norm() - e0).abs() / e0 < 1e-5);
    }

    #[test]
    fn one_d_pairs_are_y_restrictions() {
        let g2 = Grid2D::new(32, 16, 20.0, 5.0).unwrap();
        let g1 = Grid1D::new(32, 20.0).unwrap();
        let p = SmallParams::new(0.1, 0.1, 0.08, 0.1)
            .unwrap()
            .with_tau(0.3)
            .unwrap();
        let bath = Bathymetry::Trig {
            h0: 0.4,
            terms: vec![TrigTerm {
                jx: 1,
                jy: 0,
                a_cos: 0.2,
                a_sin: 0.1,
            }],
        };
        let k = 2.0 * PI / 20.0;
        let eta = |x: f64| 0.3 * (k * x).cos() + 0.1 * (3.0 * k * x).sin();
        let f = |x: f64| 0.5 * (2.0 * k * x).sin() + 0.2 * (k * x).cos();
        for r in Regime::ALL {
            for st in [StMode::Approx, StMode::Exact] {
                let cfg = StepperConfig {
                    picard_tol: 1e-15,
                    ..StepperConfig::new(0.05).unwrap()
                };
                let m2 = Boussinesq::new(g2, bath.sample(&g2).unwrap(), p, r, st, cfg).unwrap();
                let m1 = Boussinesq1D::new(
                    g1,
                    bath.sample_1d(&g1).unwrap(),
                    p,
                    Model1D::Pair(r),
                    st,
                    cfg,
                )
                .unwrap();
                let s2 = WaveState::new(
                    Field2D::from_fn(g2, |x, _| eta(x)),
                    Field2D::from_fn(g2, |x, _| f(x)),
                    0.0,
                )
                .unwrap();
                let f1 = Field1D::from_fn(g1, f);
                let s1 = State1D::new(
                    Field1D::from_fn(g1, eta),
                    m1.spectral().deriv(&f1, 1).unwrap(),
                    0.0,
                )
                .unwrap();
                let (r2, r1) = (m2.rhs(&s2).unwrap(), m1.rhs(&s1).unwrap());
                let ft_x = m2.spectral().deriv(&r2.f_t, 1, 0).unwrap();
                for j in 0..g2.ny() {
                    for i in 0..g2.nx() {
                        assert!(
                            (r2.eta_t.get(i, j) - r1.eta_t.values()[i]).abs() < 1e-13,
                            "{r} {st:?}"
                        );
                        assert!(
                            (ft_x.get(i, j) - r1.w_t.values()[i]).abs() < 1e-12,
                            "{r} {st:?}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn y_dependent_data_is_flagged() {
        let g2 = Grid2D::new(16, 16, 10.0, 10.0).unwrap();
        let p = SmallParams::uniform(0.1).unwrap();
        let m2 = Boussinesq::new(
            g2,
            Bathymetry::flat().sample(&g2).unwrap(),
            p,
            Regime::Case1,
            StMode::Approx,
            StepperConfig::new(0.1).unwrap(),
        )
        .unwrap();
        let s = WaveState::new(
            Field2D::from_fn(g2, |x, y| 0.1 * (0.6 * x).cos() * (0.6 * y).cos()),
            Field2D::zeros(g2),
            0.0,
        )
        .unwrap();
        let rep = reduction_check(&m2, &s, 5).unwrap();
        assert!(!rep.reducible);
        assert!(rep.initial_y_variance > 0.0);
    }
}
