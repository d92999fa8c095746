//! Time evolution of the coupled `(η, f)` systems.
//!
//! The kinematic equation is solved for `η_t` explicitly. The dynamic
//! equation is linear in `f_t` through a constant-coefficient operator `P`,
//! which is inverted mode by mode; in Case 2 the terms `η f_xxt`, `η f_yyt`
//! are lagged and iterated (Picard).

use std::cell::RefCell;
use std::collections::HashMap;
use std::rc::Rc;

use crate::bathymetry::SampledBathymetry;
use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::params::{Regime, SmallParams};
use crate::spectral::{OperatorSymbol, Spectral, Spectrum};
use crate::surface_tension::{st_exact, StMode};

/// Default filter strength of `exp(-s (|m|/(n/2))^36)`.
pub const DEFAULT_FILTER: f64 = 36.0;

#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub eta: Field2D,
    pub f: Field2D,
    pub t: f64,
}

impl WaveState {
    pub fn rest(grid: Grid2D) -> Self {
        Self {
            eta: Field2D::zeros(grid),
            f: Field2D::zeros(grid),
            t: 0.0,
        }
    }

    pub fn new(eta: Field2D, f: Field2D, t: f64) -> Result<Self> {
        eta.same_grid(&f)?;
        Ok(Self { eta, f, t })
    }

    pub fn grid(&self) -> &Grid2D {
        self.eta.grid()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepperConfig {
    pub dt: f64,
    pub picard_tol: f64,
    pub picard_max_iters: usize,
    /// Strength of the exponential high-k filter applied once per step.
    pub filter: Option<f64>,
    pub dealias: bool,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Result<Self> {
        Self {
            dt,
            picard_tol: 1e-12,
            picard_max_iters: 50,
            filter: None,
            dealias: true,
        }
        .validated()
    }

    /// `dt = cfl * min(dx, dy)`, the advisory bound for the unit-speed operator.
    pub fn from_cfl(grid: &Grid2D, cfl: f64) -> Result<Self> {
        Self::new(cfl * grid.dx().min(grid.dy()))
    }

    pub fn with_filter(mut self, strength: Option<f64>) -> Self {
        self.filter = strength;
        self
    }

    pub fn validated(self) -> Result<Self> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "dt = {} must be positive",
                self.dt
            )));
        }
        if !(self.picard_tol.is_finite() && self.picard_tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "picard_tol = {} must be positive",
                self.picard_tol
            )));
        }
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Diagnostics {
    pub mass: f64,
    pub l2_eta: f64,
    pub linf_eta: f64,
    pub tail_fraction: f64,
}

/// Lazily computed derivatives of one transformed field.
pub(crate) struct DerivCache<'a> {
    sp: &'a Spectral,
    spec: Spectrum,
    map: HashMap<(usize, usize), Rc<Field2D>>,
}

impl<'a> DerivCache<'a> {
    pub(crate) fn new(sp: &'a Spectral, field: &Field2D) -> Result<Self> {
        let spec = sp.forward(field)?;
        let mut map = HashMap::new();
        map.insert((0, 0), Rc::new(field.clone()));
        Ok(Self { sp, spec, map })
    }

    pub(crate) fn from_spectrum(sp: &'a Spectral, spec: Spectrum) -> Self {
        Self {
            sp,
            spec,
            map: HashMap::new(),
        }
    }

    pub(crate) fn spec(&self) -> &Spectrum {
        &self.spec
    }

    pub(crate) fn d(&mut self, ox: usize, oy: usize) -> Result<Rc<Field2D>> {
        if let Some(v) = self.map.get(&(ox, oy)) {
            return Ok(v.clone());
        }
        let v = Rc::new(self.sp.deriv_of(&self.spec, ox, oy)?);
        self.map.insert((ox, oy), v.clone());
        Ok(v)
    }
}

#[derive(Debug, Clone)]
pub struct RhsOut {
    pub eta_t: Field2D,
    pub f_t: Field2D,
    pub picard_iters: usize,
}

/// One regime of the 2D pair on a fixed grid and bottom.
#[derive(Debug)]
pub struct Boussinesq {
    sp: Spectral,
    bath: SampledBathymetry,
    p: SmallParams,
    regime: Regime,
    st_mode: StMode,
    cfg: StepperConfig,
    op: OperatorSymbol,
    /// Warm start for the Case 2 iteration.
    last_ft: RefCell<Option<Spectrum>>,
    last_iters: RefCell<usize>,
}

/// The constant-coefficient operator acting on `f_t` in the dynamic equation.
pub fn dynamic_operator(p: &SmallParams, r: Regime) -> OperatorSymbol {
    let (b, g) = (p.beta, p.gamma);
    let base = OperatorSymbol::identity()
        .with(2, 0, -b / 2.0)
        .and_then(|s| s.with(0, 2, -g / 2.0));
    let s = match r {
        Regime::Case1 | Regime::Case4 => base,
        Regime::Case3 | Regime::Case3ST => base.and_then(|s| s.with(4, 0, b * b / 24.0)),
        Regime::Case2 => base
            .and_then(|s| s.with(4, 0, b * b / 24.0))
            .and_then(|s| s.with(2, 2, b * g / 12.0))
            .and_then(|s| s.with(0, 4, g * g / 24.0)),
    };
    s.expect("even orders within the symbol cap")
}

impl Boussinesq {
    pub fn new(
        grid: Grid2D,
        bath: SampledBathymetry,
        p: SmallParams,
        regime: Regime,
        st_mode: StMode,
        cfg: StepperConfig,
    ) -> Result<Self> {
        if *bath.h.grid() != grid {
            return Err(Error::GridMismatch);
        }
        crate::bathymetry::check_depth(&bath, &p)?;
        Ok(Self {
            sp: Spectral::new(grid),
            bath,
            p,
            regime,
            st_mode,
            cfg: cfg.validated()?,
            op: dynamic_operator(&p, regime),
            last_ft: RefCell::new(None),
            last_iters: RefCell::new(0),
        })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    pub fn params(&self) -> &SmallParams {
        &self.p
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn bathymetry(&self) -> &SampledBathymetry {
        &self.bath
    }

    pub fn st_mode(&self) -> StMode {
        self.st_mode
    }

    /// Picard iterations used by the most recent Case 2 evaluation.
    pub fn last_picard_iters(&self) -> usize {
        *self.last_iters.borrow()
    }

    fn prod(&self, a: &Field2D, b: &Field2D) -> Result<Spectrum> {
        self.sp.product_spectrum(a, b, self.cfg.dealias)
    }

    /// Bracket of the kinematic equation, `η_t = -K(η, f)`, in spectral space.
    fn kinematic(&self, eta: &mut DerivCache, f: &mut DerivCache) -> Result<Spectrum> {
        let sp = &self.sp;
        let SmallParams {
            alpha: a,
            beta: b,
            gamma: g,
            delta: d,
            ..
        } = self.p;
        let gr = self.p.ratio();
        let fh = f.spec().clone();
        let mut acc = Spectrum::zeros(*sp.grid());
        let h = &self.bath.h;
        let e0 = eta.d(0, 0)?;
        let (fx, fy) = (f.d(1, 0)?, f.d(0, 1)?);
        let r = self.regime;

        sp.accumulate(&mut acc, &fh, 2, 0, 1.0)?;
        sp.accumulate(&mut acc, &fh, 0, 2, gr)?;
        // Nonlinear advection and bottom flux, x part (all regimes).
        sp.accumulate(&mut acc, &self.prod(&e0, &fx)?, 1, 0, a)?;
        if d != 0.0 {
            sp.accumulate(&mut acc, &self.prod(h, &fx)?, 1, 0, -d)?;
        }
        if matches!(r, Regime::Case1 | Regime::Case2 | Regime::Case4) {
            sp.accumulate(&mut acc, &self.prod(&e0, &fy)?, 0, 1, a * gr)?;
            if d != 0.0 {
                sp.accumulate(&mut acc, &self.prod(h, &fy)?, 0, 1, -d * gr)?;
            }
        }
        match r {
            Regime::Case1 | Regime::Case2 => {
                sp.accumulate(&mut acc, &fh, 4, 0, -b / 6.0)?;
                sp.accumulate(&mut acc, &fh, 2, 2, -b / 3.0 * gr)?;
                sp.accumulate(&mut acc, &fh, 0, 4, -b / 6.0 * gr * gr)?;
            }
            Regime::Case3 | Regime::Case3ST => {
                sp.accumulate(&mut acc, &fh, 4, 0, -b / 6.0)?;
                sp.accumulate(&mut acc, &fh, 6, 0, -b * b / 120.0)?;
                sp.accumulate(&mut acc, &fh, 2, 2, -g / 3.0)?;
            }
            Regime::Case4 => {
                sp.accumulate(&mut acc, &fh, 4, 0, -b / 6.0)?;
                sp.accumulate(&mut acc, &fh, 0, 4, -b / 6.0 * gr * gr)?;
                sp.accumulate(&mut acc, &fh, 2, 2, -g / 3.0)?;
            }
        }
        if r == Regime::Case2 {
            let f3x = f.d(3, 0)?;
            sp.accumulate(&mut acc, &self.prod(&e0, &f3x)?, 1, 0, -a * b / 2.0)?;
            let (ex, ey) = (eta.d(1, 0)?, eta.d(0, 1)?);
            sp.accumulate(&mut acc, &self.prod(&ex, &*f.d(1, 2)?)?, 0, 0, -a * g / 2.0)?;
            sp.accumulate(&mut acc, &self.prod(&e0, &*f.d(2, 2)?)?, 0, 0, -a * g)?;
            sp.accumulate(&mut acc, &self.prod(&ey, &*f.d(2, 1)?)?, 0, 0, -a * g / 2.0)?;
            sp.accumulate(&mut acc, &fh, 6, 0, -b * b / 120.0)?;
            sp.accumulate(&mut acc, &fh, 4, 2, -b * g / 40.0)?;
            sp.accumulate(&mut acc, &fh, 2, 4, -b * g / 40.0 * gr)?;
            sp.accumulate(&mut acc, &fh, 0, 6, -b * g / 120.0 * gr * gr)?;
        }
        Ok(acc)
    }

    /// Right side of `P f_t = R` without the lagged Case 2 terms.
    fn dynamic_rhs(&self, eta: &mut DerivCache, f: &mut DerivCache) -> Result<Spectrum> {
        let sp = &self.sp;
        let SmallParams {
            alpha: a,
            beta: b,
            gamma: g,
            tau,
            ..
        } = self.p;
        let gr = self.p.ratio();
        let r = self.regime;
        let mut acc = Spectrum::zeros(*sp.grid());
        acc.add_scaled(-1.0, eta.spec());
        let (fx, fy) = (f.d(1, 0)?, f.d(0, 1)?);
        sp.accumulate(&mut acc, &self.prod(&fx, &fx)?, 0, 0, -a / 2.0)?;
        if matches!(r, Regime::Case1 | Regime::Case2 | Regime::Case4) {
            sp.accumulate(&mut acc, &self.prod(&fy, &fy)?, 0, 0, -a / 2.0 * gr)?;
        }
        if matches!(r, Regime::Case3ST | Regime::Case4) && tau != 0.0 {
            match self.st_mode {
                StMode::Approx => {
                    let eh = eta.spec().clone();
                    sp.accumulate(&mut acc, &eh, 2, 0, tau * b)?;
                    sp.accumulate(&mut acc, &eh, 0, 2, tau * g)?;
                }
                StMode::Exact => {
                    let st = sp.forward(&st_exact(sp, &*eta.d(0, 0)?, &self.p)?)?;
                    acc.add_scaled(-1.0, &st);
                }
            }
        }
        if r == Regime::Case2 {
            let (fxx, fyy) = (f.d(2, 0)?, f.d(0, 2)?);
            let f3x = f.d(3, 0)?;
            // -αβ ½(f_xx² - f_x f_3x)
            sp.accumulate(&mut acc, &self.prod(&fxx, &fxx)?, 0, 0, -a * b / 2.0)?;
            sp.accumulate(&mut acc, &self.prod(&fx, &f3x)?, 0, 0, a * b / 2.0)?;
            // -αγ [f_xx f_yy - ½(f_x f_xyy + f_y f_xxy) + G (f_yy² - f_y f_3y)]
            sp.accumulate(&mut acc, &self.prod(&fxx, &fyy)?, 0, 0, -a * g)?;
            sp.accumulate(&mut acc, &self.prod(&fx, &*f.d(1, 2)?)?, 0, 0, a * g / 2.0)?;
            sp.accumulate(&mut acc, &self.prod(&fy, &*f.d(2, 1)?)?, 0, 0, a * g / 2.0)?;
            sp.accumulate(&mut acc, &self.prod(&fyy, &fyy)?, 0, 0, -a * g * gr)?;
            sp.accumulate(&mut acc, &self.prod(&fy, &*f.d(0, 3)?)?, 0, 0, a * g * gr)?;
        }
        Ok(acc)
    }

    /// Time derivatives of the state.
    pub fn rhs(&self, state: &WaveState) -> Result<RhsOut> {
        let sp = &self.sp;
        if state.grid() != sp.grid() {
            return Err(Error::GridMismatch);
        }
        let mut eta = DerivCache::new(sp, &state.eta)?;
        let mut f = DerivCache::new(sp, &state.f)?;
        let mut k = self.kinematic(&mut eta, &mut f)?;
        k.data_mut().iter_mut().for_each(|c| *c = -*c);
        let eta_t = sp.inverse(&k);

        let base = self.dynamic_rhs(&mut eta, &mut f)?;
        let tol = self.op.default_tol();
        let mut iters = 0;
        let ft_spec = if self.regime != Regime::Case2 {
            sp.invert_symbol_spectrum(&base, &self.op, tol)?
        } else {
            let (a, b, g) = (self.p.alpha, self.p.beta, self.p.gamma);
            let e0 = eta.d(0, 0)?;
            let mut cur = match self.last_ft.borrow().as_ref() {
                Some(s) => s.clone(),
                None => sp.invert_symbol_spectrum(&base, &self.op, tol)?,
            };
            let mut prev = sp.inverse(&cur);
            let mut last_update = f64::INFINITY;
            loop {
                if iters >= self.cfg.picard_max_iters {
                    return Err(Error::PicardDiverged { iters, last_update });
                }
                iters += 1;
                // R = R0 + αβ η f_xxt - αγ η f_yyt
                let mut ftc = DerivCache::from_spectrum(sp, cur.clone());
                let mut rhs = base.clone();
                sp.accumulate(&mut rhs, &self.prod(&e0, &*ftc.d(2, 0)?)?, 0, 0, a * b)?;
                sp.accumulate(&mut rhs, &self.prod(&e0, &*ftc.d(0, 2)?)?, 0, 0, -a * g)?;
                let next = sp.invert_symbol_spectrum(&rhs, &self.op, tol)?;
                let field = sp.inverse(&next);
                if !field.is_finite() {
                    return Err(Error::PicardDiverged { iters, last_update });
                }
                last_update = field.max_abs_diff(&prev);
                cur = next;
                prev = field;
                if last_update < self.cfg.picard_tol {
                    break;
                }
            }
            *self.last_ft.borrow_mut() = Some(cur.clone());
            cur
        };
        *self.last_iters.borrow_mut() = iters;
        Ok(RhsOut {
            eta_t,
            f_t: sp.inverse(&ft_spec),
            picard_iters: iters,
        })
    }

    /// Classical RK4 step followed by the optional filter.
    pub fn step(&self, state: &WaveState) -> Result<WaveState> {
        let dt = self.cfg.dt;
        let t = state.t;
        let guard = |r: Result<RhsOut>| -> Result<RhsOut> {
            match r {
                Ok(o) if o.eta_t.is_finite() && o.f_t.is_finite() => Ok(o),
                Ok(_) | Err(Error::NonFinite(_)) => Err(Error::NonFiniteState { t }),
                Err(e) => Err(e),
            }
        };
        let stage = |s: &WaveState, k: &RhsOut, h: f64| -> WaveState {
            let mut eta = s.eta.clone();
            eta.axpy(h, &k.eta_t);
            let mut f = s.f.clone();
            f.axpy(h, &k.f_t);
            WaveState { eta, f, t: s.t + h }
        };
        let k1 = guard(self.rhs(state))?;
        let k2 = guard(self.rhs(&stage(state, &k1, dt / 2.0)))?;
        let k3 = guard(self.rhs(&stage(state, &k2, dt / 2.0)))?;
        let k4 = guard(self.rhs(&stage(state, &k3, dt)))?;
        let combine = |u: &Field2D, a: &Field2D, b: &Field2D, c: &Field2D, d: &Field2D| {
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
            Field2D::from_values(*u.grid(), vals).expect("sized")
        };
        let mut eta = combine(&state.eta, &k1.eta_t, &k2.eta_t, &k3.eta_t, &k4.eta_t);
        let mut f = combine(&state.f, &k1.f_t, &k2.f_t, &k3.f_t, &k4.f_t);
        if !(eta.is_finite() && f.is_finite()) {
            return Err(Error::NonFiniteState { t: t + dt });
        }
        if let Some(s) = self.cfg.filter {
            eta = self.sp.filter(&eta, s)?;
            f = self.sp.filter(&f, s)?;
        }
        Ok(WaveState { eta, f, t: t + dt })
    }

    pub fn diagnostics(&self, state: &WaveState) -> Result<Diagnostics> {
        diagnostics(&self.sp, state)
    }
}

pub fn diagnostics(sp: &Spectral, state: &WaveState) -> Result<Diagnostics> {
    let eta = &state.eta;
    Ok(Diagnostics {
        mass: eta.integral(),
        l2_eta: eta.l2_norm(),
        linf_eta: eta.max_abs(),
        tail_fraction: sp.forward(eta)?.tail_fraction(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bathymetry::{Bathymetry, TrigTerm};
    use std::f64::consts::PI;

    fn model(r: Regime, p: SmallParams, n: usize, l: f64, bath: Bathymetry) -> Boussinesq {
        let g = Grid2D::square(n, l).unwrap();
        let b = bath.sample(&g).unwrap();
        Boussinesq::new(
            g,
            b,
            p,
            r,
            StMode::Approx,
            StepperConfig::from_cfl(&g, 0.5).unwrap(),
        )
        .unwrap()
    }

    fn trig_bath() -> Bathymetry {
        Bathymetry::Trig {
            h0: 0.3,
            terms: vec![TrigTerm {
                jx: 1,
                jy: 1,
                a_cos: 0.2,
                a_sin: 0.1,
            }],
        }
    }

    #[test]
    fn rest_state_is_fixed_point() {
        let p = SmallParams::uniform(0.1).unwrap().with_tau(0.01).unwrap();
        for r in Regime::ALL {
            let m = model(r, p, 16, 10.0, trig_bath());
            let s = WaveState::rest(*m.spectral().grid());
            let o = m.rhs(&s).unwrap();
            assert_eq!(o.eta_t.max_abs(), 0.0);
            assert_eq!(o.f_t.max_abs(), 0.0);
            let s1 = m.step(&s).unwrap();
            assert_eq!(s1.eta.max_abs(), 0.0);
            assert!((s1.t - m.config().dt).abs() < 1e-15);
        }
    }

    #[test]
    fn linear_nondispersive_limit() {
        let tiny = 1e-300;
        let p = SmallParams {
            alpha: tiny,
            beta: tiny,
            gamma: tiny,
            delta: 0.0,
            tau: 0.0,
        };
        let g = Grid2D::square(16, 2.0 * PI).unwrap();
        let b = Bathymetry::flat().sample(&g).unwrap();
        let m = Boussinesq::new(
            g,
            b,
            p,
            Regime::Case1,
            StMode::Approx,
            StepperConfig::new(0.1).unwrap(),
        )
        .unwrap();
        let eta = Field2D::from_fn(g, |x, _| x.cos());
        let o = m
            .rhs(&WaveState::new(eta.clone(), Field2D::zeros(g), 0.0).unwrap())
            .unwrap();
        assert!(o.eta_t.max_abs() < 1e-14);
        assert!(o.f_t.max_abs_diff(&eta.scale(-1.0)) < 1e-14);
    }

    /// Independent assembly of the Case 1 pair from field derivatives.
    #[test]
    fn case1_matches_term_by_term_assembly() {
        let p = SmallParams::uniform(0.1).unwrap();
        let l = 10.0;
        let m = model(Regime::Case1, p, 32, l, trig_bath());
        let sp = m.spectral();
        let g = *sp.grid();
        let k = 2.0 * PI / l;
        let eta = Field2D::from_fn(g, |x, y| 0.5 * (k * x).cos() * (k * y).sin());
        let f = Field2D::from_fn(g, |x, y| (k * x).sin() + 0.4 * (k * y).cos());
        let o = m
            .rhs(&WaveState::new(eta.clone(), f.clone(), 0.0).unwrap())
            .unwrap();
        let d = |u: &Field2D, a, b| sp.deriv(u, a, b).unwrap();
        let pr = |u: &Field2D, v: &Field2D| sp.product(u, v).unwrap();
        let gr = p.ratio();
        let h = &m.bathymetry().h;
        let mut kin = &d(&f, 2, 0) + &d(&f, 0, 2).scale(gr);
        kin.axpy(p.alpha, &d(&pr(&eta, &d(&f, 1, 0)), 1, 0));
        kin.axpy(p.alpha * gr, &d(&pr(&eta, &d(&f, 0, 1)), 0, 1));
        kin.axpy(-p.beta / 6.0, &d(&f, 4, 0));
        kin.axpy(-p.beta / 3.0 * gr, &d(&f, 2, 2));
        kin.axpy(-p.beta / 6.0 * gr * gr, &d(&f, 0, 4));
        kin.axpy(-p.delta, &d(&pr(h, &d(&f, 1, 0)), 1, 0));
        kin.axpy(-p.delta * gr, &d(&pr(h, &d(&f, 0, 1)), 0, 1));
        assert!(o.eta_t.max_abs_diff(&kin.scale(-1.0)) < 1e-12);
        // P f_t must reproduce the dynamic right side.
        let lhs = sp
            .apply_symbol(&o.f_t, &dynamic_operator(&p, Regime::Case1))
            .unwrap();
        let mut dynr = eta.scale(-1.0);
        dynr.axpy(-p.alpha / 2.0, &pr(&d(&f, 1, 0), &d(&f, 1, 0)));
        dynr.axpy(-p.alpha / 2.0 * gr, &pr(&d(&f, 0, 1), &d(&f, 0, 1)));
        assert!(lhs.max_abs_diff(&dynr) < 1e-12);
    }

    #[test]
    fn case2_picard_solution_satisfies_dynamic_equation() {
        let p = SmallParams::new(0.12, 0.1, 0.1, 0.01).unwrap();
        let l = 10.0;
        let m = model(Regime::Case2, p, 32, l, trig_bath());
        let sp = m.spectral();
        let g = *sp.grid();
        let k = 2.0 * PI / l;
        let eta = Field2D::from_fn(g, |x, y| 0.5 * (k * x).cos() + 0.2 * (k * y).sin());
        let f = Field2D::from_fn(g, |x, y| (k * x).sin() * (k * y).cos());
        let o = m
            .rhs(&WaveState::new(eta.clone(), f.clone(), 0.0).unwrap())
            .unwrap();
        assert!(o.picard_iters <= 50);
        let d = |u: &Field2D, a, b| sp.deriv(u, a, b).unwrap();
        let pr = |u: &Field2D, v: &Field2D| sp.product(u, v).unwrap();
        let (a, b, gm, gr) = (p.alpha, p.beta, p.gamma, p.ratio());
        // Residual of the printed dynamic equation with the returned f_t.
        let ft = &o.f_t;
        let mut res = &eta + ft;
        res.axpy(
            a / 2.0,
            &(&pr(&d(&f, 1, 0), &d(&f, 1, 0)) + &pr(&d(&f, 0, 1), &d(&f, 0, 1)).scale(gr)),
        );
        res.axpy(-b / 2.0, &(&d(ft, 2, 0) + &d(ft, 0, 2).scale(gr)));
        let ab = &(&pr(&d(&f, 2, 0), &d(&f, 2, 0)) - &pr(&d(&f, 1, 0), &d(&f, 3, 0))).scale(0.5)
            - &pr(&eta, &d(ft, 2, 0));
        res.axpy(a * b, &ab);
        let mut ag = &pr(&eta, &d(ft, 0, 2)) + &pr(&d(&f, 2, 0), &d(&f, 0, 2));
        ag.axpy(
            -0.5,
            &(&pr(&d(&f, 1, 0), &d(&f, 1, 2)) + &pr(&d(&f, 0, 1), &d(&f, 2, 1))),
        );
        ag.axpy(
            gr,
            &(&pr(&d(&f, 0, 2), &d(&f, 0, 2)) - &pr(&d(&f, 0, 1), &d(&f, 0, 3))),
        );
        res.axpy(a * gm, &ag);
        res.axpy(
            b * b / 24.0,
            &(&(&d(ft, 4, 0) + &d(ft, 2, 2).scale(2.0 * gr)) + &d(ft, 0, 4).scale(gr * gr)),
        );
        assert!(res.max_abs() < 1e-11, "{}", res.max_abs());
    }

    #[test]
    fn delta_zero_ignores_bottom_shape() {
        let p = SmallParams::new(0.1, 0.1, 0.1, 0.0).unwrap();
        let l = 10.0;
        let k = 2.0 * PI / l;
        for r in Regime::ALL {
            let a = model(r, p, 16, l, trig_bath());
            let b = model(r, p, 16, l, Bathymetry::flat());
            let g = *a.spectral().grid();
            let s = WaveState::new(
                Field2D::from_fn(g, |x, y| 0.3 * (k * x).cos() * (k * y).cos()),
                Field2D::from_fn(g, |x, _| (k * x).sin()),
                0.0,
            )
            .unwrap();
            let (oa, ob) = (a.rhs(&s).unwrap(), b.rhs(&s).unwrap());
            assert_eq!(oa.eta_t, ob.eta_t);
            assert_eq!(oa.f_t, ob.f_t);
        }
    }

    #[test]
    fn diagnostics_of_single_cosine() {
        let g = Grid2D::square(32, 2.0 * PI).unwrap();
        let sp = Spectral::new(g);
        let s =
            WaveState::new(Field2D::from_fn(g, |x, _| x.cos()), Field2D::zeros(g), 0.0).unwrap();
        let d = diagnostics(&sp, &s).unwrap();
        assert!(d.mass.abs() < 1e-13);
        assert!((d.l2_eta - (2.0 * PI * PI).sqrt()).abs() < 1e-12);
        assert!((d.linf_eta - 1.0).abs() < 1e-15);
        assert!(d.tail_fraction < 1e-28);
        let z = diagnostics(&sp, &WaveState::rest(g)).unwrap();
        assert_eq!(z, Diagnostics::default());
    }

    #[test]
    fn nan_state_is_reported() {
        let p = SmallParams::uniform(0.1).unwrap();
        let m = model(Regime::Case1, p, 16, 10.0, Bathymetry::flat());
        let g = *m.spectral().grid();
        let mut eta = Field2D::zeros(g);
        eta.values_mut()[0] = f64::NAN;
        let s = WaveState::new(eta, Field2D::zeros(g), 0.0).unwrap();
        assert!(matches!(m.step(&s), Err(Error::NonFiniteState { .. })));
    }
}
