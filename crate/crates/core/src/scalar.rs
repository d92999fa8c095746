//! Single-equation formulations for the auxiliary function f: residuals on a
//! jet, time stepping where `f_tt` enters linearly, and recovery of η.

use crate::bathymetry::SampledBathymetry;
use crate::dynamics::StepperConfig;
use crate::error::{Error, Result};
use crate::grid::{Field2D, Grid2D};
use crate::jet::{JetProvider, NumericJet};
use crate::oracle::derive::ordering;
use crate::oracle::plan::{emit_evaluator, golden_plan, EvalPlan, Form, PlanTerm};
use crate::oracle::printed;
use crate::oracle::termsum::{Base, Monomial};
use crate::params::{Regime, SmallParams, TAU_NEGLIGIBLE};
use crate::spectral::{OperatorSymbol, Spectral};

#[derive(Debug, Clone, PartialEq)]
pub struct ScalarState {
    pub f: Field2D,
    /// `f_t`.
    pub q: Field2D,
    pub t: f64,
}

impl ScalarState {
    pub fn new(f: Field2D, q: Field2D, t: f64) -> Result<Self> {
        f.same_grid(&q)?;
        f.ensure_finite("f")?;
        q.ensure_finite("f_t")?;
        Ok(Self { f, q, t })
    }

    pub fn rest(grid: Grid2D) -> Self {
        Self {
            f: Field2D::zeros(grid),
            q: Field2D::zeros(grid),
            t: 0.0,
        }
    }
}

/// Evaluation options for [`scalar_residual`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ResidualOptions {
    pub form: Form,
    /// Keep only terms up to this order in the regime's leading parameter
    /// (`Some(0)` is the zeroth-order wave equation).
    pub max_order: Option<i32>,
}

fn restrict(plan: EvalPlan, r: Regime, max_order: Option<i32>) -> EvalPlan {
    let Some(k) = max_order else { return plan };
    let (w, _) = ordering(r);
    let terms = plan
        .terms
        .into_iter()
        .filter(|t| w.grade(&t.grade) <= k)
        .collect();
    EvalPlan {
        monomials: plan.monomials,
        terms,
    }
}

/// Pointwise residual of the regime's single equation for f.
pub fn scalar_residual(
    jet: &dyn JetProvider,
    bath: &SampledBathymetry,
    p: &SmallParams,
    r: Regime,
    opts: ResidualOptions,
) -> Result<Field2D> {
    if *bath.h.grid() != *jet.grid() {
        return Err(Error::GridMismatch);
    }
    restrict(golden_plan(r, opts.form)?, r, opts.max_order).evaluate(jet, bath, p)
}

/// Case 1 residual assembled directly from its terms (independent of the oracle plans).
pub fn case1_residual(
    jet: &dyn JetProvider,
    bath: &SampledBathymetry,
    p: &SmallParams,
) -> Result<Field2D> {
    let d = |a, b, c| jet.deriv(a, b, c);
    let g = p.ratio();
    let (f_x, f_y, f_t) = (d(1, 0, 0)?, d(0, 1, 0)?, d(0, 0, 1)?);
    let (f_xx, f_yy) = (d(2, 0, 0)?, d(0, 2, 0)?);
    let lap = &f_xx + &f_yy.scale(g);
    let mut r = &lap - &d(0, 0, 2)?;
    let mut adv = f_t.mul(&lap);
    adv.axpy(2.0, &f_x.mul(&d(1, 0, 1)?));
    adv.axpy(2.0 * g, &f_y.mul(&d(0, 1, 1)?));
    r.axpy(-p.alpha, &adv);
    let mut disp = d(4, 0, 0)?;
    disp.axpy(2.0 * g, &d(2, 2, 0)?);
    disp.axpy(g * g, &d(0, 4, 0)?);
    r.axpy(p.beta / 3.0, &disp);
    let mut bot = &bath.hx.mul(&f_x) + &bath.h.mul(&f_xx);
    bot.axpy(g, &(&bath.hy.mul(&f_y) + &bath.h.mul(&f_yy)));
    r.axpy(-p.delta, &bot);
    Ok(r)
}

/// Implicit/explicit split of a single equation that is linear in `f_tt`
/// with constant coefficients.
#[derive(Debug, Clone)]
struct Split {
    /// `Σ c ∂x^a ∂y^b` acting on `f_tt`, with parameter grades.
    implicit: Vec<PlanTerm>,
    explicit: EvalPlan,
}

fn split_plan(plan: &EvalPlan, r: Regime) -> Result<Split> {
    let unsupported = || {
        Error::UnsupportedRegime(format!(
            "{r}: f_tt enters nonlinearly; evolve this regime with the Boussinesq pair instead"
        ))
    };
    let mut implicit = Vec::new();
    let mut explicit = EvalPlan {
        monomials: plan.monomials.clone(),
        terms: vec![],
    };
    for t in &plan.terms {
        let high: Vec<&Monomial> = t
            .factors
            .iter()
            .map(|&i| &plan.monomials[i])
            .filter(|m| m.base == Base::F && m.c >= 2)
            .collect();
        match high.len() {
            0 => explicit.terms.push(t.clone()),
            1 if t.factors.len() == 1 && high[0].c == 2 => implicit.push(t.clone()),
            _ => return Err(unsupported()),
        }
    }
    Ok(Split { implicit, explicit })
}

/// Stepper for the single equations of Cases 1, 3 and 4.
#[derive(Debug)]
pub struct ScalarStepper {
    sp: Spectral,
    bath: SampledBathymetry,
    p: SmallParams,
    regime: Regime,
    cfg: StepperConfig,
    op: OperatorSymbol,
    explicit: EvalPlan,
}

impl ScalarStepper {
    pub fn new(
        grid: Grid2D,
        bath: SampledBathymetry,
        p: SmallParams,
        r: Regime,
        form: Form,
        cfg: StepperConfig,
    ) -> Result<Self> {
        if matches!(r, Regime::Case2 | Regime::Case3ST) {
            return Err(Error::UnsupportedRegime(format!(
                "{r}: the single equation for f cannot be time-stepped; use the pair formulation"
            )));
        }
        if *bath.h.grid() != grid {
            return Err(Error::GridMismatch);
        }
        let split = split_plan(&golden_plan(r, form)?, r)?;
        let mut op = OperatorSymbol::constant(0.0);
        for t in &split.implicit {
            let m = &split.explicit.monomials[t.factors[0]];
            let c = EvalPlan::coefficient(t, &p)?;
            op = op.with(m.a, m.b, c)?;
        }
        Ok(Self {
            sp: Spectral::new(grid),
            bath,
            p,
            regime: r,
            cfg: cfg.validated()?,
            op,
            explicit: split.explicit,
        })
    }

    pub fn spectral(&self) -> &Spectral {
        &self.sp
    }

    pub fn config(&self) -> &StepperConfig {
        &self.cfg
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    /// `f_tt` implied by the equation at the given state.
    pub fn ftt(&self, f: &Field2D, q: &Field2D) -> Result<Field2D> {
        let jet = NumericJet::new(self.sp.clone(), &[f, q])?;
        let rest = self.explicit.evaluate(&jet, &self.bath, &self.p)?;
        let mut spec = self.sp.forward(&rest)?;
        if self.cfg.dealias {
            self.sp.dealias_spectrum(&mut spec);
        }
        spec.data_mut().iter_mut().for_each(|c| *c = -*c);
        Ok(self.sp.inverse(&self.sp.invert_symbol_spectrum(
            &spec,
            &self.op,
            self.op.default_tol(),
        )?))
    }

    /// Jet of the current state closed by the equation-supplied `f_tt`.
    pub fn jet(&self, s: &ScalarState) -> Result<NumericJet> {
        let ftt = self.ftt(&s.f, &s.q)?;
        NumericJet::new(self.sp.clone(), &[&s.f, &s.q, &ftt])
    }

    /// One RK4 step of `f_t = q`, `q_t = f_tt`.
    pub fn step(&self, s: &ScalarState) -> Result<ScalarState> {
        let dt = self.cfg.dt;
        let t = s.t;
        let rhs = |f: &Field2D, q: &Field2D| -> Result<(Field2D, Field2D)> {
            match self.ftt(f, q) {
                Ok(a) if a.is_finite() => Ok((q.clone(), a)),
                Ok(_) | Err(Error::NonFinite(_)) => Err(Error::NonFiniteState { t }),
                Err(e) => Err(e),
            }
        };
        let shift = |u: &Field2D, k: &Field2D, h: f64| {
            let mut v = u.clone();
            v.axpy(h, k);
            v
        };
        let (k1f, k1q) = rhs(&s.f, &s.q)?;
        let (k2f, k2q) = rhs(&shift(&s.f, &k1f, dt / 2.0), &shift(&s.q, &k1q, dt / 2.0))?;
        let (k3f, k3q) = rhs(&shift(&s.f, &k2f, dt / 2.0), &shift(&s.q, &k2q, dt / 2.0))?;
        let (k4f, k4q) = rhs(&shift(&s.f, &k3f, dt), &shift(&s.q, &k3q, dt))?;
        let comb = |u: &Field2D, a: &Field2D, b: &Field2D, c: &Field2D, d: &Field2D| {
            let mut v = u.clone();
            v.axpy(dt / 6.0, a);
            v.axpy(dt / 3.0, b);
            v.axpy(dt / 3.0, c);
            v.axpy(dt / 6.0, d);
            v
        };
        let mut f = comb(&s.f, &k1f, &k2f, &k3f, &k4f);
        let mut q = comb(&s.q, &k1q, &k2q, &k3q, &k4q);
        if !(f.is_finite() && q.is_finite()) {
            return Err(Error::NonFiniteState { t: t + dt });
        }
        if let Some(st) = self.cfg.filter {
            f = self.sp.filter(&f, st)?;
            q = self.sp.filter(&q, st)?;
        }
        Ok(ScalarState { f, q, t: t + dt })
    }
}

/// Free-function form of [`ScalarStepper::step`].
pub fn scalar_step(
    state: &ScalarState,
    cfg: StepperConfig,
    bath: &SampledBathymetry,
    p: &SmallParams,
    r: Regime,
    form: Form,
) -> Result<ScalarState> {
    ScalarStepper::new(*state.f.grid(), bath.clone(), *p, r, form, cfg)?.step(state)
}

/// Surface elevation recovered from `(f, f_t)` by the regime's recovery formula.
pub fn eta_from_f(
    sp: &Spectral,
    state: &ScalarState,
    p: &SmallParams,
    r: Regime,
) -> Result<Field2D> {
    if r == Regime::Case4 && p.tau * p.beta.max(p.gamma) > TAU_NEGLIGIBLE {
        return Err(Error::TauNotNegligible { tau: p.tau });
    }
    let plan = emit_evaluator(&printed::eta_recovery(r)?);
    let jet = NumericJet::new(sp.clone(), &[&state.f, &state.q])?;
    plan.evaluate_with(p, &mut |m: &Monomial| match m.base {
        Base::F => jet.deriv(m.a, m.b, m.c),
        _ => Err(Error::Oracle(format!(
            "unexpected factor {m} in the recovery formula"
        ))),
    })
}
