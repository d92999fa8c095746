//! Compiled evaluation plans: a monomial request list plus a coefficient table.
//!
//! Plans for the single equations are generated by the oracle and committed
//! under `golden/`; runtime evaluation only reads them.

use std::fmt::Write as _;

use num_rational::Rational64;
use num_traits::ToPrimitive;

use super::termsum::{Base, Grade, Monomial, TermSum};
use crate::bathymetry::SampledBathymetry;
use crate::error::{Error, Result};
use crate::grid::Field2D;
use crate::jet::JetProvider;
use crate::params::{Regime, SmallParams};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlanTerm {
    pub coef: Rational64,
    pub grade: Grade,
    /// Indices into [`EvalPlan::monomials`], repeated for powers.
    pub factors: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct EvalPlan {
    pub monomials: Vec<Monomial>,
    pub terms: Vec<PlanTerm>,
}

/// Which version of a single equation to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Form {
    Printed,
    #[default]
    Consistent,
}

impl Form {
    pub fn name(&self) -> &'static str {
        match self {
            Form::Printed => "printed",
            Form::Consistent => "consistent",
        }
    }
}

impl std::str::FromStr for Form {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "printed" => Ok(Form::Printed),
            "consistent" => Ok(Form::Consistent),
            _ => Err(Error::InvalidParameter(format!(
                "form `{s}` (expected printed or consistent)"
            ))),
        }
    }
}

pub fn emit_evaluator(ts: &TermSum) -> EvalPlan {
    let monomials = ts.monomials();
    let terms = ts
        .iter()
        .map(|((g, f), c)| PlanTerm {
            coef: *c,
            grade: *g,
            factors: f
                .iter()
                .map(|m| monomials.binary_search(m).expect("listed"))
                .collect(),
        })
        .collect();
    EvalPlan { monomials, terms }
}

fn mono_line(m: &Monomial) -> String {
    match &m.base {
        Base::F => format!("f {} {} {}", m.a, m.b, m.c),
        Base::Eta => format!("eta {} {} {}", m.a, m.b, m.c),
        Base::H => format!("h {} {} {}", m.a, m.b, m.c),
        Base::Sym(s) => format!("sym {s}"),
    }
}

impl EvalPlan {
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Line-based text form, stable across runs.
    pub fn to_text(&self) -> String {
        let mut s = String::from("plan 1\n");
        for m in &self.monomials {
            let _ = writeln!(s, "monomial {}", mono_line(m));
        }
        for t in &self.terms {
            let g: Vec<String> = t.grade.iter().map(|e| e.to_string()).collect();
            let f: Vec<String> = t.factors.iter().map(|i| i.to_string()).collect();
            let _ = writeln!(s, "term {} {} : {}", t.coef, g.join(" "), f.join(" "));
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |n: usize, what: &str| Error::Oracle(format!("plan line {}: {what}", n + 1));
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "plan 1")) => {}
            _ => return Err(bad(0, "missing `plan 1` header")),
        }
        let mut plan = EvalPlan::default();
        for (n, line) in lines {
            let mut it = line.split_whitespace();
            match it.next() {
                Some("monomial") => {
                    let kind = it.next().ok_or_else(|| bad(n, "monomial kind"))?;
                    let m = if kind == "sym" {
                        Monomial::new(
                            Base::Sym(it.next().ok_or_else(|| bad(n, "symbol name"))?.into()),
                            0,
                            0,
                            0,
                        )?
                    } else {
                        let base = match kind {
                            "f" => Base::F,
                            "eta" => Base::Eta,
                            "h" => Base::H,
                            _ => return Err(bad(n, "unknown monomial kind")),
                        };
                        let mut idx = [0u8; 3];
                        for v in &mut idx {
                            *v = it
                                .next()
                                .and_then(|s| s.parse().ok())
                                .ok_or_else(|| bad(n, "derivative index"))?;
                        }
                        Monomial::new(base, idx[0], idx[1], idx[2])?
                    };
                    plan.monomials.push(m);
                }
                Some("term") => {
                    let coef: Rational64 = it
                        .next()
                        .and_then(|s| s.parse().ok())
                        .ok_or_else(|| bad(n, "coefficient"))?;
                    let mut grade = [0i32; 5];
                    for g in &mut grade {
                        *g = it
                            .next()
                            .and_then(|s| s.parse().ok())
                            .ok_or_else(|| bad(n, "exponent"))?;
                    }
                    if it.next() != Some(":") {
                        return Err(bad(n, "expected `:`"));
                    }
                    let factors = it
                        .map(|s| {
                            s.parse::<usize>()
                                .ok()
                                .filter(|&i| i < plan.monomials.len())
                        })
                        .collect::<Option<Vec<_>>>()
                        .ok_or_else(|| bad(n, "factor index"))?;
                    plan.terms.push(PlanTerm {
                        coef,
                        grade,
                        factors,
                    });
                }
                None => {}
                Some(_) => return Err(bad(n, "unknown record")),
            }
        }
        Ok(plan)
    }

    /// Numeric value of a term's parameter factor.
    pub fn coefficient(t: &PlanTerm, p: &SmallParams) -> Result<f64> {
        let vals = [p.alpha, p.beta, p.gamma, p.delta, p.tau];
        let mut v = t.coef.to_f64().expect("finite rational");
        for (x, e) in vals.iter().zip(t.grade) {
            if e != 0 {
                v *= x.powi(e);
            }
        }
        if !v.is_finite() {
            return Err(Error::InvalidParameter(
                "a plan coefficient has a vanishing parameter in its denominator".into(),
            ));
        }
        Ok(v)
    }

    /// Evaluate `Σ c Π m` pointwise, fetching each monomial once.
    pub fn evaluate_with(
        &self,
        p: &SmallParams,
        fetch: &mut dyn FnMut(&Monomial) -> Result<Field2D>,
    ) -> Result<Field2D> {
        let coefs = self
            .terms
            .iter()
            .map(|t| Self::coefficient(t, p))
            .collect::<Result<Vec<_>>>()?;
        let mut needed = vec![false; self.monomials.len()];
        for (t, c) in self.terms.iter().zip(&coefs) {
            if *c != 0.0 {
                t.factors.iter().for_each(|&i| needed[i] = true);
            }
        }
        let mut fields: Vec<Option<Field2D>> = vec![None; self.monomials.len()];
        for (i, m) in self.monomials.iter().enumerate() {
            if needed[i] {
                fields[i] = Some(fetch(m)?);
            }
        }
        let grid = match fields.iter().flatten().next() {
            Some(f) => *f.grid(),
            None => {
                // Only constant terms survive: evaluate through a zero-order f request.
                *fetch(&Monomial::f(0, 0, 0))?.grid()
            }
        };
        let mut out = vec![0.0; grid.len()];
        for (t, c) in self.terms.iter().zip(&coefs) {
            if *c == 0.0 {
                continue;
            }
            for (k, o) in out.iter_mut().enumerate() {
                let mut v = *c;
                for &i in &t.factors {
                    v *= fields[i].as_ref().expect("fetched").values()[k];
                }
                *o += v;
            }
        }
        Field2D::from_values(grid, out)
    }

    /// Evaluate on a jet of f over a sampled bottom.
    pub fn evaluate(
        &self,
        jet: &dyn JetProvider,
        bath: &SampledBathymetry,
        p: &SmallParams,
    ) -> Result<Field2D> {
        self.evaluate_with(p, &mut |m: &Monomial| match (&m.base, m.a, m.b, m.c) {
            (Base::F, a, b, c) => jet.deriv(a, b, c),
            (Base::H, 0, 0, 0) => Ok(bath.h.clone()),
            (Base::H, 1, 0, 0) => Ok(bath.hx.clone()),
            (Base::H, 0, 1, 0) => Ok(bath.hy.clone()),
            (Base::H, ..) => Err(Error::Oracle(format!(
                "bottom derivative {m} is not sampled"
            ))),
            (Base::Eta, ..) => Err(Error::Oracle(format!(
                "{m} cannot be evaluated from a jet of f"
            ))),
            (Base::Sym(s), ..) => Err(Error::Oracle(format!(
                "the typeset symbol `{s}` has no numeric reading"
            ))),
        })
    }
}

const GOLDEN: [(Regime, Form, &str); 8] = [
    (
        Regime::Case1,
        Form::Printed,
        include_str!("../../golden/case1_printed.plan"),
    ),
    (
        Regime::Case1,
        Form::Consistent,
        include_str!("../../golden/case1_consistent.plan"),
    ),
    (
        Regime::Case2,
        Form::Printed,
        include_str!("../../golden/case2_printed.plan"),
    ),
    (
        Regime::Case2,
        Form::Consistent,
        include_str!("../../golden/case2_consistent.plan"),
    ),
    (
        Regime::Case3,
        Form::Printed,
        include_str!("../../golden/case3_printed.plan"),
    ),
    (
        Regime::Case3,
        Form::Consistent,
        include_str!("../../golden/case3_consistent.plan"),
    ),
    (
        Regime::Case4,
        Form::Printed,
        include_str!("../../golden/case4_printed.plan"),
    ),
    (
        Regime::Case4,
        Form::Consistent,
        include_str!("../../golden/case4_consistent.plan"),
    ),
];

/// File name of the committed plan for a regime and form.
pub fn golden_name(r: Regime, form: Form) -> String {
    format!("{r}_{}.plan", form.name())
}

/// Regenerate a plan from the oracle (used to produce and check the golden files).
pub fn generate_plan(r: Regime, form: Form) -> Result<EvalPlan> {
    let ts = match form {
        Form::Printed => super::printed::scalar(r)?,
        Form::Consistent => super::derive::derive_scalar_equation(r)?,
    };
    Ok(emit_evaluator(&ts))
}

/// The committed plan for the single equation of a regime.
pub fn golden_plan(r: Regime, form: Form) -> Result<EvalPlan> {
    let text = GOLDEN
        .iter()
        .find(|(gr, gf, _)| *gr == r && *gf == form)
        .map(|(_, _, t)| *t)
        .ok_or_else(|| Error::UnsupportedRegime(format!("{r}: no single equation for f")))?;
    EvalPlan::from_text(text)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::parse::{parse_equation, Symbols};

    #[test]
    fn empty_and_single_term_plans() {
        assert!(emit_evaluator(&TermSum::zero()).is_empty());
        let ts = parse_equation("alpha f_t f_xx", &Symbols::standard()).unwrap();
        let p = emit_evaluator(&ts);
        assert_eq!(
            p.monomials,
            vec![Monomial::f(0, 0, 1), Monomial::f(2, 0, 0)]
        );
        assert_eq!(p.terms.len(), 1);
        assert_eq!(p.terms[0].grade, [1, 0, 0, 0, 0]);
        assert_eq!(p.terms[0].factors, vec![0, 1]);
    }

    #[test]
    fn text_round_trip() {
        let ts = parse_equation(
            "-1/6 beta f_4x + G h_x f_y^2 - h_h f_y + 3",
            &Symbols::standard(),
        )
        .unwrap();
        let p = emit_evaluator(&ts);
        let back = EvalPlan::from_text(&p.to_text()).unwrap();
        assert_eq!(back, p);
        assert!(EvalPlan::from_text("plan 2\n").is_err());
        assert!(EvalPlan::from_text("plan 1\nterm 1 0 0 0 0 0 : 3\n").is_err());
    }

    #[test]
    fn golden_plans_match_the_oracle() {
        let bless = std::env::var_os("B2P1_BLESS").is_some();
        let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("golden");
        for (r, form, text) in GOLDEN {
            let fresh = generate_plan(r, form).unwrap().to_text();
            if bless {
                std::fs::write(dir.join(golden_name(r, form)), &fresh).unwrap();
            } else {
                assert_eq!(text, fresh, "golden plan {} is stale", golden_name(r, form));
            }
        }
    }
}
