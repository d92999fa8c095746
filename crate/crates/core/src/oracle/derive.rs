//! Machine derivation of the single equations for f from the Boussinesq pairs.

use num_rational::Rational64;
use num_traits::One;

use super::printed;
use super::termsum::{Base, Monomial, TermSum, Weights};
use crate::error::{Error, Result};
use crate::params::Regime;

/// Parameter weights in powers of the leading parameter and the retained order.
pub fn ordering(r: Regime) -> (Weights, i32) {
    match r {
        Regime::Case1 => (Weights([1, 1, 1, 1, 0]), 1),
        Regime::Case2 => (Weights([1, 1, 1, 2, 0]), 2),
        Regime::Case3 | Regime::Case3ST => (Weights([2, 1, 2, 2, 0]), 2),
        Regime::Case4 => (Weights([1, 2, 2, 2, 0]), 2),
    }
}

fn eta() -> Monomial {
    Monomial::new(Base::Eta, 0, 0, 0).expect("order 0")
}

/// Solve `η + R(f, η) = 0` for η by repeated substitution, truncating at `max`.
pub fn solve_for_eta(dynamic: &TermSum, w: &Weights, max: i32) -> Result<TermSum> {
    let lead = TermSum::monomial(eta());
    let rest = dynamic.sub(&lead);
    let mut cur = rest
        .filter(|_, f| f.iter().all(|m| m.base != Base::Eta))
        .neg()
        .truncate(w, max);
    for _ in 0..=(max.max(0) as usize + 2) {
        let next = rest
            .substitute(&Base::Eta, &cur, w, max)?
            .neg()
            .truncate(w, max);
        if next == cur {
            return Ok(cur);
        }
        cur = next;
    }
    Err(Error::Oracle(
        "eta elimination did not reach a fixed point".into(),
    ))
}

/// Recovery of η from f by eliminating it from the dynamic equation (τ = 0).
pub fn derive_eta(r: Regime) -> Result<TermSum> {
    if r == Regime::Case3ST {
        return Err(Error::UnsupportedRegime(
            "case3st: eta cannot be expressed through f".into(),
        ));
    }
    let (w, max) = ordering(r);
    let (_, dynamic) = printed::pair(r)?;
    solve_for_eta(&dynamic.drop_param(4), &w, max)
}

/// The kinematic equation with η eliminated, before any zeroth-order rewriting.
pub fn derive_raw(r: Regime) -> Result<TermSum> {
    let (w, max) = ordering(r);
    let (kin, _) = printed::pair(r)?;
    let eta = derive_eta(r)?;
    Ok(kin.substitute(&Base::Eta, &eta, &w, max)?.truncate(&w, max))
}

/// Replace every `f` factor with two or more time derivatives, in terms of
/// positive order, through the zeroth-order relation `f_tt = f_xx + (γ/β) f_yy`.
pub fn zeroth_order_replacement(ts: &TermSum, w: &Weights) -> Result<TermSum> {
    let ftt = TermSum::monomial(Monomial::f(2, 0, 0)).add(&TermSum::term(
        Rational64::one(),
        [0, -1, 1, 0, 0],
        vec![Monomial::f(0, 2, 0)],
    ));
    let mut cur = ts.clone();
    loop {
        let mut out = TermSum::zero();
        let mut changed = false;
        for ((g, f), c) in cur.iter() {
            let pos = f.iter().position(|m| m.base == Base::F && m.c >= 2);
            match pos {
                Some(i) if w.grade(g) >= 1 => {
                    changed = true;
                    let m = &f[i];
                    let mut acc = TermSum::term(*c, *g, vec![]).mul(&ftt.differentiate_n(
                        m.a,
                        m.b,
                        m.c - 2,
                    )?)?;
                    for (j, o) in f.iter().enumerate() {
                        if j != i {
                            acc = acc.mul(&TermSum::monomial(o.clone()))?;
                        }
                    }
                    out = out.add(&acc);
                }
                _ => out = out.add(&TermSum::term(*c, *g, f.clone())),
            }
        }
        if !changed {
            return Ok(out);
        }
        cur = out;
    }
}

/// The single equation for f, following the elimination pipeline of each
/// regime; Case 1 additionally applies the zeroth-order replacement.
pub fn derive_scalar_equation(r: Regime) -> Result<TermSum> {
    if r == Regime::Case3ST {
        return Err(Error::UnsupportedRegime(
            "case3st: eta cannot be expressed through f".into(),
        ));
    }
    let raw = derive_raw(r)?;
    if r == Regime::Case1 {
        let (w, max) = ordering(r);
        Ok(zeroth_order_replacement(&raw, &w)?.truncate(&w, max))
    } else {
        Ok(raw)
    }
}
