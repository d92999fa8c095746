//! Exact sums of parameter-weighted derivative monomials.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Largest total derivative order carried by a monomial.
pub const MAX_MONOMIAL_ORDER: u8 = 8;
/// Largest absolute parameter exponent.
pub const MAX_EXPONENT: i32 = 16;

/// Parameter exponents in the order α, β, γ, δ, τ. The ratio γ/β is `[0,-1,1,0,0]`.
pub type Grade = [i32; 5];

pub const PARAM_NAMES: [&str; 5] = ["alpha", "beta", "gamma", "delta", "tau"];

pub const UNIT: Grade = [0; 5];

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    F,
    Eta,
    H,
    /// A symbol with no derivative reading, kept verbatim (e.g. `h_h`).
    Sym(String),
}

/// `∂x^a ∂y^b ∂t^c` of a base symbol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial {
    pub base: Base,
    pub a: u8,
    pub b: u8,
    pub c: u8,
}

impl Monomial {
    pub fn new(base: Base, a: u8, b: u8, c: u8) -> Result<Self> {
        if a as u32 + b as u32 + c as u32 > MAX_MONOMIAL_ORDER as u32 {
            return Err(Error::Oracle(format!(
                "derivative order {} exceeds {}",
                a + b + c,
                MAX_MONOMIAL_ORDER
            )));
        }
        if base == Base::H && c > 0 {
            return Err(Error::Oracle(
                "the bottom carries no time derivatives".into(),
            ));
        }
        Ok(Self { base, a, b, c })
    }

    pub fn f(a: u8, b: u8, c: u8) -> Self {
        Self::new(Base::F, a, b, c).expect("order within cap")
    }

    pub fn order(&self) -> u8 {
        self.a + self.b + self.c
    }

    /// Derivative along `var` (0 = x, 1 = y, 2 = t); `None` when identically zero.
    pub fn differentiate(&self, var: usize) -> Result<Option<Monomial>> {
        match &self.base {
            Base::Sym(s) => {
                return Err(Error::Oracle(format!(
                    "cannot differentiate the uninterpreted symbol `{s}`"
                )))
            }
            Base::H if var == 2 => return Ok(None),
            _ => {}
        }
        let mut m = self.clone();
        match var {
            0 => m.a += 1,
            1 => m.b += 1,
            _ => m.c += 1,
        }
        Monomial::new(m.base, m.a, m.b, m.c).map(Some)
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match &self.base {
            Base::F => "f",
            Base::Eta => "eta",
            Base::H => "h",
            Base::Sym(s) => return write!(f, "{s}"),
        };
        write!(f, "{name}")?;
        if self.order() == 0 {
            return Ok(());
        }
        write!(f, "_")?;
        for (n, v) in [(self.a, 'x'), (self.b, 'y'), (self.c, 't')] {
            match n {
                0 => {}
                1 => write!(f, "{v}")?,
                _ => write!(f, "{n}{v}")?,
            }
        }
        Ok(())
    }
}

/// Normal-form key: grade plus sorted factor multiset.
pub type Key = (Grade, Vec<Monomial>);

/// A finite sum `Σ c · α^e0 β^e1 γ^e2 δ^e3 τ^e4 · Π monomials` in normal form.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct TermSum {
    terms: BTreeMap<Key, Rational64>,
}

/// Per-parameter weights in powers of the regime's leading parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Weights(pub [i32; 5]);

impl Weights {
    pub fn grade(&self, g: &Grade) -> i32 {
        self.0.iter().zip(g).map(|(w, e)| w * e).sum()
    }
}

fn add_grades(a: &Grade, b: &Grade) -> Result<Grade> {
    let mut out = [0; 5];
    for i in 0..5 {
        out[i] = a[i] + b[i];
        if out[i].abs() > MAX_EXPONENT {
            return Err(Error::Oracle(format!(
                "exponent of {} overflows ({})",
                PARAM_NAMES[i], out[i]
            )));
        }
    }
    Ok(out)
}

impl TermSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(c: Rational64) -> Self {
        Self::term(c, UNIT, vec![])
    }

    pub fn one() -> Self {
        Self::constant(Rational64::one())
    }

    pub fn term(c: Rational64, grade: Grade, mut factors: Vec<Monomial>) -> Self {
        let mut s = Self::zero();
        factors.sort();
        s.add_key((grade, factors), c);
        s
    }

    pub fn monomial(m: Monomial) -> Self {
        Self::term(Rational64::one(), UNIT, vec![m])
    }

    pub fn param(grade: Grade) -> Self {
        Self::term(Rational64::one(), grade, vec![])
    }

    fn add_key(&mut self, key: Key, c: Rational64) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Key, &Rational64)> {
        self.terms.iter()
    }

    pub fn add(&self, other: &TermSum) -> TermSum {
        let mut out = self.clone();
        for (k, c) in &other.terms {
            out.add_key(k.clone(), *c);
        }
        out
    }

    pub fn sub(&self, other: &TermSum) -> TermSum {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TermSum {
        self.scale(-Rational64::one())
    }

    pub fn scale(&self, c: Rational64) -> TermSum {
        let mut out = TermSum::zero();
        for (k, v) in &self.terms {
            out.add_key(k.clone(), *v * c);
        }
        out
    }

    pub fn mul(&self, other: &TermSum) -> Result<TermSum> {
        let mut out = TermSum::zero();
        for ((ga, fa), ca) in &self.terms {
            for ((gb, fb), cb) in &other.terms {
                let mut f = fa.clone();
                f.extend(fb.iter().cloned());
                f.sort();
                out.add_key((add_grades(ga, gb)?, f), *ca * *cb);
            }
        }
        Ok(out)
    }

    pub fn pow(&self, n: u32) -> Result<TermSum> {
        let mut out = TermSum::one();
        for _ in 0..n {
            out = out.mul(self)?;
        }
        Ok(out)
    }

    /// Product-rule derivative along `var` (0 = x, 1 = y, 2 = t).
    pub fn differentiate(&self, var: usize) -> Result<TermSum> {
        let mut out = TermSum::zero();
        for ((g, f), c) in &self.terms {
            for i in 0..f.len() {
                if let Some(d) = f[i].differentiate(var)? {
                    let mut nf = f.clone();
                    nf[i] = d;
                    nf.sort();
                    out.add_key((*g, nf), *c);
                }
            }
        }
        Ok(out)
    }

    pub fn differentiate_n(&self, a: u8, b: u8, c: u8) -> Result<TermSum> {
        let mut out = self.clone();
        for (var, n) in [(0, a), (1, b), (2, c)] {
            for _ in 0..n {
                out = out.differentiate(var)?;
            }
        }
        Ok(out)
    }

    /// Drop every term whose weighted grade exceeds `max`.
    pub fn truncate(&self, w: &Weights, max: i32) -> TermSum {
        self.filter(|g, _| w.grade(g) <= max)
    }

    /// Drop every term carrying a positive power of parameter `i`.
    pub fn drop_param(&self, i: usize) -> TermSum {
        self.filter(|g, _| g[i] <= 0)
    }

    pub fn filter(&self, keep: impl Fn(&Grade, &[Monomial]) -> bool) -> TermSum {
        TermSum {
            terms: self
                .terms
                .iter()
                .filter(|((g, f), _)| keep(g, f))
                .map(|(k, v)| (k.clone(), *v))
                .collect(),
        }
    }

    /// Replace every occurrence of `base` (with its derivatives) by the
    /// corresponding derivative of `value`, truncating intermediate products.
    pub fn substitute(
        &self,
        base: &Base,
        value: &TermSum,
        w: &Weights,
        max: i32,
    ) -> Result<TermSum> {
        let mut out = TermSum::zero();
        let mut cache: BTreeMap<(u8, u8, u8), TermSum> = BTreeMap::new();
        for ((g, f), c) in &self.terms {
            let mut acc = TermSum::term(*c, *g, vec![]);
            for m in f {
                let piece = if &m.base == base {
                    let key = (m.a, m.b, m.c);
                    if let std::collections::btree_map::Entry::Vacant(e) = cache.entry(key) {
                        e.insert(value.differentiate_n(m.a, m.b, m.c)?);
                    }
                    cache[&key].clone()
                } else {
                    TermSum::monomial(m.clone())
                };
                acc = acc.mul(&piece)?.truncate(w, max);
            }
            out = out.add(&acc);
        }
        Ok(out)
    }

    pub fn contains_base(&self, base: &Base) -> bool {
        self.terms
            .keys()
            .any(|(_, f)| f.iter().any(|m| &m.base == base))
    }

    /// Every distinct monomial, sorted.
    pub fn monomials(&self) -> Vec<Monomial> {
        let mut v: Vec<Monomial> = self
            .terms
            .keys()
            .flat_map(|(_, f)| f.iter().cloned())
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Normalized difference `a − b`; empty means identical.
pub fn diff_termsums(a: &TermSum, b: &TermSum) -> TermSum {
    a.sub(b)
}

fn fmt_grade(g: &Grade) -> String {
    let mut parts = Vec::new();
    for (i, e) in g.iter().enumerate() {
        match *e {
            0 => {}
            1 => parts.push(PARAM_NAMES[i].to_string()),
            e => parts.push(format!("{}^{}", PARAM_NAMES[i], e)),
        }
    }
    parts.join(" ")
}

fn fmt_factors(f: &[Monomial]) -> String {
    let mut parts: Vec<String> = Vec::new();
    let mut i = 0;
    while i < f.len() {
        let mut j = i;
        while j < f.len() && f[j] == f[i] {
            j += 1;
        }
        parts.push(if j - i == 1 {
            f[i].to_string()
        } else {
            format!("{}^{}", f[i], j - i)
        });
        i = j;
    }
    parts.join(" ")
}

impl fmt::Display for TermSum {
    /// One term per line: `coef | params | factors`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return writeln!(f, "0");
        }
        for ((g, fac), c) in &self.terms {
            let sign = if c.is_negative() { "-" } else { "+" };
            writeln!(
                f,
                "{sign} {} | {} | {}",
                c.abs(),
                fmt_grade(g),
                fmt_factors(fac)
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational64 {
        Rational64::new(n, d)
    }

    const ALPHA: Grade = [1, 0, 0, 0, 0];
    const BETA: Grade = [0, 1, 0, 0, 0];

    #[test]
    fn product_rule_on_square() {
        let fx = TermSum::monomial(Monomial::f(1, 0, 0));
        let sq = fx.mul(&fx).unwrap();
        let d = sq.differentiate(0).unwrap();
        let want = TermSum::term(
            r(2, 1),
            UNIT,
            vec![Monomial::f(1, 0, 0), Monomial::f(2, 0, 0)],
        );
        assert_eq!(d, want);
    }

    #[test]
    fn truncation_drops_high_grade() {
        let w = Weights([1, 1, 1, 1, 0]);
        let a = TermSum::term(r(1, 1), ALPHA, vec![Monomial::f(0, 0, 1)]);
        let b = TermSum::term(r(1, 1), BETA, vec![Monomial::f(2, 0, 1)]);
        assert!(a.mul(&b).unwrap().truncate(&w, 1).is_empty());
    }

    #[test]
    fn inversion_trick() {
        let w = Weights([1, 1, 1, 2, 0]);
        let x = TermSum::term(r(1, 1), [1, 1, 0, 0, 0], vec![Monomial::f(2, 0, 1)]);
        let p = TermSum::one()
            .sub(&x)
            .mul(&TermSum::one().add(&x))
            .unwrap()
            .truncate(&w, 2);
        assert_eq!(p, TermSum::one());
    }

    #[test]
    fn cancellation_leaves_empty() {
        let a = TermSum::monomial(Monomial::f(1, 1, 0));
        assert!(diff_termsums(&a, &a).is_empty());
        assert!(a.sub(&a).terms.is_empty());
    }

    #[test]
    fn bottom_has_no_time_derivative() {
        let h = TermSum::monomial(Monomial::new(Base::H, 0, 0, 0).unwrap());
        assert!(h.differentiate(2).unwrap().is_empty());
        assert_eq!(h.differentiate(0).unwrap().len(), 1);
    }

    #[test]
    fn order_cap_and_symbols() {
        assert!(Monomial::new(Base::F, 5, 4, 0).is_err());
        let m = TermSum::monomial(Monomial::f(8, 0, 0));
        assert!(m.differentiate(0).is_err());
        let s = TermSum::monomial(Monomial::new(Base::Sym("h_h".into()), 0, 0, 0).unwrap());
        assert!(s.differentiate(0).is_err());
    }

    #[test]
    fn substitution_expands_derivatives() {
        let w = Weights([1, 1, 1, 1, 0]);
        // eta_x with eta = -f_t  ->  -f_xt
        let e = TermSum::monomial(Monomial::new(Base::Eta, 1, 0, 0).unwrap());
        let v = TermSum::monomial(Monomial::f(0, 0, 1)).neg();
        let got = e.substitute(&Base::Eta, &v, &w, 1).unwrap();
        assert_eq!(got, TermSum::monomial(Monomial::f(1, 0, 1)).neg());
    }

    #[test]
    fn display_groups_powers() {
        let fx = TermSum::term(
            r(-3, 2),
            ALPHA,
            vec![
                Monomial::f(1, 0, 0),
                Monomial::f(1, 0, 0),
                Monomial::f(2, 0, 0),
            ],
        );
        assert_eq!(fx.to_string(), "- 3/2 | alpha | f_x^2 f_2x\n");
    }
}
