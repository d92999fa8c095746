//! Small expansion parameters and the regime (parameter ordering) they obey.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Ratio window used to flag order mixing between parameters that a regime
/// assumes comparable.
pub const RATIO_BAND: (f64, f64) = (1.0 / 3.0, 3.0);

/// Threshold on `tau * max(beta, gamma)` above which surface tension is no
/// longer negligible in the regime that drops it.
pub const TAU_NEGLIGIBLE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SmallParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub delta: f64,
    pub tau: f64,
}

impl SmallParams {
    /// Parameters with `tau = 0`, validated.
    pub fn new(alpha: f64, beta: f64, gamma: f64, delta: f64) -> Result<Self> {
        Self {
            alpha,
            beta,
            gamma,
            delta,
            tau: 0.0,
        }
        .validated()
    }

    pub fn with_tau(mut self, tau: f64) -> Result<Self> {
        self.tau = tau;
        self.validated()
    }

    /// All four parameters equal to `eps`, `tau = 0`.
    pub fn uniform(eps: f64) -> Result<Self> {
        Self::new(eps, eps, eps, eps)
    }

    /// `alpha`, `beta`, `gamma` in (0, 1); `delta` in [0, 1); `tau >= 0`.
    pub fn validated(self) -> Result<Self> {
        let open = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 && v < 1.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!(
                    "{name} = {v} must lie in (0, 1)"
                )))
            }
        };
        open("alpha", self.alpha)?;
        open("beta", self.beta)?;
        open("gamma", self.gamma)?;
        if !(self.delta.is_finite() && (0.0..1.0).contains(&self.delta)) {
            return Err(Error::InvalidParameter(format!(
                "delta = {} must lie in [0, 1)",
                self.delta
            )));
        }
        if !(self.tau.is_finite() && self.tau >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tau = {} must be >= 0",
                self.tau
            )));
        }
        Ok(self)
    }

    /// The transverse ratio `gamma / beta`.
    pub fn ratio(&self) -> f64 {
        self.gamma / self.beta
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    /// alpha, gamma, delta all of order beta.
    Case1,
    /// alpha, gamma of order beta; delta of order beta squared.
    Case2,
    /// alpha, gamma, delta of order beta squared; no surface tension.
    Case3,
    /// Case3 with surface tension retained.
    Case3ST,
    /// beta, gamma, delta of order alpha squared.
    Case4,
}

impl Regime {
    pub const ALL: [Regime; 5] = [
        Regime::Case1,
        Regime::Case2,
        Regime::Case3,
        Regime::Case3ST,
        Regime::Case4,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Regime::Case1 => "1",
            Regime::Case2 => "2",
            Regime::Case3 => "3",
            Regime::Case3ST => "3st",
            Regime::Case4 => "4",
        }
    }

    pub fn has_surface_tension(&self) -> bool {
        matches!(self, Regime::Case3ST | Regime::Case4)
    }
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "case{}", self.name())
    }
}

impl FromStr for Regime {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let t = t.strip_prefix("case").unwrap_or(&t);
        match t {
            "1" => Ok(Regime::Case1),
            "2" => Ok(Regime::Case2),
            "3" => Ok(Regime::Case3),
            "3st" | "3a" | "5a" => Ok(Regime::Case3ST),
            "4" => Ok(Regime::Case4),
            _ => Err(Error::InvalidParameter(format!(
                "unknown regime `{s}` (expected 1, 2, 3, 3st or 4)"
            ))),
        }
    }
}

/// Scale a physical configuration into small parameters.
///
/// Lengths `a` (amplitude), `h` (depth), `l_long`, `l_trans` (wavelengths),
/// `a_h` (bottom amplitude); `tension` in N/m, `rho` in kg/m³, `g` in m/s².
#[allow(clippy::too_many_arguments)]
pub fn nondimensionalize(
    a: f64,
    h: f64,
    l_long: f64,
    l_trans: f64,
    a_h: f64,
    tension: f64,
    rho: f64,
    g: f64,
) -> Result<SmallParams> {
    for (name, v) in [
        ("a", a),
        ("H", h),
        ("L", l_long),
        ("l", l_trans),
        ("rho", rho),
        ("g", g),
    ] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} must be positive"
            )));
        }
    }
    for (name, v) in [("a_h", a_h), ("T", tension)] {
        if !(v.is_finite() && v >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{name} = {v} must be non-negative"
            )));
        }
    }
    Ok(SmallParams {
        alpha: a / h,
        beta: (h / l_long).powi(2),
        gamma: (h / l_trans).powi(2),
        delta: a_h / h,
        tau: tension / (rho * g * h * h),
    })
}

/// A regime constant such as `A = alpha / beta`, with its band verdict.
#[derive(Debug, Clone, PartialEq)]
pub struct RatioReport {
    pub name: &'static str,
    pub value: f64,
    pub in_band: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegimeDiagnostics {
    pub ratios: Vec<RatioReport>,
    pub warnings: Vec<String>,
}

impl RegimeDiagnostics {
    pub fn ratio(&self, name: &str) -> Option<f64> {
        self.ratios.iter().find(|r| r.name == name).map(|r| r.value)
    }
}

/// Compute the regime constants and flag any outside [`RATIO_BAND`].
///
/// The band is a heuristic for "comparable to one"; it is a warning, never an
/// error. A zero `D` is allowed (flat bottom) and reported without a warning.
pub fn validate_regime(p: &SmallParams, r: Regime) -> Result<RegimeDiagnostics> {
    let (lead, b2) = (p.beta, p.beta * p.beta);
    let a2 = p.alpha * p.alpha;
    let entries: Vec<(&'static str, f64, bool)> = match r {
        Regime::Case1 => vec![
            ("A", p.alpha / lead, true),
            ("G", p.gamma / lead, true),
            ("D", p.delta / lead, false),
        ],
        Regime::Case2 => vec![
            ("A", p.alpha / lead, true),
            ("G", p.gamma / lead, true),
            ("D", p.delta / b2, false),
        ],
        Regime::Case3 | Regime::Case3ST => vec![
            ("A", p.alpha / b2, true),
            ("G", p.gamma / lead, true),
            ("D", p.delta / lead, false),
        ],
        Regime::Case4 => vec![
            ("B", p.beta / a2, true),
            ("G", p.gamma / a2, true),
            ("D", p.delta / a2, false),
        ],
    };
    let mut d = RegimeDiagnostics::default();
    for (name, value, required) in entries {
        if !value.is_finite() || (required && value == 0.0) {
            return Err(Error::InvalidParameter(format!(
                "regime constant {name} = {value} for {r}"
            )));
        }
        let in_band = (RATIO_BAND.0..=RATIO_BAND.1).contains(&value);
        if !in_band && !(name == "D" && value == 0.0) {
            d.warnings.push(format!(
                "{r}: {name} = {value:.6} lies outside the heuristic band [1/3, 3]; the assumed ordering may be mixed"
            ));
        }
        d.ratios.push(RatioReport {
            name,
            value,
            in_band,
        });
    }
    let st = p.tau * p.beta.max(p.gamma);
    if r == Regime::Case3 && st > TAU_NEGLIGIBLE {
        d.warnings.push(format!(
            "{r}: tau*max(beta,gamma) = {st:.3e} > {TAU_NEGLIGIBLE:e}; surface tension is not negligible, use case 3st"
        ));
    }
    if r == Regime::Case3ST && p.tau == 0.0 {
        d.warnings
            .push(format!("{r}: tau = 0; identical to case 3"));
    }
    Ok(d)
}
