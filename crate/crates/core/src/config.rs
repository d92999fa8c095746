//! Run configuration (TOML).
//!
//! Required sections are `[grid]`, `[params]`, `[regime]`, `[initial]` and
//! `[time]`; `[bathymetry]` defaults to a flat bottom and `[output]` to
//! `dir = "out"`. Optional `[perturb]`, `[sweep]`, `[potential]` and
//! `[soliton]` sections configure the matching subcommands. Unknown keys are
//! rejected with their line number.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Deserialize;
use thiserror::Error;

use crate::bathymetry::{Bathymetry, TrigTerm};
use crate::cascade::{PlaneComponent, ResonancePolicy, SourceForm, DEFAULT_TOL_RES};
use crate::grid::Grid2D;
use crate::oracle::Form;
use crate::params::{validate_regime, Regime, SmallParams};
use crate::surface_tension::StMode;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("line {line}: missing key `{key}`")]
    MissingKey { key: String, line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: bad value for `{key}`: {message}")]
    TypeError {
        key: String,
        line: usize,
        message: String,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
}

impl ConfigError {
    pub fn code(&self) -> &'static str {
        match self {
            ConfigError::MissingKey { .. } => "config-missing-key",
            ConfigError::UnknownKey { .. } => "config-unknown-key",
            ConfigError::TypeError { .. } => "config-type-error",
            ConfigError::Syntax { .. } => "config-syntax",
        }
    }

    pub fn line(&self) -> usize {
        match self {
            ConfigError::MissingKey { line, .. }
            | ConfigError::UnknownKey { line, .. }
            | ConfigError::TypeError { line, .. }
            | ConfigError::Syntax { line, .. } => *line,
        }
    }
}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Formulation {
    #[default]
    Pair,
    Scalar,
}

impl FromStr for Formulation {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pair" => Ok(Formulation::Pair),
            "scalar" => Ok(Formulation::Scalar),
            _ => Err(format!("`{s}` (expected pair or scalar)")),
        }
    }
}

/// Bottom source: an analytic profile or a snapshot file whose `eta` field is `h`.
#[derive(Debug, Clone, PartialEq)]
pub enum BathSpec {
    Analytic(Bathymetry),
    File(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Rest,
    /// `η = amp·exp(−((x−x0)² + (y−y0)²)/width²)`, `f = 0`; the y term is
    /// dropped when `y_invariant`.
    Gaussian {
        amp: f64,
        x0: f64,
        y0: f64,
        width: f64,
        y_invariant: bool,
    },
    /// Linear plane wave on grid mode `(jx, jy)` with consistent `(η, f)`.
    PlaneWave {
        amp: f64,
        jx: i64,
        jy: i64,
        phase: f64,
        branch: i8,
    },
    /// y-invariant soliton along x.
    SolitonLine {
        amp: f64,
        x0: f64,
    },
    /// Snapshot file providing `(η, f)`.
    File(PathBuf),
    /// Seeded random smooth elevation on modes `|j| ≤ kmax`, `f = 0`.
    Random {
        amp: f64,
        kmax: i64,
        seed: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeSpec {
    /// Explicit step; when absent `dt = cfl·min(dx, dy)`.
    pub dt: Option<f64>,
    pub cfl: f64,
    pub t_end: f64,
    /// Snapshot cadence in steps (0: initial and final only).
    pub snapshot_every: usize,
    /// Diagnostics cadence in steps.
    pub diagnostics_every: usize,
    pub filter: Option<f64>,
}

impl TimeSpec {
    pub fn dt(&self, grid: &Grid2D) -> f64 {
        self.dt.unwrap_or(self.cfl * grid.dx().min(grid.dy()))
    }

    /// Number of steps reaching `t_end` (the last step lands on it to round-off).
    pub fn steps(&self, grid: &Grid2D) -> usize {
        (self.t_end / self.dt(grid) - 1e-9).ceil().max(0.0) as usize
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputSpec {
    pub dir: PathBuf,
    pub csv: bool,
    pub snapshots: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerturbSpec {
    pub modes: Vec<PlaneComponent>,
    pub policy: ResonancePolicy,
    pub source_form: SourceForm,
    pub t: f64,
    pub tol_res: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepQuantity {
    /// Case1 scalar-vs-pair recovered η difference at `t_end`; ε = α = β = γ.
    Formulation,
    /// `sup|st_exact − st_approx|` of the initial η; ε = α.
    StTruncation,
    /// Laplace residual of the `M = 1` series on the initial `f`; ε = β = γ.
    Laplace,
    /// Bottom residual of the regime relation on the initial `f`; ε = β = γ.
    Bottom,
    /// Cascade residual ratio; ε = α = β = γ = δ.
    Cascade,
}

impl FromStr for SweepQuantity {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "formulation" => Ok(Self::Formulation),
            "st-truncation" => Ok(Self::StTruncation),
            "laplace" => Ok(Self::Laplace),
            "bottom" => Ok(Self::Bottom),
            "cascade" => Ok(Self::Cascade),
            _ => Err(format!(
                "`{s}` (expected formulation, st-truncation, laplace, bottom or cascade)"
            )),
        }
    }
}

impl SweepQuantity {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Formulation => "formulation",
            Self::StTruncation => "st-truncation",
            Self::Laplace => "laplace",
            Self::Bottom => "bottom",
            Self::Cascade => "cascade",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub eps: Vec<f64>,
    pub quantity: SweepQuantity,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PotentialSpec {
    pub m: Vec<usize>,
    pub z_samples: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolitonModel {
    Pair,
    Kdv,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolitonSpec {
    pub amp: f64,
    pub x0: f64,
    pub model: SolitonModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: Grid2D,
    pub params: SmallParams,
    pub regime: Regime,
    pub formulation: Formulation,
    pub st_mode: StMode,
    pub form: Form,
    pub kdv_as_printed: bool,
    pub bathymetry: BathSpec,
    pub initial: InitialSpec,
    pub time: TimeSpec,
    pub output: OutputSpec,
    pub perturb: Option<PerturbSpec>,
    pub sweep: Option<SweepSpec>,
    pub potential: PotentialSpec,
    pub soliton: SolitonSpec,
    /// Regime-ordering diagnostics; never fatal.
    pub warnings: Vec<String>,
}

// ---- raw serde layer -------------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Raw {
    grid: RawGrid,
    params: RawParams,
    regime: RawRegime,
    #[serde(default)]
    bathymetry: Option<RawBath>,
    initial: RawInitial,
    time: RawTime,
    #[serde(default)]
    output: Option<RawOutput>,
    #[serde(default)]
    perturb: Option<RawPerturb>,
    #[serde(default)]
    sweep: Option<RawSweep>,
    #[serde(default)]
    potential: Option<RawPotential>,
    #[serde(default)]
    soliton: Option<RawSoliton>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    nx: usize,
    ny: usize,
    #[serde(rename = "Lx")]
    lx: f64,
    #[serde(rename = "Ly")]
    ly: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    alpha: f64,
    beta: f64,
    gamma: f64,
    delta: f64,
    #[serde(default)]
    tau: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum CaseValue {
    Int(i64),
    Str(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawRegime {
    case: CaseValue,
    formulation: Option<String>,
    st_mode: Option<String>,
    form: Option<String>,
    #[serde(default)]
    kdv_as_printed: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTerm {
    jx: i64,
    jy: i64,
    #[serde(default)]
    a_cos: f64,
    #[serde(default)]
    a_sin: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    kind: String,
    h0: Option<f64>,
    knots: Option<Vec<[f64; 2]>>,
    terms: Option<Vec<RawTerm>>,
    path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    kind: String,
    amp: Option<f64>,
    x0: Option<f64>,
    y0: Option<f64>,
    width: Option<f64>,
    y_invariant: Option<bool>,
    jx: Option<i64>,
    jy: Option<i64>,
    phase: Option<f64>,
    branch: Option<i8>,
    kmax: Option<i64>,
    seed: Option<u64>,
    path: Option<PathBuf>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTime {
    dt: Option<f64>,
    cfl: Option<f64>,
    t_end: f64,
    #[serde(default)]
    snapshot_every: usize,
    diagnostics_every: Option<usize>,
    filter: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
    csv: Option<bool>,
    snapshots: Option<bool>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMode {
    jx: i64,
    jy: i64,
    amp: f64,
    #[serde(default)]
    phase: f64,
    #[serde(default = "one")]
    branch: i8,
}

fn one() -> i8 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPerturb {
    modes: Vec<RawMode>,
    policy: Option<String>,
    source_form: Option<String>,
    t: Option<f64>,
    tol_res: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    eps: Vec<f64>,
    quantity: String,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    m: Option<Vec<usize>>,
    z_samples: Option<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSoliton {
    amp: Option<f64>,
    x0: Option<f64>,
    model: Option<String>,
}

// ---- line lookup -----------------------------------------------------------

/// 1-based line of `offset` in `text`.
fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())]
        .bytes()
        .filter(|&b| b == b'\n')
        .count()
        + 1
}

/// Line of `key` inside `[section]`, else the section header, else 1.
fn locate(text: &str, section: &str, key: Option<&str>) -> usize {
    let mut current = String::new();
    let mut header = None;
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.starts_with('[') {
            current = line
                .trim_matches(|c| c == '[' || c == ']')
                .trim()
                .to_string();
            if current == section && header.is_none() {
                header = Some(i + 1);
            }
            continue;
        }
        if current == section {
            if let (Some(k), Some((lhs, _))) = (key, line.split_once('=')) {
                if lhs.trim() == k {
                    return i + 1;
                }
            }
        }
    }
    header.unwrap_or(1)
}

/// Key name on the line holding `offset`, if it has the form `key = …`.
fn key_at(text: &str, offset: usize) -> Option<String> {
    let line = text.lines().nth(line_of(text, offset) - 1)?;
    let (lhs, _) = line.split_once('=')?;
    let k = lhs.trim();
    (!k.is_empty() && !k.starts_with('[')).then(|| k.to_string())
}

fn backticked(msg: &str, prefix: &str) -> Option<String> {
    let rest = &msg[msg.find(prefix)? + prefix.len()..];
    let rest = rest.strip_prefix('`')?;
    Some(rest[..rest.find('`')?].to_string())
}

fn map_toml_error(text: &str, e: toml::de::Error) -> ConfigError {
    let msg = e.message().trim().to_string();
    let offset = e.span().map(|s| s.start).unwrap_or(0);
    let line = line_of(text, offset);
    if let Some(key) = backticked(&msg, "unknown field ") {
        return ConfigError::UnknownKey { key, line };
    }
    if let Some(key) = backticked(&msg, "missing field ") {
        return ConfigError::MissingKey { key, line };
    }
    if msg.contains("invalid type")
        || msg.contains("invalid value")
        || msg.contains("invalid length")
    {
        let key = key_at(text, offset).unwrap_or_else(|| "?".into());
        return ConfigError::TypeError {
            key,
            line,
            message: msg,
        };
    }
    ConfigError::Syntax { line, message: msg }
}

// ---- validation ------------------------------------------------------------

struct Ctx<'a> {
    text: &'a str,
}

impl Ctx<'_> {
    fn missing(&self, section: &str, key: &str) -> ConfigError {
        ConfigError::MissingKey {
            key: key.into(),
            line: locate(self.text, section, None),
        }
    }

    fn bad(&self, section: &str, key: &str, message: impl Into<String>) -> ConfigError {
        ConfigError::TypeError {
            key: key.into(),
            line: locate(self.text, section, Some(key)),
            message: message.into(),
        }
    }

    fn unknown(&self, section: &str, key: &str) -> ConfigError {
        ConfigError::UnknownKey {
            key: key.into(),
            line: locate(self.text, section, Some(key)),
        }
    }

    fn req<T>(&self, section: &str, key: &str, v: Option<T>) -> CResult<T> {
        v.ok_or_else(|| self.missing(section, key))
    }

    /// Errors on keys given but meaningless for the chosen kind.
    fn only(&self, section: &str, given: &[(&str, bool)], allowed: &[&str]) -> CResult<()> {
        match given.iter().find(|(k, set)| *set && !allowed.contains(k)) {
            Some((k, _)) => Err(self.unknown(section, k)),
            None => Ok(()),
        }
    }

    fn parse<T: FromStr>(&self, section: &str, key: &str, v: Option<&str>, default: T) -> CResult<T>
    where
        T::Err: std::fmt::Display,
    {
        match v {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e: T::Err| self.bad(section, key, e.to_string())),
        }
    }
}

fn regime_of(ctx: &Ctx, c: &CaseValue) -> CResult<Regime> {
    let s = match c {
        CaseValue::Int(i) => i.to_string(),
        CaseValue::Str(s) => s.clone(),
    };
    s.parse::<Regime>()
        .map_err(|e| ctx.bad("regime", "case", e.to_string()))
}

fn bath_of(ctx: &Ctx, raw: Option<RawBath>, grid: &Grid2D) -> CResult<BathSpec> {
    let Some(b) = raw else {
        return Ok(BathSpec::Analytic(Bathymetry::flat()));
    };
    let given = [
        ("h0", b.h0.is_some()),
        ("knots", b.knots.is_some()),
        ("terms", b.terms.is_some()),
        ("path", b.path.is_some()),
    ];
    let s = "bathymetry";
    match b.kind.as_str() {
        "flat" => {
            ctx.only(s, &given, &["h0"])?;
            Ok(BathSpec::Analytic(Bathymetry::Flat {
                h0: b.h0.unwrap_or(1.0),
            }))
        }
        "piecewise-linear" => {
            ctx.only(s, &given, &["knots"])?;
            let knots = ctx
                .req(s, "knots", b.knots)?
                .into_iter()
                .map(|[x, h]| (x, h))
                .collect();
            Ok(BathSpec::Analytic(Bathymetry::PiecewiseLinearX { knots }))
        }
        "tent" => {
            ctx.only(s, &given, &[])?;
            Ok(BathSpec::Analytic(Bathymetry::tent(grid.lx())))
        }
        "trig" => {
            ctx.only(s, &given, &["h0", "terms"])?;
            let terms = ctx
                .req(s, "terms", b.terms)?
                .into_iter()
                .map(|t| TrigTerm {
                    jx: t.jx,
                    jy: t.jy,
                    a_cos: t.a_cos,
                    a_sin: t.a_sin,
                })
                .collect();
            Ok(BathSpec::Analytic(Bathymetry::Trig {
                h0: b.h0.unwrap_or(0.0),
                terms,
            }))
        }
        "file" => {
            ctx.only(s, &given, &["path"])?;
            Ok(BathSpec::File(ctx.req(s, "path", b.path)?))
        }
        k => Err(ctx.bad(
            s,
            "kind",
            format!("`{k}` (expected flat, tent, piecewise-linear, trig or file)"),
        )),
    }
}

fn initial_of(ctx: &Ctx, i: RawInitial, grid: &Grid2D) -> CResult<InitialSpec> {
    let s = "initial";
    let given = [
        ("amp", i.amp.is_some()),
        ("x0", i.x0.is_some()),
        ("y0", i.y0.is_some()),
        ("width", i.width.is_some()),
        ("y_invariant", i.y_invariant.is_some()),
        ("jx", i.jx.is_some()),
        ("jy", i.jy.is_some()),
        ("phase", i.phase.is_some()),
        ("branch", i.branch.is_some()),
        ("kmax", i.kmax.is_some()),
        ("seed", i.seed.is_some()),
        ("path", i.path.is_some()),
    ];
    match i.kind.as_str() {
        "rest" => {
            ctx.only(s, &given, &[])?;
            Ok(InitialSpec::Rest)
        }
        "gaussian" => {
            ctx.only(s, &given, &["amp", "x0", "y0", "width", "y_invariant"])?;
            let width = ctx.req(s, "width", i.width)?;
            if !(width > 0.0) {
                return Err(ctx.bad(s, "width", "must be positive"));
            }
            Ok(InitialSpec::Gaussian {
                amp: ctx.req(s, "amp", i.amp)?,
                x0: i.x0.unwrap_or(grid.lx() / 2.0),
                y0: i.y0.unwrap_or(grid.ly() / 2.0),
                width,
                y_invariant: i.y_invariant.unwrap_or(false),
            })
        }
        "plane-wave" => {
            ctx.only(s, &given, &["amp", "jx", "jy", "phase", "branch"])?;
            let branch = i.branch.unwrap_or(1);
            if branch != 1 && branch != -1 {
                return Err(ctx.bad(s, "branch", "must be 1 or -1"));
            }
            Ok(InitialSpec::PlaneWave {
                amp: ctx.req(s, "amp", i.amp)?,
                jx: ctx.req(s, "jx", i.jx)?,
                jy: i.jy.unwrap_or(0),
                phase: i.phase.unwrap_or(0.0),
                branch,
            })
        }
        "soliton-line" => {
            ctx.only(s, &given, &["amp", "x0"])?;
            Ok(InitialSpec::SolitonLine {
                amp: ctx.req(s, "amp", i.amp)?,
                x0: i.x0.unwrap_or(grid.lx() / 2.0),
            })
        }
        "file" => {
            ctx.only(s, &given, &["path"])?;
            Ok(InitialSpec::File(ctx.req(s, "path", i.path)?))
        }
        "random" => {
            ctx.only(s, &given, &["amp", "kmax", "seed"])?;
            let kmax = i.kmax.unwrap_or(4);
            if kmax < 1 {
                return Err(ctx.bad(s, "kmax", "must be >= 1"));
            }
            Ok(InitialSpec::Random {
                amp: ctx.req(s, "amp", i.amp)?,
                kmax,
                seed: i.seed.unwrap_or(0),
            })
        }
        k => Err(ctx.bad(
            s,
            "kind",
            format!("`{k}` (expected rest, gaussian, plane-wave, soliton-line, file or random)"),
        )),
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> CResult<RunConfig> {
    let raw: Raw = toml::from_str(text).map_err(|e| map_toml_error(text, e))?;
    let ctx = Ctx { text };

    let g = &raw.grid;
    let grid =
        Grid2D::new(g.nx, g.ny, g.lx, g.ly).map_err(|e| ctx.bad("grid", "nx", e.to_string()))?;

    let p = &raw.params;
    let params = SmallParams::new(p.alpha, p.beta, p.gamma, p.delta)
        .and_then(|sp| sp.with_tau(p.tau))
        .map_err(|e| {
            let key = ["alpha", "beta", "gamma", "delta", "tau"]
                .into_iter()
                .find(|k| e.to_string().contains(&format!("{k} =")))
                .unwrap_or("alpha");
            ctx.bad("params", key, e.to_string())
        })?;

    let r = &raw.regime;
    let regime = regime_of(&ctx, &r.case)?;
    let formulation = ctx.parse(
        "regime",
        "formulation",
        r.formulation.as_deref(),
        Formulation::Pair,
    )?;
    let st_mode = ctx.parse("regime", "st_mode", r.st_mode.as_deref(), StMode::Approx)?;
    let form = ctx.parse("regime", "form", r.form.as_deref(), Form::Consistent)?;

    let bathymetry = bath_of(&ctx, raw.bathymetry, &grid)?;
    let initial = initial_of(&ctx, raw.initial, &grid)?;

    let t = &raw.time;
    let time = TimeSpec {
        dt: t.dt,
        cfl: t.cfl.unwrap_or(0.5),
        t_end: t.t_end,
        snapshot_every: t.snapshot_every,
        diagnostics_every: t.diagnostics_every.unwrap_or(1).max(1),
        filter: t.filter,
    };
    if let Some(dt) = time.dt {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(ctx.bad("time", "dt", "must be positive"));
        }
    }
    if !(time.cfl.is_finite() && time.cfl > 0.0) {
        return Err(ctx.bad("time", "cfl", "must be positive"));
    }
    if !(time.t_end.is_finite() && time.t_end >= 0.0) {
        return Err(ctx.bad("time", "t_end", "must be >= 0"));
    }

    let output = match raw.output {
        None => OutputSpec {
            dir: "out".into(),
            csv: true,
            snapshots: true,
        },
        Some(o) => OutputSpec {
            dir: o.dir.unwrap_or_else(|| "out".into()),
            csv: o.csv.unwrap_or(true),
            snapshots: o.snapshots.unwrap_or(true),
        },
    };

    let perturb = match raw.perturb {
        None => None,
        Some(pt) => {
            let s = "perturb";
            let policy = match pt.policy.as_deref() {
                None | Some("reject") => ResonancePolicy::Reject,
                Some("secular") => ResonancePolicy::Secular,
                Some(o) => {
                    return Err(ctx.bad(s, "policy", format!("`{o}` (expected reject or secular)")))
                }
            };
            let source_form = ctx.parse(
                s,
                "source_form",
                pt.source_form.as_deref(),
                SourceForm::default(),
            )?;
            if pt.modes.is_empty() {
                return Err(ctx.bad(s, "modes", "at least one mode is required"));
            }
            let mut modes = Vec::new();
            for m in pt.modes {
                if m.branch != 1 && m.branch != -1 {
                    return Err(ctx.bad(s, "modes", "branch must be 1 or -1"));
                }
                modes.push(PlaneComponent {
                    jx: m.jx,
                    jy: m.jy,
                    amp: m.amp,
                    phase: m.phase,
                    branch: m.branch,
                });
            }
            Some(PerturbSpec {
                modes,
                policy,
                source_form,
                t: pt.t.unwrap_or(0.0),
                tol_res: pt.tol_res.unwrap_or(DEFAULT_TOL_RES),
            })
        }
    };

    let sweep = match raw.sweep {
        None => None,
        Some(sw) => {
            let quantity = sw
                .quantity
                .parse()
                .map_err(|e: String| ctx.bad("sweep", "quantity", e))?;
            if sw.eps.len() < 2 || sw.eps.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
                return Err(ctx.bad("sweep", "eps", "need at least two values in (0, 1)"));
            }
            Some(SweepSpec {
                eps: sw.eps,
                quantity,
            })
        }
    };

    let potential = match raw.potential {
        None => PotentialSpec {
            m: vec![1, 2, 3],
            z_samples: vec![0.0, 0.5, 1.0],
        },
        Some(pp) => {
            let pot = PotentialSpec {
                m: pp.m.unwrap_or_else(|| vec![1, 2, 3]),
                z_samples: pp.z_samples.unwrap_or_else(|| vec![0.0, 0.5, 1.0]),
            };
            if pot.z_samples.iter().any(|z| !(0.0..=1.0).contains(z)) {
                return Err(ctx.bad("potential", "z_samples", "samples must lie in [0, 1]"));
            }
            pot
        }
    };

    let soliton = {
        let so = raw.soliton.unwrap_or(RawSoliton {
            amp: None,
            x0: None,
            model: None,
        });
        let model = match so.model.as_deref() {
            None | Some("pair") => SolitonModel::Pair,
            Some("kdv") => SolitonModel::Kdv,
            Some(o) => {
                return Err(ctx.bad("soliton", "model", format!("`{o}` (expected pair or kdv)")))
            }
        };
        SolitonSpec {
            amp: so.amp.unwrap_or(1.0),
            x0: so.x0.unwrap_or(grid.lx() / 4.0),
            model,
        }
    };

    let warnings = validate_regime(&params, regime)
        .map(|d| d.warnings)
        .map_err(|e| ctx.bad("regime", "case", e.to_string()))?;

    Ok(RunConfig {
        grid,
        params,
        regime,
        formulation,
        st_mode,
        form,
        kdv_as_printed: r.kdv_as_printed,
        bathymetry,
        initial,
        time,
        output,
        perturb,
        sweep,
        potential,
        soliton,
        warnings,
    })
}
