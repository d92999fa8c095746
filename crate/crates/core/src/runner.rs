//! Run orchestration: initial data, subcommands and their artifacts.
//!
//! Every subcommand writes into its own output directory: CSV tables with a
//! header row, `,` separators and LF endings, bit-exact snapshots, and a
//! `run.manifest` echoing the configuration. Numbers are printed as the
//! shortest decimal that round-trips, so repeated runs give identical bytes
//! (the manifest's wall time aside).

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use sha1::{Digest, Sha1};

use crate::bathymetry::{Bathymetry, SampledBathymetry};
use crate::cascade::{
    compose_and_surface, correction_sources, near_resonances, residual_reduction, solve_all,
    zeroth_solution, PlaneWaveSpec, SolveOptions,
};
use crate::config::{BathSpec, Formulation, InitialSpec, RunConfig, SolitonModel, SweepQuantity};
use crate::dynamics::{diagnostics, Boussinesq, Diagnostics, StepperConfig, WaveState};
use crate::error::{Error, Result};
use crate::grid::{Field1D, Field2D, Grid1D, Grid2D};
use crate::jet::{PlaneWaveJet, Wave};
use crate::oracle::{derive_scalar_equation, diff_termsums, printed, Form};
use crate::params::{Regime, SmallParams};
use crate::potential::{bottom_f, potential_residuals, PotentialSeries};
use crate::reduction::{
    crest_position, reduction_check, shape_drift, soliton_init, soliton_speed, Boussinesq1D,
    Model1D,
};
use crate::scalar::{eta_from_f, scalar_residual, ResidualOptions, ScalarState, ScalarStepper};
use crate::snapshot::{read_snapshot, write_snapshot};
use crate::spectral::Spectral;
use crate::surface_tension::{st_approx, st_exact};

pub const FORMAT_VERSION: u32 = 1;
/// Environment variable capping sweep concurrency.
pub const THREADS_ENV: &str = "B2P1_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Residual,
    Perturb,
    ReduceCheck,
    SolitonDemo,
    Potential,
    Derive,
    Sweep,
}

impl Subcommand {
    pub const ALL: [Subcommand; 8] = [
        Subcommand::Simulate,
        Subcommand::Residual,
        Subcommand::Perturb,
        Subcommand::ReduceCheck,
        Subcommand::SolitonDemo,
        Subcommand::Potential,
        Subcommand::Derive,
        Subcommand::Sweep,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::Simulate => "simulate",
            Subcommand::Residual => "residual",
            Subcommand::Perturb => "perturb",
            Subcommand::ReduceCheck => "reduce-check",
            Subcommand::SolitonDemo => "soliton-demo",
            Subcommand::Potential => "potential",
            Subcommand::Derive => "derive",
            Subcommand::Sweep => "sweep",
        }
    }
}

impl FromStr for Subcommand {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Subcommand::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown subcommand `{s}`")))
    }
}

/// Command-line overrides applied on top of a parsed configuration.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub case: Option<Regime>,
    pub formulation: Option<Formulation>,
    pub form: Option<Form>,
    pub as_printed: bool,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut RunConfig) {
        if let Some(r) = self.case {
            cfg.regime = r;
        }
        if let Some(f) = self.formulation {
            cfg.formulation = f;
        }
        if let Some(f) = self.form {
            cfg.form = f;
        }
        if self.as_printed {
            cfg.kdv_as_printed = true;
        }
        if let Some(o) = &self.out {
            cfg.output.dir = o.clone();
        }
        if let (Some(s), InitialSpec::Random { seed, .. }) = (self.seed, &mut cfg.initial) {
            *seed = s;
        }
    }
}

/// Where relative paths in the configuration are resolved, and the text
/// echoed into the manifest.
#[derive(Debug, Clone, Default)]
pub struct RunContext {
    pub base_dir: PathBuf,
    pub config_text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub out_dir: PathBuf,
    pub files: Vec<PathBuf>,
    /// One-line human summary.
    pub summary: String,
}

// ---- formatting --------------------------------------------------------------

/// Shortest round-trip decimal.
pub fn num(v: f64) -> String {
    format!("{v:?}")
}

/// CSV text from a header and rows.
pub fn csv(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = header.join(",");
    s.push('\n');
    for r in rows {
        s.push_str(&r.join(","));
        s.push('\n');
    }
    s
}

/// Git-style blob hash: `sha1("blob <len>\0" + bytes)` in lowercase hex.
pub fn blob_hash(bytes: &[u8]) -> String {
    let mut h = Sha1::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    h.finalize().iter().fold(String::new(), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len().min(y.len()) as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = x.iter().zip(y).map(|(a, b)| (a.ln(), b.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

struct Out {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Out {
    fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir)?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let p = self.dir.join(name);
        fs::write(&p, bytes)?;
        self.files.push(p);
        Ok(())
    }

    fn finish(
        mut self,
        cmd: Subcommand,
        ctx: &RunContext,
        inputs: &[(String, String)],
        start: Instant,
        summary: String,
    ) -> Result<RunOutcome> {
        let mut m = String::new();
        let _ = writeln!(m, "format_version = {FORMAT_VERSION}");
        let _ = writeln!(m, "subcommand = {}", cmd.name());
        let _ = writeln!(m, "config_hash = {}", blob_hash(ctx.config_text.as_bytes()));
        for (name, hash) in inputs {
            let _ = writeln!(m, "input = {name} {hash}");
        }
        let _ = writeln!(m, "summary = {summary}");
        let _ = writeln!(m, "wall_time_s = {}", num(start.elapsed().as_secs_f64()));
        m.push_str("--- config ---\n");
        m.push_str(&ctx.config_text);
        if !ctx.config_text.ends_with('\n') {
            m.push('\n');
        }
        self.write("run.manifest", m.as_bytes())?;
        Ok(RunOutcome {
            out_dir: self.dir,
            files: self.files,
            summary,
        })
    }
}

// ---- inputs ------------------------------------------------------------------

fn resolve(ctx: &RunContext, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        ctx.base_dir.join(p)
    }
}

/// Analytic bottom, or one read from a snapshot's `eta` field.
pub fn load_bathymetry(
    cfg: &RunConfig,
    ctx: &RunContext,
    inputs: &mut Vec<(String, String)>,
) -> Result<Bathymetry> {
    match &cfg.bathymetry {
        BathSpec::Analytic(b) => Ok(b.clone()),
        BathSpec::File(p) => {
            let bytes = fs::read(resolve(ctx, p))?;
            inputs.push((p.display().to_string(), blob_hash(&bytes)));
            let s = read_snapshot(&bytes)?;
            if *s.eta.grid() != cfg.grid {
                return Err(Error::GridMismatch);
            }
            Ok(Bathymetry::Sampled { h: s.eta })
        }
    }
}

fn periodic_offset(d: f64, l: f64) -> f64 {
    let mut r = d.rem_euclid(l);
    if r > l / 2.0 {
        r -= l;
    }
    r
}

/// Zeroth-order frequency of grid mode `(jx, jy)`.
fn mode_frequency(grid: &Grid2D, jx: i64, jy: i64, p: &SmallParams) -> Result<f64> {
    let (kx, ky) = (grid.kx(jx), grid.ky(jy));
    let w = (kx * kx + p.ratio() * ky * ky).sqrt();
    if w == 0.0 {
        return Err(Error::InvalidParameter(
            "plane wave needs (jx, jy) != (0, 0)".into(),
        ));
    }
    Ok(w)
}

/// Initial `(η, f)` of the pair.
pub fn initial_state(
    cfg: &RunConfig,
    ctx: &RunContext,
    inputs: &mut Vec<(String, String)>,
) -> Result<WaveState> {
    let g = cfg.grid;
    let p = &cfg.params;
    match &cfg.initial {
        InitialSpec::Rest => Ok(WaveState::rest(g)),
        &InitialSpec::Gaussian {
            amp,
            x0,
            y0,
            width,
            y_invariant,
        } => {
            let eta = Field2D::from_fn(g, |x, y| {
                let dx = periodic_offset(x - x0, g.lx());
                let dy = if y_invariant {
                    0.0
                } else {
                    periodic_offset(y - y0, g.ly())
                };
                amp * (-(dx * dx + dy * dy) / (width * width)).exp()
            });
            WaveState::new(eta, Field2D::zeros(g), 0.0)
        }
        &InitialSpec::PlaneWave {
            amp,
            jx,
            jy,
            phase,
            branch,
        } => {
            let w = branch as f64 * mode_frequency(&g, jx, jy, p)?;
            let (kx, ky) = (g.kx(jx), g.ky(jy));
            let eta = Field2D::from_fn(g, |x, y| amp * (kx * x + ky * y + phase).cos());
            let f = Field2D::from_fn(g, |x, y| amp / w * (kx * x + ky * y + phase).sin());
            WaveState::new(eta, f, 0.0)
        }
        &InitialSpec::SolitonLine { amp, x0 } => {
            let g1 = Grid1D::new(g.nx(), g.lx())?;
            let s = soliton_init(g1, amp, p, x0)?;
            let eta = Field2D::from_fn(g, |x, _| {
                s.eta.values()[(x / g.dx()).round() as usize % g.nx()]
            });
            let w = Field2D::from_fn(g, |x, _| {
                s.w.values()[(x / g.dx()).round() as usize % g.nx()]
            });
            WaveState::new(eta, periodic_potential(&w)?, 0.0)
        }
        InitialSpec::File(path) => {
            let bytes = fs::read(resolve(ctx, path))?;
            inputs.push((path.display().to_string(), blob_hash(&bytes)));
            let s = read_snapshot(&bytes)?;
            if *s.eta.grid() != g {
                return Err(Error::GridMismatch);
            }
            WaveState::new(s.eta, s.f, s.t)
        }
        &InitialSpec::Random { amp, kmax, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut modes = Vec::new();
            for jx in 0..=kmax {
                for jy in -kmax..=kmax {
                    if jx == 0 && jy <= 0 {
                        continue;
                    }
                    let (a, b): (f64, f64) =
                        (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                    modes.push((g.kx(jx), g.ky(jy), a, b));
                }
            }
            let raw = Field2D::from_fn(g, |x, y| {
                modes
                    .iter()
                    .map(|&(kx, ky, a, b)| {
                        a * (kx * x + ky * y).cos() + b * (kx * x + ky * y).sin()
                    })
                    .sum()
            });
            let m = raw.max_abs();
            let eta = if m > 0.0 { raw.scale(amp / m) } else { raw };
            WaveState::new(eta, Field2D::zeros(g), 0.0)
        }
    }
}

/// Periodic `f` with `f_x = w − mean(w)`, `f_y = 0` for y-invariant `w`.
///
/// The mean of `w` (a uniform current) has no periodic potential and is dropped.
fn periodic_potential(w: &Field2D) -> Result<Field2D> {
    let sp = Spectral::new(*w.grid());
    let mut s = sp.forward(w)?;
    s.apply(|kx, _, jx, _| {
        if jx == 0 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, -1.0 / kx)
        }
    });
    Ok(sp.inverse(&s))
}

fn stepper(cfg: &RunConfig) -> Result<StepperConfig> {
    Ok(StepperConfig::new(cfg.time.dt(&cfg.grid))?.with_filter(cfg.time.filter))
}

fn pair_model(cfg: &RunConfig, bath: SampledBathymetry) -> Result<Boussinesq> {
    Boussinesq::new(
        cfg.grid,
        bath,
        cfg.params,
        cfg.regime,
        cfg.st_mode,
        stepper(cfg)?,
    )
}

/// Scalar state matched to the pair state: `q = f_t` from the pair's dynamic equation.
pub fn matched_scalar_state(model: &Boussinesq, s: &WaveState) -> Result<ScalarState> {
    let r = model.rhs(s)?;
    ScalarState::new(s.f.clone(), r.f_t, s.t)
}

fn diag_row(t: f64, d: &Diagnostics) -> Vec<String> {
    vec![
        num(t),
        num(d.mass),
        num(d.l2_eta),
        num(d.linf_eta),
        num(d.tail_fraction),
    ]
}

const DIAG_HEADER: [&str; 5] = ["t", "mass", "l2_eta", "linf_eta", "tail_fraction"];

// ---- subcommands -------------------------------------------------------------

/// Runs one subcommand and writes its artifacts into `cfg.output.dir`.
///
/// Artifacts written before a failure are kept; the error is returned.
pub fn run(cfg: &RunConfig, cmd: Subcommand, ctx: &RunContext) -> Result<RunOutcome> {
    let start = Instant::now();
    let mut out = Out::new(&resolve(ctx, &cfg.output.dir))?;
    let mut inputs = Vec::new();
    let summary = match cmd {
        Subcommand::Simulate => simulate(cfg, ctx, &mut out, &mut inputs)?,
        Subcommand::Residual => residual(cfg, ctx, &mut out, &mut inputs)?,
        Subcommand::Perturb => perturb(cfg, ctx, &mut out, &mut inputs)?,
        Subcommand::ReduceCheck => reduce_check(cfg, ctx, &mut out, &mut inputs)?,
        Subcommand::SolitonDemo => soliton_demo(cfg, ctx, &mut out, &mut inputs)?,
        Subcommand::Potential => potential(cfg, ctx, &mut out, &mut inputs)?,
        Subcommand::Derive => {
            let rep = derive_report(cfg.regime)?;
            out.write("derive.txt", rep.text.as_bytes())?;
            rep.summary()
        }
        Subcommand::Sweep => sweep(cfg, ctx, &mut out, &mut inputs)?,
    };
    out.finish(cmd, ctx, &inputs, start, summary)
}

fn snapshot_name(step: usize) -> String {
    format!("snap_{step:06}.b2p1")
}

fn simulate(
    cfg: &RunConfig,
    ctx: &RunContext,
    out: &mut Out,
    inputs: &mut Vec<(String, String)>,
) -> Result<String> {
    let bath = load_bathymetry(cfg, ctx, inputs)?.sample(&cfg.grid)?;
    let s0 = initial_state(cfg, ctx, inputs)?;
    let steps = cfg.time.steps(&cfg.grid);
    let every = cfg.time.snapshot_every;
    let want_snap = |n: usize| n == 0 || n == steps || (every > 0 && n.is_multiple_of(every));
    let want_diag = |n: usize| n == steps || n.is_multiple_of(cfg.time.diagnostics_every);
    let mut rows = Vec::new();
    let mut failure = None;
    let model = pair_model(cfg, bath.clone())?;
    let sp = model.spectral().clone();
    match cfg.formulation {
        Formulation::Pair => {
            let mut s = s0;
            for n in 0..=steps {
                if n > 0 {
                    match model.step(&s) {
                        Ok(next) => s = next,
                        Err(e) => {
                            failure = Some(e);
                            break;
                        }
                    }
                }
                if want_diag(n) {
                    rows.push(diag_row(s.t, &model.diagnostics(&s)?));
                }
                if cfg.output.snapshots && want_snap(n) {
                    out.write(&snapshot_name(n), &write_snapshot(s.t, &s.eta, &s.f))?;
                }
            }
        }
        Formulation::Scalar => {
            let st = ScalarStepper::new(
                cfg.grid,
                bath,
                cfg.params,
                cfg.regime,
                cfg.form,
                stepper(cfg)?,
            )?;
            let mut s = matched_scalar_state(&model, &s0)?;
            for n in 0..=steps {
                if n > 0 {
                    match st.step(&s) {
                        Ok(next) => s = next,
                        Err(e) => {
                            failure = Some(e);
                            break;
                        }
                    }
                }
                if want_diag(n) || (cfg.output.snapshots && want_snap(n)) {
                    let eta = eta_from_f(&sp, &s, &cfg.params, cfg.regime)?;
                    let ws = WaveState {
                        eta,
                        f: s.f.clone(),
                        t: s.t,
                    };
                    if want_diag(n) {
                        rows.push(diag_row(s.t, &diagnostics(&sp, &ws)?));
                    }
                    if cfg.output.snapshots && want_snap(n) {
                        out.write(&snapshot_name(n), &write_snapshot(ws.t, &ws.eta, &ws.f))?;
                    }
                }
            }
        }
    }
    if cfg.output.csv {
        out.write("diagnostics.csv", csv(&DIAG_HEADER, &rows).as_bytes())?;
    }
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(format!(
        "{} {} steps of {}",
        cfg.regime,
        steps,
        match cfg.formulation {
            Formulation::Pair => "the pair",
            Formulation::Scalar => "the single equation",
        }
    ))
}

fn residual(
    cfg: &RunConfig,
    ctx: &RunContext,
    out: &mut Out,
    inputs: &mut Vec<(String, String)>,
) -> Result<String> {
    let bath = load_bathymetry(cfg, ctx, inputs)?.sample(&cfg.grid)?;
    let opts = ResidualOptions {
        form: cfg.form,
        max_order: None,
    };
    let steps = cfg.time.steps(&cfg.grid);
    let dt = cfg.time.dt(&cfg.grid);
    let mut rows = Vec::new();
    let mut push = |t: f64, r: &Field2D| {
        let rms = (r.values().iter().map(|v| v * v).sum::<f64>() / r.values().len() as f64).sqrt();
        rows.push(vec![num(t), num(r.max_abs()), num(rms)]);
    };
    if let InitialSpec::PlaneWave {
        amp,
        jx,
        jy,
        phase,
        branch,
    } = cfg.initial
    {
        // Analytic zeroth-order plane wave: f = (amp/ω) sin(θ − ωt).
        let w = branch as f64 * mode_frequency(&cfg.grid, jx, jy, &cfg.params)?;
        let wave = Wave {
            amp: amp / w,
            kx: cfg.grid.kx(jx),
            ky: cfg.grid.ky(jy),
            omega: w,
            phase: phase - PI / 2.0,
        };
        let jet = PlaneWaveJet::new(cfg.grid, vec![wave], 0.0);
        for n in (0..=steps).filter(|n| *n == steps || n % cfg.time.diagnostics_every == 0) {
            let t = n as f64 * dt;
            push(
                t,
                &scalar_residual(&jet.at_time(t), &bath, &cfg.params, cfg.regime, opts)?,
            );
        }
    } else {
        let model = pair_model(cfg, bath.clone())?;
        let st = ScalarStepper::new(
            cfg.grid,
            bath.clone(),
            cfg.params,
            cfg.regime,
            cfg.form,
            stepper(cfg)?,
        )?;
        let mut s = matched_scalar_state(&model, &initial_state(cfg, ctx, inputs)?)?;
        for n in 0..=steps {
            if n > 0 {
                s = st.step(&s)?;
            }
            if n == steps || n % cfg.time.diagnostics_every == 0 {
                push(
                    s.t,
                    &scalar_residual(&st.jet(&s)?, &bath, &cfg.params, cfg.regime, opts)?,
                );
            }
        }
    }
    let worst = rows
        .iter()
        .map(|r| r[1].parse::<f64>().unwrap_or(f64::NAN))
        .fold(0.0, f64::max);
    out.write(
        "residual.csv",
        csv(&["t", "max_abs", "rms"], &rows).as_bytes(),
    )?;
    Ok(format!(
        "{} {} residual: max {:e}",
        cfg.regime,
        cfg.form.name(),
        worst
    ))
}

/// Result of the perturbation cascade at one evaluation time.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbReport {
    pub r0: f64,
    pub r1: f64,
    pub ratio: f64,
    /// `(correction, max |operator(u) − source|)` for a, b, g, d.
    pub equation_residuals: Vec<(&'static str, f64)>,
    pub warnings: Vec<String>,
}

/// Builds `f⁰`, solves the four corrections and measures the residual reduction.
pub fn perturb_report(
    cfg: &RunConfig,
    bath: &Bathymetry,
) -> Result<(PerturbReport, crate::cascade::Composite)> {
    let spec = cfg
        .perturb
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("perturb needs a [perturb] section".into()))?;
    let p = &cfg.params;
    let f0 = zeroth_solution(
        &PlaneWaveSpec {
            components: spec.modes.clone(),
        },
        cfg.grid,
        p,
    )?;
    let src = correction_sources(&f0, bath, p, spec.source_form)?;
    let mut warnings = Vec::new();
    for (name, s) in [("a", &src.a), ("b", &src.b), ("g", &src.g), ("d", &src.d)] {
        for nr in near_resonances(s, p, spec.tol_res) {
            warnings.push(format!(
                "{name}: {} amplification {:.3e}",
                nr.harmonic, nr.amplification
            ));
        }
    }
    let c = solve_all(
        &src,
        p,
        SolveOptions {
            tol_res: spec.tol_res,
            policy: spec.policy,
        },
    )?;
    let ratio = p.ratio();
    let mut equation_residuals = Vec::new();
    for (name, u, s) in [
        ("a", &c.a, &src.a),
        ("b", &c.b, &src.b),
        ("g", &c.g, &src.g),
        ("d", &c.d, &src.d),
    ] {
        let lhs = u.wave_operator(ratio)?;
        let diff = lhs.add_scaled(-1.0, s)?;
        equation_residuals.push((name, diff.evaluate(spec.t).max_abs()));
    }
    let comp = compose_and_surface(&f0, &c, p, spec.t)?;
    let (r0, r1) = residual_reduction(&f0, &comp.f, &bath.sample(&cfg.grid)?, p, spec.t)?;
    Ok((
        PerturbReport {
            r0,
            r1,
            ratio: r1 / r0,
            equation_residuals,
            warnings,
        },
        comp,
    ))
}

fn perturb(
    cfg: &RunConfig,
    ctx: &RunContext,
    out: &mut Out,
    inputs: &mut Vec<(String, String)>,
) -> Result<String> {
    let bath = load_bathymetry(cfg, ctx, inputs)?;
    let (rep, comp) = perturb_report(cfg, &bath)?;
    for w in &rep.warnings {
        eprintln!("warning: near resonance {w}");
    }
    let t = comp.t;
    let rows = vec![vec![num(t), num(rep.r0), num(rep.r1), num(rep.ratio)]];
    out.write(
        "perturb.csv",
        csv(&["t", "residual_f0", "residual_composite", "ratio"], &rows).as_bytes(),
    )?;
    let eq: Vec<Vec<String>> = rep
        .equation_residuals
        .iter()
        .map(|(n, v)| vec![n.to_string(), num(*v)])
        .collect();
    out.write(
        "corrections.csv",
        csv(&["correction", "equation_residual"], &eq).as_bytes(),
    )?;
    if cfg.output.snapshots {
        out.write(
            "composite.b2p1",
            &write_snapshot(t, &comp.eta, &comp.f.evaluate(t)),
        )?;
    }
    Ok(format!(
        "residual ratio {:e} (composite {:e} / zeroth order {:e})",
        rep.ratio, rep.r1, rep.r0
    ))
}

fn reduce_check(
    cfg: &RunConfig,
    ctx: &RunContext,
    out: &mut Out,
    inputs: &mut Vec<(String, String)>,
) -> Result<String> {
    let bath = load_bathymetry(cfg, ctx, inputs)?.sample(&cfg.grid)?;
    let model = pair_model(cfg, bath)?;
    let s0 = initial_state(cfg, ctx, inputs)?;
    let steps = cfg.time.steps(&cfg.grid);
    let rep = reduction_check(&model, &s0, steps)?;
    let rows = vec![vec![
        cfg.regime.name().to_string(),
        rep.reducible.to_string(),
        rep.steps.to_string(),
        num(rep.max_diff),
        num(rep.max_y_variance),
        num(rep.initial_y_variance),
    ]];
    out.write(
        "reduce_check.csv",
        csv(
            &[
                "regime",
                "reducible",
                "steps",
                "max_diff",
                "max_y_variance",
                "initial_y_variance",
            ],
            &rows,
        )
        .as_bytes(),
    )?;
    Ok(if rep.reducible {
        format!(
            "{}: max |eta_2D - eta_1D| = {:e} over {} steps",
            cfg.regime, rep.max_diff, rep.steps
        )
    } else {
        format!(
            "{}: not reducible (y-variance {:e})",
            cfg.regime, rep.initial_y_variance
        )
    })
}

/// Measured soliton propagation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolitonRun {
    pub speed: f64,
    pub theory: f64,
    pub max_drift: f64,
}

/// Evolves a soliton for `t_end` and tracks crest and shape.
#[allow(clippy::too_many_arguments)]
pub fn soliton_run(
    g1: Grid1D,
    bath: &Bathymetry,
    p: SmallParams,
    model: Model1D,
    cfg: StepperConfig,
    amp: f64,
    x0: f64,
    t_end: f64,
    mut row: impl FnMut(f64, f64, f64),
) -> Result<SolitonRun> {
    let m = Boussinesq1D::new(
        g1,
        bath.sample_1d(&g1)?,
        p,
        model,
        crate::surface_tension::StMode::Approx,
        cfg,
    )?;
    let sp = m.spectral();
    let s0 = soliton_init(g1, amp, &p, x0)?;
    let v = soliton_speed(amp, &p);
    let steps = (t_end / cfg.dt - 1e-9).ceil().max(0.0) as usize;
    let mut s = s0.clone();
    let (mut crest, mut travelled, mut max_drift) = (x0, 0.0, 0.0f64);
    row(0.0, x0, 0.0);
    for _ in 0..steps {
        s = m.step(&s)?;
        let c = crest_position(sp, &s.eta)?;
        travelled += periodic_offset(c - crest, g1.l());
        crest = c;
        let drift = shape_drift(sp, &s.eta, &s0.eta, travelled)?;
        max_drift = max_drift.max(drift);
        row(s.t, x0 + travelled, drift);
    }
    let speed = if s.t > 0.0 { travelled / s.t } else { f64::NAN };
    Ok(SolitonRun {
        speed,
        theory: v,
        max_drift,
    })
}

fn soliton_demo(
    cfg: &RunConfig,
    ctx: &RunContext,
    out: &mut Out,
    inputs: &mut Vec<(String, String)>,
) -> Result<String> {
    let g1 = Grid1D::new(cfg.grid.nx(), cfg.grid.lx())?;
    let bath = load_bathymetry(cfg, ctx, inputs)?;
    let model = match cfg.soliton.model {
        SolitonModel::Pair => Model1D::Pair(cfg.regime),
        SolitonModel::Kdv => Model1D::KdvUneven {
            as_printed: cfg.kdv_as_printed,
        },
    };
    let st = StepperConfig::new(cfg.time.dt.unwrap_or(cfg.time.cfl * g1.dx()))?
        .with_filter(cfg.time.filter);
    let mut rows = Vec::new();
    let every = cfg.time.diagnostics_every;
    let mut n = 0usize;
    let r = soliton_run(
        g1,
        &bath,
        cfg.params,
        model,
        st,
        cfg.soliton.amp,
        cfg.soliton.x0,
        cfg.time.t_end,
        |t, c, d| {
            if n.is_multiple_of(every) {
                rows.push(vec![num(t), num(c), num(d)]);
            }
            n += 1;
        },
    )?;
    out.write(
        "soliton.csv",
        csv(&["t", "crest", "shape_drift"], &rows).as_bytes(),
    )?;
    Ok(format!(
        "crest speed {:.6} (theory {:.6}), max shape drift {:e}",
        r.speed, r.theory, r.max_drift
    ))
}

fn potential(
    cfg: &RunConfig,
    ctx: &RunContext,
    out: &mut Out,
    inputs: &mut Vec<(String, String)>,
) -> Result<String> {
    let bath = load_bathymetry(cfg, ctx, inputs)?.sample(&cfg.grid)?;
    let s0 = initial_state(cfg, ctx, inputs)?;
    let sp = Spectral::new(cfg.grid);
    // The initial f, or η when the data carry no potential.
    let f = if s0.f.max_abs() > 0.0 { s0.f } else { s0.eta };
    let big_f = bottom_f(&sp, &f, &bath, &cfg.params, cfg.regime)?;
    let mut rows = Vec::new();
    for &m in &cfg.potential.m {
        let ps = PotentialSeries::new(f.clone(), big_f.clone(), m, cfg.params)?;
        let r = potential_residuals(&sp, &ps, &bath, &cfg.potential.z_samples)?;
        rows.push(vec![m.to_string(), num(r.laplace), num(r.bottom)]);
    }
    out.write(
        "potential.csv",
        csv(&["m", "laplace_res", "bottom_res"], &rows).as_bytes(),
    )?;
    Ok(format!("{} truncations evaluated", rows.len()))
}

/// Derived single equation and its difference from the typeset one.
#[derive(Debug, Clone, PartialEq)]
pub struct DeriveReport {
    pub regime: Regime,
    /// `printed − derived`, empty when they agree term for term.
    pub diff_len: usize,
    /// The difference equals the catalogued typesetting discrepancies.
    pub matches_known: bool,
    pub text: String,
}

impl DeriveReport {
    pub fn summary(&self) -> String {
        if self.diff_len == 0 {
            format!(
                "{}: derived equation matches the typeset one (empty diff)",
                self.regime
            )
        } else if self.matches_known {
            format!(
                "{}: diff has {} terms, exactly the catalogued discrepancies",
                self.regime, self.diff_len
            )
        } else {
            format!(
                "{}: diff has {} terms beyond the catalogue",
                self.regime, self.diff_len
            )
        }
    }

    /// Zero for an empty or fully catalogued diff.
    pub fn exit_code(&self) -> i32 {
        if self.diff_len == 0 || self.matches_known {
            0
        } else {
            1
        }
    }
}

pub fn derive_report(r: Regime) -> Result<DeriveReport> {
    let derived = derive_scalar_equation(r)?;
    let typeset = printed::scalar(r)?;
    let diff = diff_termsums(&typeset, &derived);
    let known = printed::known_discrepancies(r)?;
    let matches_known = diff_termsums(&diff, &known).is_empty();
    let mut text = String::new();
    let _ = writeln!(text, "# {r}: derived single equation");
    let _ = writeln!(text, "{derived}");
    let _ = writeln!(text, "# typeset minus derived ({} terms)", diff.len());
    if !diff.is_empty() {
        let _ = writeln!(text, "{diff}");
    }
    Ok(DeriveReport {
        regime: r,
        diff_len: diff.len(),
        matches_known,
        text,
    })
}

// ---- sweeps ------------------------------------------------------------------

/// Parameters for sweep value `eps`: the swept parameters are set to `eps`
/// and the others scaled with them, keeping the configured ratios.
pub fn sweep_params(base: &SmallParams, q: SweepQuantity, eps: f64) -> Result<SmallParams> {
    let s = eps / base.beta;
    let p = match q {
        SweepQuantity::Formulation | SweepQuantity::Cascade => SmallParams {
            alpha: eps,
            beta: eps,
            gamma: eps,
            delta: base.delta * s,
            tau: base.tau,
        },
        SweepQuantity::StTruncation => SmallParams {
            alpha: eps,
            ..*base
        },
        SweepQuantity::Laplace | SweepQuantity::Bottom => SmallParams {
            beta: eps,
            gamma: base.gamma * s,
            ..*base
        },
    };
    p.validated()
}

/// Max |η_pair − η_scalar| at `t_end` from matched initial data.
pub fn formulation_difference(cfg: &RunConfig, bath: &Bathymetry, s0: &WaveState) -> Result<f64> {
    let b = bath.sample(&cfg.grid)?;
    let model = pair_model(cfg, b.clone())?;
    let st = ScalarStepper::new(cfg.grid, b, cfg.params, cfg.regime, cfg.form, stepper(cfg)?)?;
    let mut sc = matched_scalar_state(&model, s0)?;
    let mut pr = s0.clone();
    for _ in 0..cfg.time.steps(&cfg.grid) {
        pr = model.step(&pr)?;
        sc = st.step(&sc)?;
    }
    let eta = eta_from_f(model.spectral(), &sc, &cfg.params, cfg.regime)?;
    Ok(eta.max_abs_diff(&pr.eta))
}

/// The swept quantity for one configuration.
pub fn sweep_value(
    cfg: &RunConfig,
    q: SweepQuantity,
    bath: &Bathymetry,
    s0: &WaveState,
) -> Result<f64> {
    let sp = Spectral::new(cfg.grid);
    let p = &cfg.params;
    match q {
        SweepQuantity::Formulation => formulation_difference(cfg, bath, s0),
        SweepQuantity::StTruncation => {
            Ok(st_exact(&sp, &s0.eta, p)?.max_abs_diff(&st_approx(&sp, &s0.eta, p)?))
        }
        SweepQuantity::Laplace | SweepQuantity::Bottom => {
            let b = bath.sample(&cfg.grid)?;
            let f = if s0.f.max_abs() > 0.0 {
                s0.f.clone()
            } else {
                s0.eta.clone()
            };
            let big_f = bottom_f(&sp, &f, &b, p, cfg.regime)?;
            let ps = PotentialSeries::new(f, big_f, 1, *p)?;
            let r = potential_residuals(&sp, &ps, &b, &cfg.potential.z_samples)?;
            Ok(if q == SweepQuantity::Laplace {
                r.laplace
            } else {
                r.bottom
            })
        }
        SweepQuantity::Cascade => Ok(perturb_report(cfg, bath)?.0.ratio),
    }
}

/// Threads allowed by [`THREADS_ENV`] (unset or invalid: all cores).
pub fn sweep_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(0)
}

/// `(eps, value)` pairs in the configured order.
pub fn sweep_values(
    cfg: &RunConfig,
    ctx: &RunContext,
    inputs: &mut Vec<(String, String)>,
) -> Result<Vec<(f64, f64)>> {
    let spec = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("sweep needs a [sweep] section".into()))?;
    let bath = load_bathymetry(cfg, ctx, inputs)?;
    let mut runs = Vec::new();
    for &e in &spec.eps {
        let mut c = cfg.clone();
        c.params = sweep_params(&cfg.params, spec.quantity, e)?;
        // Initial data depend on the parameters for soliton lines.
        let s0 = initial_state(&c, ctx, &mut Vec::new())?;
        runs.push((e, c, s0));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep_threads())
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let q = spec.quantity;
    let values: Vec<Result<f64>> = pool.install(|| {
        runs.par_iter()
            .map(|(_, c, s0)| sweep_value(c, q, &bath, s0))
            .collect()
    });
    runs.iter()
        .zip(values)
        .map(|((e, _, _), v)| Ok((*e, v?)))
        .collect()
}

fn sweep(
    cfg: &RunConfig,
    ctx: &RunContext,
    out: &mut Out,
    inputs: &mut Vec<(String, String)>,
) -> Result<String> {
    let vals = sweep_values(cfg, ctx, inputs)?;
    let (eps, v): (Vec<f64>, Vec<f64>) = vals.iter().copied().unzip();
    let fit = loglog_slope(&eps, &v);
    let rows: Vec<Vec<String>> = vals
        .iter()
        .enumerate()
        .map(|(i, &(e, x))| {
            let local = if i == 0 {
                String::new()
            } else {
                num(loglog_slope(&eps[i - 1..=i], &v[i - 1..=i]))
            };
            vec![num(e), num(x), local, num(fit)]
        })
        .collect();
    let q = cfg.sweep.as_ref().map(|s| s.quantity.name()).unwrap_or("");
    out.write(
        "sweep.csv",
        csv(&["eps", "value", "local_slope", "fit_slope"], &rows).as_bytes(),
    )?;
    Ok(format!("{q}: log-log slope {fit:.4}"))
}

/// Rows of a soliton line's elevation along x (for tests and plotting).
pub fn row_of(u: &Field2D, j: usize) -> Result<Field1D> {
    Field1D::from_values(
        Grid1D::new(u.grid().nx(), u.grid().lx())?,
        u.row(j).to_vec(),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    const BASE: &str = "\
[grid]
nx = 16
ny = 16
Lx = 6.283185307179586
Ly = 6.283185307179586

[params]
alpha = 0.1
beta = 0.1
gamma = 0.1
delta = 0.1

[regime]
case = 1

[initial]
kind = \"rest\"

[time]
dt = 0.1
t_end = 0.5
snapshot_every = 2
";

    fn ctx(text: &str, dir: &Path) -> RunContext {
        RunContext {
            base_dir: dir.to_path_buf(),
            config_text: text.to_string(),
        }
    }

    #[test]
    fn blob_hash_matches_git() {
        // `printf 'hello\n' | git hash-object --stdin`
        assert_eq!(
            blob_hash(b"hello\n"),
            "ce013625030ba8dba906f756967f9e9ca394464a"
        );
    }

    #[test]
    fn slope_of_power_law() {
        let x = [0.2, 0.1, 0.05];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powi(2)).collect();
        assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rest_simulation_writes_zero_artifacts() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = parse_config(BASE).unwrap();
        let o = run(&cfg, Subcommand::Simulate, &ctx(BASE, dir.path())).unwrap();
        let d = fs::read_to_string(o.out_dir.join("diagnostics.csv")).unwrap();
        let lines: Vec<&str> = d.lines().collect();
        assert_eq!(lines[0], "t,mass,l2_eta,linf_eta,tail_fraction");
        assert_eq!(lines.len(), 7);
        assert!(lines[1..]
            .iter()
            .all(|l| l.split(',').nth(1) == Some("0.0")));
        for n in [0, 2, 4, 5] {
            let s = read_snapshot(&fs::read(o.out_dir.join(snapshot_name(n))).unwrap()).unwrap();
            assert_eq!(s.eta.max_abs() + s.f.max_abs(), 0.0);
        }
        assert!(!o.out_dir.join(snapshot_name(3)).exists());
        let m = fs::read_to_string(o.out_dir.join("run.manifest")).unwrap();
        assert!(m.contains(&format!("config_hash = {}", blob_hash(BASE.as_bytes()))));
        assert!(m.ends_with(BASE));
    }

    #[test]
    fn seed_override_reaches_random_data() {
        let text = BASE.replace("kind = \"rest\"", "kind = \"random\"\namp = 0.1\nseed = 1");
        let mut cfg = parse_config(&text).unwrap();
        let c = ctx(&text, Path::new("."));
        let a = initial_state(&cfg, &c, &mut Vec::new()).unwrap();
        assert!((a.eta.max_abs() - 0.1).abs() < 1e-15);
        assert_eq!(a, initial_state(&cfg, &c, &mut Vec::new()).unwrap());
        Overrides {
            seed: Some(2),
            ..Default::default()
        }
        .apply(&mut cfg);
        assert_ne!(a, initial_state(&cfg, &c, &mut Vec::new()).unwrap());
    }

    #[test]
    fn plane_wave_data_follow_the_linear_pair() {
        let text = BASE.replace(
            "kind = \"rest\"",
            "kind = \"plane-wave\"\namp = 1e-3\njx = 1\njy = 1",
        );
        let cfg = parse_config(&text).unwrap();
        let s = initial_state(&cfg, &ctx(&text, Path::new(".")), &mut Vec::new()).unwrap();
        // f_t = −η at zeroth order.
        let model = pair_model(&cfg, Bathymetry::flat().sample(&cfg.grid).unwrap()).unwrap();
        let r = model.rhs(&s).unwrap();
        assert!(r.f_t.max_abs_diff(&s.eta.scale(-1.0)) < 0.2 * 1e-3);
    }

    #[test]
    fn soliton_line_potential_is_periodic_and_matches_w() {
        let text = BASE
            .replace("nx = 16", "nx = 512")
            .replace("Lx = 6.283185307179586", "Lx = 80.0")
            .replace(
                "kind = \"rest\"",
                "kind = \"soliton-line\"\namp = 1.0\nx0 = 40.0",
            )
            .replace("delta = 0.1", "delta = 0.0");
        let cfg = parse_config(&text).unwrap();
        let s = initial_state(&cfg, &ctx(&text, Path::new(".")), &mut Vec::new()).unwrap();
        let sp = Spectral::new(cfg.grid);
        let fx = sp.deriv(&s.f, 1, 0).unwrap();
        let w = soliton_init(Grid1D::new(512, 80.0).unwrap(), 1.0, &cfg.params, 40.0)
            .unwrap()
            .w;
        let mean = w.values().iter().sum::<f64>() / 512.0;
        let fx_row = row_of(&fx, 3).unwrap();
        let d = fx_row
            .values()
            .iter()
            .zip(w.values())
            .map(|(a, b)| (a - (b - mean)).abs())
            .fold(0.0, f64::max);
        assert!(d < 1e-12, "{d}");
    }

    #[test]
    fn derive_case1_is_clean_and_case2_is_not() {
        let r1 = derive_report(Regime::Case1).unwrap();
        assert_eq!(r1.diff_len, 0);
        assert_eq!(r1.exit_code(), 0);
        let r4 = derive_report(Regime::Case4).unwrap();
        assert!(r4.diff_len > 0 && r4.matches_known);
        let r2 = derive_report(Regime::Case2).unwrap();
        assert_eq!(r2.exit_code(), 1);
    }

    #[test]
    fn sweep_params_keep_ratios() {
        let base = SmallParams::new(0.1, 0.1, 0.05, 0.2).unwrap();
        let p = sweep_params(&base, SweepQuantity::Laplace, 0.05).unwrap();
        assert_eq!((p.alpha, p.beta, p.gamma, p.delta), (0.1, 0.05, 0.025, 0.2));
        let p = sweep_params(&base, SweepQuantity::Formulation, 0.05).unwrap();
        assert_eq!((p.alpha, p.beta, p.gamma, p.delta), (0.05, 0.05, 0.05, 0.1));
    }
}
