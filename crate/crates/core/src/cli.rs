//! Configuration ingestion, CSV emission, figure presets and the subcommand
//! runner behind the `cavdiff` binary.
//!
//! A scene is a flat `key=value` text; `#` starts a comment. Profiles use
//! `kind:axis:k:phase` (`kind` is `constant`, `running` or `standing`; `axis`
//! is `x`, `y`, `z`, optionally signed, or `a,b,c`). The Stark profile takes a
//! fifth field, its real amplitude, and `constant:amplitude` for a uniform
//! shift. The `k` field of `g_profile` and `eta_profile` is the same quantity
//! as `k_cav` and `k_L`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use num_complex::Complex;

use crate::analysis::{self, Column, Dominant, SweepParameter};
use crate::diffusion::{self, DiffusionResult};
use crate::error::{ConfigIssue, Error, Result};
use crate::model::{FieldProfile, ProfileKind, SceneConfig, SystemParams};
use crate::oracle::{self, TruncatedSpace};
use crate::scalar::rel_dev_real;
use crate::steady_state::{self, check_routes};
use crate::vec3::Vec3;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Recognized keys, in echo order.
pub const KEYS: [&str; 21] = [
    "gamma",
    "kappa",
    "delta_a",
    "delta_c",
    "g0_re",
    "g0_im",
    "eta0_re",
    "eta0_im",
    "E_re",
    "E_im",
    "k",
    "k_L",
    "k_cav",
    "mass",
    "g_profile",
    "eta_profile",
    "stark_profile",
    "x",
    "y",
    "z",
    "axis",
];

pub const DEFAULT_PRECISION: usize = 9;
pub const PRECISION_RANGE: std::ops::RangeInclusive<usize> = 6..=17;
pub const DEFAULT_STEPS: usize = 601;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigEntry {
    pub key: String,
    pub value: String,
    /// `None` for command-line overrides.
    pub line: Option<usize>,
}

/// A validated scene with the evaluation point and diffusion axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SceneInput {
    pub scene: SceneConfig<f64>,
    pub position: Vec3<f64>,
    pub axis: Vec3<f64>,
}

impl SceneInput {
    /// Canonical `key=value` pairs; parsing them back gives the same input.
    pub fn echo(&self) -> Vec<(String, String)> {
        let p = &self.scene.params;
        let mut out = vec![
            ("gamma", num(p.gamma)),
            ("kappa", num(p.kappa)),
            ("delta_a", num(p.delta_a0)),
            ("delta_c", num(p.delta_c)),
            ("g0_re", num(p.g0.re)),
            ("g0_im", num(p.g0.im)),
            ("eta0_re", num(p.eta0.re)),
            ("eta0_im", num(p.eta0.im)),
            ("E_re", num(p.cavity_drive.re)),
            ("E_im", num(p.cavity_drive.im)),
            ("k", num(p.k)),
            ("k_L", num(p.k_l)),
            ("k_cav", num(p.k_cav)),
        ];
        if let Some(m) = p.mass {
            out.push(("mass", num(m)));
        }
        out.extend([
            (
                "g_profile",
                profile_text(&self.scene.g_profile, p.k_cav, false),
            ),
            (
                "eta_profile",
                profile_text(&self.scene.eta_profile, p.k_l, false),
            ),
            (
                "stark_profile",
                profile_text(
                    &self.scene.stark_profile,
                    self.scene.stark_profile.wavevector.norm(),
                    true,
                ),
            ),
            ("x", num(self.position[0])),
            ("y", num(self.position[1])),
            ("z", num(self.position[2])),
            ("axis", axis_text(&self.axis)),
        ]);
        out.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub fn echo_text(&self) -> String {
        self.echo()
            .into_iter()
            .map(|(k, v)| format!("{k}={v}\n"))
            .collect()
    }
}

impl Default for SceneInput {
    fn default() -> Self {
        build_scene(&[]).expect("defaults are valid")
    }
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn axis_text(v: &Vec3<f64>) -> String {
    for (i, name) in ["x", "y", "z"].iter().enumerate() {
        if *v == Vec3::unit(i) {
            return name.to_string();
        }
        if *v == -Vec3::unit(i) {
            return format!("-{name}");
        }
    }
    format!("{},{},{}", v[0], v[1], v[2])
}

fn profile_text(p: &FieldProfile<f64>, k: f64, stark: bool) -> String {
    if p.kind == ProfileKind::Constant {
        return if stark {
            format!("constant:{}", p.amplitude.re)
        } else {
            "constant".into()
        };
    }
    let dir = p.direction().expect("validated non-constant profile");
    let mut s = format!("{}:{}:{}:{}", p.kind.name(), axis_text(&dir), k, p.phase);
    if stark {
        let _ = write!(s, ":{}", p.amplitude.re);
    }
    s
}

/// Splits config text into entries; syntax problems and repeated keys are
/// collected and reported together.
pub fn parse_entries(text: &str) -> Result<Vec<ConfigEntry>> {
    let mut entries: Vec<ConfigEntry> = Vec::new();
    let mut issues = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            issues.push(issue(Some(line), content, "expected key=value"));
            continue;
        };
        let (key, value) = (key.trim(), value.trim());
        if !KEYS.contains(&key) {
            issues.push(issue(Some(line), key, "unknown key"));
            continue;
        }
        if let Some(prev) = entries.iter().find(|e| e.key == key) {
            let msg = format!(
                "repeated key (first set on line {})",
                prev.line.unwrap_or(0)
            );
            issues.push(issue(Some(line), key, &msg));
            continue;
        }
        entries.push(ConfigEntry {
            key: key.to_string(),
            value: value.to_string(),
            line: Some(line),
        });
    }
    if issues.is_empty() {
        Ok(entries)
    } else {
        Err(Error::Config(issues))
    }
}

/// Parses and validates a scene configuration.
pub fn parse_config(text: &str) -> Result<SceneInput> {
    build_scene(&parse_entries(text)?)
}

fn issue(line: Option<usize>, key: &str, message: &str) -> ConfigIssue {
    ConfigIssue {
        line,
        key: key.to_string(),
        message: message.to_string(),
    }
}

struct ProfileSpec {
    kind: ProfileKind,
    axis: Vec3<f64>,
    k: Option<f64>,
    phase: f64,
    amplitude: f64,
}

fn parse_axis(s: &str) -> Option<Vec3<f64>> {
    let s = s.trim();
    let (sign, name) = match s.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, s.strip_prefix('+').unwrap_or(s)),
    };
    match name {
        "x" => return Some(Vec3::x().scale(sign)),
        "y" => return Some(Vec3::y().scale(sign)),
        "z" => return Some(Vec3::z().scale(sign)),
        _ => {}
    }
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse().ok())
        .collect::<Option<_>>()?;
    match parts[..] {
        [a, b, c] => Some(Vec3::new(a, b, c)),
        _ => None,
    }
}

fn parse_profile(s: &str, stark: bool) -> std::result::Result<ProfileSpec, String> {
    let fields: Vec<&str> = s.split(':').map(str::trim).collect();
    let float = |f: &str, what: &str| -> std::result::Result<f64, String> {
        f.parse::<f64>()
            .map_err(|_| format!("{what} `{f}` is not a number"))
    };
    let kind = match fields[0] {
        "constant" => ProfileKind::Constant,
        "running" => ProfileKind::RunningWave,
        "standing" => ProfileKind::StandingWave,
        other => {
            return Err(format!(
                "unknown profile kind `{other}` (constant, running or standing)"
            ))
        }
    };
    if kind == ProfileKind::Constant {
        let amplitude = match (&fields[1..], stark) {
            ([], _) => 0.0,
            ([a], true) => float(a, "amplitude")?,
            _ => {
                return Err(if stark {
                    "constant Stark profile takes only an amplitude".into()
                } else {
                    "constant profile takes no further fields".into()
                })
            }
        };
        return Ok(ProfileSpec {
            kind,
            axis: Vec3::zero(),
            k: None,
            phase: 0.0,
            amplitude,
        });
    }
    let max = if stark { 5 } else { 4 };
    if fields.len() < 2 || fields.len() > max {
        return Err(if stark {
            "expected kind:axis:k:phase:amplitude".into()
        } else {
            "expected kind:axis:k:phase".into()
        });
    }
    let axis = parse_axis(fields[1]).ok_or_else(|| format!("invalid axis `{}`", fields[1]))?;
    let opt = |i: usize, what: &str| -> std::result::Result<Option<f64>, String> {
        match fields.get(i) {
            Some(f) if !f.is_empty() => float(f, what).map(Some),
            _ => Ok(None),
        }
    };
    Ok(ProfileSpec {
        kind,
        axis,
        k: opt(2, "wavenumber")?,
        phase: opt(3, "phase")?.unwrap_or(0.0),
        amplitude: opt(4, "amplitude")?.unwrap_or(0.0),
    })
}

fn profile_from(spec: &ProfileSpec, k: f64) -> FieldProfile<f64> {
    let dir = spec.axis.normalized().unwrap_or(spec.axis);
    let amp = Complex::new(spec.amplitude, 0.0);
    match spec.kind {
        ProfileKind::Constant => FieldProfile::constant(amp),
        ProfileKind::RunningWave => FieldProfile::running(amp, dir.scale(k)).with_phase(spec.phase),
        ProfileKind::StandingWave => {
            FieldProfile::standing(amp, dir.scale(k)).with_phase(spec.phase)
        }
    }
}

/// Builds a scene from defaults overlaid by `entries` (later entries win).
///
/// Defaults: unit `gamma`, `kappa` and wavenumbers, zero detunings and
/// drives, `g_profile=standing:x`, `eta_profile=running:y`, no Stark shift,
/// atom at the origin, `axis=x`.
pub fn build_scene(entries: &[ConfigEntry]) -> Result<SceneInput> {
    let mut map: BTreeMap<&str, &ConfigEntry> = BTreeMap::new();
    let mut issues = Vec::new();
    for e in entries {
        if KEYS.contains(&e.key.as_str()) {
            map.insert(e.key.as_str(), e);
        } else {
            issues.push(issue(e.line, &e.key, "unknown key"));
        }
    }
    let line_of = |key: &str| map.get(key).and_then(|e| e.line);

    let number = |key: &str, default: f64, issues: &mut Vec<ConfigIssue>| -> f64 {
        match map.get(key) {
            None => default,
            Some(e) => e.value.parse::<f64>().unwrap_or_else(|_| {
                issues.push(issue(
                    e.line,
                    key,
                    &format!("`{}` is not a number", e.value),
                ));
                default
            }),
        }
    };
    let mut params = SystemParams::<f64> {
        gamma: number("gamma", 1.0, &mut issues),
        kappa: number("kappa", 1.0, &mut issues),
        delta_a0: number("delta_a", 0.0, &mut issues),
        delta_c: number("delta_c", 0.0, &mut issues),
        g0: Complex::new(
            number("g0_re", 0.0, &mut issues),
            number("g0_im", 0.0, &mut issues),
        ),
        eta0: Complex::new(
            number("eta0_re", 0.0, &mut issues),
            number("eta0_im", 0.0, &mut issues),
        ),
        cavity_drive: Complex::new(
            number("E_re", 0.0, &mut issues),
            number("E_im", 0.0, &mut issues),
        ),
        k: number("k", 1.0, &mut issues),
        k_l: number("k_L", 1.0, &mut issues),
        k_cav: number("k_cav", 1.0, &mut issues),
        mass: map
            .contains_key("mass")
            .then(|| number("mass", 1.0, &mut issues)),
    };
    let position = Vec3::new(
        number("x", 0.0, &mut issues),
        number("y", 0.0, &mut issues),
        number("z", 0.0, &mut issues),
    );
    let axis = match map.get("axis") {
        None => Vec3::x(),
        Some(e) => match parse_axis(&e.value) {
            Some(v) if v.normalized().is_some() && v.is_finite() => v,
            _ => {
                issues.push(issue(
                    e.line,
                    "axis",
                    &format!("invalid axis `{}`", e.value),
                ));
                Vec3::x()
            }
        },
    };

    let profile =
        |key: &str, default: &str, stark: bool, issues: &mut Vec<ConfigIssue>| -> ProfileSpec {
            let (text, line) = match map.get(key) {
                Some(e) => (e.value.as_str(), e.line),
                None => (default, None),
            };
            parse_profile(text, stark).unwrap_or_else(|msg| {
                issues.push(issue(line, key, &msg));
                parse_profile(default, stark).expect("default profile parses")
            })
        };
    let g_spec = profile("g_profile", "standing:x", false, &mut issues);
    let eta_spec = profile("eta_profile", "running:y", false, &mut issues);
    let stark_spec = profile("stark_profile", "constant", true, &mut issues);

    // profile wavenumbers alias k_cav and k_L
    for (spec, key, pkey, target) in [
        (&g_spec, "k_cav", "g_profile", &mut params.k_cav),
        (&eta_spec, "k_L", "eta_profile", &mut params.k_l),
    ] {
        if let Some(k) = spec.k {
            if map.contains_key(key) && *target != k {
                issues.push(issue(
                    line_of(pkey),
                    pkey,
                    &format!("wavenumber {k} contradicts {key}={}", *target),
                ));
            } else {
                *target = k;
            }
        }
    }
    let stark_k = stark_spec.k.unwrap_or(params.k_cav);

    let scene = SceneConfig {
        params,
        g_profile: profile_from(&g_spec, params.k_cav),
        eta_profile: profile_from(&eta_spec, params.k_l),
        stark_profile: profile_from(&stark_spec, stark_k),
    };
    let scene = SceneConfig::new(
        scene.params,
        scene.g_profile,
        scene.eta_profile,
        scene.stark_profile,
    );
    if !position.is_finite() {
        issues.push(issue(line_of("x"), "x", "position must be finite"));
    }
    match scene {
        Ok(scene) if issues.is_empty() => Ok(SceneInput {
            scene,
            position,
            axis,
        }),
        Ok(_) => Err(Error::Config(issues)),
        Err(Error::Config(more)) => {
            for mut m in more {
                let key = match m.key.as_str() {
                    "g0" => "g0_re",
                    "eta0" => "eta0_re",
                    "E" => "E_re",
                    other => other,
                };
                m.line = line_of(key);
                issues.push(m);
            }
            Err(Error::Config(issues))
        }
        Err(e) => Err(e),
    }
}

/// Formats `x` with `precision` significant digits in scientific notation.
pub fn format_number(x: f64, precision: usize) -> String {
    format!("{:.*e}", precision.saturating_sub(1), x)
}

/// A CSV table with a provenance header.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    /// Echoed into the first comment line as `key=value`.
    pub header: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

/// Renders `table`; identical input gives identical bytes.
pub fn emit_csv(table: &Table, precision: usize) -> Result<String> {
    check_precision(precision)?;
    let mut out = format!("# cavdiff {VERSION}");
    for (k, v) in &table.header {
        let _ = write!(out, " {k}={v}");
    }
    out.push('\n');
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => format_number(*x, precision),
                Cell::Text(s) => s.clone(),
                Cell::Empty => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn write_output(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn check_precision(precision: usize) -> Result<()> {
    if PRECISION_RANGE.contains(&precision) {
        Ok(())
    } else {
        Err(Error::config(
            "precision",
            format!(
                "must lie in [{}, {}] (got {precision})",
                PRECISION_RANGE.start(),
                PRECISION_RANGE.end()
            ),
        ))
    }
}

pub const PRESETS: [&str; 3] = ["fig2", "fig2-cavity", "fig3"];

/// Sweep specifications for the figure scenes. Sweep ranges are presentation
/// choices.
///
/// * `fig2`: `E = 0`, `eta0 = 0.1`, `kappa = 1`, `g0 = 6`, `delta_a - delta_c = 9`,
///   atom at a cavity antinode, running-wave side drive along `y`, diffusion
///   along `y`, laser swept over `delta_a` in `[-10, 20]`.
/// * `fig2-cavity`: same normal-mode structure pumped through the cavity
///   (`E = 0.1`, `eta = 0`) with the atom at `k_cav x = pi/4` and diffusion
///   along the cavity axis.
/// * `fig3`: `E = 0`, `eta0 = 0.1`, `kappa = 1`, `g0 = 3`, `delta_a = 0`, cavity
///   swept over `delta_c` in `[-15, 15]`, diffusion along the side axis.
pub fn figure_preset(name: &str) -> Result<analysis::SweepSpec<f64>> {
    let c = |re: f64| Complex::new(re, 0.0);
    let base = SystemParams::<f64> {
        eta0: c(0.1),
        ..Default::default()
    };
    let standing_x = FieldProfile::standing(c(0.0), Vec3::x());
    let running_y = FieldProfile::running(c(0.0), Vec3::y());
    let none = FieldProfile::constant(c(0.0));
    let spec = |scene, position, axis, parameter, from, to| analysis::SweepSpec {
        parameter,
        from,
        to,
        steps: DEFAULT_STEPS,
        scene,
        position,
        axis,
    };
    match name {
        "fig2" => {
            let params = SystemParams {
                g0: c(6.0),
                delta_a0: -10.0,
                delta_c: -19.0,
                ..base
            };
            let scene = SceneConfig::new(params, standing_x, running_y, none)?;
            Ok(spec(
                scene,
                Vec3::zero(),
                Vec3::y(),
                SweepParameter::LaserFrequency,
                -10.0,
                20.0,
            ))
        }
        "fig2-cavity" => {
            let params = SystemParams {
                g0: c(6.0),
                eta0: c(0.0),
                cavity_drive: c(0.1),
                delta_a0: -10.0,
                delta_c: -19.0,
                ..base
            };
            let scene = SceneConfig::new(params, standing_x, none, none)?;
            let x = std::f64::consts::FRAC_PI_4;
            Ok(spec(
                scene,
                Vec3::new(x, 0.0, 0.0),
                Vec3::x(),
                SweepParameter::LaserFrequency,
                -10.0,
                20.0,
            ))
        }
        "fig3" => {
            let params = SystemParams { g0: c(3.0), ..base };
            let scene = SceneConfig::new(params, standing_x, running_y, none)?;
            Ok(spec(
                scene,
                Vec3::zero(),
                Vec3::y(),
                SweepParameter::CavityFrequency,
                -15.0,
                15.0,
            ))
        }
        other => Err(Error::UnknownPreset(other.to_string())),
    }
}

/// Exit status for a failed run: 2 configuration, 3 numerical failure,
/// 4 cross-check failure, 1 I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_)
        | Error::UnknownPreset(_)
        | Error::Sweep(_)
        | Error::NonPeriodic(_)
        | Error::DimensionOverflow { .. } => 2,
        Error::Singular { .. }
        | Error::DegenerateKernel { .. }
        | Error::IllConditioned { .. }
        | Error::InvalidDensity(_) => 3,
        Error::CrossCheck { .. } => 4,
        Error::Io { .. } => 1,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Route {
    MeanField,
    Matrix,
    FiniteDifference,
    FreeSpace,
}

impl Route {
    pub fn name(self) -> &'static str {
        match self {
            Route::MeanField => "mean-field",
            Route::Matrix => "matrix",
            Route::FiniteDifference => "fd",
            Route::FreeSpace => "free-space",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Steady,
    Diffusion {
        route: Route,
    },
    Sweep {
        parameter: SweepParameter,
        from: f64,
        to: f64,
        steps: usize,
        peaks: Option<Column>,
    },
    Oracle {
        n_atom: usize,
        n_cav: usize,
    },
    Regime,
    Figure {
        name: String,
        steps: Option<usize>,
        peaks: Option<Column>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Steady => "steady",
            Command::Diffusion { .. } => "diffusion",
            Command::Sweep { .. } => "sweep",
            Command::Oracle { .. } => "oracle",
            Command::Regime => "regime",
            Command::Figure { .. } => "figure",
        }
    }
}

/// Everything a run depends on.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// Contents of the `--config` file, if any.
    pub config_text: Option<String>,
    /// Flag overrides as `(key, value)`, applied after the file.
    pub overrides: Vec<(String, String)>,
    pub output: Option<PathBuf>,
    pub precision: usize,
    pub cross_check: bool,
    pub cross_check_tolerance: f64,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        RunConfig {
            command,
            config_text: None,
            overrides: Vec::new(),
            output: None,
            precision: DEFAULT_PRECISION,
            cross_check: false,
            cross_check_tolerance: 1e-10,
        }
    }

    pub fn scene(&self) -> Result<SceneInput> {
        let mut entries = match &self.config_text {
            Some(text) => parse_entries(text)?,
            None => Vec::new(),
        };
        entries.extend(self.overrides.iter().map(|(k, v)| ConfigEntry {
            key: k.clone(),
            value: v.clone(),
            line: None,
        }));
        build_scene(&entries)
    }
}

/// Runs one subcommand and returns the CSV text.
pub fn run(cfg: &RunConfig) -> Result<String> {
    check_precision(cfg.precision)?;
    if !cfg.cross_check_tolerance.is_finite() {
        return Err(Error::config("cross-check-tol", "must be finite"));
    }
    let table = match &cfg.command {
        Command::Figure { name, steps, peaks } => {
            let mut spec = figure_preset(name)?;
            if let Some(s) = steps {
                spec.steps = *s;
            }
            let input = SceneInput {
                scene: spec.scene,
                position: spec.position,
                axis: spec.axis,
            };
            let mut header = vec![("figure".to_string(), name.clone())];
            header.extend(input.echo());
            sweep_table(cfg, &spec, header, *peaks)?
        }
        command => {
            let input = cfg.scene()?;
            let mut header = vec![("command".to_string(), command.name().to_string())];
            header.extend(input.echo());
            match command {
                Command::Steady => steady_table(cfg, &input, header)?,
                Command::Diffusion { route } => diffusion_table(cfg, &input, *route, header)?,
                Command::Sweep {
                    parameter,
                    from,
                    to,
                    steps,
                    peaks,
                } => {
                    let spec = analysis::SweepSpec {
                        parameter: *parameter,
                        from: *from,
                        to: *to,
                        steps: *steps,
                        scene: input.scene,
                        position: input.position,
                        axis: input.axis,
                    };
                    sweep_table(cfg, &spec, header, *peaks)?
                }
                Command::Oracle { n_atom, n_cav } => {
                    oracle_table(cfg, &input, *n_atom, *n_cav, header)?
                }
                Command::Regime => regime_table(cfg, &input, header)?,
                Command::Figure { .. } => unreachable!(),
            }
        }
    };
    emit_csv(&table, cfg.precision)
}

fn cross_check(cfg: &RunConfig, scene: &SceneConfig<f64>, r: &Vec3<f64>) -> Result<()> {
    if cfg.cross_check {
        let closed = steady_state::steady_closed_form(scene, r)?;
        let (matrix, _) = steady_state::steady_matrix(scene, r)?;
        check_routes(&closed, &matrix, cfg.cross_check_tolerance)?;
    }
    Ok(())
}

fn columns(names: &[&str]) -> Vec<String> {
    names.iter().map(|s| s.to_string()).collect()
}

fn steady_table(
    cfg: &RunConfig,
    input: &SceneInput,
    header: Vec<(String, String)>,
) -> Result<Table> {
    cross_check(cfg, &input.scene, &input.position)?;
    let s = steady_state::steady_state(&input.scene, &input.position, false)?;
    Ok(Table {
        header,
        columns: columns(&[
            "sigma_re",
            "sigma_im",
            "a_re",
            "a_im",
            "P_e",
            "N_cav",
            "nu_re",
            "nu_im",
            "abs_one_minus_nu_sq",
        ]),
        rows: vec![vec![
            s.sigma_mean.re.into(),
            s.sigma_mean.im.into(),
            s.a_mean.re.into(),
            s.a_mean.im.into(),
            s.p_e.into(),
            s.n_cav.into(),
            s.nu.re.into(),
            s.nu.im.into(),
            s.suppression().into(),
        ]],
    })
}

fn diffusion_table(
    cfg: &RunConfig,
    input: &SceneInput,
    route: Route,
    mut header: Vec<(String, String)>,
) -> Result<Table> {
    let (scene, r, axis) = (&input.scene, &input.position, &input.axis);
    cross_check(cfg, scene, r)?;
    let d: DiffusionResult<f64> = match route {
        Route::MeanField => diffusion::diffusion_mean_field(scene, r, axis)?,
        Route::Matrix => diffusion::diffusion_matrix_form(scene, r, axis)?,
        Route::FiniteDifference => diffusion::diffusion_fd(scene, r, axis, 1e-5)?,
        Route::FreeSpace => diffusion::diffusion_free_space(scene, r, axis)?,
    };
    if cfg.cross_check && route != Route::FreeSpace {
        let matrix = diffusion::diffusion_matrix_form(scene, r, axis)?;
        let mean = diffusion::diffusion_mean_field(scene, r, axis)?;
        let deviation = rel_dev_real(mean.two_d_total, matrix.two_d_total);
        if deviation > cfg.cross_check_tolerance || deviation.is_nan() {
            return Err(Error::CrossCheck {
                what: "diffusion routes",
                deviation,
                tolerance: cfg.cross_check_tolerance,
            });
        }
    }
    header.insert(1, ("route".into(), route.name().into()));
    let heating = d.heating_rate.map_or(Cell::Empty, Cell::Num);
    Ok(Table {
        header,
        columns: columns(&[
            "two_D_spont",
            "two_D_atom",
            "two_D_mode",
            "two_D_total",
            "P_e",
            "N_cav",
            "abs_one_minus_nu_sq",
            "heating_rate",
            "valid",
        ]),
        rows: vec![vec![
            d.two_d_spont.into(),
            d.two_d_atom.into(),
            d.two_d_mode.into(),
            d.two_d_total.into(),
            d.steady.p_e.into(),
            d.steady.n_cav.into(),
            d.steady.suppression().into(),
            heating,
            Cell::Text(d.validity.ok().to_string()),
        ]],
    })
}

fn sweep_table(
    cfg: &RunConfig,
    spec: &analysis::SweepSpec<f64>,
    mut header: Vec<(String, String)>,
    peaks: Option<Column>,
) -> Result<Table> {
    spec.validate()?;
    if cfg.cross_check {
        for i in 0..spec.steps {
            let (scene, r) = spec.configure(spec.value(i))?;
            cross_check(cfg, &scene, &r)?;
        }
    }
    header.extend([
        ("sweep".to_string(), spec.parameter.name().to_string()),
        ("from".to_string(), num(spec.from)),
        ("to".to_string(), num(spec.to)),
        ("steps".to_string(), spec.steps.to_string()),
    ]);
    let rows = analysis::sweep(spec)?;
    if let Some(column) = peaks {
        header.push(("peaks".to_string(), column.name().to_string()));
        let found = analysis::find_peaks_by(&rows, column);
        return Ok(Table {
            header,
            columns: columns(&[spec.parameter.column(), column.name(), "dominant"]),
            rows: found
                .iter()
                .map(|p| {
                    let dom = match p.dominant {
                        Dominant::Atom => "atom",
                        Dominant::Mode => "mode",
                    };
                    vec![p.location.into(), p.height.into(), Cell::Text(dom.into())]
                })
                .collect(),
        });
    }
    let mut names: Vec<String> = Column::ALL.iter().map(|c| c.name().to_string()).collect();
    names[0] = spec.parameter.column().to_string();
    Ok(Table {
        header,
        columns: names,
        rows: rows
            .iter()
            .map(|row| Column::ALL.iter().map(|c| Cell::Num(row.get(*c))).collect())
            .collect(),
    })
}

fn oracle_table(
    cfg: &RunConfig,
    input: &SceneInput,
    n_atom: usize,
    n_cav: usize,
    mut header: Vec<(String, String)>,
) -> Result<Table> {
    let (scene, r, axis) = (&input.scene, &input.position, &input.axis);
    cross_check(cfg, scene, r)?;
    let space = TruncatedSpace::new(n_atom, n_cav)?;
    let o = oracle::regression_diffusion(scene, r, axis, &space)?;
    let mf = diffusion::diffusion_mean_field(scene, r, axis)?;
    header.insert(1, ("n_atom".into(), n_atom.to_string()));
    header.insert(2, ("n_cav".into(), n_cav.to_string()));
    Ok(Table {
        header,
        columns: columns(&[
            "two_D_force_oracle",
            "two_D_force_mean_field",
            "rel_deviation",
            "two_D_spont",
            "imag_residual",
            "P_e",
            "N_cav",
            "purity",
            "harmonic_residual",
            "condition_estimate",
        ]),
        rows: vec![vec![
            o.two_d_force.into(),
            mf.two_d_force().into(),
            rel_dev_real(o.two_d_force, mf.two_d_force()).into(),
            o.two_d_spont.into(),
            o.imag_residual.into(),
            o.p_e.into(),
            o.n_cav.into(),
            o.purity.into(),
            o.harmonic_residual.into(),
            o.condition_estimate.into(),
        ]],
    })
}

fn regime_table(
    cfg: &RunConfig,
    input: &SceneInput,
    header: Vec<(String, String)>,
) -> Result<Table> {
    cross_check(cfg, &input.scene, &input.position)?;
    let report = analysis::regime_report(&input.scene, &input.position)?;
    let opt = |x: Option<f64>| x.map_or(Cell::Empty, Cell::Num);
    Ok(Table {
        header,
        columns: columns(&["regime", "measured", "predicted", "ratio", "rel_deviation"]),
        rows: report
            .entries
            .iter()
            .map(|e| {
                vec![
                    Cell::Text(e.name.into()),
                    opt(e.measured),
                    e.predicted.into(),
                    opt(e.ratio),
                    opt(e.rel_deviation),
                ]
            })
            .collect(),
    })
}
