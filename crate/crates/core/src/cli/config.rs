//! TOML run configuration.
//!
//! ```toml
//! [params]            # natural units; omega_v defaults to 1
//! omega_d = 0.1
//! omega = 1.0
//! n = 10
//!
//! [scenario]          # beta present => partial activation
//! beta = 0.2
//!
//! [output]
//! span = 2.0          # beat periods
//! sampling = 64       # samples per bare period
//! outputs = ["trajectory", "observables"]
//! ```
//!
//! `[params.si]` replaces the natural-unit keys of `[params]` with a
//! microscopic description (`freq_thz`, `area_um2`, `mass_me`, `dipole_e`,
//! `n`, optional `cavity_thz`).

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::{from_si, CavityGeometry, PhysicalConstants, SiSystem, SystemParams};
use crate::scenarios::{ScenarioKind, ScenarioSpec};

/// Environment variable naming the default output directory.
pub const OUTPUT_DIR_ENV: &str = "VSC_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "vsc-out";
pub const DEFAULT_SAMPLING: usize = 64;
pub const DEFAULT_SPAN: f64 = 2.0;
pub const DEFAULT_N: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputKind {
    Trajectory,
    Observables,
    PhaseSpace,
    Energies,
}

impl OutputKind {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "trajectory" => Some(Self::Trajectory),
            "observables" => Some(Self::Observables),
            "phase_space" | "phase-space" => Some(Self::PhaseSpace),
            "energies" => Some(Self::Energies),
            _ => None,
        }
    }
}

/// How trajectories are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Engine {
    ClosedForm,
    Oracle,
}

/// Fully resolved and validated run description.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub params: SystemParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub si: Option<SiSystem>,
    pub scenario: ScenarioSpec,
    /// Time span in beat periods.
    pub span: f64,
    /// Samples per bare vibrational period.
    pub sampling: usize,
    pub outputs: BTreeSet<OutputKind>,
    pub seed: u64,
    #[serde(skip)]
    pub output_dir: PathBuf,
    /// Number of molecules written to the trajectory table.
    pub molecules: usize,
    pub engine: Engine,
    #[serde(skip)]
    pub svg: bool,
}

/// Partially specified configuration as written in a file or on the command
/// line. Every field is optional; [`RawConfig::resolve`] applies defaults.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default)]
    pub params: RawParams,
    #[serde(default)]
    pub scenario: RawScenario,
    #[serde(default)]
    pub output: RawOutput,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawParams {
    pub omega_v: Option<f64>,
    pub omega: Option<f64>,
    pub omega_d: Option<f64>,
    pub n: Option<usize>,
    pub mass: Option<f64>,
    pub x0: Option<f64>,
    pub si: Option<RawSi>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSi {
    pub freq_thz: Option<f64>,
    /// Cavity fundamental `ω/2π`; defaults to `freq_thz` (resonance).
    pub cavity_thz: Option<f64>,
    pub area_um2: Option<f64>,
    pub mass_me: Option<f64>,
    pub dipole_e: Option<f64>,
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawScenario {
    pub kind: Option<String>,
    pub beta: Option<f64>,
    pub velocity_scale: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutput {
    pub span: Option<f64>,
    pub sampling: Option<usize>,
    pub outputs: Option<Vec<String>>,
    pub dir: Option<PathBuf>,
    pub molecules: Option<usize>,
    pub engine: Option<String>,
    pub svg: Option<bool>,
}

fn bad(path: &str, reason: impl Into<String>) -> Error {
    Error::Config {
        path: path.to_string(),
        reason: reason.into(),
    }
}

/// Maps a parameter validation error onto its config field path.
fn at_field(e: Error) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            let key = match name {
                "omega_c" => "omega",
                "n_molecules" => "n",
                other => other,
            };
            bad(&format!("params.{key}"), reason)
        }
        other => other,
    }
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

impl RawConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let reason = match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    format!("line {line}, column {col}: {}", e.message())
                }
                None => e.message().to_string(),
            };
            bad(origin, reason)
        })
    }

    /// Values set in `over` replace those in `self`.
    pub fn merge(mut self, over: RawConfig) -> Self {
        macro_rules! take {
            ($($sec:ident . $f:ident),*) => {$(
                if over.$sec.$f.is_some() { self.$sec.$f = over.$sec.$f; }
            )*};
        }
        take!(
            params.omega_v, params.omega, params.omega_d, params.n, params.mass, params.x0, params.si,
            scenario.kind, scenario.beta, scenario.velocity_scale, scenario.seed,
            output.span, output.sampling, output.outputs, output.dir, output.molecules, output.engine,
            output.svg
        );
        self
    }

    pub fn resolve(self) -> Result<RunConfig> {
        let (params, si) = self.resolve_params()?;
        let n = params.n_molecules;

        let sc = &self.scenario;
        let seed = sc.seed.unwrap_or(0);
        let kind = match sc.kind.as_deref() {
            Some(k) => k.to_string(),
            None if sc.beta.is_some() => "partially_activated".into(),
            None => "fully_excited".into(),
        };
        let scenario = match kind.as_str() {
            "fully_excited" => {
                if sc.beta.is_some() {
                    return Err(bad("scenario.beta", "only valid for kind = \"partially_activated\""));
                }
                let velocity_scale = sc.velocity_scale.unwrap_or(0.0);
                if !(velocity_scale.is_finite() && velocity_scale >= 0.0) {
                    return Err(bad("scenario.velocity_scale", "must be finite and >= 0"));
                }
                ScenarioSpec::fully_excited(n, params.x0, velocity_scale, seed)
            }
            "partially_activated" => {
                if sc.velocity_scale.is_some() {
                    return Err(bad("scenario.velocity_scale", "only valid for kind = \"fully_excited\""));
                }
                let beta = sc.beta.ok_or_else(|| bad("scenario.beta", "required for partial activation"))?;
                if !(0.0..=1.0).contains(&beta) {
                    return Err(bad("scenario.beta", format!("must lie in [0, 1], got {beta}")));
                }
                ScenarioSpec::partially_activated(n, beta, params.x0)
            }
            other => {
                return Err(bad(
                    "scenario.kind",
                    format!("unknown kind `{other}` (fully_excited | partially_activated)"),
                ))
            }
        };
        if let ScenarioKind::PartiallyActivated { .. } = scenario.kind {
            if scenario.excited_count() == 0 {
                log::warn!("scenario.beta * n < 1: no molecule starts excited");
            }
        }

        let out = &self.output;
        let span = out.span.unwrap_or(DEFAULT_SPAN);
        if !(span.is_finite() && span > 0.0) {
            return Err(bad("output.span", "must be > 0"));
        }
        let sampling = out.sampling.unwrap_or(DEFAULT_SAMPLING);
        if sampling < 4 {
            return Err(bad("output.sampling", "need at least 4 samples per period"));
        }
        let outputs = match &out.outputs {
            None => [OutputKind::Trajectory, OutputKind::Observables].into_iter().collect(),
            Some(list) => list
                .iter()
                .map(|s| OutputKind::parse(s).ok_or_else(|| bad("output.outputs", format!("unknown output `{s}`"))))
                .collect::<Result<BTreeSet<_>>>()?,
        };
        let engine = match out.engine.as_deref().unwrap_or("closed_form") {
            "closed_form" | "closed-form" => Engine::ClosedForm,
            "oracle" => Engine::Oracle,
            other => return Err(bad("output.engine", format!("unknown engine `{other}`"))),
        };
        let output_dir = out.dir.clone().unwrap_or_else(default_output_dir);
        let molecules = out.molecules.unwrap_or(3).min(n);

        Ok(RunConfig {
            params,
            si,
            scenario,
            span,
            sampling,
            outputs,
            seed,
            output_dir,
            molecules,
            engine,
            svg: out.svg.unwrap_or(false),
        })
    }

    fn resolve_params(&self) -> Result<(SystemParams, Option<SiSystem>)> {
        let p = &self.params;
        if let Some(si) = &p.si {
            let natural = [
                ("omega_v", p.omega_v.is_some()),
                ("omega", p.omega.is_some()),
                ("omega_d", p.omega_d.is_some()),
                ("n", p.n.is_some()),
                ("mass", p.mass.is_some()),
            ];
            if let Some((key, _)) = natural.iter().find(|(_, set)| *set) {
                return Err(bad(
                    &format!("params.{key}"),
                    "natural-unit keys and [params.si] are mutually exclusive",
                ));
            }
            let need = |v: Option<f64>, key: &str| v.ok_or_else(|| bad(&format!("params.si.{key}"), "required"));
            let freq = need(si.freq_thz, "freq_thz")?;
            let cavity = si.cavity_thz.unwrap_or(freq);
            let area = need(si.area_um2, "area_um2")?;
            let n = si.n.ok_or_else(|| bad("params.si.n", "required"))?;
            let constants = PhysicalConstants::CODATA;
            let geometry = CavityGeometry::from_frequency(&constants, 2.0 * PI * cavity * 1e12, area * 1e-12)
                .map_err(|e| si_field(e, "cavity_thz"))?;
            let sys = from_si(
                &constants,
                &geometry,
                freq,
                need(si.mass_me, "mass_me")?,
                need(si.dipole_e, "dipole_e")?,
                n,
            )
            .map_err(|e| si_field(e, "freq_thz"))?;
            let params = SystemParams {
                x0: p.x0.unwrap_or(1.0),
                ..sys.params
            }
            .validated()
            .map_err(at_field)?;
            return Ok((params, Some(SiSystem { params, ..sys })));
        }
        let params = SystemParams {
            omega_v: p.omega_v.unwrap_or(1.0),
            omega_c: p.omega.unwrap_or(1.0),
            omega_d: p.omega_d.ok_or_else(|| bad("params.omega_d", "required"))?,
            n_molecules: p.n.unwrap_or(DEFAULT_N),
            mass: p.mass.unwrap_or(1.0),
            dipole: 1.0,
            x0: p.x0.unwrap_or(1.0),
        }
        .validated()
        .map_err(at_field)?;
        Ok((params, None))
    }
}

fn si_field(e: Error, fallback: &str) -> Error {
    match e {
        Error::InvalidParameter { name, reason } => {
            let key = match name {
                "area" => "area_um2",
                "n" | "mass_me" | "dipole_e" | "freq_thz" => name,
                _ => fallback,
            };
            bad(&format!("params.si.{key}"), reason)
        }
        other => other,
    }
}

/// `$VSC_OUTPUT_DIR`, else `vsc-out`.
pub fn default_output_dir() -> PathBuf {
    std::env::var_os(OUTPUT_DIR_ENV)
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
}

pub fn read_raw(path: &Path) -> Result<RawConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    RawConfig::parse(&text, &path.display().to_string())
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    read_raw(path)?.resolve()
}
