//! Run configuration: TOML files, scenario presets, overrides and manifests.
//!
//! Frequencies and rates are given in Hz and converted by 2π only when the
//! physical parameters are built, so a manifest replays bit for bit.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::coefficients::{PhysicalParams, DEFAULT_DRIVE_PREFACTOR};
use crate::dynamics::DEFAULT_STEP_RATIO;
use crate::full::Coupling;
use crate::reduced::Phase;

use super::CliError;

pub const OUTPUT_DIR_ENV: &str = "SQZ_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "out";
pub const DEFAULT_SAMPLES: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scenario {
    Fig2a,
    Fig2b,
    Fig2c,
    Fig2d,
    Fig3a,
    Fig3b,
    Fig4a,
    Fig4b,
    FigS1,
    FigS2,
    Custom,
}

impl Scenario {
    pub const ALL: [Scenario; 11] = [
        Scenario::Fig2a,
        Scenario::Fig2b,
        Scenario::Fig2c,
        Scenario::Fig2d,
        Scenario::Fig3a,
        Scenario::Fig3b,
        Scenario::Fig4a,
        Scenario::Fig4b,
        Scenario::FigS1,
        Scenario::FigS2,
        Scenario::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::Fig2a => "fig2a",
            Scenario::Fig2b => "fig2b",
            Scenario::Fig2c => "fig2c",
            Scenario::Fig2d => "fig2d",
            Scenario::Fig3a => "fig3a",
            Scenario::Fig3b => "fig3b",
            Scenario::Fig4a => "fig4a",
            Scenario::Fig4b => "fig4b",
            Scenario::FigS1 => "figS1",
            Scenario::FigS2 => "figS2",
            Scenario::Custom => "custom",
        }
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Scenario::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| {
            format!(
                "unknown scenario `{s}`; expected one of {}",
                names(&Scenario::ALL, |s| s.name())
            )
        })
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Model {
    Reduced3,
    Reduced10,
    ReducedAnalytic,
    Full6,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::Reduced3, Model::Reduced10, Model::ReducedAnalytic, Model::Full6];

    pub fn name(self) -> &'static str {
        match self {
            Model::Reduced3 => "reduced3",
            Model::Reduced10 => "reduced10",
            Model::ReducedAnalytic => "reduced_analytic",
            Model::Full6 => "full6",
        }
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Model::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            format!(
                "unknown model `{s}`; expected one of {}",
                names(&Model::ALL, |m| m.name())
            )
        })
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

fn names<T: Copy>(all: &[T], name: impl Fn(T) -> &'static str) -> String {
    all.iter().map(|&x| name(x)).collect::<Vec<_>>().join(", ")
}

/// Steady-state phase as written in configs: `+1`, `-1` or `average`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseArg {
    Plus,
    Minus,
    Average,
}

impl PhaseArg {
    pub fn name(self) -> &'static str {
        match self {
            PhaseArg::Plus => "+1",
            PhaseArg::Minus => "-1",
            PhaseArg::Average => "average",
        }
    }

    pub fn phase(self) -> Phase {
        match self {
            PhaseArg::Plus => Phase::PLUS,
            PhaseArg::Minus => Phase::MINUS,
            PhaseArg::Average => Phase::Average,
        }
    }
}

impl FromStr for PhaseArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "+1" | "1" => Ok(PhaseArg::Plus),
            "-1" => Ok(PhaseArg::Minus),
            "average" | "avg" => Ok(PhaseArg::Average),
            _ => Err(format!("unknown phase `{s}`; expected +1, -1 or average")),
        }
    }
}

fn parse_coupling(s: &str) -> Result<Coupling, String> {
    match s {
        "antisymmetric" => Ok(Coupling::Antisymmetric),
        "single_mirror" => Ok(Coupling::SingleMirror),
        _ => Err(format!(
            "unknown coupling `{s}`; expected antisymmetric or single_mirror"
        )),
    }
}

fn coupling_name(c: Coupling) -> &'static str {
    match c {
        Coupling::Antisymmetric => "antisymmetric",
        Coupling::SingleMirror => "single_mirror",
    }
}

/// Parameters in config units: Hz for frequencies and rates, W, K.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HzParams {
    pub omega_c: f64,
    pub kappa: f64,
    pub omega_m: f64,
    pub gamma_m: f64,
    pub eta0: f64,
    pub power: f64,
    pub delta: f64,
    pub r: f64,
    pub temperature: f64,
    pub drive_prefactor: f64,
}

impl HzParams {
    pub fn baseline() -> Self {
        let kappa = 6.2e6;
        Self {
            omega_c: 6.98e9,
            kappa,
            omega_m: 32.1e6,
            gamma_m: 15e-5 * kappa,
            eta0: 39.0,
            power: 4e-6,
            delta: 32.1e6,
            r: 1.0,
            temperature: 0.0,
            drive_prefactor: DEFAULT_DRIVE_PREFACTOR,
        }
    }

    pub fn to_physical(&self) -> PhysicalParams {
        PhysicalParams {
            omega_c: 2.0 * PI * self.omega_c,
            kappa: 2.0 * PI * self.kappa,
            omega_m: 2.0 * PI * self.omega_m,
            gamma_m: 2.0 * PI * self.gamma_m,
            eta0: 2.0 * PI * self.eta0,
            power: self.power,
            delta: 2.0 * PI * self.delta,
            r: self.r,
            temperature: self.temperature,
            drive_prefactor: self.drive_prefactor,
        }
    }

    fn slot(&mut self, key: ParamKey) -> Option<&mut f64> {
        Some(match key {
            ParamKey::OmegaC => &mut self.omega_c,
            ParamKey::Kappa => &mut self.kappa,
            ParamKey::OmegaM => &mut self.omega_m,
            ParamKey::GammaM => &mut self.gamma_m,
            ParamKey::Eta0 => &mut self.eta0,
            ParamKey::Power => &mut self.power,
            ParamKey::Delta => &mut self.delta,
            ParamKey::R => &mut self.r,
            ParamKey::Temperature => &mut self.temperature,
            ParamKey::DrivePrefactor => &mut self.drive_prefactor,
            ParamKey::GammaOverKappa | ParamKey::DeltaOverOmegaM => return None,
        })
    }

    /// Sets `key` to `value`; ratio keys act on the current values.
    pub fn apply(&mut self, key: ParamKey, value: f64) {
        match key {
            ParamKey::GammaOverKappa => self.kappa = self.gamma_m / value,
            ParamKey::DeltaOverOmegaM => self.delta = value * self.omega_m,
            _ => *self.slot(key).expect("absolute key") = value,
        }
    }

    pub fn get(&self, key: ParamKey) -> f64 {
        match key {
            ParamKey::GammaOverKappa => self.gamma_m / self.kappa,
            ParamKey::DeltaOverOmegaM => self.delta / self.omega_m,
            _ => *self.clone().slot(key).expect("absolute key"),
        }
    }
}

/// A parameter that can be set, swept or used to label curves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParamKey {
    OmegaC,
    Kappa,
    OmegaM,
    GammaM,
    Eta0,
    Power,
    Delta,
    R,
    Temperature,
    DrivePrefactor,
    /// `γ₀/κ`, applied by changing `κ`.
    GammaOverKappa,
    /// `Δ/ω₀`, applied by changing `Δ`.
    DeltaOverOmegaM,
}

impl ParamKey {
    pub const ALL: [ParamKey; 12] = [
        ParamKey::OmegaC,
        ParamKey::Kappa,
        ParamKey::OmegaM,
        ParamKey::GammaM,
        ParamKey::Eta0,
        ParamKey::Power,
        ParamKey::Delta,
        ParamKey::R,
        ParamKey::Temperature,
        ParamKey::DrivePrefactor,
        ParamKey::GammaOverKappa,
        ParamKey::DeltaOverOmegaM,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ParamKey::OmegaC => "omega_c",
            ParamKey::Kappa => "kappa",
            ParamKey::OmegaM => "omega_m",
            ParamKey::GammaM => "gamma_m",
            ParamKey::Eta0 => "eta0",
            ParamKey::Power => "power",
            ParamKey::Delta => "delta",
            ParamKey::R => "r",
            ParamKey::Temperature => "temperature",
            ParamKey::DrivePrefactor => "drive_prefactor",
            ParamKey::GammaOverKappa => "gamma_over_kappa",
            ParamKey::DeltaOverOmegaM => "delta_over_omega_m",
        }
    }

    pub fn is_ratio(self) -> bool {
        matches!(self, ParamKey::GammaOverKappa | ParamKey::DeltaOverOmegaM)
    }

    /// The absolute key a ratio key writes to.
    fn target(self) -> ParamKey {
        match self {
            ParamKey::GammaOverKappa => ParamKey::Kappa,
            ParamKey::DeltaOverOmegaM => ParamKey::Delta,
            k => k,
        }
    }
}

impl FromStr for ParamKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        ParamKey::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| {
            format!(
                "unknown parameter `{s}`; expected one of {}",
                names(&ParamKey::ALL, |k| k.name())
            )
        })
    }
}

/// A named list of parameter values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub key: ParamKey,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub t_end: f64,
    pub step_ratio: f64,
    pub samples: usize,
}

/// Fully resolved run: every default materialized.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub scenario: Scenario,
    pub models: Vec<Model>,
    pub phase: PhaseArg,
    pub coupling: Coupling,
    pub params: HzParams,
    pub curves: Option<Axis>,
    pub sweep: Option<Axis>,
    pub grid: GridConfig,
    pub output_dir: PathBuf,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scenario: Option<ScenarioSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub params: Option<ParamsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curves: Option<AxisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<AxisSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<OutputSection>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub models: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub power: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub drive_prefactor: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma_over_kappa: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta_over_omega_m: Option<f64>,
}

impl ParamsSection {
    fn slot(&mut self, key: ParamKey) -> &mut Option<f64> {
        match key {
            ParamKey::OmegaC => &mut self.omega_c,
            ParamKey::Kappa => &mut self.kappa,
            ParamKey::OmegaM => &mut self.omega_m,
            ParamKey::GammaM => &mut self.gamma_m,
            ParamKey::Eta0 => &mut self.eta0,
            ParamKey::Power => &mut self.power,
            ParamKey::Delta => &mut self.delta,
            ParamKey::R => &mut self.r,
            ParamKey::Temperature => &mut self.temperature,
            ParamKey::DrivePrefactor => &mut self.drive_prefactor,
            ParamKey::GammaOverKappa => &mut self.gamma_over_kappa,
            ParamKey::DeltaOverOmegaM => &mut self.delta_over_omega_m,
        }
    }

    fn entries(&self) -> Vec<(ParamKey, f64)> {
        let mut copy = self.clone();
        ParamKey::ALL
            .into_iter()
            .filter_map(|k| copy.slot(k).map(|v| (k, v)))
            .collect()
    }

    /// Overlays `other`; an explicit absolute key cancels an inherited ratio
    /// key that would overwrite it.
    fn merge(&mut self, other: &ParamsSection) {
        for (key, value) in other.entries() {
            *self.slot(key) = Some(value);
            if !key.is_ratio() {
                for ratio in [ParamKey::GammaOverKappa, ParamKey::DeltaOverOmegaM] {
                    if ratio.target() == key && other.clone().slot(ratio).is_none() {
                        *self.slot(ratio) = None;
                    }
                }
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AxisSection {
    pub key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub values: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    /// `linear` (default) or `log`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spacing: Option<String>,
}

impl AxisSection {
    fn list(key: ParamKey, values: Vec<f64>) -> Self {
        Self {
            key: key.name().to_string(),
            values: Some(values),
            ..Default::default()
        }
    }

    fn range(key: ParamKey, start: f64, stop: f64, count: usize, log: bool) -> Self {
        Self {
            key: key.name().to_string(),
            start: Some(start),
            stop: Some(stop),
            count: Some(count),
            spacing: log.then(|| "log".to_string()),
            ..Default::default()
        }
    }

    fn resolve(&self, section: &str) -> Result<Axis, CliError> {
        let bad = |msg: String| CliError::config(format!("[{section}] {msg}"));
        let key: ParamKey = self.key.parse().map_err(bad)?;
        let values = match (&self.values, self.start, self.stop, self.count) {
            (Some(v), None, None, None) => v.clone(),
            (None, Some(a), Some(b), Some(n)) => {
                let log = match self.spacing.as_deref() {
                    None | Some("linear") => false,
                    Some("log") => true,
                    Some(s) => return Err(bad(format!("unknown spacing `{s}`; expected linear or log"))),
                };
                spaced(a, b, n, log).map_err(bad)?
            }
            _ => return Err(bad("give either `values` or all of `start`, `stop`, `count`".into())),
        };
        if self.values.is_some() && self.spacing.is_some() {
            return Err(bad("`spacing` only applies to start/stop/count".into()));
        }
        if values.is_empty() {
            return Err(bad("values must not be empty".into()));
        }
        if let Some(x) = values.iter().find(|x| !x.is_finite()) {
            return Err(bad(format!("value {x} is not finite")));
        }
        Ok(Axis { key, values })
    }
}

/// `n` points from `a` to `b` inclusive, evenly spaced or geometric.
pub fn spaced(a: f64, b: f64, n: usize, log: bool) -> Result<Vec<f64>, String> {
    if n == 0 {
        return Err("count must be positive".into());
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err("start and stop must be finite".into());
    }
    if log && !(a > 0.0 && b > 0.0) {
        return Err("log spacing needs positive start and stop".into());
    }
    if n == 1 {
        return Ok(vec![a]);
    }
    let last = (n - 1) as f64;
    Ok((0..n)
        .map(|i| {
            if i == n - 1 {
                return b;
            }
            let s = i as f64 / last;
            if log {
                (a.ln() + s * (b.ln() - a.ln())).exp()
            } else {
                a + s * (b - a)
            }
        })
        .collect())
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    /// Final time in seconds.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    /// Upper bound on `h · (fastest rate)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub step_ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dir: Option<String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
    }

    /// Applies `key=value`, where `key` is a parameter name (optionally
    /// prefixed with `params.`) or one of `grid.t_end`, `grid.step_ratio`,
    /// `grid.samples`.
    pub fn set(&mut self, assignment: &str) -> Result<(), CliError> {
        let bad = |msg: String| CliError::config(format!("--set {assignment}: {msg}"));
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| bad("expected key=value".into()))?;
        let (key, value) = (key.trim(), value.trim());
        let number = || {
            value
                .parse::<f64>()
                .map_err(|e| bad(format!("`{value}` is not a number: {e}")))
        };
        match key {
            "grid.t_end" => self.grid.get_or_insert_with(Default::default).t_end = Some(number()?),
            "grid.step_ratio" => self.grid.get_or_insert_with(Default::default).step_ratio = Some(number()?),
            "grid.samples" => {
                let n = value
                    .parse::<usize>()
                    .map_err(|e| bad(format!("`{value}` is not a count: {e}")))?;
                self.grid.get_or_insert_with(Default::default).samples = Some(n);
            }
            _ => {
                let name = key.strip_prefix("params.").unwrap_or(key);
                let k: ParamKey = name.parse().map_err(bad)?;
                let mut one = ParamsSection::default();
                *one.slot(k) = Some(number()?);
                self.params.get_or_insert_with(Default::default).merge(&one);
            }
        }
        Ok(())
    }

    /// Overlays `other` section by section; curves and sweeps are replaced whole.
    pub fn merge(&mut self, other: &ConfigFile) {
        if let Some(s) = &other.scenario {
            let mine = self.scenario.get_or_insert_with(Default::default);
            if s.name.is_some() {
                mine.name.clone_from(&s.name);
            }
            if s.models.is_some() {
                mine.models.clone_from(&s.models);
            }
            if s.phase.is_some() {
                mine.phase.clone_from(&s.phase);
            }
            if s.coupling.is_some() {
                mine.coupling.clone_from(&s.coupling);
            }
        }
        if let Some(p) = &other.params {
            self.params.get_or_insert_with(Default::default).merge(p);
        }
        if other.curves.is_some() {
            self.curves.clone_from(&other.curves);
        }
        if other.sweep.is_some() {
            self.sweep.clone_from(&other.sweep);
        }
        if let Some(g) = &other.grid {
            let mine = self.grid.get_or_insert_with(Default::default);
            mine.t_end = g.t_end.or(mine.t_end);
            mine.step_ratio = g.step_ratio.or(mine.step_ratio);
            mine.samples = g.samples.or(mine.samples);
        }
        if let Some(o) = &other.output {
            if o.dir.is_some() {
                self.output.get_or_insert_with(Default::default).dir.clone_from(&o.dir);
            }
        }
    }
}

/// Defaults of each scenario, expressed as a config overlay on the baseline.
pub fn preset(scenario: Scenario) -> ConfigFile {
    let mut c = ConfigFile::default();
    let mut p = ParamsSection::default();
    let trajectories = |t_end: Option<f64>| GridSection {
        t_end,
        step_ratio: Some(DEFAULT_STEP_RATIO),
        samples: Some(DEFAULT_SAMPLES),
    };
    match scenario {
        Scenario::Fig2a => {
            c.curves = Some(AxisSection::list(ParamKey::R, vec![0.0, 0.5, 1.0, 2.0]));
            c.grid = Some(trajectories(None));
        }
        Scenario::Fig2b => {
            p.r = Some(1.0);
            c.curves = Some(AxisSection::list(ParamKey::DeltaOverOmegaM, vec![0.5, 1.0, 1.5]));
            c.grid = Some(trajectories(None));
        }
        Scenario::Fig2c => {
            p.temperature = Some(0.0);
            c.sweep = Some(AxisSection::range(ParamKey::R, 0.0, 2.5, 101, false));
        }
        Scenario::Fig2d => {
            p.r = Some(1.0);
            c.sweep = Some(AxisSection::range(ParamKey::Temperature, 0.0, 10e-3, 101, false));
        }
        Scenario::Fig3a => {
            c.curves = Some(AxisSection::list(ParamKey::Power, vec![1e-8, 1e-7, 2e-6]));
            c.sweep = Some(AxisSection::range(ParamKey::R, 0.0, 3.0, 121, false));
        }
        Scenario::Fig3b => {
            c.sweep = Some(AxisSection::range(ParamKey::Power, 1e-8, 4e-6, 41, true));
        }
        Scenario::Fig4a => {
            c.sweep = Some(AxisSection::range(ParamKey::GammaOverKappa, 1.5e-4, 1.0, 41, true));
        }
        Scenario::Fig4b => {
            p.gamma_over_kappa = Some(1.0);
            c.sweep = Some(AxisSection::range(ParamKey::Power, 1e-8, 4e-6, 41, true));
        }
        Scenario::FigS1 | Scenario::FigS2 => {
            p.temperature = Some(2.5e-3);
            p.gamma_over_kappa = Some(1.5e-3);
            let rs = if scenario == Scenario::FigS1 {
                vec![0.0, 1.0, 2.0]
            } else {
                vec![1.0]
            };
            c.curves = Some(AxisSection::list(ParamKey::R, rs));
            c.grid = Some(trajectories(Some(20e-6)));
            c.scenario = Some(ScenarioSection {
                models: Some(vec![Model::Reduced3.name().into(), Model::Full6.name().into()]),
                ..Default::default()
            });
        }
        Scenario::Custom => {
            c.grid = Some(trajectories(None));
        }
    }
    c.params = Some(p);
    c
}

/// Models a scenario runs when none are requested.
pub fn default_models(scenario: Scenario) -> Vec<Model> {
    match scenario {
        Scenario::FigS1 | Scenario::FigS2 => vec![Model::Reduced3, Model::Full6],
        _ => vec![Model::Reduced3],
    }
}

/// How the scenario turns parameters into tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    Trajectories,
    SteadySweep,
    OptimalSqueezing,
    Adiabatic,
}

impl RunConfig {
    pub fn kind(&self) -> Kind {
        match self.scenario {
            Scenario::Fig3b => Kind::OptimalSqueezing,
            Scenario::Fig4a | Scenario::Fig4b => Kind::Adiabatic,
            Scenario::Custom if self.sweep.is_some() => Kind::SteadySweep,
            Scenario::Fig2c | Scenario::Fig2d | Scenario::Fig3a => Kind::SteadySweep,
            _ => Kind::Trajectories,
        }
    }

    /// Physical parameters with the curve and sweep values applied.
    pub fn point(&self, curve: Option<f64>, sweep: Option<f64>) -> HzParams {
        let mut p = self.params;
        if let (Some(axis), Some(v)) = (&self.curves, curve) {
            p.apply(axis.key, v);
        }
        if let (Some(axis), Some(v)) = (&self.sweep, sweep) {
            p.apply(axis.key, v);
        }
        p
    }

    /// The fully materialized config; replaying it reproduces the run.
    pub fn to_file(&self) -> ConfigFile {
        let p = &self.params;
        let axis = |a: &Axis| AxisSection::list(a.key, a.values.clone());
        ConfigFile {
            scenario: Some(ScenarioSection {
                name: Some(self.scenario.name().into()),
                models: Some(self.models.iter().map(|m| m.name().to_string()).collect()),
                phase: Some(self.phase.name().into()),
                coupling: Some(coupling_name(self.coupling).into()),
            }),
            params: Some(ParamsSection {
                omega_c: Some(p.omega_c),
                kappa: Some(p.kappa),
                omega_m: Some(p.omega_m),
                gamma_m: Some(p.gamma_m),
                eta0: Some(p.eta0),
                power: Some(p.power),
                delta: Some(p.delta),
                r: Some(p.r),
                temperature: Some(p.temperature),
                drive_prefactor: Some(p.drive_prefactor),
                gamma_over_kappa: None,
                delta_over_omega_m: None,
            }),
            curves: self.curves.as_ref().map(axis),
            sweep: self.sweep.as_ref().map(axis),
            grid: Some(GridSection {
                t_end: Some(self.grid.t_end),
                step_ratio: Some(self.grid.step_ratio),
                samples: Some(self.grid.samples),
            }),
            output: Some(OutputSection {
                dir: Some(self.output_dir.to_string_lossy().into_owned()),
            }),
        }
    }

    pub fn manifest(&self) -> String {
        toml::to_string(&self.to_file()).expect("manifest serializes")
    }
}

/// Command-line overrides applied after the config file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub sets: Vec<String>,
    pub models: Vec<Model>,
    pub phase: Option<PhaseArg>,
    pub out: Option<PathBuf>,
}

/// Resolves preset, config file, overrides and environment into a run.
///
/// `env_dir` is the value of [`OUTPUT_DIR_ENV`], which ranks between `--out`
/// and the config file.
pub fn resolve(
    scenario: Scenario,
    file: Option<&ConfigFile>,
    overrides: &Overrides,
    env_dir: Option<&str>,
) -> Result<RunConfig, CliError> {
    let mut merged = preset(scenario);
    if let Some(f) = file {
        if let Some(name) = f.scenario.as_ref().and_then(|s| s.name.as_deref()) {
            if name != scenario.name() {
                return Err(CliError::config(format!(
                    "[scenario] name = \"{name}\" does not match requested scenario `{scenario}`"
                )));
            }
        }
        merged.merge(f);
    }
    for s in &overrides.sets {
        merged.set(s)?;
    }

    let section = merged.scenario.clone().unwrap_or_default();
    let models = if !overrides.models.is_empty() {
        overrides.models.clone()
    } else if let Some(names) = &section.models {
        names
            .iter()
            .map(|s| s.parse::<Model>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| CliError::config(format!("[scenario] models: {e}")))?
    } else {
        default_models(scenario)
    };
    if models.is_empty() {
        return Err(CliError::config("[scenario] models must not be empty"));
    }
    if models.iter().enumerate().any(|(i, m)| models[..i].contains(m)) {
        return Err(CliError::config("[scenario] models must not repeat"));
    }
    let phase = match overrides.phase {
        Some(p) => p,
        None => section
            .phase
            .as_deref()
            .map(str::parse)
            .transpose()
            .map_err(|e| CliError::config(format!("[scenario] phase: {e}")))?
            .unwrap_or(PhaseArg::Plus),
    };
    let coupling = section
        .coupling
        .as_deref()
        .map(parse_coupling)
        .transpose()
        .map_err(|e| CliError::config(format!("[scenario] coupling: {e}")))?
        .unwrap_or_default();

    let section = merged.params.clone().unwrap_or_default();
    let mut params = HzParams::baseline();
    for (key, value) in section.entries() {
        if !value.is_finite() {
            return Err(CliError::config(format!(
                "[params] {} = {value} is not finite",
                key.name()
            )));
        }
        if !key.is_ratio() {
            params.apply(key, value);
        }
    }
    for (key, value) in section.entries() {
        if key.is_ratio() {
            params.apply(key, value);
        }
    }
    params
        .to_physical()
        .validate()
        .map_err(|e| CliError::config(format!("[params] {e}")))?;

    let curves = merged.curves.as_ref().map(|a| a.resolve("curves")).transpose()?;
    let sweep = merged.sweep.as_ref().map(|a| a.resolve("sweep")).transpose()?;
    if let (Some(c), Some(s)) = (&curves, &sweep) {
        if c.key.target() == s.key.target() {
            return Err(CliError::config(format!(
                "[curves] and [sweep] both set `{}`",
                c.key.target().name()
            )));
        }
    }
    let needs_sweep = matches!(
        scenario,
        Scenario::Fig2c | Scenario::Fig2d | Scenario::Fig3a | Scenario::Fig3b | Scenario::Fig4a | Scenario::Fig4b
    );
    if needs_sweep && sweep.is_none() {
        return Err(CliError::config(format!(
            "scenario `{scenario}` needs a [sweep] section"
        )));
    }

    let g = merged.grid.clone().unwrap_or_default();
    let grid = GridConfig {
        t_end: g.t_end.unwrap_or(10.0 / (2.0 * PI * params.gamma_m)),
        step_ratio: g.step_ratio.unwrap_or(DEFAULT_STEP_RATIO),
        samples: g.samples.unwrap_or(DEFAULT_SAMPLES),
    };
    if !(grid.t_end.is_finite() && grid.t_end > 0.0) {
        return Err(CliError::config(format!(
            "[grid] t_end = {} must be positive",
            grid.t_end
        )));
    }
    if !(grid.step_ratio > 0.0 && grid.step_ratio <= crate::dynamics::MAX_STEP_RATIO) {
        return Err(CliError::config(format!(
            "[grid] step_ratio = {} must lie in (0, {}]",
            grid.step_ratio,
            crate::dynamics::MAX_STEP_RATIO
        )));
    }
    if grid.samples == 0 {
        return Err(CliError::config("[grid] samples must be positive"));
    }

    let output_dir = overrides
        .out
        .clone()
        .or_else(|| env_dir.filter(|s| !s.is_empty()).map(PathBuf::from))
        .or_else(|| merged.output.as_ref().and_then(|o| o.dir.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR));

    Ok(RunConfig {
        scenario,
        models,
        phase,
        coupling,
        params,
        curves,
        sweep,
        grid,
        output_dir,
    })
}
