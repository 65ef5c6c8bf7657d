//! The TOML run configuration and its validation.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use serde::{Deserialize, Serialize};
use squeeze::dtwa::FieldMethod;
use squeeze::hydro::HydroParams;
use squeeze::model::LatticeSpec;
use squeeze::observables::ConditionalMode;
use squeeze::quantum::KrylovConfig;
use squeeze::spinwave::EnergyModel;

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "SPINSQUEEZE_OUT";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Dtwa,
    Oat,
    Spinwave,
    Quantum,
    Hydro,
    Fit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    #[default]
    Csv,
    Jsonl,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; 0 uses every available core.
    #[serde(default)]
    pub workers: usize,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub format: Format,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dtwa: Option<DtwaSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oat: Option<OatSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spinwave: Option<SpinwaveSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quantum: Option<QuantumSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hydro: Option<HydroSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepGrid>,
}

fn one() -> f64 {
    1.0
}

fn default_outputs() -> usize {
    200
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtwaSection {
    pub trajectories: usize,
    pub t_max: f64,
    #[serde(default = "one")]
    pub polarization: f64,
    #[serde(default = "default_outputs")]
    pub n_outputs: usize,
    /// Overrides the default step; rounded so outputs land on the grid.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default)]
    pub z_constrained: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conditional: Option<ConditionalMode>,
    #[serde(default)]
    pub field: FieldMethod,
    /// Squeezing optimum extraction for sweep aggregates.
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_therm_tol")]
    pub therm_tol: f64,
}

fn default_window() -> usize {
    squeeze::fit::DEFAULT_WINDOW
}

fn default_therm_tol() -> f64 {
    squeeze::fit::DEFAULT_THERM_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Xi2FormName {
    #[default]
    Exact,
    Approx,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OatSection {
    /// System sizes to optimize.
    pub sizes: Vec<f64>,
    #[serde(default = "one")]
    pub chi: f64,
    #[serde(default)]
    pub gamma: f64,
    /// Growth coefficient `c` of `Var[Y|Z] = N/4 + c·N·(χt)^γ`.
    #[serde(default)]
    pub c: f64,
    #[serde(default = "half")]
    pub m_xy: f64,
    #[serde(default)]
    pub form: Xi2FormName,
    /// Also write `ξ²(t)` curves on this many log-spaced times.
    #[serde(default)]
    pub curve_points: usize,
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinwaveSection {
    pub d: u32,
    pub alphas: Vec<f64>,
    #[serde(default = "half")]
    pub s: f64,
    /// Solve for `J_c` at each `α` with this excitation-energy source.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub energy_model: Option<EnergyModel>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuantumTask {
    Echo,
    Chi,
    GroundState,
}

fn default_chi_t_max() -> f64 {
    60.0
}

fn default_chi_times() -> usize {
    600
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuantumSection {
    pub task: QuantumTask,
    #[serde(default = "one")]
    pub t_max: f64,
    #[serde(default = "default_outputs")]
    pub n_times: usize,
    /// Counter-rotation strength; extracted from the spectrum when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chi: Option<f64>,
    #[serde(default = "default_chi_t_max")]
    pub chi_t_max: f64,
    #[serde(default = "default_chi_times")]
    pub chi_n_times: usize,
    #[serde(default)]
    pub krylov: KrylovConfig,
}

/// Hydrodynamic parameters with the library defaults for omitted keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HydroSection {
    pub n: f64,
    pub g: f64,
    pub chi: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub temperature: f64,
    pub k_tilde: f64,
    pub k_exponent: f64,
    pub n_modes: usize,
    pub dt: f64,
    pub realizations: usize,
    pub z: f64,
    pub t_max: f64,
    pub n_points: usize,
}

impl Default for HydroSection {
    fn default() -> Self {
        let p = HydroParams::new(100.0, 1.0, 1.0);
        HydroSection {
            n: p.n,
            g: p.g,
            chi: p.chi,
            gamma: p.gamma,
            lambda: p.lambda,
            temperature: p.temperature,
            k_tilde: p.k_tilde,
            k_exponent: p.k_exponent,
            n_modes: p.n_modes,
            dt: p.dt,
            realizations: p.realizations,
            z: p.z,
            t_max: 5.0,
            n_points: 50,
        }
    }
}

impl HydroSection {
    pub fn params(&self) -> HydroParams {
        HydroParams {
            n: self.n,
            g: self.g,
            chi: self.chi,
            gamma: self.gamma,
            lambda: self.lambda,
            temperature: self.temperature,
            k_tilde: self.k_tilde,
            k_exponent: self.k_exponent,
            n_modes: self.n_modes,
            dt: self.dt,
            realizations: self.realizations,
            z: self.z,
        }
    }
}

fn default_d() -> u32 {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    /// Series files (CSV written by this tool) or directories holding them.
    pub inputs: Vec<PathBuf>,
    #[serde(default = "default_window")]
    pub window: usize,
    #[serde(default = "default_therm_tol")]
    pub therm_tol: f64,
    /// Fixed thermalization time instead of the `m_xy` plateau rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_therm: Option<f64>,
    /// Dimension selecting the critical-point rule.
    #[serde(default = "default_d")]
    pub d: u32,
}

/// Axes of a Cartesian sweep; empty axes keep the base value.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepGrid {
    pub j_z: Vec<f64>,
    #[serde(rename = "L")]
    pub l: Vec<usize>,
    pub alpha: Vec<f64>,
    pub polarization: Vec<f64>,
}

/// One point of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepPoint {
    pub j_z: f64,
    #[serde(rename = "L")]
    pub l: usize,
    pub alpha: f64,
    pub polarization: f64,
}

impl SweepGrid {
    pub fn is_empty(&self) -> bool {
        self.j_z.is_empty() && self.l.is_empty() && self.alpha.is_empty() && self.polarization.is_empty()
    }

    /// Row-major product with `j_z` outermost and `L` innermost.
    pub fn points(&self, lattice: &LatticeSpec, polarization: f64) -> Vec<SweepPoint> {
        let or = |v: &Vec<f64>, base: f64| if v.is_empty() { vec![base] } else { v.clone() };
        let ls = if self.l.is_empty() { vec![lattice.l] } else { self.l.clone() };
        let mut out = Vec::new();
        for &j_z in &or(&self.j_z, lattice.j_z) {
            for &alpha in &or(&self.alpha, lattice.alpha) {
                for &p in &or(&self.polarization, polarization) {
                    for &l in &ls {
                        out.push(SweepPoint { j_z, l, alpha, polarization: p });
                    }
                }
            }
        }
        out
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            anyhow!("config error at `{path}`: {}", e.into_inner().message().trim())
        })?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn lattice(&self) -> Result<&LatticeSpec> {
        self.lattice.as_ref().ok_or_else(|| anyhow!("config error at `lattice`: section required for this mode"))
    }

    /// Checks that the sections needed by `mode` (and by a sweep, if
    /// `sweeping`) are present and consistent.
    pub fn validate(&self, sweeping: bool) -> Result<()> {
        let need = |present: bool, key: &str| -> Result<()> {
            if present {
                Ok(())
            } else {
                bail!("config error at `{key}`: section required for mode {:?}", self.mode)
            }
        };
        match self.mode {
            Mode::Dtwa => {
                let lattice = self.lattice()?;
                lattice.validate().map_err(|e| anyhow!("config error at `lattice`: {e}"))?;
                need(self.dtwa.is_some(), "dtwa")?;
                let d = self.dtwa.as_ref().unwrap();
                if d.trajectories == 0 {
                    bail!("config error at `dtwa.trajectories`: must be positive");
                }
                if !(d.t_max > 0.0) {
                    bail!("config error at `dtwa.t_max`: must be positive");
                }
                if !(0.0..=1.0).contains(&d.polarization) {
                    bail!("config error at `dtwa.polarization`: must lie in [0, 1]");
                }
                if d.n_outputs == 0 {
                    bail!("config error at `dtwa.n_outputs`: must be positive");
                }
            }
            Mode::Oat => {
                need(self.oat.is_some(), "oat")?;
                let o = self.oat.as_ref().unwrap();
                if o.sizes.is_empty() || o.sizes.iter().any(|n| !(*n > 0.0)) {
                    bail!("config error at `oat.sizes`: need at least one positive size");
                }
            }
            Mode::Spinwave => {
                need(self.spinwave.is_some(), "spinwave")?;
                if self.spinwave.as_ref().unwrap().alphas.is_empty() {
                    bail!("config error at `spinwave.alphas`: empty");
                }
            }
            Mode::Quantum => {
                let lattice = self.lattice()?;
                lattice.validate().map_err(|e| anyhow!("config error at `lattice`: {e}"))?;
                need(self.quantum.is_some(), "quantum")?;
            }
            Mode::Hydro => {
                need(self.hydro.is_some(), "hydro")?;
                self.hydro
                    .as_ref()
                    .unwrap()
                    .params()
                    .validate()
                    .map_err(|e| anyhow!("config error at `hydro`: {e}"))?;
            }
            Mode::Fit => {
                need(self.fit.is_some(), "fit")?;
                if self.fit.as_ref().unwrap().inputs.is_empty() {
                    bail!("config error at `fit.inputs`: empty");
                }
            }
        }
        if sweeping {
            if self.mode != Mode::Dtwa {
                bail!("config error at `mode`: sweeps run the dtwa pipeline");
            }
            match &self.sweep {
                None => bail!("config error at `sweep`: section required for a sweep"),
                Some(g) if g.is_empty() => bail!("config error at `sweep`: empty grid"),
                Some(g) => {
                    for (i, l) in g.l.iter().enumerate() {
                        if *l < 2 {
                            bail!("config error at `sweep.L[{i}]`: need at least two sites");
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
