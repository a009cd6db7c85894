//! Run configuration: a TOML document with one command and the blocks it
//! needs. Unknown keys are rejected everywhere.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use epswitch_core::dynamics::{Direction, InputLabel, LoopPath, PlaneAxes};
use epswitch_core::ep::{ScanAxis, ScanGrid};
use epswitch_core::{Method, ParamName, SystemParams};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Scan,
    Surface,
    FindEp,
    Loop,
    Evolve,
}

impl Command {
    pub fn as_str(self) -> &'static str {
        match self {
            Command::Scan => "scan",
            Command::Surface => "surface",
            Command::FindEp => "find-ep",
            Command::Loop => "loop",
            Command::Evolve => "evolve",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Parameter overrides on top of the reference point, keyed by field name.
pub type ParamOverrides = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub format: Option<Format>,
    /// Worker threads; 0 picks the number of cores, 1 runs serially.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
    #[serde(default)]
    pub params: ParamOverrides,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchConfig>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub seeds: BTreeMap<String, Vec<ParamOverrides>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveConfig>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub axis1: ScanAxis,
    pub axis2: ScanAxis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    /// `(Δ₁, Ω₁)` centre in kHz.
    pub center: [f64; 2],
    pub radii: [f64; 2],
    /// Phase offset in units of π.
    #[serde(default)]
    pub phase_pi: f64,
    /// Period in ms; defaults to 15/γ⁽¹⁾.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub period: Option<f64>,
    #[serde(default = "default_direction")]
    pub direction: Direction,
    #[serde(default)]
    pub axes: PlaneAxes,
    /// Tracking samples for `loop`.
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_direction() -> Direction {
    Direction::Clockwise
}

fn default_samples() -> usize {
    1024
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchConfig {
    pub order: usize,
    pub free: Vec<ParamName>,
    /// Name of the `[seeds]` entry to use; may be overridden on the
    /// command line.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed_section: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diameter_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cond_tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_excursion: Option<f64>,
    /// Radius of the complex loop used to classify the order.
    #[serde(default = "default_classify_radius")]
    pub classify_radius: f64,
}

fn default_classify_radius() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveConfig {
    pub input: u8,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_track")]
    pub track: bool,
}

fn default_steps() -> usize {
    4096
}

fn default_track() -> bool {
    true
}

/// Command-line and environment overrides, applied after the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub workers: Option<usize>,
    pub seed_section: Option<String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text).map_err(|e| match e {
            CliError::Config(m) => config_err(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn apply(&mut self, o: &Overrides) {
        if let Some(p) = &o.output {
            self.output = Some(p.clone());
        }
        if let Some(f) = o.format {
            self.format = Some(f);
        }
        if let Some(w) = o.workers {
            self.workers = Some(w);
        }
        if let (Some(s), Some(search)) = (&o.seed_section, self.search.as_mut()) {
            search.seed_section = Some(s.clone());
        }
    }

    pub fn base_params(&self) -> Result<SystemParams, CliError> {
        apply_overrides(SystemParams::nv_reference(), &self.params)
    }

    /// Checks that the block required by the command is present and that
    /// every physical value is admissible.
    pub fn validate(&self) -> Result<(), CliError> {
        let base = self.base_params()?;
        match self.command {
            Command::Scan | Command::Surface => {
                self.scan_grid()?.validate().map_err(|e| config_err(e.to_string()))?;
            }
            Command::Loop | Command::Evolve => {
                self.loop_path()?;
                if self.command == Command::Evolve {
                    let ev = self.evolve.as_ref().ok_or_else(|| config_err("`evolve` needs an [evolve] block"))?;
                    if InputLabel::from_number(ev.input).is_none() {
                        return Err(config_err(format!("evolve.input must be 1 or 2, got {}", ev.input)));
                    }
                }
            }
            Command::FindEp => {
                let s = self.search.as_ref().ok_or_else(|| config_err("`find-ep` needs a [search] block"))?;
                if !(2..=5).contains(&s.order) {
                    return Err(config_err(format!("search.order must be in 2..=5, got {}", s.order)));
                }
                if s.free.is_empty() {
                    return Err(config_err("search.free must name at least one parameter"));
                }
                for seed in self.seed_list()? {
                    apply_overrides(base, seed)?;
                }
            }
        }
        Ok(())
    }

    pub fn scan_grid(&self) -> Result<ScanGrid, CliError> {
        let g = self.grid.ok_or_else(|| config_err(format!("`{}` needs a [grid] block", self.command.as_str())))?;
        Ok(ScanGrid { axis1: g.axis1, axis2: g.axis2, fixed: self.base_params()? })
    }

    pub fn loop_path(&self) -> Result<LoopPath, CliError> {
        let pc = self.path.ok_or_else(|| config_err(format!("`{}` needs a [path] block", self.command.as_str())))?;
        let base = self.base_params()?;
        let path = LoopPath {
            center: pc.center,
            radii: pc.radii,
            phase: pc.phase_pi * PI,
            period: pc.period.unwrap_or(15.0 / base.gamma1),
            direction: pc.direction,
            axes: pc.axes,
            base,
        };
        path.validate().map_err(|e| config_err(e.to_string()))?;
        if pc.samples < 2 {
            return Err(config_err("path.samples must be at least 2"));
        }
        Ok(path)
    }

    pub fn seed_list(&self) -> Result<&[ParamOverrides], CliError> {
        let search = self.search.as_ref().ok_or_else(|| config_err("missing [search] block"))?;
        let name = match &search.seed_section {
            Some(n) => n.clone(),
            None if self.seeds.len() == 1 => self.seeds.keys().next().unwrap().clone(),
            None if self.seeds.is_empty() => return Err(config_err("no [seeds] defined")),
            None => {
                let names: Vec<&str> = self.seeds.keys().map(String::as_str).collect();
                return Err(config_err(format!(
                    "several seed sections ({}); choose one with --seed-section",
                    names.join(", ")
                )));
            }
        };
        let list = self.seeds.get(&name).ok_or_else(|| config_err(format!("unknown seed section `{name}`")))?;
        if list.is_empty() {
            return Err(config_err(format!("seed section `{name}` is empty")));
        }
        Ok(list)
    }

    pub fn seed_params(&self) -> Result<Vec<SystemParams>, CliError> {
        let base = self.base_params()?;
        self.seed_list()?.iter().map(|s| apply_overrides(base, s)).collect()
    }

    pub fn format(&self) -> Format {
        self.format.unwrap_or_default()
    }
}

pub fn apply_overrides(mut p: SystemParams, o: &ParamOverrides) -> Result<SystemParams, CliError> {
    for (k, &v) in o {
        let name: ParamName = k.parse().map_err(|e: epswitch_core::model::ParamError| config_err(e.to_string()))?;
        p.set(name, v);
    }
    p.validate().map_err(|e| config_err(e.to_string()))?;
    Ok(p)
}
