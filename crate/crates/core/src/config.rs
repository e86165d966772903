//! Pipeline configuration: one TOML file with a section per module.
//!
//! Unset input paths resolve to the synthetic city under `<output_dir>/synth/`.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analytics::DEFAULT_EMISSION_FACTOR_T_PER_TJ;
use crate::engine::EngineParams;
use crate::error::{Error, Result};
use crate::ingest::LayerOptions;
use crate::model::ModelOptions;
use crate::orchestrator::{CostModel, SchedulePolicy, DEFAULT_CORES_PER_NODE, DEFAULT_RETRIES};
use crate::scenario::SavingsWeighting;
use crate::synthcity::{self, SynthConfig};
use crate::terrain::HeightOptions;

pub const RESOLVED_CONFIG_FILE: &str = "config.resolved.toml";

/// Optional overrides of the input files; `None` means the synthcity output.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InputPaths {
    pub footprints: Option<PathBuf>,
    pub volumetrics: Option<PathBuf>,
    pub civics: Option<PathBuf>,
    pub neighborhoods: Option<PathBuf>,
    pub dsm: Option<PathBuf>,
    pub dtm: Option<PathBuf>,
    pub epw: Option<PathBuf>,
    /// `None` uses the bundled archetype table.
    pub archetypes: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OrchestratorConfig {
    /// `None` uses every available core.
    pub workers: Option<usize>,
    pub retries: usize,
}

impl Default for OrchestratorConfig {
    fn default() -> Self {
        OrchestratorConfig {
            workers: None,
            retries: DEFAULT_RETRIES,
        }
    }
}

impl OrchestratorConfig {
    pub fn resolved_workers(&self) -> usize {
        self.workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub weighting: SavingsWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportConfig {
    pub emission_factor_t_per_tj: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            emission_factor_t_per_tj: DEFAULT_EMISSION_FACTOR_T_PER_TJ,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub nodes: Vec<usize>,
    pub radii: Vec<f64>,
    pub cores_per_node: usize,
    pub policy: SchedulePolicy,
    pub cost: CostModel,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            nodes: vec![1, 2, 4, 6, 8, 10],
            radii: vec![10.0, 30.0, 60.0, 100.0],
            cores_per_node: DEFAULT_CORES_PER_NODE,
            policy: SchedulePolicy::Lpt,
            cost: CostModel::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SensitivityConfig {
    pub radii: Vec<f64>,
    /// Reference radius of the relative changes; must be one of `radii`.
    pub baseline_radius_m: f64,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig {
            radii: vec![10.0, 20.0, 40.0, 60.0, 80.0, 100.0],
            baseline_radius_m: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub output_dir: PathBuf,
    pub paths: InputPaths,
    pub synth: SynthConfig,
    pub ingest: LayerOptions,
    pub terrain: HeightOptions,
    pub model: ModelOptions,
    pub engine: EngineParams,
    pub orchestrator: OrchestratorConfig,
    pub scenarios: ScenarioConfig,
    pub report: ReportConfig,
    pub bench: BenchConfig,
    pub sensitivity: SensitivityConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            output_dir: PathBuf::from("out"),
            paths: InputPaths::default(),
            synth: SynthConfig::default(),
            ingest: LayerOptions::default(),
            terrain: HeightOptions::default(),
            model: ModelOptions::default(),
            engine: EngineParams::default(),
            orchestrator: OrchestratorConfig::default(),
            scenarios: ScenarioConfig::default(),
            report: ReportConfig::default(),
            bench: BenchConfig::default(),
            sensitivity: SensitivityConfig::default(),
        }
    }
}

/// Where an input file comes from: a user path, or a stage output.
#[derive(Debug, Clone, PartialEq)]
pub struct InputFile {
    pub path: PathBuf,
    /// Stage that produces the file when it was not configured explicitly.
    pub producer: Option<&'static str>,
}

impl InputFile {
    /// Fails with an actionable error when the file is absent.
    pub fn require(&self) -> Result<&Path> {
        if self.path.is_file() {
            return Ok(&self.path);
        }
        Err(match self.producer {
            Some(stage) => Error::MissingStage {
                stage,
                path: self.path.clone(),
            },
            None => Error::Config(format!("configured input {} does not exist", self.path.display())),
        })
    }
}

impl PipelineConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.model.radius_m >= 0.0) {
            return Err(Error::Config(format!(
                "radius must be >= 0, got {}",
                self.model.radius_m
            )));
        }
        if self.orchestrator.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        if !(self.model.storey_height_m > 0.0) {
            return Err(Error::Config("storey height must be positive".into()));
        }
        if !(self.report.emission_factor_t_per_tj >= 0.0) {
            return Err(Error::Config("emission factor must be >= 0".into()));
        }
        if self.bench.nodes.contains(&0) || self.bench.cores_per_node == 0 {
            return Err(Error::Config("bench node and core counts must be >= 1".into()));
        }
        if self
            .bench
            .radii
            .iter()
            .chain(&self.sensitivity.radii)
            .any(|r| !(*r >= 0.0))
        {
            return Err(Error::Config("radii must be >= 0".into()));
        }
        self.bench.cost.validate()?;
        self.engine.validate()
    }

    pub fn stage_dir(&self, stage: &str) -> PathBuf {
        self.output_dir.join(stage)
    }

    fn input(&self, configured: &Option<PathBuf>, synth_name: &str) -> InputFile {
        match configured {
            Some(p) => InputFile {
                path: p.clone(),
                producer: None,
            },
            None => InputFile {
                path: self.stage_dir("synth").join(synth_name),
                producer: Some("synth"),
            },
        }
    }

    pub fn footprints(&self) -> InputFile {
        self.input(&self.paths.footprints, synthcity::FOOTPRINTS_FILE)
    }

    pub fn volumetrics(&self) -> InputFile {
        self.input(&self.paths.volumetrics, synthcity::VOLUMETRICS_FILE)
    }

    pub fn civics(&self) -> InputFile {
        self.input(&self.paths.civics, synthcity::CIVICS_FILE)
    }

    pub fn neighborhoods(&self) -> InputFile {
        self.input(&self.paths.neighborhoods, synthcity::NEIGHBORHOODS_FILE)
    }

    pub fn dsm(&self) -> InputFile {
        self.input(&self.paths.dsm, synthcity::DSM_FILE)
    }

    pub fn dtm(&self) -> InputFile {
        self.input(&self.paths.dtm, synthcity::DTM_FILE)
    }

    pub fn epw(&self) -> InputFile {
        self.input(&self.paths.epw, synthcity::WEATHER_FILE)
    }

    /// Writes the effective configuration next to a stage's outputs.
    pub fn echo(&self, stage_dir: &Path) -> Result<()> {
        std::fs::create_dir_all(stage_dir).map_err(|e| Error::io(stage_dir, e))?;
        let path = stage_dir.join(RESOLVED_CONFIG_FILE);
        std::fs::write(&path, self.to_toml()?).map_err(|e| Error::io(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip_through_toml() {
        let cfg = PipelineConfig::default();
        let text = cfg.to_toml().unwrap();
        assert_eq!(PipelineConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn sections_override_defaults() {
        let cfg = PipelineConfig::from_toml(
            "output_dir = \"x\"\n[model]\nradius_m = 25.0\n[synth]\nn_buildings = 10\n[orchestrator]\nworkers = 3\n",
        )
        .unwrap();
        assert_eq!(cfg.model.radius_m, 25.0);
        assert_eq!(cfg.synth.n_buildings, 10);
        assert_eq!(cfg.orchestrator.resolved_workers(), 3);
        assert_eq!(cfg.footprints().path, Path::new("x/synth/footprints.geojson"));
        assert_eq!(cfg.engine, EngineParams::default());
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert!(matches!(
            PipelineConfig::from_toml("[model]\nradius = 3\n"),
            Err(Error::Config(_))
        ));
        let cfg = PipelineConfig::from_toml("[model]\nradius_m = -1.0\n").unwrap();
        assert!(matches!(cfg.validate(), Err(Error::Config(_))));
        let cfg = PipelineConfig::from_toml("[orchestrator]\nworkers = 0\n").unwrap();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn missing_synth_output_names_the_stage() {
        let cfg = PipelineConfig {
            output_dir: PathBuf::from("/nonexistent/ubem"),
            ..PipelineConfig::default()
        };
        match cfg.dsm().require() {
            Err(Error::MissingStage { stage, .. }) => assert_eq!(stage, "synth"),
            other => panic!("{other:?}"),
        }
    }
}
