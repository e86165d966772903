//! Pipeline stages. Each stage reads its predecessors' outputs from
//! `<output_dir>/<stage>/`, writes its own directory and echoes the resolved
//! configuration there. Outputs are byte-identical across re-runs; wall-clock
//! measurements go to `<output_dir>/logs/` instead.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::analytics::{
    calibration_report, emit_report, radius_sensitivity, read_elbow_radius, write_sensitivity_csv, ReportInputs,
};
use crate::archetypes::{load_archetype_table, ArchetypeTable};
use crate::config::PipelineConfig;
use crate::engine::{
    load_epw, read_results_file, simulate_dynamic, write_results_file, Climate, EngineParams, SimResult,
};
use crate::error::{Error, Result};
use crate::ingest::{
    integrate, load_civics, load_footprints, load_neighborhoods, load_volumetrics, read_records, write_records,
    BuildingRecord, LoadWarnings,
};
use crate::model::{
    build_model, model_file_name, read_model, write_model, BuildingModel, ModelOptions, Site, SpatialIndex,
};
use crate::orchestrator::{
    neighbor_counts, radius_key, run_pipeline, scaling_surface, write_scaling_csv, write_timings_csv, CostModel,
    PipelineJob, PoolConfig, RunReport,
};
use crate::scenario::{
    apply_retrofit, binary_map, evaluate_scenarios, neighborhood_savings, pareto_front, write_before_after_csv,
    write_binary_map_csv, write_front_csv, write_neighborhood_savings_csv, write_scenarios_csv,
};
use crate::synthcity::{self, SynthConfig};
use crate::terrain::{fill_heights, load_raster};

pub const RECORDS_FILE: &str = "records.geojson";
pub const MODELS_DIR: &str = "models";
pub const MANIFEST_FILE: &str = "manifest.csv";
pub const GENMODELS_SUMMARY: &str = "genmodels.toml";
pub const BASELINE_RESULTS: &str = "baseline.csv";
pub const RETROFIT_RESULTS: &str = "retrofit.csv";
pub const RETROFIT_MODELS_DIR: &str = "retrofit_models";
pub const RUN_SUMMARY: &str = "run_summary.toml";
pub const SCALING_FILE: &str = "scaling.csv";
pub const SENSITIVITY_FILE: &str = "sensitivity.csv";
pub const LOGS_DIR: &str = "logs";
pub const TIMINGS_FILE: &str = "timings.csv";
pub const THROUGHPUT_FILE: &str = "throughput.txt";
pub const SCENARIO_FILES: [&str; 5] = [
    "scenarios.csv",
    "front.csv",
    "binary_map.csv",
    "neighborhood_savings.csv",
    "before_after.csv",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StageName {
    Synth,
    Ingest,
    Heights,
    GenModels,
    Simulate,
    Scenarios,
    Report,
    Bench,
    Sensitivity,
}

impl StageName {
    pub const CHAIN: [StageName; 7] = [
        StageName::Synth,
        StageName::Ingest,
        StageName::Heights,
        StageName::GenModels,
        StageName::Simulate,
        StageName::Scenarios,
        StageName::Report,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StageName::Synth => "synth",
            StageName::Ingest => "ingest",
            StageName::Heights => "heights",
            StageName::GenModels => "genmodels",
            StageName::Simulate => "simulate",
            StageName::Scenarios => "scenarios",
            StageName::Report => "report",
            StageName::Bench => "bench",
            StageName::Sensitivity => "sensitivity",
        }
    }
}

impl fmt::Display for StageName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One-line outcome of a stage, printed by the CLI.
#[derive(Debug, Clone, PartialEq)]
pub struct StageReport {
    pub stage: StageName,
    pub dir: PathBuf,
    pub summary: String,
}

impl fmt::Display for StageReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {} ({})", self.stage, self.summary, self.dir.display())
    }
}

/// Extra knobs of the bench stage that are not part of the reproducible config.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BenchArgs {
    /// Fit the cost model to this many measured tasks at the smallest and largest radius.
    pub calibrate_samples: Option<usize>,
    /// Time a full simulate of this many synthetic buildings.
    pub throughput_buildings: Option<usize>,
}

fn require_stage(cfg: &PipelineConfig, stage: StageName, file: &str) -> Result<PathBuf> {
    let path = cfg.stage_dir(stage.as_str()).join(file);
    if path.exists() {
        Ok(path)
    } else {
        Err(Error::MissingStage {
            stage: stage.as_str(),
            path,
        })
    }
}

fn begin(cfg: &PipelineConfig, stage: StageName) -> Result<PathBuf> {
    cfg.validate()?;
    let dir = cfg.stage_dir(stage.as_str());
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    cfg.echo(&dir)?;
    Ok(dir)
}

fn fresh_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        std::fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_toml<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = toml::to_string(value).map_err(|e| Error::Config(e.to_string()))?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn read_toml<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.message())))
}

fn logs_dir(cfg: &PipelineConfig) -> Result<PathBuf> {
    let dir = cfg.output_dir.join(LOGS_DIR);
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

pub fn archetype_table(cfg: &PipelineConfig) -> Result<ArchetypeTable> {
    match &cfg.paths.archetypes {
        Some(p) => load_archetype_table(p),
        None => Ok(ArchetypeTable::bundled()),
    }
}

pub fn load_climate(cfg: &PipelineConfig) -> Result<(Site, Climate)> {
    let weather = load_epw(cfg.epw().require()?)?;
    let site = Site {
        latitude_deg: weather.latitude_deg,
        longitude_deg: weather.longitude_deg,
    };
    Ok((site, Climate::new(&weather)))
}

pub fn synth(cfg: &PipelineConfig) -> Result<StageReport> {
    let dir = begin(cfg, StageName::Synth)?;
    let city = synthcity::generate(&cfg.synth)?;
    city.write(&dir)?;
    Ok(StageReport {
        stage: StageName::Synth,
        dir,
        summary: format!(
            "{} buildings, {} neighborhoods, seed {}",
            city.parcels.len(),
            city.neighborhoods.len(),
            cfg.synth.seed
        ),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
struct IngestSummary {
    records: usize,
    with_height: usize,
    with_year: usize,
    unassigned_neighborhood: usize,
    warnings: LoadWarnings,
}

pub fn ingest(cfg: &PipelineConfig) -> Result<StageReport> {
    let dir = begin(cfg, StageName::Ingest)?;
    let opts = &cfg.ingest;
    let parcels = load_footprints(cfg.footprints().require()?, opts)?;
    let volumes = load_volumetrics(cfg.volumetrics().require()?, opts)?;
    let civics = load_civics(cfg.civics().require()?, opts)?;
    let hoods = load_neighborhoods(cfg.neighborhoods().require()?, opts)?;
    let mut warnings = parcels.warnings;
    for w in [&volumes.warnings, &civics.warnings, &hoods.warnings] {
        warnings.merge(w);
    }
    let records = integrate(&parcels.features, &volumes.features, &civics.features, &hoods.features)?;
    write_records(&dir.join(RECORDS_FILE), &records)?;
    let summary = IngestSummary {
        records: records.len(),
        with_height: records.iter().filter(|r| r.height_m.is_some()).count(),
        with_year: records.iter().filter(|r| r.construction_year.is_some()).count(),
        unassigned_neighborhood: records
            .iter()
            .filter(|r| r.neighborhood_id == crate::ingest::UNASSIGNED)
            .count(),
        warnings,
    };
    write_toml(&dir.join("summary.toml"), &summary)?;
    Ok(StageReport {
        stage: StageName::Ingest,
        dir,
        summary: format!(
            "{} records, {} with volumetric height, {} with year, {} warnings",
            summary.records,
            summary.with_height,
            summary.with_year,
            warnings.total()
        ),
    })
}

pub fn heights(cfg: &PipelineConfig) -> Result<StageReport> {
    let input = require_stage(cfg, StageName::Ingest, RECORDS_FILE)?;
    let dir = begin(cfg, StageName::Heights)?;
    let mut records = read_records(&input)?;
    let dsm = load_raster(cfg.dsm().require()?)?;
    let dtm = load_raster(cfg.dtm().require()?)?;
    let report = fill_heights(&mut records, &dsm, &dtm, &cfg.terrain)?;
    write_records(&dir.join(RECORDS_FILE), &records)?;
    write_toml(&dir.join("summary.toml"), &report)?;
    Ok(StageReport {
        stage: StageName::Heights,
        dir,
        summary: format!(
            "{} from volumetrics, {} from rasters ({} clamped), {} without height",
            report.from_volumetrics, report.from_rasters, report.clamped, report.failed
        ),
    })
}

/// Records with a height, i.e. the ones a model can be built for.
pub fn load_height_records(cfg: &PipelineConfig) -> Result<Vec<BuildingRecord>> {
    let path = require_stage(cfg, StageName::Heights, RECORDS_FILE)?;
    let records = read_records(&path)?;
    let total = records.len();
    let kept: Vec<BuildingRecord> = records.into_iter().filter(|r| r.height_m.is_some()).collect();
    if kept.len() < total {
        warn!("{} records without height are skipped", total - kept.len());
    }
    Ok(kept)
}

/// Baseline models of every record at `opts.radius_m`, in record order.
pub fn build_models(
    records: &[BuildingRecord],
    table: &ArchetypeTable,
    site: Site,
    opts: &ModelOptions,
) -> Result<Vec<BuildingModel>> {
    let index = SpatialIndex::new(records);
    records
        .iter()
        .map(|r| build_model(r, &index, table, site, opts))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenModelsSummary {
    pub radius_m: f64,
    pub models: usize,
    pub skipped: usize,
}

pub fn genmodels(cfg: &PipelineConfig) -> Result<StageReport> {
    let input = require_stage(cfg, StageName::Heights, RECORDS_FILE)?;
    let dir = begin(cfg, StageName::GenModels)?;
    let all = read_records(&input)?;
    let records: Vec<BuildingRecord> = all.iter().filter(|r| r.height_m.is_some()).cloned().collect();
    let table = archetype_table(cfg)?;
    let (site, _) = load_climate(cfg)?;
    let models = build_models(&records, &table, site, &cfg.model)?;
    let models_dir = dir.join(MODELS_DIR);
    fresh_dir(&models_dir)?;
    let manifest_path = dir.join(MANIFEST_FILE);
    let mut manifest = csv::Writer::from_path(&manifest_path)?;
    manifest.write_record([
        "parcel_id",
        "period",
        "storeys",
        "floor_area_m2",
        "window_area_m2",
        "neighbors",
    ])?;
    for m in &models {
        write_model(m, &models_dir.join(model_file_name(&m.parcel_id)))?;
        manifest.write_record([
            m.parcel_id.clone(),
            m.period.to_string(),
            m.storeys.to_string(),
            m.conditioned_floor_area().to_string(),
            m.total_window_area().to_string(),
            m.neighbors.len().to_string(),
        ])?;
    }
    manifest.flush().map_err(|e| Error::io(&manifest_path, e))?;
    let summary = GenModelsSummary {
        radius_m: cfg.model.radius_m,
        models: models.len(),
        skipped: all.len() - records.len(),
    };
    write_toml(&dir.join(GENMODELS_SUMMARY), &summary)?;
    Ok(StageReport {
        stage: StageName::GenModels,
        dir,
        summary: format!(
            "{} models at radius {} m, {} skipped",
            summary.models, summary.radius_m, summary.skipped
        ),
    })
}

/// Parcel ids listed by the genmodels manifest, in parcel order.
fn manifest_ids(path: &Path) -> Result<Vec<String>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut ids = Vec::new();
    for row in rdr.records() {
        ids.push(row?.get(0).unwrap_or_default().to_string());
    }
    Ok(ids)
}

/// Generation derives the retrofit model from the stored baseline model;
/// simulation runs both variants.
pub struct SimulateJob<'a> {
    pub baseline_dir: PathBuf,
    pub retrofit_dir: PathBuf,
    pub table: &'a ArchetypeTable,
    pub climate: &'a Climate,
    pub params: &'a EngineParams,
}

impl PipelineJob for SimulateJob<'_> {
    type Output = (SimResult, SimResult);

    fn generate(&self, parcel_id: &str) -> Result<()> {
        let name = model_file_name(parcel_id);
        let baseline = read_model(&self.baseline_dir.join(&name))?;
        write_model(&apply_retrofit(&baseline, self.table), &self.retrofit_dir.join(&name))
    }

    fn simulate(&self, parcel_id: &str) -> Result<Self::Output> {
        let name = model_file_name(parcel_id);
        let start = Instant::now();
        let baseline = read_model(&self.baseline_dir.join(&name))?;
        let retrofit = read_model(&self.retrofit_dir.join(&name))?;
        let mut b = simulate_dynamic(&baseline, self.climate, self.params)?;
        let r = simulate_dynamic(&retrofit, self.climate, self.params)?;
        b.task_duration_s = start.elapsed().as_secs_f64();
        Ok((b, r))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RunSummary {
    buildings: usize,
    workers: usize,
    retries: usize,
    tasks_total: usize,
    tasks_succeeded: usize,
    tasks_retried: usize,
    tasks_failed: usize,
    failures: BTreeMap<String, String>,
}

pub fn simulate(cfg: &PipelineConfig) -> Result<StageReport> {
    let manifest = require_stage(cfg, StageName::GenModels, MANIFEST_FILE)?;
    let generated: GenModelsSummary = read_toml(&require_stage(cfg, StageName::GenModels, GENMODELS_SUMMARY)?)?;
    if generated.radius_m != cfg.model.radius_m {
        return Err(Error::Config(format!(
            "models were generated at radius {} m but simulate requests {} m; rerun `ubem genmodels --radius {}`",
            generated.radius_m, cfg.model.radius_m, cfg.model.radius_m
        )));
    }
    let dir = begin(cfg, StageName::Simulate)?;
    let ids = manifest_ids(&manifest)?;
    let table = archetype_table(cfg)?;
    let (_, climate) = load_climate(cfg)?;
    let retrofit_dir = dir.join(RETROFIT_MODELS_DIR);
    fresh_dir(&retrofit_dir)?;
    let job = SimulateJob {
        baseline_dir: cfg.stage_dir(StageName::GenModels.as_str()).join(MODELS_DIR),
        retrofit_dir,
        table: &table,
        climate: &climate,
        params: &cfg.engine,
    };
    let pool = PoolConfig {
        workers: cfg.orchestrator.resolved_workers(),
        retries: cfg.orchestrator.retries,
    };
    let out = run_pipeline(&ids, &job, &pool)?;
    let (baseline, retrofit): (Vec<SimResult>, Vec<SimResult>) = out.results.into_iter().map(|(_, pair)| pair).unzip();
    write_results_file(&dir.join(BASELINE_RESULTS), &baseline)?;
    write_results_file(&dir.join(RETROFIT_RESULTS), &retrofit)?;
    write_run_logs(cfg, &out.report)?;
    let r = &out.report;
    let summary = RunSummary {
        buildings: ids.len(),
        workers: pool.workers,
        retries: pool.retries,
        tasks_total: r.tasks_total,
        tasks_succeeded: r.tasks_succeeded,
        tasks_retried: r.tasks_retried,
        tasks_failed: r.tasks_failed,
        failures: r.failures.iter().cloned().collect(),
    };
    write_toml(&dir.join(RUN_SUMMARY), &summary)?;
    Ok(StageReport {
        stage: StageName::Simulate,
        dir,
        summary: format!(
            "{} buildings with workers={} in {:.2} s ({:.1} buildings/s), {} tasks failed",
            baseline.len(),
            pool.workers,
            r.wall_time_s,
            baseline.len() as f64 / r.wall_time_s.max(1e-9),
            r.tasks_failed
        ),
    })
}

fn write_run_logs(cfg: &PipelineConfig, report: &RunReport) -> Result<()> {
    let logs = logs_dir(cfg)?;
    let path = logs.join(TIMINGS_FILE);
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_timings_csv(std::io::BufWriter::new(file), report)
}

fn load_results(cfg: &PipelineConfig) -> Result<(Vec<SimResult>, Vec<SimResult>)> {
    let baseline = read_results_file(&require_stage(cfg, StageName::Simulate, BASELINE_RESULTS)?)?;
    let retrofit = read_results_file(&require_stage(cfg, StageName::Simulate, RETROFIT_RESULTS)?)?;
    Ok((baseline, retrofit))
}

fn create(dir: &Path, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
    let path = dir.join(name);
    std::fs::File::create(&path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(&path, e))
}

pub fn scenarios(cfg: &PipelineConfig) -> Result<StageReport> {
    let (baseline, retrofit) = load_results(cfg)?;
    let records = read_records(&require_stage(cfg, StageName::Heights, RECORDS_FILE)?)?;
    let dir = begin(cfg, StageName::Scenarios)?;
    let outcomes = evaluate_scenarios(&baseline, &retrofit)?;
    let front = pareto_front(&outcomes)?;
    let savings = neighborhood_savings(&baseline, &retrofit, &records, cfg.scenarios.weighting)?;
    write_scenarios_csv(create(&dir, SCENARIO_FILES[0])?, &outcomes)?;
    write_front_csv(create(&dir, SCENARIO_FILES[1])?, &front)?;
    write_binary_map_csv(create(&dir, SCENARIO_FILES[2])?, &binary_map(&front))?;
    write_neighborhood_savings_csv(create(&dir, SCENARIO_FILES[3])?, &savings)?;
    write_before_after_csv(create(&dir, SCENARIO_FILES[4])?, &baseline, &retrofit)?;
    let all = outcomes.last().map_or(0.0, |o| o.total_energy_kwh);
    Ok(StageReport {
        stage: StageName::Scenarios,
        dir,
        summary: format!(
            "{} scenarios, front of {}, full retrofit saves {:.1}%",
            outcomes.len(),
            front.outcomes.len(),
            crate::analytics::relative_change_pct(all, outcomes[0].total_energy_kwh).abs()
        ),
    })
}

/// Baseline models written by genmodels, in parcel order.
pub fn load_models(cfg: &PipelineConfig) -> Result<Vec<BuildingModel>> {
    let manifest = require_stage(cfg, StageName::GenModels, MANIFEST_FILE)?;
    let dir = cfg.stage_dir(StageName::GenModels.as_str()).join(MODELS_DIR);
    manifest_ids(&manifest)?
        .iter()
        .map(|id| read_model(&dir.join(model_file_name(id))))
        .collect()
}

pub fn report(cfg: &PipelineConfig) -> Result<StageReport> {
    require_stage(cfg, StageName::Scenarios, SCENARIO_FILES[1])?;
    let (baseline, retrofit) = load_results(cfg)?;
    let records = read_records(&require_stage(cfg, StageName::Heights, RECORDS_FILE)?)?;
    let models = load_models(cfg)?;
    let (_, climate) = load_climate(cfg)?;
    let dir = begin(cfg, StageName::Report)?;
    let calibration = calibration_report(&models, &climate, &cfg.engine)?;
    let sensitivity = cfg.stage_dir(StageName::Sensitivity.as_str()).join(SENSITIVITY_FILE);
    let elbow_radius_m = if sensitivity.exists() {
        read_elbow_radius(&sensitivity)?
    } else {
        None
    };
    let inputs = ReportInputs {
        baseline,
        retrofit,
        records,
        calibration,
        elbow_radius_m,
        emission_factor_t_per_tj: cfg.report.emission_factor_t_per_tj,
        weighting: cfg.scenarios.weighting,
    };
    let summary = emit_report(&inputs, &dir)?;
    Ok(StageReport {
        stage: StageName::Report,
        dir,
        summary: format!(
            "{} buildings, mean {:.1} kWh/m2, x(0.8) = {:.3}, CO2 {:.2} kg/m2, front {}",
            summary.simulated,
            summary.mean_total_intensity_kwh_m2,
            summary.x_at_80pct,
            summary.co2_intensity_kg_m2,
            summary.front_size
        ),
    })
}

/// Wall-clock seconds of generating and simulating `models_at(radius)` for
/// the first `samples` records, as `(neighbor_count, seconds)` pairs.
fn measure_tasks(
    records: &[BuildingRecord],
    table: &ArchetypeTable,
    site: Site,
    climate: &Climate,
    cfg: &PipelineConfig,
    radius_m: f64,
    samples: usize,
) -> Result<Vec<(usize, f64)>> {
    let index = SpatialIndex::new(records);
    let opts = ModelOptions { radius_m, ..cfg.model };
    records
        .iter()
        .take(samples)
        .map(|r| {
            let start = Instant::now();
            let model = build_model(r, &index, table, site, &opts)?;
            simulate_dynamic(&model, climate, &cfg.engine)?;
            Ok((model.neighbors.len(), start.elapsed().as_secs_f64()))
        })
        .collect()
}

/// Measured throughput of a full simulate on a fresh synthetic stock.
#[derive(Debug, Clone, PartialEq)]
pub struct Throughput {
    pub buildings: usize,
    pub workers: usize,
    pub wall_time_s: f64,
}

impl Throughput {
    pub fn buildings_per_s(&self) -> f64 {
        self.buildings as f64 / self.wall_time_s.max(1e-9)
    }
}

struct InMemoryJob<'a> {
    records: &'a [BuildingRecord],
    index: &'a SpatialIndex<'a>,
    ids: BTreeMap<&'a str, usize>,
    table: &'a ArchetypeTable,
    site: Site,
    opts: &'a ModelOptions,
    climate: &'a Climate,
    params: &'a EngineParams,
}

impl PipelineJob for InMemoryJob<'_> {
    type Output = SimResult;

    fn generate(&self, _parcel_id: &str) -> Result<()> {
        Ok(())
    }

    fn simulate(&self, parcel_id: &str) -> Result<SimResult> {
        let rec = &self.records[self.ids[parcel_id]];
        let model = build_model(rec, self.index, self.table, self.site, self.opts)?;
        simulate_dynamic(&model, self.climate, self.params)
    }
}

/// Builds and simulates a synthetic stock of `n` buildings on `workers` threads.
pub fn measure_throughput(synth: &SynthConfig, cfg: &PipelineConfig, workers: usize) -> Result<Throughput> {
    let city = synthcity::generate(&SynthConfig {
        rasters: false,
        ..synth.clone()
    })?;
    let records = city.records()?;
    let table = archetype_table(cfg)?;
    let climate = Climate::new(&city.weather);
    let site = Site {
        latitude_deg: city.weather.latitude_deg,
        longitude_deg: city.weather.longitude_deg,
    };
    let index = SpatialIndex::new(&records);
    let job = InMemoryJob {
        records: &records,
        index: &index,
        ids: records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.parcel_id.as_str(), i))
            .collect(),
        table: &table,
        site,
        opts: &cfg.model,
        climate: &climate,
        params: &cfg.engine,
    };
    let ids: Vec<String> = records.iter().map(|r| r.parcel_id.clone()).collect();
    let start = Instant::now();
    let out = run_pipeline(&ids, &job, &PoolConfig { workers, retries: 0 })?;
    let wall_time_s = start.elapsed().as_secs_f64();
    if out.results.len() != ids.len() {
        return Err(Error::Input(format!(
            "throughput run simulated {} of {} buildings",
            out.results.len(),
            ids.len()
        )));
    }
    Ok(Throughput {
        buildings: ids.len(),
        workers,
        wall_time_s,
    })
}

pub fn bench(cfg: &PipelineConfig, args: &BenchArgs) -> Result<StageReport> {
    let records = load_height_records(cfg)?;
    let dir = begin(cfg, StageName::Bench)?;
    let mut notes = Vec::new();
    let cost = match args.calibrate_samples {
        Some(samples) => {
            let table = archetype_table(cfg)?;
            let (site, climate) = load_climate(cfg)?;
            let lo = cfg.bench.radii.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = cfg.bench.radii.iter().copied().fold(0.0, f64::max);
            let mut measured = measure_tasks(&records, &table, site, &climate, cfg, lo, samples)?;
            measured.extend(measure_tasks(&records, &table, site, &climate, cfg, hi, samples)?);
            let fit = CostModel::fit(&measured)?;
            notes.push(format!(
                "cost model fitted to {} tasks: {:.3e} s + {:.3e} s per neighbor",
                measured.len(),
                fit.base_s,
                fit.per_shading_surface_s
            ));
            fit
        }
        None => cfg.bench.cost,
    };
    let counts: BTreeMap<u64, Vec<usize>> = cfg
        .bench
        .radii
        .iter()
        .map(|&r| (radius_key(r), neighbor_counts(&records, r)))
        .collect();
    let rows = scaling_surface(
        &counts,
        &cfg.bench.nodes,
        cfg.bench.cores_per_node,
        &cost,
        cfg.bench.policy,
    )?;
    write_scaling_csv(create(&dir, SCALING_FILE)?, &rows)?;
    if let Some(n) = args.throughput_buildings {
        let t = measure_throughput(
            &SynthConfig {
                n_buildings: n,
                ..cfg.synth.clone()
            },
            cfg,
            cfg.orchestrator.resolved_workers(),
        )?;
        let line = format!(
            "throughput: {} buildings x 8760 h with workers={} in {:.2} s = {:.1} buildings/s",
            t.buildings,
            t.workers,
            t.wall_time_s,
            t.buildings_per_s()
        );
        let path = logs_dir(cfg)?.join(THROUGHPUT_FILE);
        std::fs::write(&path, format!("{line}\n")).map_err(|e| Error::io(&path, e))?;
        info!("{line}");
        notes.push(line);
    }
    let mut summary = format!("{} scaling rows", rows.len());
    for n in notes {
        summary.push_str("; ");
        summary.push_str(&n);
    }
    Ok(StageReport {
        stage: StageName::Bench,
        dir,
        summary,
    })
}

/// Simulates `records` at every radius, sequentially.
pub fn radius_sweep(
    records: &[BuildingRecord],
    table: &ArchetypeTable,
    site: Site,
    climate: &Climate,
    model_opts: &ModelOptions,
    params: &EngineParams,
    radii: &[f64],
) -> Result<Vec<(f64, Vec<SimResult>)>> {
    radii
        .iter()
        .map(|&radius_m| {
            let opts = ModelOptions {
                radius_m,
                ..*model_opts
            };
            let results = build_models(records, table, site, &opts)?
                .iter()
                .map(|m| simulate_dynamic(m, climate, params))
                .collect::<Result<Vec<_>>>()?;
            Ok((radius_m, results))
        })
        .collect()
}

pub fn sensitivity(cfg: &PipelineConfig) -> Result<StageReport> {
    let records = load_height_records(cfg)?;
    let table = archetype_table(cfg)?;
    let (site, climate) = load_climate(cfg)?;
    let dir = begin(cfg, StageName::Sensitivity)?;
    let runs = radius_sweep(
        &records,
        &table,
        site,
        &climate,
        &cfg.model,
        &cfg.engine,
        &cfg.sensitivity.radii,
    )?;
    let report = radius_sensitivity(&runs, cfg.sensitivity.baseline_radius_m)?;
    write_sensitivity_csv(create(&dir, SENSITIVITY_FILE)?, &report)?;
    Ok(StageReport {
        stage: StageName::Sensitivity,
        dir,
        summary: format!(
            "{} radii over {} buildings, elbow at {}",
            report.points.len(),
            records.len(),
            report
                .elbow_radius_m
                .map_or_else(|| "n/a".to_string(), |r| format!("{r} m"))
        ),
    })
}

/// Runs the chain `synth` through `report` in order.
pub fn run_chain(cfg: &PipelineConfig) -> Result<Vec<StageReport>> {
    StageName::CHAIN
        .iter()
        .map(|&stage| match stage {
            StageName::Synth => synth(cfg),
            StageName::Ingest => ingest(cfg),
            StageName::Heights => heights(cfg),
            StageName::GenModels => genmodels(cfg),
            StageName::Simulate => simulate(cfg),
            StageName::Scenarios => scenarios(cfg),
            _ => report(cfg),
        })
        .collect()
}
