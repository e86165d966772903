//! Runs the generate-then-simulate task graph on a worker pool with retries.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use ubem::archetypes::ArchetypeTable;
use ubem::engine::{simulate_dynamic, Climate, EngineParams, SimResult};
use ubem::ingest::BuildingRecord;
use ubem::model::{build_model, BuildingModel, ModelOptions, Site, SpatialIndex};
use ubem::orchestrator::{run_pipeline, PipelineJob, PoolConfig};
use ubem::synthcity::{self, SynthConfig};

struct Job<'a> {
    records: &'a [BuildingRecord],
    index: SpatialIndex<'a>,
    ids: BTreeMap<String, usize>,
    models: std::sync::Mutex<BTreeMap<String, BuildingModel>>,
    climate: Climate,
    flaky: AtomicUsize,
}

impl PipelineJob for Job<'_> {
    type Output = SimResult;

    fn generate(&self, parcel_id: &str) -> ubem::Result<()> {
        // The first three generation attempts fail: one parcel exhausts its retries.
        if self.flaky.fetch_add(1, Ordering::Relaxed) < 3 {
            return Err(ubem::Error::Input(format!("{parcel_id}: transient failure")));
        }
        let site = Site {
            latitude_deg: 44.5,
            longitude_deg: 11.3,
        };
        let rec = &self.records[self.ids[parcel_id]];
        let model = build_model(
            rec,
            &self.index,
            &ArchetypeTable::bundled(),
            site,
            &ModelOptions::default(),
        )?;
        self.models.lock().expect("lock").insert(parcel_id.to_string(), model);
        Ok(())
    }

    fn simulate(&self, parcel_id: &str) -> ubem::Result<SimResult> {
        let model = self.models.lock().expect("lock")[parcel_id].clone();
        simulate_dynamic(&model, &self.climate, &EngineParams::default())
    }
}

fn main() -> ubem::Result<()> {
    let cfg = SynthConfig {
        n_buildings: 300,
        rasters: false,
        ..SynthConfig::default()
    };
    let city = synthcity::generate(&cfg)?;
    let records = city.records()?;
    let ids: Vec<String> = records.iter().map(|r| r.parcel_id.clone()).collect();
    let job = Job {
        records: &records,
        index: SpatialIndex::new(&records),
        ids: ids.iter().cloned().enumerate().map(|(i, id)| (id, i)).collect(),
        models: Default::default(),
        climate: Climate::new(&city.weather),
        flaky: AtomicUsize::new(0),
    };
    let out = run_pipeline(&ids, &job, &PoolConfig { workers: 4, retries: 2 })?;
    let r = &out.report;
    println!(
        "tasks {} succeeded {} retried {} failed {} in {:.2} s",
        r.tasks_total, r.tasks_succeeded, r.tasks_retried, r.tasks_failed, r.wall_time_s
    );
    let mean = out.results.iter().map(|(_, s)| s.total_intensity_kwh_m2).sum::<f64>() / out.results.len() as f64;
    println!(
        "mean total intensity {mean:.1} kWh/m2 over {} buildings",
        out.results.len()
    );
    Ok(())
}
