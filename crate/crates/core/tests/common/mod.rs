#![allow(dead_code)]

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ubem::archetypes::ArchetypePeriod;
use ubem::config::PipelineConfig;
use ubem::engine::{MonthlyEnergy, SimResult};
use ubem::synthcity::SynthConfig;

/// Writes past the test harness capture so verdict lines always reach the log.
pub fn verdict(id: u8, name: &str, pass: bool, detail: &str) {
    let tag = if pass { "PASS" } else { "FAIL" };
    let line = format!("[criterion {id:02}] {tag} {name}: {detail}\n");
    let _ = std::io::stderr().write_all(line.as_bytes());
}

pub fn result(id: &str, period: ArchetypePeriod, heating: f64, cooling: f64, area: f64) -> SimResult {
    SimResult {
        parcel_id: id.into(),
        period,
        floor_area_m2: area,
        annual_heating_kwh: heating,
        annual_cooling_kwh: cooling,
        heating_intensity_kwh_m2: heating / area,
        cooling_intensity_kwh_m2: cooling / area,
        total_intensity_kwh_m2: (heating + cooling) / area,
        monthly: [MonthlyEnergy::default(); 12],
        task_duration_s: 0.0,
    }
}

/// Random paired stock: every retrofit result is at most its baseline.
pub fn random_stock(seed: u64, n: usize) -> (Vec<SimResult>, Vec<SimResult>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut baseline = Vec::with_capacity(n);
    let mut retrofit = Vec::with_capacity(n);
    for i in 0..n {
        let id = format!("B{i:05}");
        let period = ArchetypePeriod::ALL[rng.random_range(0..8)];
        let area = rng.random_range(50.0..2000.0);
        let h = rng.random_range(0.0..200.0) * area;
        let c = rng.random_range(0.0..30.0) * area;
        let keep = rng.random_range(0.2..1.0);
        baseline.push(result(&id, period, h, c, area));
        retrofit.push(result(&id, period, h * keep, c * keep.sqrt(), area));
    }
    (baseline, retrofit)
}

/// Pipeline configuration writing into `dir`, for a city of `n` buildings.
pub fn pipeline_config(dir: &Path, n: usize) -> PipelineConfig {
    let mut cfg = PipelineConfig {
        output_dir: dir.to_path_buf(),
        ..PipelineConfig::default()
    };
    cfg.synth = SynthConfig {
        n_buildings: n,
        n_neighborhoods: 6,
        ..SynthConfig::default()
    };
    cfg
}

pub fn bundled_config() -> PipelineConfig {
    PipelineConfig::from_toml(include_str!("../../config/bundled.toml")).expect("bundled config parses")
}

/// Contents of every file under `dir` except `logs/`, keyed by relative path.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for entry in std::fs::read_dir(&d).expect("readable dir") {
            let path = entry.expect("dir entry").path();
            let rel = path.strip_prefix(dir).expect("under root").to_path_buf();
            if rel.starts_with("logs") {
                continue;
            }
            if path.is_dir() {
                stack.push(path);
            } else {
                out.insert(rel, std::fs::read(&path).expect("readable file"));
            }
        }
    }
    out
}
