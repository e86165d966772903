//! Loads the four vector layers and integrates them into building records.

use ubem::ingest::{
    integrate, load_civics, load_footprints, load_neighborhoods, load_volumetrics, LayerOptions, UNASSIGNED,
};
use ubem::synthcity::{self, SynthConfig};

fn main() -> ubem::Result<()> {
    let dir = tempfile_dir("ingest_layers");
    let cfg = SynthConfig {
        n_buildings: 120,
        n_neighborhoods: 4,
        ..SynthConfig::default()
    };
    synthcity::generate(&cfg)?.write(&dir)?;

    let opts = LayerOptions::default();
    let parcels = load_footprints(&dir.join(synthcity::FOOTPRINTS_FILE), &opts)?;
    let volumes = load_volumetrics(&dir.join(synthcity::VOLUMETRICS_FILE), &opts)?;
    let civics = load_civics(&dir.join(synthcity::CIVICS_FILE), &opts)?;
    let hoods = load_neighborhoods(&dir.join(synthcity::NEIGHBORHOODS_FILE), &opts)?;
    let records = integrate(&parcels.features, &volumes.features, &civics.features, &hoods.features)?;

    let with_height = records.iter().filter(|r| r.height_m.is_some()).count();
    let with_year = records.iter().filter(|r| r.construction_year.is_some()).count();
    let unassigned = records.iter().filter(|r| r.neighborhood_id == UNASSIGNED).count();
    println!("records: {}", records.len());
    println!("heights from volumetrics: {with_height}");
    println!("years from civic numbers: {with_year}");
    println!("outside every neighborhood: {unassigned}");
    for r in records.iter().take(5) {
        println!(
            "{} area={:.1} height={:?} year={:?} hood={}",
            r.parcel_id, r.plan_area_m2, r.height_m, r.construction_year, r.neighborhood_id
        );
    }
    Ok(())
}

fn tempfile_dir(name: &str) -> std::path::PathBuf {
    std::env::temp_dir().join(format!("ubem_{name}"))
}
