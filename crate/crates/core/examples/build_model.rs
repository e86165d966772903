//! Extrudes one building of a synthetic block, places windows and traces its horizon.

use ubem::archetypes::ArchetypeTable;
use ubem::model::{build_model, model_to_string, ModelOptions, Site, SpatialIndex};
use ubem::synthcity::{self, SynthConfig};

fn main() -> ubem::Result<()> {
    let cfg = SynthConfig {
        n_buildings: 49,
        rasters: false,
        ..SynthConfig::default()
    };
    let records = synthcity::generate(&cfg)?.records()?;
    let index = SpatialIndex::new(&records);
    let site = Site {
        latitude_deg: cfg.latitude_deg,
        longitude_deg: cfg.longitude_deg,
    };
    let centre = &records[records.len() / 2];
    let model = build_model(
        centre,
        &index,
        &ArchetypeTable::bundled(),
        site,
        &ModelOptions::default(),
    )?;

    println!(
        "{} ({}), {} storeys, {:.1} m",
        model.parcel_id,
        model.period.label(),
        model.storeys,
        model.height_m
    );
    println!(
        "plan {:.1} m2, conditioned {:.1} m2",
        model.floor_area_m2,
        model.conditioned_floor_area()
    );
    println!(
        "windows {:.1} m2 = plan / {:.2}",
        model.total_window_area(),
        model.floor_area_m2 / model.total_window_area()
    );
    for f in &model.facades {
        println!(
            "  facade az={:>6.1} wall={:>6.1} window={:>5.1}",
            f.azimuth_deg, f.wall_area_m2, f.window_area_m2
        );
    }
    let blocked = (0..36).map(|k| model.horizon.obstruction_at(k as f64 * 10.0 + 5.0));
    let max = blocked.fold(0.0, f64::max);
    println!(
        "{} shading neighbors, steepest horizon {max:.1} deg",
        model.neighbors.len()
    );
    println!("--- model file ---\n{}", model_to_string(&model));
    Ok(())
}
