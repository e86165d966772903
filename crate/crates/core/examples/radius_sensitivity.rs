//! Mean energy against shading radius and the radius of maximum curvature.

use ubem::analytics::radius_sensitivity;
use ubem::archetypes::ArchetypeTable;
use ubem::engine::{Climate, EngineParams};
use ubem::model::{ModelOptions, Site};
use ubem::stages::radius_sweep;
use ubem::synthcity::{self, SynthConfig};

fn main() -> ubem::Result<()> {
    let city = synthcity::generate(&SynthConfig {
        n_buildings: 300,
        grid_spacing_m: 20.0,
        footprint_max_m: 14.0,
        height_max_m: 30.0,
        rasters: false,
        ..SynthConfig::default()
    })?;
    let site = Site {
        latitude_deg: 44.5,
        longitude_deg: 11.3,
    };
    let runs = radius_sweep(
        &city.records()?,
        &ArchetypeTable::bundled(),
        site,
        &Climate::new(&city.weather),
        &ModelOptions::default(),
        &EngineParams::default(),
        &[10.0, 20.0, 40.0, 60.0, 80.0, 100.0],
    )?;
    let report = radius_sensitivity(&runs, 10.0)?;
    for p in &report.points {
        println!(
            "r={:>5.0} heating={:>6.2} cooling={:>5.2} d_heat={:>5.2}% d_cool={:>6.2}% d_total={:>5.2}%",
            p.radius_m,
            p.mean_heating_kwh_m2,
            p.mean_cooling_kwh_m2,
            p.delta_heating_pct,
            p.delta_cooling_pct,
            p.delta_total_pct
        );
    }
    match report.elbow_radius_m {
        Some(r) => println!("elbow at {r} m"),
        None => println!("no elbow"),
    }
    Ok(())
}
