//! Intensity histograms, the cumulative consumption curve and CO2 for a synthetic stock.

use ubem::analytics::{
    co2_estimate, cumulative_curve, intensity_histograms, top_consumers, DEFAULT_EMISSION_FACTOR_T_PER_TJ,
};
use ubem::archetypes::ArchetypeTable;
use ubem::engine::{simulate_dynamic, Climate, EngineParams};
use ubem::model::{ModelOptions, Site};
use ubem::stages::build_models;
use ubem::synthcity::{self, SynthConfig};

fn main() -> ubem::Result<()> {
    let city = synthcity::generate(&SynthConfig {
        n_buildings: 500,
        rasters: false,
        ..SynthConfig::default()
    })?;
    let site = Site {
        latitude_deg: 44.5,
        longitude_deg: 11.3,
    };
    let models = build_models(
        &city.records()?,
        &ArchetypeTable::bundled(),
        site,
        &ModelOptions::default(),
    )?;
    let climate = Climate::new(&city.weather);
    let results = models
        .iter()
        .map(|m| simulate_dynamic(m, &climate, &EngineParams::default()))
        .collect::<ubem::Result<Vec<_>>>()?;

    for (period, h) in intensity_histograms(&results) {
        println!(
            "{:>12} n={:>3} mean={:>6.1} median={:>6.1} skew={:>5.2}",
            period.label(),
            h.n,
            h.mean.unwrap_or(f64::NAN),
            h.median.unwrap_or(f64::NAN),
            h.skewness.unwrap_or(f64::NAN)
        );
    }
    let curve = cumulative_curve(&results)?;
    println!("80% of energy is used by {:.1}% of buildings", 100.0 * curve.x_at(0.8));
    let co2 = co2_estimate(&results, DEFAULT_EMISSION_FACTOR_T_PER_TJ)?;
    println!("CO2 {:.0} t, {:.1} kg/m2", co2.co2_kg / 1000.0, co2.co2_intensity_kg_m2);
    for row in top_consumers(&results, 0.1).iter().take(5) {
        println!("top: {row:?}");
    }
    Ok(())
}
