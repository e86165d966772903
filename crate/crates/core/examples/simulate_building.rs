//! Hourly and monthly engines on the same building, before and after retrofit.

use ubem::archetypes::{ArchetypePeriod, ArchetypeTable};
use ubem::engine::{simulate_dynamic, simulate_quasi_steady, Climate, EngineParams};
use ubem::geometry::Polygon;
use ubem::ingest::BuildingRecord;
use ubem::model::{build_model, ModelOptions, Site, SpatialIndex};
use ubem::scenario::apply_retrofit;
use ubem::synthcity::{synthetic_weather, SynthConfig};

fn main() -> ubem::Result<()> {
    let climate = Climate::new(&synthetic_weather(&SynthConfig::default()));
    let table = ArchetypeTable::bundled();
    let params = EngineParams::default();
    let site = Site {
        latitude_deg: 44.5,
        longitude_deg: 11.3,
    };
    println!(
        "{:>12} {:>10} {:>10} {:>10} {:>10}",
        "period", "hourly", "monthly", "ratio", "retrofit"
    );
    for period in ArchetypePeriod::ALL {
        let (y0, y1) = period.years();
        let records = [BuildingRecord {
            parcel_id: period.label().into(),
            footprint: Polygon::rectangle(0.0, 0.0, 16.0, 11.0)?,
            plan_area_m2: 176.0,
            height_m: Some(12.0),
            construction_year: Some((y0 + y1) / 2),
            neighborhood_id: "N".into(),
        }];
        let index = SpatialIndex::new(&records);
        let model = build_model(&records[0], &index, &table, site, &ModelOptions::default())?;
        let hourly = simulate_dynamic(&model, &climate, &params)?;
        let monthly = simulate_quasi_steady(&model, &climate, &params)?;
        let retrofit = simulate_dynamic(&apply_retrofit(&model, &table), &climate, &params)?;
        println!(
            "{:>12} {:>10.1} {:>10.1} {:>10.3} {:>10.1}",
            period.label(),
            hourly.heating_intensity_kwh_m2,
            monthly.heating_intensity_kwh_m2,
            hourly.heating_intensity_kwh_m2 / monthly.heating_intensity_kwh_m2,
            retrofit.heating_intensity_kwh_m2
        );
    }
    Ok(())
}
