//! All 256 period-retrofit combinations, their Pareto front and per-neighborhood savings.

use ubem::archetypes::ArchetypeTable;
use ubem::engine::{simulate_dynamic, Climate, EngineParams, SimResult};
use ubem::model::{ModelOptions, Site};
use ubem::scenario::{
    apply_retrofit, archetype_front_frequency, evaluate_scenarios, neighborhood_savings, pareto_front, SavingsWeighting,
};
use ubem::stages::build_models;
use ubem::synthcity::{self, SynthConfig};

fn main() -> ubem::Result<()> {
    let city = synthcity::generate(&SynthConfig {
        n_buildings: 400,
        n_neighborhoods: 4,
        rasters: false,
        ..SynthConfig::default()
    })?;
    let records = city.records()?;
    let table = ArchetypeTable::bundled();
    let site = Site {
        latitude_deg: 44.5,
        longitude_deg: 11.3,
    };
    let models = build_models(&records, &table, site, &ModelOptions::default())?;
    let climate = Climate::new(&city.weather);
    let params = EngineParams::default();
    let run = |retrofit: bool| -> ubem::Result<Vec<SimResult>> {
        models
            .iter()
            .map(|m| {
                let m = if retrofit { apply_retrofit(m, &table) } else { m.clone() };
                simulate_dynamic(&m, &climate, &params)
            })
            .collect()
    };
    let (baseline, retrofit) = (run(false)?, run(true)?);

    let outcomes = evaluate_scenarios(&baseline, &retrofit)?;
    let front = pareto_front(&outcomes)?;
    println!("{} scenarios, {} on the front", outcomes.len(), front.outcomes.len());
    for o in &front.outcomes {
        println!(
            "  {:>3} buildings -> {:>10.0} kWh  [{}]",
            o.buildings_retrofitted, o.total_energy_kwh, o.mask
        );
    }
    for (p, n) in archetype_front_frequency(&front) {
        println!("{:>12} appears {n} times", p.label());
    }
    for (hood, s) in neighborhood_savings(&baseline, &retrofit, &records, SavingsWeighting::PerBuilding)? {
        println!("{hood}: {:.1}% over {} buildings", s.mean_savings_pct, s.buildings);
    }
    Ok(())
}
