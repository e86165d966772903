//! Generates a small synthetic city and writes its layers, rasters and weather.
//!
//! cargo run --example synth_city -- [out_dir] [buildings]

use ubem::synthcity::{self, SynthConfig};

fn main() -> ubem::Result<()> {
    let mut args = std::env::args().skip(1);
    let dir = args.next().unwrap_or_else(|| "synth_city".into());
    let n = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let cfg = SynthConfig {
        n_buildings: n,
        n_neighborhoods: 6,
        ..SynthConfig::default()
    };
    let city = synthcity::generate(&cfg)?;
    city.write(std::path::Path::new(&dir))?;

    let mut per_period = [0usize; 8];
    for p in city.periods()? {
        per_period[p.index()] += 1;
    }
    let volumetric = city.truth.iter().filter(|t| t.has_volumetric).count();
    let yearless = city.truth.iter().filter(|t| t.recorded_year.is_none()).count();
    println!(
        "{} buildings in {}x{} grid written to {dir}",
        n,
        cfg.grid_columns(),
        cfg.grid_rows()
    );
    println!("volumetric heights: {volumetric}, missing years: {yearless}");
    for (p, c) in ubem::archetypes::ArchetypePeriod::ALL.iter().zip(per_period) {
        println!("{:>12} {c}", p.label());
    }
    Ok(())
}
