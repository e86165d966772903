//! Recovers building heights from surface and terrain rasters on sloped ground.

use ubem::synthcity::{self, SynthConfig};
use ubem::terrain::{extract_height, HeightOptions};

fn main() -> ubem::Result<()> {
    let city = synthcity::generate(&SynthConfig {
        n_buildings: 200,
        dtm_slope: 0.01,
        ..SynthConfig::default()
    })?;
    let (dsm, dtm) = (city.dsm.as_ref().expect("rasters"), city.dtm.as_ref().expect("rasters"));
    let opts = HeightOptions::default();
    let errors: Vec<f64> = city
        .parcels
        .iter()
        .zip(&city.truth)
        .map(|(p, t)| extract_height(&p.footprint, dsm, dtm, &opts).map(|h| (h.height_m - t.height_m).abs()))
        .collect::<ubem::Result<_>>()?;
    let within = errors.iter().filter(|e| **e <= 0.5).count();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    println!("buildings: {}", errors.len());
    println!(
        "within 0.5 m: {within} ({:.1}%)",
        100.0 * within as f64 / errors.len() as f64
    );
    println!("worst error: {worst:.3} m");
    Ok(())
}
