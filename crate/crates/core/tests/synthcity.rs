//! Synthetic city generation: ingest round trip, determinism and sampling.

mod common;

use ubem::archetypes::{assign_period, ArchetypePeriod};
use ubem::ingest::{integrate, load_civics, load_footprints, load_neighborhoods, load_volumetrics, LayerOptions};
use ubem::synthcity::{self, SynthConfig};
use ubem::terrain::{fill_heights, load_raster, HeightOptions};

fn config(seed: u64, n: usize) -> SynthConfig {
    SynthConfig {
        seed,
        n_buildings: n,
        n_neighborhoods: 4,
        ..SynthConfig::default()
    }
}

#[test]
fn written_layers_parse_back_into_the_same_stock() {
    let dir = tempfile::tempdir().unwrap();
    let city = synthcity::generate(&config(1, 10)).unwrap();
    city.write(dir.path()).unwrap();
    let opts = LayerOptions::default();
    let parcels = load_footprints(&dir.path().join(synthcity::FOOTPRINTS_FILE), &opts).unwrap();
    let volumes = load_volumetrics(&dir.path().join(synthcity::VOLUMETRICS_FILE), &opts).unwrap();
    let civics = load_civics(&dir.path().join(synthcity::CIVICS_FILE), &opts).unwrap();
    let hoods = load_neighborhoods(&dir.path().join(synthcity::NEIGHBORHOODS_FILE), &opts).unwrap();
    for w in [parcels.warnings, volumes.warnings, civics.warnings, hoods.warnings] {
        assert_eq!(w.total(), 0, "{w:?}");
    }
    assert_eq!(parcels.features.len(), 10);
    for (i, a) in parcels.features.iter().enumerate() {
        for b in &parcels.features[i + 1..] {
            assert_eq!(a.footprint.intersection_area(&b.footprint), 0.0);
        }
    }
    let mut records = integrate(&parcels.features, &volumes.features, &civics.features, &hoods.features).unwrap();
    let dsm = load_raster(&dir.path().join(synthcity::DSM_FILE)).unwrap();
    let dtm = load_raster(&dir.path().join(synthcity::DTM_FILE)).unwrap();
    fill_heights(&mut records, &dsm, &dtm, &HeightOptions::default()).unwrap();
    for (r, t) in records.iter().zip(&city.truth) {
        assert_eq!(r.parcel_id, t.parcel_id);
        assert!(
            (r.height_m.unwrap() - t.height_m).abs() <= 0.1,
            "{} {:?} {}",
            r.parcel_id,
            r.height_m,
            t.height_m
        );
        assert_eq!(r.construction_year, t.recorded_year);
        assert_eq!(r.neighborhood_id, t.neighborhood_id);
    }
}

#[test]
fn same_seed_writes_identical_bytes() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    synthcity::generate(&config(5, 40)).unwrap().write(a.path()).unwrap();
    synthcity::generate(&config(5, 40)).unwrap().write(b.path()).unwrap();
    let (sa, sb) = (common::snapshot(a.path()), common::snapshot(b.path()));
    assert_eq!(sa.len(), 8);
    assert_eq!(sa, sb);
}

#[test]
fn buildings_do_not_depend_on_stock_size() {
    let small = synthcity::generate(&SynthConfig {
        rasters: false,
        ..config(2, 16)
    })
    .unwrap();
    let large = synthcity::generate(&SynthConfig {
        rasters: false,
        ..config(2, 64)
    })
    .unwrap();
    for (s, l) in small.truth.iter().zip(&large.truth) {
        assert_eq!((s.height_m, s.true_year), (l.height_m, l.true_year));
    }
}

/// Chi-square statistic of observed period counts against the configured weights.
#[test]
fn period_distribution_matches_weights() {
    let cfg = SynthConfig {
        rasters: false,
        missing_year_fraction: 0.0,
        ..config(7, 10_000)
    };
    let city = synthcity::generate(&cfg).unwrap();
    let mut observed = [0usize; 8];
    for t in &city.truth {
        observed[assign_period(Some(t.true_year), ArchetypePeriod::Y1946To1960)
            .unwrap()
            .index()] += 1;
    }
    let n = city.truth.len() as f64;
    let chi2: f64 = observed
        .iter()
        .zip(cfg.year_weights)
        .map(|(&o, w)| (o as f64 - n * w).powi(2) / (n * w))
        .sum();
    // 99.9th percentile of chi-square with 7 degrees of freedom.
    assert!(chi2 < 24.32, "chi2 = {chi2}, counts {observed:?}");
}

#[test]
fn sloped_terrain_keeps_heights_within_two_decimeters() {
    let city = synthcity::generate(&SynthConfig {
        dtm_slope: 0.01,
        ..config(12, 100)
    })
    .unwrap();
    let (dsm, dtm) = (city.dsm.unwrap(), city.dtm.unwrap());
    for (p, t) in city.parcels.iter().zip(&city.truth) {
        let h = ubem::terrain::extract_height(&p.footprint, &dsm, &dtm, &HeightOptions::default()).unwrap();
        assert!((h.height_m - t.height_m).abs() <= 0.2);
    }
}
