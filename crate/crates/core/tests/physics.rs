//! Engine and archetype behaviour on synthetic stock against physical expectations.

mod common;

use ubem::archetypes::{ArchetypePeriod, ArchetypeTable, Variant};
use ubem::engine::{simulate_dynamic, simulate_quasi_steady, Climate, EngineParams};
use ubem::geometry::{Point, Polygon};
use ubem::ingest::{locate_neighborhood, BuildingRecord, Neighborhood};
use ubem::model::{build_model, BuildingModel, ModelOptions, Site, SpatialIndex};
use ubem::scenario::apply_retrofit;
use ubem::synthcity::{self, SynthConfig};

const SITE: Site = Site {
    latitude_deg: 44.5,
    longitude_deg: 11.3,
};

fn climate() -> Climate {
    Climate::new(&synthcity::synthetic_weather(&SynthConfig::default()))
}

fn block(period: ArchetypePeriod) -> BuildingModel {
    let (y0, y1) = period.years();
    let rec = BuildingRecord {
        parcel_id: format!("B{}", period.index()),
        footprint: Polygon::rectangle(0.0, 0.0, 14.0, 10.0).unwrap(),
        plan_area_m2: 140.0,
        height_m: Some(9.0),
        construction_year: Some((y0 + y1) / 2),
        neighborhood_id: "N".into(),
    };
    let recs = [rec];
    let index = SpatialIndex::new(&recs);
    let m = build_model(
        &recs[0],
        &index,
        &ArchetypeTable::bundled(),
        SITE,
        &ModelOptions::default(),
    )
    .unwrap();
    assert_eq!(m.period, period);
    m
}

#[test]
fn retrofit_never_raises_heating_on_synthetic_stock() {
    let city = synthcity::generate(&SynthConfig {
        n_buildings: 150,
        n_neighborhoods: 4,
        ..SynthConfig::default()
    })
    .unwrap();
    let records = city.records().unwrap();
    let table = ArchetypeTable::bundled();
    let models = ubem::stages::build_models(&records, &table, SITE, &ModelOptions::default()).unwrap();
    let climate = climate();
    let params = EngineParams::default();
    for m in &models {
        let base = simulate_dynamic(m, &climate, &params).unwrap();
        let retro = simulate_dynamic(&apply_retrofit(m, &table), &climate, &params).unwrap();
        assert!(
            retro.annual_heating_kwh <= base.annual_heating_kwh,
            "{}: {} > {}",
            m.parcel_id,
            retro.annual_heating_kwh,
            base.annual_heating_kwh
        );
    }
}

/// Heating intensity on identical geometry follows the envelope's loss order.
#[test]
fn older_envelopes_need_more_heating() {
    let table = ArchetypeTable::bundled();
    let climate = climate();
    let params = EngineParams::default();
    let mut rows: Vec<(f64, f64, f64)> = ArchetypePeriod::ALL
        .iter()
        .map(|&p| {
            let m = block(p);
            let e = table.spec(p, Variant::Baseline);
            let ua = (m.total_wall_area() - m.total_window_area()) * e.u_wall
                + m.total_window_area() * e.u_window
                + m.roof_area_m2 * e.u_roof
                + m.floor_area_m2 * e.u_floor
                + 0.34 * e.infiltration_ach * m.conditioned_volume_m3;
            let q = simulate_quasi_steady(&m, &climate, &params)
                .unwrap()
                .heating_intensity_kwh_m2;
            let d = simulate_dynamic(&m, &climate, &params)
                .unwrap()
                .heating_intensity_kwh_m2;
            (ua, q, d)
        })
        .collect();
    rows.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in rows.windows(2) {
        if w[1].0 > w[0].0 * 1.05 {
            assert!(w[1].1 > w[0].1, "quasi-steady order {rows:?}");
            assert!(w[1].2 > w[0].2, "dynamic order {rows:?}");
        }
    }
    let pre = &rows.last().unwrap();
    let post = &rows[0];
    assert!(pre.2 > 2.0 * post.2, "{rows:?}");
}

fn ray_cast(poly: &Polygon, p: Point) -> bool {
    poly.rings().fold(false, |inside, ring| {
        let n = ring.len();
        (0..n).fold(inside, |acc, i| {
            let (a, b) = (ring[i], ring[(i + 1) % n]);
            if (a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x {
                !acc
            } else {
                acc
            }
        })
    })
}

#[test]
fn neighborhood_lookup_agrees_with_ray_casting() {
    use rand::{Rng, SeedableRng};
    let city = synthcity::generate(&SynthConfig {
        n_buildings: 100,
        n_neighborhoods: 5,
        rasters: false,
        ..SynthConfig::default()
    })
    .unwrap();
    let hoods: &[Neighborhood] = &city.neighborhoods;
    let boxes: Vec<_> = hoods.iter().map(|n| n.boundary.bbox()).collect();
    let lo = |f: fn(&ubem::geometry::BoundingBox) -> f64| boxes.iter().map(f).fold(f64::INFINITY, f64::min);
    let hi = |f: fn(&ubem::geometry::BoundingBox) -> f64| boxes.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
    let (x0, x1) = (lo(|b| b.min.x) - 20.0, hi(|b| b.max.x) + 20.0);
    let (y0, y1) = (lo(|b| b.min.y) - 20.0, hi(|b| b.max.y) + 20.0);
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    for _ in 0..2000 {
        let p = Point {
            x: rng.random_range(x0..x1),
            y: rng.random_range(y0..y1),
        };
        let expected = hoods
            .iter()
            .filter(|n| ray_cast(&n.boundary, p))
            .map(|n| n.id.as_str())
            .min();
        let on_edge = hoods.iter().any(|n| n.boundary.boundary_distance(p) < 1e-9);
        if !on_edge {
            assert_eq!(locate_neighborhood(hoods, p), expected, "{p:?}");
        }
    }
}
