//! Deterministic synthetic cities: footprints on a jittered grid, volumetric
//! units, civic numbers, neighborhoods, DSM/DTM rasters and hourly weather.
//!
//! Every building draws from its own ChaCha stream, so a building's geometry,
//! height and year depend only on the seed and its index.

use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::archetypes::{assign_period, ArchetypePeriod, DEFAULT_FALLBACK_PERIOD};
use crate::engine::solar::{solar_position, SiteClock};
use crate::engine::weather::{write_epw, WeatherHour, WeatherSeries, HOURS_PER_YEAR};
use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use crate::ingest::{
    feature, feature_collection, integrate, polygon_geometry, write_geojson, BuildingRecord, CivicNumber, Neighborhood,
    ParcelFeature, VolumetricFeature,
};
use crate::terrain::{write_raster, RasterGrid, RasterHeader};

pub const FOOTPRINTS_FILE: &str = "footprints.geojson";
pub const VOLUMETRICS_FILE: &str = "volumetrics.geojson";
pub const CIVICS_FILE: &str = "civics.geojson";
pub const NEIGHBORHOODS_FILE: &str = "neighborhoods.geojson";
pub const DSM_FILE: &str = "dsm.asc";
pub const DTM_FILE: &str = "dtm.asc";
pub const WEATHER_FILE: &str = "weather.epw";
pub const TRUTH_FILE: &str = "truth.csv";

const NODATA: f64 = -9999.0;
const WEATHER_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub seed: u64,
    pub n_buildings: usize,
    /// Pitch of the placement grid.
    pub grid_spacing_m: f64,
    pub footprint_min_m: f64,
    pub footprint_max_m: f64,
    /// Smallest clear distance between footprints in adjacent grid cells.
    pub min_gap_m: f64,
    pub height_min_m: f64,
    pub height_max_m: f64,
    /// Sampling weights of the eight periods, oldest first.
    pub year_weights: [f64; 8],
    pub n_neighborhoods: usize,
    pub cellsize_m: f64,
    /// DTM gradient along +x (rise over run).
    pub dtm_slope: f64,
    pub dtm_base_m: f64,
    pub l_shape_fraction: f64,
    pub volumetric_fraction: f64,
    pub missing_year_fraction: f64,
    /// Fraction of parcels with a second, newer civic number.
    pub duplicate_civic_fraction: f64,
    pub origin_x: f64,
    pub origin_y: f64,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub tz_hours: f64,
    pub rasters: bool,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 1,
            n_buildings: 2000,
            grid_spacing_m: 24.0,
            footprint_min_m: 8.0,
            footprint_max_m: 18.0,
            min_gap_m: 3.0,
            height_min_m: 4.0,
            height_max_m: 25.0,
            year_weights: [0.15, 0.08, 0.12, 0.20, 0.22, 0.10, 0.08, 0.05],
            n_neighborhoods: 12,
            cellsize_m: 0.5,
            dtm_slope: 0.002,
            dtm_base_m: 50.0,
            l_shape_fraction: 0.2,
            volumetric_fraction: 0.7,
            missing_year_fraction: 0.05,
            duplicate_civic_fraction: 0.1,
            origin_x: 686_000.0,
            origin_y: 4_929_000.0,
            latitude_deg: 44.5,
            longitude_deg: 11.3,
            tz_hours: 1.0,
            rasters: true,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            self.grid_spacing_m,
            self.footprint_min_m,
            self.footprint_max_m,
            self.height_min_m,
            self.height_max_m,
            self.cellsize_m,
        ];
        if positive.iter().any(|v| !(*v > 0.0)) || self.min_gap_m < 0.0 {
            return Err(Error::Config("synth ranges must be positive".into()));
        }
        if self.footprint_min_m > self.footprint_max_m || self.height_min_m > self.height_max_m {
            return Err(Error::Config("synth range minimum exceeds maximum".into()));
        }
        if self.footprint_max_m + self.min_gap_m > self.grid_spacing_m {
            return Err(Error::Config(format!(
                "density infeasible: footprints up to {} m plus a {} m gap do not fit a {} m grid",
                self.footprint_max_m, self.min_gap_m, self.grid_spacing_m
            )));
        }
        let sum: f64 = self.year_weights.iter().sum();
        if self.year_weights.iter().any(|w| *w < 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "year weights must be >= 0 and sum to 1 (sum {sum})"
            )));
        }
        if self.n_buildings == 0 || self.n_neighborhoods == 0 {
            return Err(Error::Config("need at least one building and one neighborhood".into()));
        }
        for f in [
            self.l_shape_fraction,
            self.volumetric_fraction,
            self.missing_year_fraction,
            self.duplicate_civic_fraction,
        ] {
            if !(0.0..=1.0).contains(&f) {
                return Err(Error::Config(format!("fraction {f} outside [0, 1]")));
            }
        }
        Ok(())
    }

    pub fn grid_columns(&self) -> usize {
        (self.n_buildings as f64).sqrt().ceil() as usize
    }

    pub fn grid_rows(&self) -> usize {
        self.n_buildings.div_ceil(self.grid_columns())
    }

    fn dtm_at(&self, p: Point) -> f64 {
        self.dtm_base_m + self.dtm_slope * (p.x - self.origin_x)
    }
}

/// Generator-side facts about one building, used as the test oracle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub parcel_id: String,
    pub height_m: f64,
    pub true_year: i32,
    /// Year recorded in the civic layer; `None` when withheld.
    pub recorded_year: Option<i32>,
    pub has_volumetric: bool,
    pub neighborhood_id: String,
}

#[derive(Debug, Clone)]
pub struct SynthCity {
    pub config: SynthConfig,
    pub parcels: Vec<ParcelFeature>,
    pub volumetrics: Vec<VolumetricFeature>,
    pub civics: Vec<CivicNumber>,
    pub neighborhoods: Vec<Neighborhood>,
    pub truth: Vec<TruthRow>,
    pub dsm: Option<RasterGrid>,
    pub dtm: Option<RasterGrid>,
    pub weather: WeatherSeries,
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn round_to(v: f64, step: f64) -> f64 {
    (v / step).round() * step
}

fn parcel_id(i: usize) -> String {
    format!("P{i:06}")
}

fn footprint_shape(rng: &mut ChaCha8Rng, cfg: &SynthConfig, x0: f64, y0: f64, w: f64, d: f64) -> Result<Polygon> {
    let pts = if rng.random_bool(cfg.l_shape_fraction) {
        let nw = round_to(w * rng.random_range(0.3..0.5), 0.01);
        let nd = round_to(d * rng.random_range(0.3..0.5), 0.01);
        vec![
            Point::new(x0, y0),
            Point::new(x0 + w, y0),
            Point::new(x0 + w, y0 + d - nd),
            Point::new(x0 + w - nw, y0 + d - nd),
            Point::new(x0 + w - nw, y0 + d),
            Point::new(x0, y0 + d),
        ]
    } else {
        vec![
            Point::new(x0, y0),
            Point::new(x0 + w, y0),
            Point::new(x0 + w, y0 + d),
            Point::new(x0, y0 + d),
        ]
    };
    Polygon::new(pts, Vec::new())
}

fn sample_year(rng: &mut ChaCha8Rng, periods: &WeightedIndex<f64>) -> i32 {
    let period = ArchetypePeriod::ALL[periods.sample(rng)];
    let (lo, hi) = match period {
        ArchetypePeriod::Pre1900 => (1800, 1900),
        ArchetypePeriod::Post2005 => (2006, 2023),
        p => p.years(),
    };
    rng.random_range(lo..=hi)
}

/// Neighborhood blocks tiling the placement grid; the last block row widens
/// to absorb the remainder.
fn neighborhood_blocks(cfg: &SynthConfig) -> Result<Vec<Neighborhood>> {
    let m = cfg.n_neighborhoods;
    let nx = (m as f64).sqrt().ceil() as usize;
    let ny = m.div_ceil(nx);
    let (cols, rows) = (cfg.grid_columns(), cfg.grid_rows());
    let s = cfg.grid_spacing_m;
    let split = |cells: usize, parts: usize, k: usize| (cells * k / parts) as f64 * s;
    let mut out = Vec::with_capacity(m);
    for j in 0..ny {
        let in_row = if j + 1 == ny { m - nx * (ny - 1) } else { nx };
        for i in 0..in_row {
            let poly = Polygon::rectangle(
                cfg.origin_x + split(cols, in_row, i),
                cfg.origin_y + split(rows, ny, j),
                cfg.origin_x + split(cols, in_row, i + 1),
                cfg.origin_y + split(rows, ny, j + 1),
            )?;
            out.push(Neighborhood {
                id: format!("N{:02}", out.len() + 1),
                boundary: poly,
            });
        }
    }
    Ok(out)
}

fn synth_rasters(cfg: &SynthConfig, parcels: &[ParcelFeature], truth: &[TruthRow]) -> Result<(RasterGrid, RasterGrid)> {
    let margin = 5.0;
    let c = cfg.cellsize_m;
    let width = cfg.grid_columns() as f64 * cfg.grid_spacing_m;
    let height = cfg.grid_rows() as f64 * cfg.grid_spacing_m;
    let xll = ((cfg.origin_x - margin) / c).floor() * c;
    let yll = ((cfg.origin_y - margin) / c).floor() * c;
    let header = RasterHeader {
        ncols: ((cfg.origin_x + width + margin - xll) / c).ceil() as usize,
        nrows: ((cfg.origin_y + height + margin - yll) / c).ceil() as usize,
        xll,
        yll,
        cellsize: c,
        nodata: NODATA,
    };
    let roofs: Vec<f64> = parcels
        .iter()
        .zip(truth)
        .map(|(p, t)| cfg.dtm_at(p.footprint.centroid()) + t.height_m)
        .collect();
    let cols = cfg.grid_columns();
    let building_at = |p: Point| -> Option<usize> {
        let gx = (p.x - cfg.origin_x) / cfg.grid_spacing_m;
        let gy = (p.y - cfg.origin_y) / cfg.grid_spacing_m;
        if gx < 0.0 || gy < 0.0 || gx >= cols as f64 {
            return None;
        }
        let k = gy as usize * cols + gx as usize;
        (k < parcels.len() && parcels[k].footprint.contains(p)).then_some(k)
    };
    let dtm = RasterGrid::from_fn(header, |p| round_to(cfg.dtm_at(p), 0.001))?;
    let dsm = RasterGrid::from_fn(header, |p| match building_at(p) {
        Some(k) => round_to(roofs[k], 0.001),
        None => round_to(cfg.dtm_at(p), 0.001),
    })?;
    Ok((dsm, dtm))
}

/// Hourly weather with a mid-latitude continental annual cycle, a diurnal
/// swing, day-to-day temperature anomalies and random cloudiness.
pub fn synthetic_weather(cfg: &SynthConfig) -> WeatherSeries {
    let mut rng = stream(cfg.seed, WEATHER_STREAM);
    let site = SiteClock {
        latitude_deg: cfg.latitude_deg,
        longitude_deg: cfg.longitude_deg,
        tz_hours: cfg.tz_hours,
    };
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut hours = Vec::with_capacity(HOURS_PER_YEAR);
    let mut anomaly = 0.0;
    let mut cloud = 0.3;
    for h in 0..HOURS_PER_YEAR {
        let day = (h / 24) as f64;
        let hod = (h % 24) as f64 + 0.5;
        if h % 24 == 0 {
            anomaly = 0.7 * anomaly + rng.random_range(-2.0..2.0);
            cloud = (0.5 * cloud + 0.5 * rng.random::<f64>().powi(2)).clamp(0.0, 1.0);
        }
        let sun = solar_position(h, &site);
        let (dni, dhi) = if sun.altitude_deg > 0.0 {
            let sin_alt = sun.altitude_deg.to_radians().sin();
            let air_mass = 1.0 / sin_alt.max(0.05);
            let clear = 1353.0 * 0.7f64.powf(air_mass.powf(0.678));
            (clear * (1.0 - 0.85 * cloud), sin_alt * (60.0 + 220.0 * cloud))
        } else {
            (0.0, 0.0)
        };
        let seasonal = 13.5 - 11.0 * (two_pi * (day - 15.0) / 365.0).cos();
        let diurnal = (4.0 + 2.0 * (1.0 - cloud)) * (two_pi * (hod - 9.0) / 24.0).sin();
        hours.push(WeatherHour {
            dry_bulb_c: round_to(seasonal + diurnal + anomaly, 0.1),
            direct_normal_wm2: round_to(dni, 1.0),
            diffuse_horizontal_wm2: round_to(dhi, 1.0),
        });
    }
    WeatherSeries {
        city: "SYNTHCITY".into(),
        latitude_deg: cfg.latitude_deg,
        longitude_deg: cfg.longitude_deg,
        tz_hours: cfg.tz_hours,
        elevation_m: cfg.dtm_base_m,
        hours,
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<SynthCity> {
    cfg.validate()?;
    let periods = WeightedIndex::new(cfg.year_weights).map_err(|e| Error::Config(format!("year weights: {e}")))?;
    let neighborhoods = neighborhood_blocks(cfg)?;
    let cols = cfg.grid_columns();
    let span = cfg.grid_spacing_m - cfg.min_gap_m;
    let mut parcels = Vec::with_capacity(cfg.n_buildings);
    let mut volumetrics = Vec::new();
    let mut civics = Vec::new();
    let mut truth = Vec::with_capacity(cfg.n_buildings);
    for i in 0..cfg.n_buildings {
        let mut rng = stream(cfg.seed, i as u64);
        let id = parcel_id(i);
        let w = round_to(rng.random_range(cfg.footprint_min_m..=cfg.footprint_max_m), 0.01);
        let d = round_to(rng.random_range(cfg.footprint_min_m..=cfg.footprint_max_m), 0.01);
        let cell_x = cfg.origin_x + (i % cols) as f64 * cfg.grid_spacing_m + cfg.min_gap_m / 2.0;
        let cell_y = cfg.origin_y + (i / cols) as f64 * cfg.grid_spacing_m + cfg.min_gap_m / 2.0;
        let x0 = round_to(cell_x + rng.random_range(0.0..=(span - w).max(0.0)), 0.01);
        let y0 = round_to(cell_y + rng.random_range(0.0..=(span - d).max(0.0)), 0.01);
        let footprint = footprint_shape(&mut rng, cfg, x0, y0, w, d)?;
        let height = round_to(rng.random_range(cfg.height_min_m..=cfg.height_max_m), 0.01);
        let year = sample_year(&mut rng, &periods);
        let has_volumetric = rng.random_bool(cfg.volumetric_fraction);
        let recorded_year = (!rng.random_bool(cfg.missing_year_fraction)).then_some(year);
        let duplicate = rng.random_bool(cfg.duplicate_civic_fraction);
        let later = year + rng.random_range(1..=30);
        let centroid = footprint.centroid();
        if has_volumetric {
            volumetrics.push(VolumetricFeature {
                volume_id: format!("V{i:06}"),
                footprint: footprint.clone(),
                height_m: height,
            });
        }
        match recorded_year {
            Some(y) => {
                civics.push(CivicNumber {
                    parcel_id: id.clone(),
                    location: centroid,
                    construction_year: Some(y),
                });
                if duplicate {
                    civics.push(CivicNumber {
                        parcel_id: id.clone(),
                        location: Point::new(x0 + 0.5, y0 + 0.5),
                        construction_year: Some(later.min(2023)),
                    });
                }
            }
            None if i % 2 == 0 => civics.push(CivicNumber {
                parcel_id: id.clone(),
                location: centroid,
                construction_year: None,
            }),
            None => {}
        }
        let neighborhood_id = crate::ingest::locate_neighborhood(&neighborhoods, centroid)
            .unwrap_or(crate::ingest::UNASSIGNED)
            .to_string();
        truth.push(TruthRow {
            parcel_id: id.clone(),
            height_m: height,
            true_year: year,
            recorded_year,
            has_volumetric,
            neighborhood_id,
        });
        parcels.push(ParcelFeature {
            parcel_id: id,
            plan_area_m2: footprint.area(),
            footprint,
        });
    }
    let (dsm, dtm) = if cfg.rasters {
        let (s, t) = synth_rasters(cfg, &parcels, &truth)?;
        (Some(s), Some(t))
    } else {
        (None, None)
    };
    Ok(SynthCity {
        config: cfg.clone(),
        parcels,
        volumetrics,
        civics,
        neighborhoods,
        truth,
        dsm,
        dtm,
        weather: synthetic_weather(cfg),
    })
}

impl SynthCity {
    /// Integrated records with every height taken from the generator.
    pub fn records(&self) -> Result<Vec<BuildingRecord>> {
        let mut records = integrate(&self.parcels, &self.volumetrics, &self.civics, &self.neighborhoods)?;
        for (r, t) in records.iter_mut().zip(&self.truth) {
            debug_assert_eq!(r.parcel_id, t.parcel_id);
            r.height_m = Some(t.height_m);
        }
        Ok(records)
    }

    /// Assigned period of each building, in parcel order.
    pub fn periods(&self) -> Result<Vec<ArchetypePeriod>> {
        self.truth
            .iter()
            .map(|t| assign_period(t.recorded_year, DEFAULT_FALLBACK_PERIOD))
            .collect()
    }

    /// Writes all layers into `dir` using the default property names.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let props = |pairs: Vec<(&str, Value)>| -> Map<String, Value> {
            pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
        };
        let parcels = self
            .parcels
            .iter()
            .map(|p| {
                feature(
                    polygon_geometry(&p.footprint),
                    props(vec![
                        ("parcel_id", p.parcel_id.clone().into()),
                        ("area_m2", p.plan_area_m2.into()),
                    ]),
                )
            })
            .collect();
        write_geojson(&dir.join(FOOTPRINTS_FILE), &feature_collection(parcels))?;
        let volumes = self
            .volumetrics
            .iter()
            .map(|v| {
                feature(
                    polygon_geometry(&v.footprint),
                    props(vec![
                        ("volume_id", v.volume_id.clone().into()),
                        ("height_m", v.height_m.into()),
                    ]),
                )
            })
            .collect();
        write_geojson(&dir.join(VOLUMETRICS_FILE), &feature_collection(volumes))?;
        let civics = self
            .civics
            .iter()
            .map(|c| {
                let mut p = props(vec![("parcel_id", c.parcel_id.clone().into())]);
                if let Some(y) = c.construction_year {
                    p.insert("year".into(), y.into());
                }
                feature(
                    serde_json::json!({"type": "Point", "coordinates": [c.location.x, c.location.y]}),
                    p,
                )
            })
            .collect();
        write_geojson(&dir.join(CIVICS_FILE), &feature_collection(civics))?;
        let hoods = self
            .neighborhoods
            .iter()
            .map(|n| {
                feature(
                    polygon_geometry(&n.boundary),
                    props(vec![("neighborhood_id", n.id.clone().into())]),
                )
            })
            .collect();
        write_geojson(&dir.join(NEIGHBORHOODS_FILE), &feature_collection(hoods))?;
        if let (Some(dsm), Some(dtm)) = (&self.dsm, &self.dtm) {
            write_raster(&dir.join(DSM_FILE), dsm)?;
            write_raster(&dir.join(DTM_FILE), dtm)?;
        }
        write_epw(&dir.join(WEATHER_FILE), &self.weather)?;
        let path = dir.join(TRUTH_FILE);
        let mut w = csv::Writer::from_path(&path)?;
        w.write_record([
            "parcel_id",
            "height_m",
            "true_year",
            "recorded_year",
            "has_volumetric",
            "neighborhood_id",
        ])?;
        for t in &self.truth {
            w.write_record([
                t.parcel_id.clone(),
                t.height_m.to_string(),
                t.true_year.to_string(),
                t.recorded_year.map(|y| y.to_string()).unwrap_or_default(),
                t.has_volumetric.to_string(),
                t.neighborhood_id.clone(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}
