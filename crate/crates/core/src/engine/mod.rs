//! Building thermal engines: an hourly lumped-capacitance model and a
//! monthly quasi-steady method, sharing weather, solar and result types.

mod dynamic;
mod quasi_steady;
pub mod solar;
pub mod weather;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::archetypes::ArchetypePeriod;
use crate::error::{Error, Result};
use crate::model::BuildingModel;

pub use dynamic::{simulate_dynamic, simulate_zone, DynamicTrace, ZoneForcing};
pub use quasi_steady::{monthly_balance, simulate_quasi_steady, utilization_factor, MonthlyHeatBalance};
pub use solar::{solar_gains, solar_position, SiteClock, SolarPosition};
pub use weather::{load_epw, parse_epw, write_epw, WeatherHour, WeatherSeries, HOURS_PER_YEAR};

/// Air heat capacity per volume in Wh/(m³·K), applied to infiltration.
pub const AIR_HEAT_CAPACITY_WH_M3K: f64 = 0.34;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EngineParams {
    pub t_set_heat_c: f64,
    pub t_set_cool_c: f64,
    pub internal_gains_wm2: f64,
    pub a0: f64,
    pub tau0_h: f64,
    /// Days from the start of the year replayed before recording.
    pub warmup_days: usize,
}

impl Default for EngineParams {
    fn default() -> Self {
        EngineParams {
            t_set_heat_c: 20.0,
            t_set_cool_c: 26.0,
            internal_gains_wm2: 4.0,
            a0: 1.0,
            tau0_h: 15.0,
            warmup_days: 7,
        }
    }
}

impl EngineParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_set_heat_c < self.t_set_cool_c) {
            return Err(Error::Validation(format!(
                "heating setpoint {} must be below cooling setpoint {}",
                self.t_set_heat_c, self.t_set_cool_c
            )));
        }
        if !(self.internal_gains_wm2 >= 0.0 && self.a0 > 0.0 && self.tau0_h > 0.0) {
            return Err(Error::Validation("internal gains must be >= 0 and a0, tau0 > 0".into()));
        }
        Ok(())
    }
}

/// Lumped single-zone parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZoneThermalParams {
    /// Conductance to outdoor air (opaque, glazing, roof, infiltration), W/K.
    pub ua_air_w_k: f64,
    /// Conductance to ground through the floor, W/K.
    pub ua_ground_w_k: f64,
    pub capacitance_j_k: f64,
    pub t_set_heat_c: f64,
    pub t_set_cool_c: f64,
    pub internal_gains_wm2: f64,
    /// Conditioned floor area.
    pub floor_area_m2: f64,
}

impl ZoneThermalParams {
    pub fn from_model(model: &BuildingModel, params: &EngineParams) -> Self {
        let env = &model.envelope;
        let window = model.total_window_area();
        let opaque = model.total_wall_area() - window;
        let ua_air = env.u_wall * opaque
            + env.u_window * window
            + env.u_roof * model.roof_area_m2
            + AIR_HEAT_CAPACITY_WH_M3K * env.infiltration_ach * model.conditioned_volume_m3;
        let floor_area = model.conditioned_floor_area();
        ZoneThermalParams {
            ua_air_w_k: ua_air,
            ua_ground_w_k: env.u_floor * model.floor_area_m2,
            capacitance_j_k: env.thermal_capacitance_per_floor_area * floor_area,
            t_set_heat_c: params.t_set_heat_c,
            t_set_cool_c: params.t_set_cool_c,
            internal_gains_wm2: params.internal_gains_wm2,
            floor_area_m2: floor_area,
        }
    }

    pub fn ua_total(&self) -> f64 {
        self.ua_air_w_k + self.ua_ground_w_k
    }

    /// Time constant C / UA in hours.
    pub fn tau_h(&self) -> f64 {
        self.capacitance_j_k / self.ua_total() / 3600.0
    }

    pub fn internal_gains_w(&self) -> f64 {
        self.internal_gains_wm2 * self.floor_area_m2
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.ua_total() > 0.0 && self.capacitance_j_k > 0.0 && self.floor_area_m2 > 0.0) {
            return Err(Error::Validation(format!(
                "zone needs UA > 0, C > 0 and floor area > 0 (UA {}, C {}, A {})",
                self.ua_total(),
                self.capacitance_j_k,
                self.floor_area_m2
            )));
        }
        if !(self.t_set_heat_c < self.t_set_cool_c) {
            return Err(Error::Validation(
                "heating setpoint must be below cooling setpoint".into(),
            ));
        }
        Ok(())
    }
}

/// Hour-by-hour forcing shared by every building of a run.
#[derive(Debug, Clone)]
pub struct Climate {
    pub dry_bulb_c: Vec<f64>,
    pub monthly_mean_c: [f64; 12],
    pub month: Vec<u8>,
    pub sun: Vec<SolarPosition>,
    /// Horizontal sun-direction components (east, north) scaled by cos(altitude).
    pub sun_east_north: Vec<(f64, f64)>,
    pub dni: Vec<f64>,
    pub dhi: Vec<f64>,
}

impl Climate {
    pub fn new(weather: &WeatherSeries) -> Self {
        let site = SiteClock {
            latitude_deg: weather.latitude_deg,
            longitude_deg: weather.longitude_deg,
            tz_hours: weather.tz_hours,
        };
        let sun: Vec<SolarPosition> = (0..weather.hours.len()).map(|h| solar_position(h, &site)).collect();
        let sun_east_north = sun
            .iter()
            .map(|s| {
                let (alt, az) = (s.altitude_deg.to_radians(), s.azimuth_deg.to_radians());
                (alt.cos() * az.sin(), alt.cos() * az.cos())
            })
            .collect();
        Climate {
            dry_bulb_c: weather.hours.iter().map(|h| h.dry_bulb_c).collect(),
            monthly_mean_c: weather.monthly_mean_dry_bulb(),
            month: (0..weather.hours.len())
                .map(|h| weather::month_of_hour(h) as u8)
                .collect(),
            sun,
            sun_east_north,
            dni: weather.hours.iter().map(|h| h.direct_normal_wm2).collect(),
            dhi: weather.hours.iter().map(|h| h.diffuse_horizontal_wm2).collect(),
        }
    }

    pub fn hours(&self) -> usize {
        self.dry_bulb_c.len()
    }

    /// Hourly transmitted solar gains of `model`, in watts.
    ///
    /// Same quantity as [`solar_gains`] evaluated hour by hour, with the
    /// façade trigonometry hoisted out of the loop.
    pub fn solar_series(&self, model: &BuildingModel) -> Vec<f64> {
        let shgc = model.envelope.shgc;
        let facades: Vec<(f64, f64, f64)> = model
            .facades
            .iter()
            .filter(|f| f.window_area_m2 > 0.0)
            .map(|f| {
                let az = f.azimuth_deg.to_radians();
                (az.sin(), az.cos(), f.window_area_m2 * shgc)
            })
            .collect();
        let diffuse_factor: f64 = facades.iter().map(|f| f.2).sum::<f64>() * 0.5 * model.horizon.sky_view;
        (0..self.hours())
            .map(|h| {
                let sun = &self.sun[h];
                let mut gain = self.dhi[h] * diffuse_factor;
                if sun.altitude_deg > 0.0
                    && sun.altitude_deg >= model.horizon.obstruction_at(sun.azimuth_deg)
                    && self.dni[h] > 0.0
                {
                    let (e, n) = self.sun_east_north[h];
                    let direct: f64 = facades.iter().map(|(s, c, a)| a * (e * s + n * c).max(0.0)).sum();
                    gain += self.dni[h] * direct;
                }
                gain
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MonthlyEnergy {
    pub heating_kwh: f64,
    pub cooling_kwh: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub parcel_id: String,
    pub period: ArchetypePeriod,
    /// Conditioned floor area used for intensities.
    pub floor_area_m2: f64,
    pub annual_heating_kwh: f64,
    pub annual_cooling_kwh: f64,
    pub heating_intensity_kwh_m2: f64,
    pub cooling_intensity_kwh_m2: f64,
    pub total_intensity_kwh_m2: f64,
    pub monthly: [MonthlyEnergy; 12],
    /// Wall-clock duration; filled by the orchestrator, never serialized to result tables.
    pub task_duration_s: f64,
}

impl SimResult {
    pub fn from_monthly(model: &BuildingModel, floor_area_m2: f64, monthly: [MonthlyEnergy; 12]) -> Self {
        let heating: f64 = monthly.iter().map(|m| m.heating_kwh).sum();
        let cooling: f64 = monthly.iter().map(|m| m.cooling_kwh).sum();
        let hi = heating / floor_area_m2;
        let ci = cooling / floor_area_m2;
        SimResult {
            parcel_id: model.parcel_id.clone(),
            period: model.period,
            floor_area_m2,
            annual_heating_kwh: heating,
            annual_cooling_kwh: cooling,
            heating_intensity_kwh_m2: hi,
            cooling_intensity_kwh_m2: ci,
            total_intensity_kwh_m2: hi + ci,
            monthly,
            task_duration_s: 0.0,
        }
    }

    pub fn total_kwh(&self) -> f64 {
        self.annual_heating_kwh + self.annual_cooling_kwh
    }
}

const RESULT_FIXED_COLUMNS: [&str; 8] = [
    "parcel_id",
    "period",
    "floor_area_m2",
    "heating_kWh",
    "cooling_kWh",
    "heating_intensity_kWhm2",
    "cooling_intensity_kWhm2",
    "total_intensity_kWhm2",
];

fn result_header() -> Vec<String> {
    let mut h: Vec<String> = RESULT_FIXED_COLUMNS.iter().map(|s| s.to_string()).collect();
    for m in 1..=12 {
        h.push(format!("m{m:02}_heating_kWh"));
        h.push(format!("m{m:02}_cooling_kWh"));
    }
    h
}

/// Writes results as CSV; floats use shortest round-trip formatting.
pub fn write_results<W: std::io::Write>(out: W, results: &[SimResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(result_header())?;
    for r in results {
        let mut row = vec![
            r.parcel_id.clone(),
            r.period.to_string(),
            r.floor_area_m2.to_string(),
            r.annual_heating_kwh.to_string(),
            r.annual_cooling_kwh.to_string(),
            r.heating_intensity_kwh_m2.to_string(),
            r.cooling_intensity_kwh_m2.to_string(),
            r.total_intensity_kwh_m2.to_string(),
        ];
        for m in &r.monthly {
            row.push(m.heating_kwh.to_string());
            row.push(m.cooling_kwh.to_string());
        }
        w.write_record(&row)?;
    }
    w.flush().map_err(|e| Error::io(Path::new("<results>"), e))?;
    Ok(())
}

pub fn write_results_file(path: &Path, results: &[SimResult]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_results(std::io::BufWriter::new(file), results)
}

pub fn read_results<R: std::io::Read>(input: R) -> Result<Vec<SimResult>> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header != result_header() {
        return Err(Error::Schema("unexpected results header".into()));
    }
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let num = |k: usize| -> Result<f64> {
            rec[k]
                .parse::<f64>()
                .map_err(|_| Error::Schema(format!("row {}: column {} is not a number", i + 1, header[k])))
        };
        let mut monthly = [MonthlyEnergy::default(); 12];
        for (m, slot) in monthly.iter_mut().enumerate() {
            *slot = MonthlyEnergy {
                heating_kwh: num(8 + 2 * m)?,
                cooling_kwh: num(9 + 2 * m)?,
            };
        }
        out.push(SimResult {
            parcel_id: rec[0].to_string(),
            period: rec[1].parse()?,
            floor_area_m2: num(2)?,
            annual_heating_kwh: num(3)?,
            annual_cooling_kwh: num(4)?,
            heating_intensity_kwh_m2: num(5)?,
            cooling_intensity_kwh_m2: num(6)?,
            total_intensity_kwh_m2: num(7)?,
            monthly,
            task_duration_s: 0.0,
        });
    }
    Ok(out)
}

pub fn read_results_file(path: &Path) -> Result<Vec<SimResult>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_results(std::io::BufReader::new(file))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archetypes::ArchetypeTable;
    use crate::geometry::Polygon;
    use crate::ingest::BuildingRecord;
    use crate::model::{build_model, ModelOptions, Site, SpatialIndex};

    pub(crate) fn square_model(side: f64, height: f64) -> BuildingModel {
        let rec = BuildingRecord {
            parcel_id: "Z".into(),
            footprint: Polygon::rectangle(0.0, 0.0, side, side).unwrap(),
            plan_area_m2: side * side,
            height_m: Some(height),
            construction_year: Some(1950),
            neighborhood_id: "N".into(),
        };
        let recs = vec![rec];
        let index = SpatialIndex::new(&recs);
        build_model(
            &recs[0],
            &index,
            &ArchetypeTable::bundled(),
            Site {
                latitude_deg: 44.5,
                longitude_deg: 11.3,
            },
            &ModelOptions::default(),
        )
        .unwrap()
    }

    fn sunny_weather() -> WeatherSeries {
        let mut w = WeatherSeries::constant(
            44.5,
            11.3,
            1.0,
            WeatherHour {
                dry_bulb_c: 10.0,
                direct_normal_wm2: 0.0,
                diffuse_horizontal_wm2: 0.0,
            },
        );
        for (i, h) in w.hours.iter_mut().enumerate() {
            h.direct_normal_wm2 = 600.0 * ((i % 24) as f64 / 24.0 * std::f64::consts::PI).sin();
            h.diffuse_horizontal_wm2 = 80.0;
        }
        w
    }

    #[test]
    fn fast_solar_series_matches_reference() {
        let mut model = square_model(12.0, 9.0);
        model.horizon.obstruction_deg[18] = 35.0;
        model.horizon.obstruction_deg[9] = 10.0;
        model.horizon = crate::model::HorizonProfile::from_obstructions(model.horizon.obstruction_deg.clone());
        let weather = sunny_weather();
        let climate = Climate::new(&weather);
        let series = climate.solar_series(&model);
        for h in (0..HOURS_PER_YEAR).step_by(7) {
            let reference = solar_gains(&model, &climate.sun[h], climate.dni[h], climate.dhi[h]);
            assert!((series[h] - reference).abs() <= 1e-9 * reference.max(1.0), "hour {h}");
        }
    }

    #[test]
    fn zone_params_from_model() {
        let model = square_model(10.0, 6.0);
        let z = ZoneThermalParams::from_model(&model, &EngineParams::default());
        let env = &model.envelope;
        let win = 100.0 / 8.0;
        let expected_air =
            env.u_wall * (240.0 - win) + env.u_window * win + env.u_roof * 100.0 + 0.34 * env.infiltration_ach * 600.0;
        assert!((z.ua_air_w_k - expected_air).abs() < 1e-9);
        assert!((z.ua_ground_w_k - env.u_floor * 100.0).abs() < 1e-12);
        assert_eq!(z.floor_area_m2, 200.0);
        assert!((z.capacitance_j_k - env.thermal_capacitance_per_floor_area * 200.0).abs() < 1e-6);
    }

    #[test]
    fn results_csv_round_trip() {
        let model = square_model(10.0, 6.0);
        let climate = Climate::new(&sunny_weather());
        let r = simulate_dynamic(&model, &climate, &EngineParams::default()).unwrap();
        let mut buf = Vec::new();
        write_results(&mut buf, std::slice::from_ref(&r)).unwrap();
        let back = read_results(buf.as_slice()).unwrap();
        assert_eq!(back, vec![r]);
    }
}
