//! Sun position and transmitted solar gains through façade windows.

use serde::{Deserialize, Serialize};

use crate::model::BuildingModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolarPosition {
    pub altitude_deg: f64,
    /// Degrees clockwise from north.
    pub azimuth_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SiteClock {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    /// Standard-time offset from UTC in hours (east positive).
    pub tz_hours: f64,
}

fn day_angle(day_of_year: f64) -> f64 {
    2.0 * std::f64::consts::PI * (day_of_year - 1.0) / 365.0
}

/// Declination in radians (Fourier series in the day angle).
pub fn declination(day_of_year: f64) -> f64 {
    let g = day_angle(day_of_year);
    0.006918 - 0.399912 * g.cos() + 0.070257 * g.sin() - 0.006758 * (2.0 * g).cos() + 0.000907 * (2.0 * g).sin()
        - 0.002697 * (3.0 * g).cos()
        + 0.00148 * (3.0 * g).sin()
}

/// Equation of time in minutes.
pub fn equation_of_time(day_of_year: f64) -> f64 {
    let g = day_angle(day_of_year);
    229.18
        * (0.000075 + 0.001868 * g.cos() - 0.032077 * g.sin() - 0.014615 * (2.0 * g).cos() - 0.040849 * (2.0 * g).sin())
}

/// Sun position for a day of year (1-based) and apparent solar time in hours.
pub fn solar_position_at(day_of_year: f64, solar_time_h: f64, latitude_deg: f64) -> SolarPosition {
    let dec = declination(day_of_year);
    let lat = latitude_deg.to_radians();
    let hour_angle = (15.0 * (solar_time_h - 12.0)).to_radians();
    let sin_alt = lat.sin() * dec.sin() + lat.cos() * dec.cos() * hour_angle.cos();
    let altitude = sin_alt.clamp(-1.0, 1.0).asin();
    let az = (-dec.cos() * hour_angle.sin()).atan2(dec.sin() * lat.cos() - dec.cos() * hour_angle.cos() * lat.sin());
    SolarPosition {
        altitude_deg: altitude.to_degrees(),
        azimuth_deg: az.to_degrees().rem_euclid(360.0),
    }
}

/// Sun position at the middle of hour `hour_index` (0 = Jan 1, 00:00-01:00 local standard time).
pub fn solar_position(hour_index: usize, site: &SiteClock) -> SolarPosition {
    let day = (hour_index / 24) as f64 + 1.0;
    let clock = (hour_index % 24) as f64 + 0.5;
    let solar_time = clock + equation_of_time(day) / 60.0 + (site.longitude_deg - 15.0 * site.tz_hours) / 15.0;
    solar_position_at(day, solar_time, site.latitude_deg)
}

/// Transmitted solar gain through all windows of `model`, in watts.
///
/// Beam radiation is dropped when the sun is below the horizon obstruction
/// of its azimuth sector; diffuse radiation on a vertical surface sees half
/// the sky dome scaled by the sky view factor.
pub fn solar_gains(model: &BuildingModel, sun: &SolarPosition, dni: f64, dhi: f64) -> f64 {
    let visible = sun.altitude_deg > 0.0 && sun.altitude_deg >= model.horizon.obstruction_at(sun.azimuth_deg);
    let cos_alt = sun.altitude_deg.to_radians().cos();
    let diffuse = dhi * 0.5 * model.horizon.sky_view;
    model
        .facades
        .iter()
        .map(|f| {
            let direct = if visible {
                let cos_inc = cos_alt * (sun.azimuth_deg - f.azimuth_deg).to_radians().cos();
                dni * cos_inc.max(0.0)
            } else {
                0.0
            };
            f.window_area_m2 * model.envelope.shgc * (direct + diffuse)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::archetypes::{ArchetypePeriod, ArchetypeTable};
    use crate::model::{Facade, HorizonProfile};

    /// Equinox day used by the checks below (20 March).
    const EQUINOX: f64 = 79.0;

    #[test]
    fn equinox_noon_altitudes() {
        // Reference altitudes at true solar noon: 90 - latitude.
        let bologna = solar_position_at(EQUINOX, 12.0, 44.5);
        assert!((bologna.altitude_deg - 45.5).abs() <= 1.5, "{bologna:?}");
        assert!((bologna.azimuth_deg - 180.0).abs() < 1e-6);
        let equator = solar_position_at(EQUINOX, 12.0, 0.0);
        assert!((equator.altitude_deg - 90.0).abs() <= 1.5, "{equator:?}");
    }

    #[test]
    fn midnight_is_dark_and_mornings_face_east() {
        let site = SiteClock {
            latitude_deg: 44.5,
            longitude_deg: 11.3,
            tz_hours: 1.0,
        };
        for day in [0usize, 80, 172, 300] {
            assert!(solar_position(day * 24, &site).altitude_deg < 0.0);
            let morning = solar_position(day * 24 + 8, &site);
            assert!(morning.azimuth_deg > 0.0 && morning.azimuth_deg < 180.0);
        }
        let summer_noon = solar_position(172 * 24 + 12, &site);
        assert!(summer_noon.altitude_deg > 65.0);
    }

    fn one_window_model(azimuth: f64, window: f64, shgc: f64, obstruction: f64) -> BuildingModel {
        let mut envelope = ArchetypeTable::bundled().get(ArchetypePeriod::Pre1900).baseline;
        envelope.shgc = shgc;
        let mut obs = vec![0.0; 36];
        obs[(azimuth / 10.0) as usize] = obstruction;
        BuildingModel {
            parcel_id: "S".into(),
            period: ArchetypePeriod::Pre1900,
            height_m: 6.0,
            storeys: 2,
            floor_area_m2: 80.0,
            conditioned_volume_m3: 480.0,
            roof_area_m2: 80.0,
            facades: vec![Facade {
                azimuth_deg: azimuth,
                wall_area_m2: 60.0,
                window_area_m2: window,
                mid_height_m: 3.0,
            }],
            envelope,
            horizon: HorizonProfile::from_obstructions(obs),
            neighbors: vec![],
            site_latitude_deg: 44.5,
            site_longitude_deg: 11.3,
        }
    }

    #[test]
    fn night_without_diffuse_gives_nothing() {
        let m = one_window_model(180.0, 10.0, 0.6, 0.0);
        let sun = SolarPosition {
            altitude_deg: -10.0,
            azimuth_deg: 180.0,
        };
        assert_eq!(solar_gains(&m, &sun, 500.0, 0.0), 0.0);
    }

    #[test]
    fn grazing_sun_normal_to_window() {
        let m = one_window_model(180.0, 10.0, 0.6, 0.0);
        let sun = SolarPosition {
            altitude_deg: 1e-9,
            azimuth_deg: 180.0,
        };
        assert!((solar_gains(&m, &sun, 800.0, 0.0) - 4800.0).abs() < 1e-6);
    }

    #[test]
    fn obstructed_sector_blocks_beam() {
        let m = one_window_model(185.0, 10.0, 0.6, 45.0);
        let sun = SolarPosition {
            altitude_deg: 30.0,
            azimuth_deg: 185.0,
        };
        assert_eq!(solar_gains(&m, &sun, 800.0, 0.0), 0.0);
        let diffuse_only = solar_gains(&m, &sun, 800.0, 100.0);
        assert!((diffuse_only - 10.0 * 0.6 * 100.0 * 0.5 * m.horizon.sky_view).abs() < 1e-9);
    }
}
