//! Reader and writer for the subset of the EPW weather format the engines use.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const HOURS_PER_YEAR: usize = 8760;
pub const DAYS_PER_MONTH: [usize; 12] = [31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31];

const DRY_BULB_FIELD: usize = 6;
const DNI_FIELD: usize = 14;
const DHI_FIELD: usize = 15;
const DRY_BULB_MISSING: f64 = 99.9;
const RADIATION_MISSING: f64 = 9999.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeatherHour {
    pub dry_bulb_c: f64,
    pub direct_normal_wm2: f64,
    pub diffuse_horizontal_wm2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeatherSeries {
    pub city: String,
    pub latitude_deg: f64,
    pub longitude_deg: f64,
    pub tz_hours: f64,
    pub elevation_m: f64,
    pub hours: Vec<WeatherHour>,
}

/// Month (0-based) of an hour of a non-leap year.
pub fn month_of_hour(hour: usize) -> usize {
    let mut day = hour / 24;
    for (m, d) in DAYS_PER_MONTH.iter().enumerate() {
        if day < *d {
            return m;
        }
        day -= d;
    }
    11
}

/// Hour index ranges of each month.
pub fn month_ranges() -> [std::ops::Range<usize>; 12] {
    let mut start = 0;
    DAYS_PER_MONTH.map(|d| {
        let r = start..start + d * 24;
        start = r.end;
        r
    })
}

impl WeatherSeries {
    pub fn validate(&self) -> Result<()> {
        if self.hours.len() != HOURS_PER_YEAR {
            return Err(Error::Weather(format!(
                "expected {HOURS_PER_YEAR} hourly records, found {}",
                self.hours.len()
            )));
        }
        for (i, h) in self.hours.iter().enumerate() {
            if !(-60.0..=60.0).contains(&h.dry_bulb_c) {
                return Err(Error::Weather(format!(
                    "hour {i}: dry bulb {} out of range",
                    h.dry_bulb_c
                )));
            }
            if !(h.direct_normal_wm2 >= 0.0 && h.diffuse_horizontal_wm2 >= 0.0) {
                return Err(Error::Weather(format!("hour {i}: negative radiation")));
            }
        }
        Ok(())
    }

    pub fn monthly_mean_dry_bulb(&self) -> [f64; 12] {
        month_ranges().map(|r| {
            let n = r.len() as f64;
            self.hours[r].iter().map(|h| h.dry_bulb_c).sum::<f64>() / n
        })
    }

    /// Constant forcing, used for analytic checks.
    pub fn constant(latitude_deg: f64, longitude_deg: f64, tz_hours: f64, hour: WeatherHour) -> Self {
        WeatherSeries {
            city: "constant".into(),
            latitude_deg,
            longitude_deg,
            tz_hours,
            elevation_m: 0.0,
            hours: vec![hour; HOURS_PER_YEAR],
        }
    }
}

fn field(line_no: usize, fields: &[&str], idx: usize) -> Result<f64> {
    fields
        .get(idx)
        .and_then(|s| s.trim().parse::<f64>().ok())
        .ok_or_else(|| Error::Weather(format!("line {line_no}: bad or missing field {idx}")))
}

pub fn parse_epw(text: &str) -> Result<WeatherSeries> {
    let mut lines = text.lines();
    let location = lines.next().ok_or_else(|| Error::Weather("empty file".into()))?;
    let loc: Vec<&str> = location.split(',').collect();
    if loc.first().map(|s| s.trim()) != Some("LOCATION") || loc.len() < 10 {
        return Err(Error::Weather("first line is not a LOCATION record".into()));
    }
    let loc_num = |i: usize| {
        loc[i]
            .trim()
            .parse::<f64>()
            .map_err(|_| Error::Weather(format!("unparsable LOCATION field {}", i + 1)))
    };
    let (latitude_deg, longitude_deg, tz_hours, elevation_m) = (loc_num(6)?, loc_num(7)?, loc_num(8)?, loc_num(9)?);
    for i in 0..7 {
        lines
            .next()
            .ok_or_else(|| Error::Weather(format!("missing header line {}", i + 2)))?;
    }
    let mut hours = Vec::with_capacity(HOURS_PER_YEAR);
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let line_no = i + 9;
        let fields: Vec<&str> = line.split(',').collect();
        let prev = hours.last().copied();
        let fill = |v: f64, missing: f64, pick: fn(&WeatherHour) -> f64| {
            if v >= missing {
                prev.as_ref().map_or(f64::NAN, pick)
            } else {
                v
            }
        };
        hours.push(WeatherHour {
            dry_bulb_c: fill(field(line_no, &fields, DRY_BULB_FIELD)?, DRY_BULB_MISSING, |h| {
                h.dry_bulb_c
            }),
            direct_normal_wm2: fill(field(line_no, &fields, DNI_FIELD)?, RADIATION_MISSING, |h| {
                h.direct_normal_wm2
            }),
            diffuse_horizontal_wm2: fill(field(line_no, &fields, DHI_FIELD)?, RADIATION_MISSING, |h| {
                h.diffuse_horizontal_wm2
            }),
        });
    }
    if hours.len() != HOURS_PER_YEAR {
        return Err(Error::Weather(format!(
            "expected {HOURS_PER_YEAR} data rows, found {}",
            hours.len()
        )));
    }
    // Leading gaps have no previous hour; take the first valid value after them.
    for pick in [
        (|h: &mut WeatherHour| &mut h.dry_bulb_c) as fn(&mut WeatherHour) -> &mut f64,
        |h| &mut h.direct_normal_wm2,
        |h| &mut h.diffuse_horizontal_wm2,
    ] {
        if let Some(first) = hours.iter_mut().map(|h| *pick(h)).find(|v| !v.is_nan()) {
            for h in hours.iter_mut() {
                let v = pick(h);
                if v.is_nan() {
                    *v = first;
                } else {
                    break;
                }
            }
        }
    }
    let series = WeatherSeries {
        city: loc.get(1).map(|s| s.trim().to_string()).unwrap_or_default(),
        latitude_deg,
        longitude_deg,
        tz_hours,
        elevation_m,
        hours,
    };
    series.validate()?;
    Ok(series)
}

pub fn load_epw(path: &Path) -> Result<WeatherSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_epw(&text)
}

/// Writes a complete EPW file; fields the engines ignore get neutral values.
pub fn epw_to_string(w: &WeatherSeries) -> String {
    let mut out = String::with_capacity(HOURS_PER_YEAR * 120);
    let _ = writeln!(
        out,
        "LOCATION,{},-,-,synthetic,000000,{},{},{},{}",
        w.city, w.latitude_deg, w.longitude_deg, w.tz_hours, w.elevation_m
    );
    out.push_str("DESIGN CONDITIONS,0\n");
    out.push_str("TYPICAL/EXTREME PERIODS,0\n");
    out.push_str("GROUND TEMPERATURES,0\n");
    out.push_str("HOLIDAYS/DAYLIGHT SAVINGS,No,0,0,0\n");
    out.push_str("COMMENTS 1,synthetic weather\n");
    out.push_str("COMMENTS 2,\n");
    out.push_str("DATA PERIODS,1,1,Data,Sunday, 1/ 1,12/31\n");
    let mut hour = 0;
    for (m, days) in DAYS_PER_MONTH.iter().enumerate() {
        for d in 0..*days {
            for h in 0..24 {
                let r = &w.hours[hour];
                let ghi = r.diffuse_horizontal_wm2 + r.direct_normal_wm2 * 0.5;
                let _ = writeln!(
                    out,
                    "2023,{},{},{},60,?9?9?9?9E0?9?9?9?9?9?9?9?9?9?9?9?9?9?9?9*9*9?9*9,{},{},70,101325,0,0,300,{},{},{},999999,999999,999999,999999,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0,0",
                    m + 1,
                    d + 1,
                    h + 1,
                    r.dry_bulb_c,
                    r.dry_bulb_c - 5.0,
                    ghi,
                    r.direct_normal_wm2,
                    r.diffuse_horizontal_wm2
                );
                hour += 1;
            }
        }
    }
    out
}

pub fn write_epw(path: &Path, w: &WeatherSeries) -> Result<()> {
    std::fs::write(path, epw_to_string(w)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixture(mut row: impl FnMut(usize) -> (f64, f64, f64)) -> String {
        let mut w = WeatherSeries::constant(
            44.5,
            11.3,
            1.0,
            WeatherHour {
                dry_bulb_c: 0.0,
                direct_normal_wm2: 0.0,
                diffuse_horizontal_wm2: 0.0,
            },
        );
        w.city = "Bologna".into();
        for (i, h) in w.hours.iter_mut().enumerate() {
            let (t, dni, dhi) = row(i);
            *h = WeatherHour {
                dry_bulb_c: t,
                direct_normal_wm2: dni,
                diffuse_horizontal_wm2: dhi,
            };
        }
        epw_to_string(&w)
    }

    #[test]
    fn constant_fixture_parses() {
        let w = parse_epw(&fixture(|_| (10.0, 0.0, 0.0))).unwrap();
        assert_eq!(w.hours.len(), HOURS_PER_YEAR);
        assert!(w.hours.iter().all(|h| h.dry_bulb_c == 10.0));
    }

    #[test]
    fn missing_dni_takes_previous_hour() {
        let w = parse_epw(&fixture(|i| (12.0, if i == 100 { 9999.0 } else { i as f64 }, 50.0))).unwrap();
        assert_eq!(w.hours[100].direct_normal_wm2, w.hours[99].direct_normal_wm2);
        assert_eq!(w.hours[100].direct_normal_wm2, 99.0);
        let w = parse_epw(&fixture(|i| (if i == 0 { 99.9 } else { 7.0 }, 0.0, 0.0))).unwrap();
        assert_eq!(w.hours[0].dry_bulb_c, 7.0);
    }

    #[test]
    fn header_site_is_parsed() {
        let text = fixture(|_| (5.0, 0.0, 0.0)).replacen(
            "LOCATION,Bologna,-,-,synthetic,000000,44.5,11.3,1,0",
            "LOCATION,BOLOGNA,ER,ITA,IGDG,161400,44.50,11.30,1.0,49.0",
            1,
        );
        let w = parse_epw(&text).unwrap();
        assert_eq!(
            (w.latitude_deg, w.longitude_deg, w.tz_hours, w.elevation_m),
            (44.5, 11.3, 1.0, 49.0)
        );
        assert_eq!(w.city, "BOLOGNA");
    }

    #[test]
    fn wrong_row_count_and_bad_location() {
        let text = fixture(|_| (5.0, 0.0, 0.0));
        let truncated: String = text.lines().take(100).map(|l| format!("{l}\n")).collect();
        assert!(matches!(parse_epw(&truncated), Err(Error::Weather(_))));
        let bad = text.replacen("44.5,11.3", "north,11.3", 1);
        assert!(matches!(parse_epw(&bad), Err(Error::Weather(_))));
    }

    #[test]
    fn month_bookkeeping() {
        assert_eq!(month_of_hour(0), 0);
        assert_eq!(month_of_hour(31 * 24), 1);
        assert_eq!(month_of_hour(HOURS_PER_YEAR - 1), 11);
        assert_eq!(month_ranges()[11].end, HOURS_PER_YEAR);
    }
}
