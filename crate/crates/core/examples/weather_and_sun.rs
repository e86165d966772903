//! Synthetic weather statistics and the sun's path on the solstices.

use ubem::engine::weather::month_ranges;
use ubem::engine::{solar_position, SiteClock};
use ubem::synthcity::{synthetic_weather, SynthConfig};

fn main() {
    let cfg = SynthConfig::default();
    let weather = synthetic_weather(&cfg);
    let means = weather.monthly_mean_dry_bulb();
    for (m, range) in month_ranges().into_iter().enumerate() {
        let dni: f64 = weather.hours[range].iter().map(|h| h.direct_normal_wm2).sum::<f64>() / 1000.0;
        println!("month {:>2}: mean {:>5.1} C, beam {:>6.1} kWh/m2", m + 1, means[m], dni);
    }
    let clock = SiteClock {
        latitude_deg: weather.latitude_deg,
        longitude_deg: weather.longitude_deg,
        tz_hours: weather.tz_hours,
    };
    for (name, day) in [("june", 171usize), ("december", 354)] {
        let noon = (0..24)
            .map(|h| solar_position(day * 24 + h, &clock))
            .max_by(|a, b| a.altitude_deg.total_cmp(&b.altitude_deg))
            .expect("24 hours");
        println!(
            "{name} solstice peak altitude {:.1} deg at azimuth {:.1}",
            noon.altitude_deg, noon.azimuth_deg
        );
    }
}
