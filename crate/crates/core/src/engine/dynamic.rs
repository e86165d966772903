//! Hourly single-capacitance zone with ideal heating and cooling.
//!
//! Within an hour the forcing is constant, so the zone temperature follows
//! `T(t) = T_eq + (T_0 - T_eq) * exp(-t / tau)` exactly. The ideal plant
//! adds the constant power that lands the end-of-hour temperature on the
//! violated setpoint: `P = UA * (T_set - T_ff) / (1 - exp(-1 h / tau))`.

use super::{Climate, EngineParams, MonthlyEnergy, SimResult, ZoneThermalParams};
use crate::error::{Error, Result};
use crate::model::BuildingModel;

/// Hourly inputs to [`simulate_zone`]. All slices share the same length.
#[derive(Debug, Clone, Copy)]
pub struct ZoneForcing<'a> {
    pub t_out_c: &'a [f64],
    /// Month (0-11) of each hour.
    pub month: &'a [u8],
    /// Ground temperature per month.
    pub t_ground_c: [f64; 12],
    /// Free gains other than internal ones (solar), W.
    pub gains_w: &'a [f64],
}

/// Optional hour-by-hour record of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DynamicTrace {
    pub t_in_c: Vec<f64>,
    pub heating_w: Vec<f64>,
    pub cooling_w: Vec<f64>,
}

/// Integrates the zone over the forcing after replaying its first
/// `warmup_hours` hours; returns monthly heating and cooling in kWh.
pub fn simulate_zone(
    zone: &ZoneThermalParams,
    forcing: ZoneForcing<'_>,
    warmup_hours: usize,
    mut trace: Option<&mut DynamicTrace>,
) -> Result<[MonthlyEnergy; 12]> {
    zone.validate()?;
    let n = forcing.t_out_c.len();
    let ua = zone.ua_total();
    let decay = (-1.0 / zone.tau_h()).exp();
    let plant = ua / (1.0 - decay);
    let internal = zone.internal_gains_w();
    let mut t_in = zone.t_set_heat_c;
    let mut monthly = [MonthlyEnergy::default(); 12];
    if let Some(tr) = trace.as_deref_mut() {
        *tr = DynamicTrace {
            t_in_c: Vec::with_capacity(n),
            heating_w: Vec::with_capacity(n),
            cooling_w: Vec::with_capacity(n),
        };
    }
    let hours = (0..warmup_hours.min(n)).chain(0..n);
    for (step, h) in hours.enumerate() {
        let recording = step >= warmup_hours.min(n);
        let month = usize::from(forcing.month[h]);
        let t_eq = (zone.ua_air_w_k * forcing.t_out_c[h]
            + zone.ua_ground_w_k * forcing.t_ground_c[month]
            + forcing.gains_w[h]
            + internal)
            / ua;
        let t_ff = t_eq + (t_in - t_eq) * decay;
        let (heat, cool) = if t_ff < zone.t_set_heat_c {
            t_in = zone.t_set_heat_c;
            (plant * (zone.t_set_heat_c - t_ff), 0.0)
        } else if t_ff > zone.t_set_cool_c {
            t_in = zone.t_set_cool_c;
            (0.0, plant * (t_ff - zone.t_set_cool_c))
        } else {
            t_in = t_ff;
            (0.0, 0.0)
        };
        if !(t_ff.is_finite() && heat.is_finite() && cool.is_finite()) {
            return Err(Error::Numeric { hour: h });
        }
        if recording {
            monthly[month].heating_kwh += heat / 1000.0;
            monthly[month].cooling_kwh += cool / 1000.0;
            if let Some(tr) = trace.as_deref_mut() {
                tr.t_in_c.push(t_in);
                tr.heating_w.push(heat);
                tr.cooling_w.push(cool);
            }
        }
    }
    Ok(monthly)
}

/// Annual hourly simulation of one building.
pub fn simulate_dynamic(model: &BuildingModel, climate: &Climate, params: &EngineParams) -> Result<SimResult> {
    let zone = ZoneThermalParams::from_model(model, params);
    let solar = climate.solar_series(model);
    let forcing = ZoneForcing {
        t_out_c: &climate.dry_bulb_c,
        month: &climate.month,
        t_ground_c: climate.monthly_mean_c,
        gains_w: &solar,
    };
    let monthly = simulate_zone(&zone, forcing, params.warmup_days * 24, None)?;
    Ok(SimResult::from_monthly(model, zone.floor_area_m2, monthly))
}
