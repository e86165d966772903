//! Monthly quasi-steady heat balance with a gain utilization factor.

use serde::{Deserialize, Serialize};

use super::weather::month_ranges;
use super::{Climate, EngineParams, MonthlyEnergy, SimResult, ZoneThermalParams};
use crate::error::Result;
use crate::model::BuildingModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonthlyHeatBalance {
    pub q_loss_kwh: f64,
    pub q_gain_kwh: f64,
    pub gamma: f64,
    pub a: f64,
    pub eta: f64,
    pub q_h_kwh: f64,
}

/// Utilization factor of gains for gain/loss ratio `gamma` and shape `a`.
///
/// Always in (0, 1] for `gamma >= 0`, `a > 0`.
pub fn utilization_factor(gamma: f64, a: f64) -> f64 {
    if gamma <= 0.0 {
        1.0
    } else if (gamma - 1.0).abs() < 1e-9 {
        a / (a + 1.0)
    } else if gamma < 1.0 {
        (1.0 - gamma.powf(a)) / (1.0 - gamma.powf(a + 1.0))
    } else {
        // Same expression divided through by gamma^(a+1); avoids overflow.
        let inv = gamma.recip();
        (inv - inv.powf(a + 1.0)) / (1.0 - inv.powf(a + 1.0))
    }
}

/// One month: `Q = max(0, Q_loss - eta * Q_gain)`; a month without losses needs nothing.
pub fn monthly_balance(q_loss_kwh: f64, q_gain_kwh: f64, a: f64) -> MonthlyHeatBalance {
    if q_loss_kwh <= 0.0 {
        return MonthlyHeatBalance {
            q_loss_kwh: 0.0,
            q_gain_kwh,
            gamma: 0.0,
            a,
            eta: 1.0,
            q_h_kwh: 0.0,
        };
    }
    let gamma = q_gain_kwh / q_loss_kwh;
    let eta = utilization_factor(gamma, a);
    MonthlyHeatBalance {
        q_loss_kwh,
        q_gain_kwh,
        gamma,
        a,
        eta,
        q_h_kwh: (q_loss_kwh - eta * q_gain_kwh).max(0.0),
    }
}

/// Heating and cooling balances per month. Cooling mirrors heating: the
/// heat to remove plays the role of the loss and the heat sinks that of the gain.
pub fn monthly_balances(
    zone: &ZoneThermalParams,
    t_out_c: &[f64],
    solar_w: &[f64],
    params: &EngineParams,
) -> [(MonthlyHeatBalance, MonthlyHeatBalance); 12] {
    let ua = zone.ua_total();
    let a = params.a0 + zone.tau_h() / params.tau0_h;
    let internal = zone.internal_gains_w();
    month_ranges().map(|r| {
        let hours = r.len() as f64;
        let heat_dh: f64 = t_out_c[r.clone()]
            .iter()
            .map(|t| (zone.t_set_heat_c - t).max(0.0))
            .sum();
        let cool_sink_dh: f64 = t_out_c[r.clone()]
            .iter()
            .map(|t| (zone.t_set_cool_c - t).max(0.0))
            .sum();
        let cool_source_dh: f64 = t_out_c[r.clone()]
            .iter()
            .map(|t| (t - zone.t_set_cool_c).max(0.0))
            .sum();
        let gains_kwh = (solar_w[r].iter().sum::<f64>() + internal * hours) / 1000.0;
        let heating = monthly_balance(ua * heat_dh / 1000.0, gains_kwh, a);
        let cooling = monthly_balance(gains_kwh + ua * cool_source_dh / 1000.0, ua * cool_sink_dh / 1000.0, a);
        (heating, cooling)
    })
}

/// Monthly-method counterpart of the hourly engine.
pub fn simulate_quasi_steady(model: &BuildingModel, climate: &Climate, params: &EngineParams) -> Result<SimResult> {
    let zone = ZoneThermalParams::from_model(model, params);
    zone.validate()?;
    let solar = climate.solar_series(model);
    let monthly = monthly_balances(&zone, &climate.dry_bulb_c, &solar, params).map(|(h, c)| MonthlyEnergy {
        heating_kwh: h.q_h_kwh,
        cooling_kwh: c.q_h_kwh,
    });
    Ok(SimResult::from_monthly(model, zone.floor_area_m2, monthly))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn no_gains_uses_every_loss() {
        assert_eq!(utilization_factor(0.0, 3.0), 1.0);
        let b = monthly_balance(500.0, 0.0, 3.0);
        assert_eq!((b.eta, b.q_h_kwh), (1.0, 500.0));
    }

    #[test]
    fn unit_ratio_limit() {
        assert!((utilization_factor(1.0, 2.0) - 2.0 / 3.0).abs() < 1e-15);
        // Continuous across the special case.
        assert!((utilization_factor(1.0 + 1e-6, 2.0) - 2.0 / 3.0).abs() < 1e-6);
        assert!((utilization_factor(1.0 - 1e-6, 2.0) - 2.0 / 3.0).abs() < 1e-6);
    }

    #[test]
    fn month_without_degree_hours_needs_nothing() {
        let b = monthly_balance(0.0, 250.0, 2.0);
        assert_eq!(b.q_h_kwh, 0.0);
        assert!(b.gamma.is_finite());
    }

    #[test]
    fn eta_in_unit_interval_over_grid() {
        for gi in 0..=400 {
            let gamma = gi as f64 * 0.05;
            for ai in 1..=60 {
                let a = ai as f64 * 0.25;
                let eta = utilization_factor(gamma, a);
                assert!(eta > 0.0 && eta <= 1.0, "gamma {gamma} a {a} eta {eta}");
            }
        }
        assert!(utilization_factor(1e6, 10.0) > 0.0);
    }

    proptest! {
        #[test]
        fn heating_need_is_never_negative(loss in 0.0f64..1e5, gain in 0.0f64..1e5, a in 0.01f64..50.0) {
            let b = monthly_balance(loss, gain, a);
            prop_assert!(b.q_h_kwh >= 0.0);
            prop_assert!(b.eta > 0.0 && b.eta <= 1.0);
            prop_assert!(b.q_h_kwh <= b.q_loss_kwh);
        }
    }
}
