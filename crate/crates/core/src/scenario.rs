//! Retrofit scenarios over construction periods: composition of paired
//! baseline/retrofit results, Pareto front and derived tables.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::archetypes::{ArchetypePeriod, ArchetypeTable, Variant};
use crate::engine::SimResult;
use crate::error::{Error, Result};
use crate::ingest::BuildingRecord;
use crate::model::BuildingModel;

pub const SCENARIO_COUNT: usize = 256;

/// One bit per period, `PRE1900` in bit 0; a set bit retrofits every building of that period.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
pub struct ScenarioMask(pub u8);

impl ScenarioMask {
    pub const NONE: ScenarioMask = ScenarioMask(0);
    pub const ALL: ScenarioMask = ScenarioMask(u8::MAX);

    pub fn all_masks() -> impl Iterator<Item = ScenarioMask> {
        (0..=u8::MAX).map(ScenarioMask)
    }

    pub fn from_periods(periods: &[ArchetypePeriod]) -> Self {
        ScenarioMask(periods.iter().fold(0, |m, p| m | (1 << p.index())))
    }

    pub fn contains(self, period: ArchetypePeriod) -> bool {
        self.0 & (1 << period.index()) != 0
    }

    pub fn flags(self) -> [bool; 8] {
        ArchetypePeriod::ALL.map(|p| self.contains(p))
    }

    pub fn periods(self) -> impl Iterator<Item = ArchetypePeriod> {
        ArchetypePeriod::ALL.into_iter().filter(move |p| self.contains(*p))
    }
}

impl fmt::Display for ScenarioMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:08b}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioOutcome {
    pub mask: ScenarioMask,
    pub buildings_retrofitted: usize,
    pub total_energy_kwh: f64,
    /// Unweighted mean of per-building total intensities.
    pub mean_intensity_kwh_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoFront {
    /// Count ascending, energy strictly descending.
    pub outcomes: Vec<ScenarioOutcome>,
}

/// Model with the envelope replaced by its period's standard retrofit.
pub fn apply_retrofit(model: &BuildingModel, table: &ArchetypeTable) -> BuildingModel {
    BuildingModel {
        envelope: *table.spec(model.period, Variant::StandardRetrofit),
        ..model.clone()
    }
}

/// Baseline and retrofit results of one building.
#[derive(Debug, Clone, Copy)]
pub struct PairedResult<'a> {
    pub baseline: &'a SimResult,
    pub retrofit: &'a SimResult,
}

/// Matches results by parcel id; every building must appear in both tables.
pub fn pair_results<'a>(baseline: &'a [SimResult], retrofit: &'a [SimResult]) -> Result<Vec<PairedResult<'a>>> {
    let retro: BTreeMap<&str, &SimResult> = retrofit.iter().map(|r| (r.parcel_id.as_str(), r)).collect();
    if retro.len() != baseline.len() {
        return Err(Error::Scenario(format!(
            "{} baseline results but {} retrofit results",
            baseline.len(),
            retro.len()
        )));
    }
    baseline
        .iter()
        .map(|b| {
            let r = retro
                .get(b.parcel_id.as_str())
                .ok_or_else(|| Error::Scenario(format!("no retrofit result for {}", b.parcel_id)))?;
            if r.period != b.period {
                return Err(Error::Scenario(format!("period mismatch for {}", b.parcel_id)));
            }
            Ok(PairedResult {
                baseline: b,
                retrofit: r,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default)]
struct PeriodSums {
    count: usize,
    baseline_kwh: f64,
    retrofit_kwh: f64,
    baseline_intensity: f64,
    retrofit_intensity: f64,
}

/// All 256 scenarios, composed from two simulations per building.
pub fn evaluate_scenarios(baseline: &[SimResult], retrofit: &[SimResult]) -> Result<Vec<ScenarioOutcome>> {
    let pairs = pair_results(baseline, retrofit)?;
    let mut sums = [PeriodSums::default(); 8];
    for p in &pairs {
        let s = &mut sums[p.baseline.period.index()];
        s.count += 1;
        s.baseline_kwh += p.baseline.total_kwh();
        s.retrofit_kwh += p.retrofit.total_kwh();
        s.baseline_intensity += p.baseline.total_intensity_kwh_m2;
        s.retrofit_intensity += p.retrofit.total_intensity_kwh_m2;
    }
    let n = pairs.len();
    Ok(ScenarioMask::all_masks()
        .map(|mask| {
            let (mut count, mut energy, mut intensity) = (0, 0.0, 0.0);
            for (period, s) in ArchetypePeriod::ALL.iter().zip(&sums) {
                if mask.contains(*period) {
                    count += s.count;
                    energy += s.retrofit_kwh;
                    intensity += s.retrofit_intensity;
                } else {
                    energy += s.baseline_kwh;
                    intensity += s.baseline_intensity;
                }
            }
            ScenarioOutcome {
                mask,
                buildings_retrofitted: count,
                total_energy_kwh: energy,
                mean_intensity_kwh_m2: if n == 0 { 0.0 } else { intensity / n as f64 },
            }
        })
        .collect())
}

/// `p` dominates `q` when no worse on both objectives and better on one.
pub fn dominates(p: &ScenarioOutcome, q: &ScenarioOutcome) -> bool {
    p.buildings_retrofitted <= q.buildings_retrofitted
        && p.total_energy_kwh <= q.total_energy_kwh
        && (p.buildings_retrofitted < q.buildings_retrofitted || p.total_energy_kwh < q.total_energy_kwh)
}

/// Non-dominated outcomes; among exact ties on both objectives the smallest mask is kept.
pub fn pareto_front(outcomes: &[ScenarioOutcome]) -> Result<ParetoFront> {
    if outcomes.is_empty() {
        return Err(Error::Scenario("no outcomes to rank".into()));
    }
    let mut sorted = outcomes.to_vec();
    sorted.sort_by(|a, b| {
        a.buildings_retrofitted
            .cmp(&b.buildings_retrofitted)
            .then(a.total_energy_kwh.total_cmp(&b.total_energy_kwh))
            .then(a.mask.cmp(&b.mask))
    });
    let mut front: Vec<ScenarioOutcome> = Vec::new();
    for o in sorted {
        if front
            .last()
            .is_none_or(|best| o.total_energy_kwh < best.total_energy_kwh)
        {
            front.push(o);
        }
    }
    Ok(ParetoFront { outcomes: front })
}

/// How many front scenarios retrofit each period.
pub fn archetype_front_frequency(front: &ParetoFront) -> BTreeMap<ArchetypePeriod, usize> {
    ArchetypePeriod::ALL
        .into_iter()
        .map(|p| (p, front.outcomes.iter().filter(|o| o.mask.contains(p)).count()))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SavingsWeighting {
    #[default]
    PerBuilding,
    FloorArea,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodSavings {
    pub mean_savings_pct: f64,
    pub buildings: usize,
    /// Buildings skipped for a zero baseline intensity.
    pub excluded: usize,
}

/// Mean percentage saving per neighborhood between baseline and full retrofit.
pub fn neighborhood_savings(
    baseline: &[SimResult],
    retrofit: &[SimResult],
    records: &[BuildingRecord],
    weighting: SavingsWeighting,
) -> Result<BTreeMap<String, NeighborhoodSavings>> {
    let pairs = pair_results(baseline, retrofit)?;
    let hood: BTreeMap<&str, &str> = records
        .iter()
        .map(|r| (r.parcel_id.as_str(), r.neighborhood_id.as_str()))
        .collect();
    let mut acc: BTreeMap<String, (f64, f64, usize, usize)> = BTreeMap::new();
    for p in pairs {
        let id = hood
            .get(p.baseline.parcel_id.as_str())
            .ok_or_else(|| Error::Scenario(format!("no record for {}", p.baseline.parcel_id)))?;
        let e = acc.entry(id.to_string()).or_default();
        let base = p.baseline.total_intensity_kwh_m2;
        if base <= 0.0 {
            log::warn!(
                "{}: zero baseline intensity, excluded from savings",
                p.baseline.parcel_id
            );
            e.3 += 1;
            continue;
        }
        let w = match weighting {
            SavingsWeighting::PerBuilding => 1.0,
            SavingsWeighting::FloorArea => p.baseline.floor_area_m2,
        };
        e.0 += w * (1.0 - p.retrofit.total_intensity_kwh_m2 / base) * 100.0;
        e.1 += w;
        e.2 += 1;
    }
    Ok(acc
        .into_iter()
        .map(|(id, (sum, weight, n, excluded))| {
            let mean = if weight > 0.0 { sum / weight } else { 0.0 };
            (
                id,
                NeighborhoodSavings {
                    mean_savings_pct: mean,
                    buildings: n,
                    excluded,
                },
            )
        })
        .collect())
}

/// Period-by-scenario incidence matrix of the front: `rows[period][j]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinaryMap {
    pub masks: Vec<ScenarioMask>,
    pub rows: [Vec<bool>; 8],
}

pub fn binary_map(front: &ParetoFront) -> BinaryMap {
    let masks: Vec<ScenarioMask> = front.outcomes.iter().map(|o| o.mask).collect();
    let rows = ArchetypePeriod::ALL.map(|p| masks.iter().map(|m| m.contains(p)).collect());
    BinaryMap { masks, rows }
}

fn flush<W: Write>(mut w: csv::Writer<W>, what: &str) -> Result<()> {
    w.flush().map_err(|e| Error::io(std::path::Path::new(what), e))
}

pub fn write_scenarios_csv<W: Write>(out: W, outcomes: &[ScenarioOutcome]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "mask",
        "mask_bits",
        "buildings_retrofitted",
        "total_kWh",
        "mean_intensity_kWhm2",
    ])?;
    for o in outcomes {
        w.write_record([
            o.mask.0.to_string(),
            o.mask.to_string(),
            o.buildings_retrofitted.to_string(),
            o.total_energy_kwh.to_string(),
            o.mean_intensity_kwh_m2.to_string(),
        ])?;
    }
    flush(w, "<scenarios>")
}

pub fn write_front_csv<W: Write>(out: W, front: &ParetoFront) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![
        "rank",
        "mask",
        "buildings_retrofitted",
        "total_kWh",
        "mean_intensity_kWhm2",
    ];
    header.extend(ArchetypePeriod::ALL.iter().map(|p| p.label()));
    w.write_record(&header)?;
    for (i, o) in front.outcomes.iter().enumerate() {
        let mut row = vec![
            i.to_string(),
            o.mask.0.to_string(),
            o.buildings_retrofitted.to_string(),
            o.total_energy_kwh.to_string(),
            o.mean_intensity_kwh_m2.to_string(),
        ];
        row.extend(o.mask.flags().iter().map(|f| u8::from(*f).to_string()));
        w.write_record(&row)?;
    }
    flush(w, "<front>")
}

pub fn write_binary_map_csv<W: Write>(out: W, map: &BinaryMap) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["period".to_string()];
    header.extend(map.masks.iter().map(|m| format!("mask_{}", m.0)));
    w.write_record(&header)?;
    for (period, row) in ArchetypePeriod::ALL.iter().zip(&map.rows) {
        let mut rec = vec![period.label().to_string()];
        rec.extend(row.iter().map(|b| u8::from(*b).to_string()));
        w.write_record(&rec)?;
    }
    flush(w, "<binary_map>")
}

pub fn write_neighborhood_savings_csv<W: Write>(out: W, savings: &BTreeMap<String, NeighborhoodSavings>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["neighborhood_id", "buildings", "excluded", "mean_savings_pct"])?;
    for (id, s) in savings {
        w.write_record([
            id.clone(),
            s.buildings.to_string(),
            s.excluded.to_string(),
            s.mean_savings_pct.to_string(),
        ])?;
    }
    flush(w, "<neighborhood_savings>")
}

/// Per-building baseline against full-retrofit intensities.
pub fn write_before_after_csv<W: Write>(out: W, baseline: &[SimResult], retrofit: &[SimResult]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "parcel_id",
        "period",
        "baseline_intensity_kWhm2",
        "retrofit_intensity_kWhm2",
        "baseline_heating_kWhm2",
        "retrofit_heating_kWhm2",
    ])?;
    for p in pair_results(baseline, retrofit)? {
        w.write_record([
            p.baseline.parcel_id.clone(),
            p.baseline.period.to_string(),
            p.baseline.total_intensity_kwh_m2.to_string(),
            p.retrofit.total_intensity_kwh_m2.to_string(),
            p.baseline.heating_intensity_kwh_m2.to_string(),
            p.retrofit.heating_intensity_kwh_m2.to_string(),
        ])?;
    }
    flush(w, "<before_after>")
}
