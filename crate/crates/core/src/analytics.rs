//! Stock-level assessment: intensity distributions, cumulative consumption,
//! emissions, shading-radius sensitivity, engine comparison and the report bundle.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::archetypes::ArchetypePeriod;
use crate::engine::{simulate_dynamic, simulate_quasi_steady, Climate, EngineParams, SimResult};
use crate::error::{Error, Result};
use crate::ingest::BuildingRecord;
use crate::model::BuildingModel;
use crate::scenario::{
    archetype_front_frequency, binary_map, evaluate_scenarios, neighborhood_savings, pareto_front,
    write_before_after_csv, write_binary_map_csv, write_front_csv, write_neighborhood_savings_csv, write_scenarios_csv,
    SavingsWeighting,
};

pub const HISTOGRAM_BIN_WIDTH: f64 = 10.0;
pub const HISTOGRAM_MAX: f64 = 400.0;
pub const HISTOGRAM_BINS: usize = 40;
/// Natural gas, tCO2 per TJ.
pub const DEFAULT_EMISSION_FACTOR_T_PER_TJ: f64 = 59.182;
pub const TJ_PER_KWH: f64 = 3.6e-6;
pub const CUMULATIVE_TARGET: f64 = 0.8;
/// Share of the stock, by total energy, reported as top consumers.
pub const TOP_CONSUMER_SHARE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntensityHistogram {
    /// `counts[k]` covers `[10k, 10k + 10)` kWh/m².
    pub counts: Vec<usize>,
    /// Intensities of 400 kWh/m² and above.
    pub overflow: usize,
    pub n: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub skewness: Option<f64>,
}

impl IntensityHistogram {
    pub fn from_values(values: &[f64]) -> Self {
        let mut counts = vec![0; HISTOGRAM_BINS];
        let mut overflow = 0;
        for v in values {
            let bin = (v.max(0.0) / HISTOGRAM_BIN_WIDTH).floor() as usize;
            match counts.get_mut(bin) {
                Some(c) => *c += 1,
                None => overflow += 1,
            }
        }
        let n = values.len();
        let (mean, median, skewness) = if n == 0 {
            (None, None, None)
        } else {
            let mean = values.iter().sum::<f64>() / n as f64;
            let mut sorted = values.to_vec();
            sorted.sort_by(f64::total_cmp);
            let median = if n % 2 == 1 {
                sorted[n / 2]
            } else {
                (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
            };
            let m2 = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
            let m3 = values.iter().map(|v| (v - mean).powi(3)).sum::<f64>() / n as f64;
            let skew = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
            (Some(mean), Some(median), Some(skew))
        };
        IntensityHistogram {
            counts,
            overflow,
            n,
            mean,
            median,
            skewness,
        }
    }
}

/// Total-intensity histogram per period; every period is present, possibly empty.
pub fn intensity_histograms(results: &[SimResult]) -> BTreeMap<ArchetypePeriod, IntensityHistogram> {
    ArchetypePeriod::ALL
        .into_iter()
        .map(|p| {
            let values: Vec<f64> = results
                .iter()
                .filter(|r| r.period == p)
                .map(|r| r.total_intensity_kwh_m2)
                .collect();
            (p, IntensityHistogram::from_values(&values))
        })
        .collect()
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn flush<W: Write>(mut w: csv::Writer<W>, what: &str) -> Result<()> {
    w.flush().map_err(|e| Error::io(Path::new(what), e))
}

pub fn write_histograms_csv<W: Write>(out: W, hist: &BTreeMap<ArchetypePeriod, IntensityHistogram>) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["period", "n", "mean", "median", "skewness"].map(String::from).to_vec();
    header.extend((0..HISTOGRAM_BINS).map(|k| format!("bin_{}_{}", k * 10, k * 10 + 10)));
    header.push("bin_400_plus".into());
    w.write_record(&header)?;
    for (p, h) in hist {
        let mut row = vec![
            p.to_string(),
            h.n.to_string(),
            opt(h.mean),
            opt(h.median),
            opt(h.skewness),
        ];
        row.extend(h.counts.iter().map(usize::to_string));
        row.push(h.overflow.to_string());
        w.write_record(&row)?;
    }
    flush(w, "<intensity_histograms>")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CumulativeCurve {
    /// Parcel ids in descending order of total energy.
    pub order: Vec<String>,
    /// Cumulative building fraction, starting at 0.
    pub x: Vec<f64>,
    /// Cumulative energy fraction, starting at 0.
    pub y: Vec<f64>,
}

impl CumulativeCurve {
    /// Smallest building fraction whose cumulative energy reaches `target`,
    /// interpolated linearly between curve points.
    pub fn x_at(&self, target: f64) -> f64 {
        let k = self.y.iter().position(|y| *y >= target).unwrap_or(self.y.len() - 1);
        if k == 0 || self.y[k] == target {
            return self.x[k];
        }
        let (x0, y0, x1, y1) = (self.x[k - 1], self.y[k - 1], self.x[k], self.y[k]);
        x0 + (target - y0) * ((x1 - x0) / (y1 - y0))
    }
}

pub fn cumulative_curve(results: &[SimResult]) -> Result<CumulativeCurve> {
    let mut sorted: Vec<(&str, f64)> = results.iter().map(|r| (r.parcel_id.as_str(), r.total_kwh())).collect();
    sorted.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(b.0)));
    let total: f64 = sorted.iter().map(|s| s.1).sum();
    if !(total > 0.0) {
        return Err(Error::Input("cumulative curve needs positive total energy".into()));
    }
    let n = sorted.len() as f64;
    let mut x = vec![0.0];
    let mut y = vec![0.0];
    let mut acc = 0.0;
    for (k, (_, e)) in sorted.iter().enumerate() {
        acc += e;
        x.push((k + 1) as f64 / n);
        y.push(acc / total);
    }
    Ok(CumulativeCurve {
        order: sorted.into_iter().map(|s| s.0.to_string()).collect(),
        x,
        y,
    })
}

pub fn write_cumulative_csv<W: Write>(out: W, curve: &CumulativeCurve) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["rank", "parcel_id", "building_fraction", "energy_fraction"])?;
    for (k, id) in curve.order.iter().enumerate() {
        w.write_record([
            (k + 1).to_string(),
            id.clone(),
            curve.x[k + 1].to_string(),
            curve.y[k + 1].to_string(),
        ])?;
    }
    flush(w, "<cumulative_curve>")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionEstimate {
    pub emission_factor_t_per_tj: f64,
    pub gas_energy_kwh: f64,
    pub co2_kg: f64,
    pub co2_intensity_kg_m2: f64,
    pub mean_heating_intensity_kwh_m2: f64,
}

pub fn co2_kg(gas_energy_kwh: f64, factor_t_per_tj: f64) -> f64 {
    gas_energy_kwh * TJ_PER_KWH * factor_t_per_tj * 1000.0
}

/// Emissions of heating demand, assumed entirely gas-supplied.
pub fn co2_estimate(results: &[SimResult], factor_t_per_tj: f64) -> Result<EmissionEstimate> {
    if !(factor_t_per_tj >= 0.0) {
        return Err(Error::Validation(format!(
            "emission factor {factor_t_per_tj} must be >= 0"
        )));
    }
    let gas: f64 = results.iter().map(|r| r.annual_heating_kwh).sum();
    let area: f64 = results.iter().map(|r| r.floor_area_m2).sum();
    let co2 = co2_kg(gas, factor_t_per_tj);
    Ok(EmissionEstimate {
        emission_factor_t_per_tj: factor_t_per_tj,
        gas_energy_kwh: gas,
        co2_kg: co2,
        co2_intensity_kg_m2: if area > 0.0 { co2 / area } else { 0.0 },
        mean_heating_intensity_kwh_m2: if area > 0.0 { gas / area } else { 0.0 },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SensitivityPoint {
    pub radius_m: f64,
    pub mean_heating_kwh_m2: f64,
    pub mean_cooling_kwh_m2: f64,
    pub mean_total_kwh_m2: f64,
    pub delta_heating_pct: f64,
    pub delta_cooling_pct: f64,
    pub delta_total_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    pub baseline_radius_m: f64,
    pub points: Vec<SensitivityPoint>,
    pub elbow_radius_m: Option<f64>,
}

/// Relative change of `e` against `e_min`, in percent. Zero against zero is no change.
pub fn relative_change_pct(e: f64, e_min: f64) -> f64 {
    if e == e_min {
        0.0
    } else {
        (e / e_min - 1.0) * 100.0
    }
}

fn stock_mean(results: &[SimResult], f: impl Fn(&SimResult) -> f64) -> f64 {
    if results.is_empty() {
        0.0
    } else {
        results.iter().map(f).sum::<f64>() / results.len() as f64
    }
}

/// Index of the interior point of maximum Menger curvature, after scaling
/// both axes to [0, 1]. `None` for fewer than three points or a straight line.
pub fn max_curvature_index(x: &[f64], y: &[f64]) -> Option<usize> {
    if x.len() < 3 {
        return None;
    }
    let scale = |v: &[f64]| {
        let (lo, hi) = v
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), a| (l.min(*a), h.max(*a)));
        let span = if hi > lo { hi - lo } else { 1.0 };
        v.iter().map(|a| (a - lo) / span).collect::<Vec<_>>()
    };
    let (xs, ys) = (scale(x), scale(y));
    let mut best: Option<(usize, f64)> = None;
    for i in 1..xs.len() - 1 {
        let (ax, ay) = (xs[i] - xs[i - 1], ys[i] - ys[i - 1]);
        let (bx, by) = (xs[i + 1] - xs[i], ys[i + 1] - ys[i]);
        let (cx, cy) = (xs[i + 1] - xs[i - 1], ys[i + 1] - ys[i - 1]);
        let denom = ax.hypot(ay) * bx.hypot(by) * cx.hypot(cy);
        let k = if denom > 0.0 {
            2.0 * (ax * by - ay * bx).abs() / denom
        } else {
            0.0
        };
        if k > 1e-12 && best.is_none_or(|(_, b)| k > b) {
            best = Some((i, k));
        }
    }
    best.map(|b| b.0)
}

/// Mean-intensity changes across shading radii relative to `baseline_radius_m`.
pub fn radius_sensitivity(runs: &[(f64, Vec<SimResult>)], baseline_radius_m: f64) -> Result<SensitivityReport> {
    let mut runs: Vec<&(f64, Vec<SimResult>)> = runs.iter().collect();
    runs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let base = runs
        .iter()
        .find(|r| r.0 == baseline_radius_m)
        .ok_or_else(|| Error::Input(format!("no run at the baseline radius {baseline_radius_m} m")))?;
    let e_min = (
        stock_mean(&base.1, |r| r.heating_intensity_kwh_m2),
        stock_mean(&base.1, |r| r.cooling_intensity_kwh_m2),
        stock_mean(&base.1, |r| r.total_intensity_kwh_m2),
    );
    let points: Vec<SensitivityPoint> = runs
        .iter()
        .map(|(radius, results)| {
            let h = stock_mean(results, |r| r.heating_intensity_kwh_m2);
            let c = stock_mean(results, |r| r.cooling_intensity_kwh_m2);
            let t = stock_mean(results, |r| r.total_intensity_kwh_m2);
            SensitivityPoint {
                radius_m: *radius,
                mean_heating_kwh_m2: h,
                mean_cooling_kwh_m2: c,
                mean_total_kwh_m2: t,
                delta_heating_pct: relative_change_pct(h, e_min.0),
                delta_cooling_pct: relative_change_pct(c, e_min.1),
                delta_total_pct: relative_change_pct(t, e_min.2),
            }
        })
        .collect();
    let xs: Vec<f64> = points.iter().map(|p| p.radius_m).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_total_kwh_m2).collect();
    Ok(SensitivityReport {
        baseline_radius_m,
        elbow_radius_m: max_curvature_index(&xs, &ys).map(|i| xs[i]),
        points,
    })
}

pub fn write_sensitivity_csv<W: Write>(out: W, report: &SensitivityReport) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "radius_m",
        "mean_heating_kWhm2",
        "mean_cooling_kWhm2",
        "mean_total_kWhm2",
        "delta_heating_pct",
        "delta_cooling_pct",
        "delta_total_pct",
        "elbow",
    ])?;
    for p in &report.points {
        w.write_record([
            p.radius_m.to_string(),
            p.mean_heating_kwh_m2.to_string(),
            p.mean_cooling_kwh_m2.to_string(),
            p.mean_total_kwh_m2.to_string(),
            p.delta_heating_pct.to_string(),
            p.delta_cooling_pct.to_string(),
            p.delta_total_pct.to_string(),
            u8::from(report.elbow_radius_m == Some(p.radius_m)).to_string(),
        ])?;
    }
    flush(w, "<sensitivity>")
}

/// Elbow radius recorded in a sensitivity table, if any row is flagged.
pub fn read_elbow_radius(path: &Path) -> Result<Option<f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    for rec in rdr.records() {
        let rec = rec?;
        if rec.get(7) == Some("1") {
            let r = rec[0]
                .parse()
                .map_err(|_| Error::Schema(format!("{}: bad radius {:?}", path.display(), &rec[0])))?;
            return Ok(Some(r));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationRow {
    pub period: ArchetypePeriod,
    pub parcel_id: String,
    pub floor_area_m2: f64,
    pub dynamic_heating_kwh_m2: f64,
    pub quasi_steady_heating_kwh_m2: f64,
    /// Dynamic over quasi-steady heating.
    pub ratio: f64,
    pub dynamic_exceeds: bool,
}

/// The building of median conditioned floor area in each period (lower median, ties by id).
pub fn representative_models(models: &[BuildingModel]) -> Vec<&BuildingModel> {
    ArchetypePeriod::ALL
        .into_iter()
        .filter_map(|p| {
            let mut members: Vec<&BuildingModel> = models.iter().filter(|m| m.period == p).collect();
            members.sort_by(|a, b| {
                a.conditioned_floor_area()
                    .total_cmp(&b.conditioned_floor_area())
                    .then(a.parcel_id.cmp(&b.parcel_id))
            });
            members.get(members.len().saturating_sub(1) / 2).copied()
        })
        .collect()
}

/// Heating intensity of both engines for each period's representative building.
pub fn calibration_report(
    models: &[BuildingModel],
    climate: &Climate,
    params: &EngineParams,
) -> Result<Vec<CalibrationRow>> {
    representative_models(models)
        .into_iter()
        .map(|m| {
            let dynamic = simulate_dynamic(m, climate, params)?;
            let quasi = simulate_quasi_steady(m, climate, params)?;
            let (d, q) = (dynamic.heating_intensity_kwh_m2, quasi.heating_intensity_kwh_m2);
            Ok(CalibrationRow {
                period: m.period,
                parcel_id: m.parcel_id.clone(),
                floor_area_m2: dynamic.floor_area_m2,
                dynamic_heating_kwh_m2: d,
                quasi_steady_heating_kwh_m2: q,
                ratio: if q > 0.0 { d / q } else { f64::NAN },
                dynamic_exceeds: d > q,
            })
        })
        .collect()
}

pub fn write_calibration_csv<W: Write>(out: W, rows: &[CalibrationRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "period",
        "parcel_id",
        "floor_area_m2",
        "dynamic_heating_kWhm2",
        "quasi_steady_heating_kWhm2",
        "ratio",
        "dynamic_exceeds",
    ])?;
    for r in rows {
        w.write_record([
            r.period.to_string(),
            r.parcel_id.clone(),
            r.floor_area_m2.to_string(),
            r.dynamic_heating_kwh_m2.to_string(),
            r.quasi_steady_heating_kwh_m2.to_string(),
            r.ratio.to_string(),
            r.dynamic_exceeds.to_string(),
        ])?;
    }
    flush(w, "<calibration>")
}

pub fn read_calibration_csv(path: &Path) -> Result<Vec<CalibrationRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let num = |k: usize| {
            rec[k]
                .parse::<f64>()
                .map_err(|_| Error::Schema(format!("{}: bad number {:?}", path.display(), &rec[k])))
        };
        rows.push(CalibrationRow {
            period: rec[0].parse()?,
            parcel_id: rec[1].to_string(),
            floor_area_m2: num(2)?,
            dynamic_heating_kwh_m2: num(3)?,
            quasi_steady_heating_kwh_m2: num(4)?,
            ratio: num(5)?,
            dynamic_exceeds: &rec[6] == "true",
        });
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopConsumerRow {
    pub period: ArchetypePeriod,
    pub top_count: usize,
    pub stock_count: usize,
    /// Fraction of the top group in this period.
    pub top_share: f64,
}

/// Period distribution of the highest-consuming tenth of the stock by total energy.
pub fn top_consumers(results: &[SimResult], share: f64) -> Vec<TopConsumerRow> {
    let mut sorted: Vec<&SimResult> = results.iter().collect();
    sorted.sort_by(|a, b| {
        b.total_kwh()
            .total_cmp(&a.total_kwh())
            .then(a.parcel_id.cmp(&b.parcel_id))
    });
    let k = ((results.len() as f64 * share).ceil() as usize).min(results.len());
    let top = &sorted[..k];
    ArchetypePeriod::ALL
        .into_iter()
        .map(|p| {
            let top_count = top.iter().filter(|r| r.period == p).count();
            TopConsumerRow {
                period: p,
                top_count,
                stock_count: results.iter().filter(|r| r.period == p).count(),
                top_share: if k > 0 { top_count as f64 / k as f64 } else { 0.0 },
            }
        })
        .collect()
}

pub fn write_top_consumers_csv<W: Write>(out: W, rows: &[TopConsumerRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["period", "top_count", "stock_count", "top_share"])?;
    for r in rows {
        w.write_record([
            r.period.to_string(),
            r.top_count.to_string(),
            r.stock_count.to_string(),
            r.top_share.to_string(),
        ])?;
    }
    flush(w, "<top_consumers>")
}

/// Everything the report stage needs.
#[derive(Debug, Clone)]
pub struct ReportInputs {
    pub baseline: Vec<SimResult>,
    pub retrofit: Vec<SimResult>,
    pub records: Vec<BuildingRecord>,
    pub calibration: Vec<CalibrationRow>,
    pub elbow_radius_m: Option<f64>,
    pub emission_factor_t_per_tj: f64,
    pub weighting: SavingsWeighting,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportSummary {
    pub stock_size: usize,
    pub simulated: usize,
    pub baseline_total_kwh: f64,
    pub all_retrofit_total_kwh: f64,
    pub mean_total_intensity_kwh_m2: f64,
    pub x_at_80pct: f64,
    pub co2_intensity_kg_m2: f64,
    pub elbow_radius_m: Option<f64>,
    pub front_size: usize,
    pub front_frequency: BTreeMap<ArchetypePeriod, usize>,
}

impl ReportSummary {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "stock_size: {}", self.stock_size);
        let _ = writeln!(s, "buildings_simulated: {}", self.simulated);
        let _ = writeln!(s, "baseline_total_kWh: {:.3}", self.baseline_total_kwh);
        let _ = writeln!(s, "all_retrofit_total_kWh: {:.3}", self.all_retrofit_total_kwh);
        let _ = writeln!(s, "mean_total_intensity_kWhm2: {:.3}", self.mean_total_intensity_kwh_m2);
        let _ = writeln!(s, "building_fraction_at_80pct_energy: {:.4}", self.x_at_80pct);
        let _ = writeln!(s, "co2_intensity_kg_m2: {:.3}", self.co2_intensity_kg_m2);
        match self.elbow_radius_m {
            Some(r) => {
                let _ = writeln!(s, "elbow_radius_m: {r}");
            }
            None => s.push_str("elbow_radius_m: n/a\n"),
        }
        let _ = writeln!(s, "pareto_front_size: {}", self.front_size);
        for (p, c) in &self.front_frequency {
            let _ = writeln!(s, "front_frequency.{p}: {c}");
        }
        s
    }
}

pub const REPORT_FILES: [&str; 9] = [
    "scenarios.csv",
    "front.csv",
    "binary_map.csv",
    "neighborhood_savings.csv",
    "before_after.csv",
    "intensity_histograms.csv",
    "cumulative_curve.csv",
    "top_consumers.csv",
    "calibration.csv",
];
pub const SUMMARY_FILE: &str = "summary.txt";

fn create(dir: &Path, name: &str) -> Result<std::io::BufWriter<std::fs::File>> {
    let path: PathBuf = dir.join(name);
    std::fs::File::create(&path)
        .map(std::io::BufWriter::new)
        .map_err(|e| Error::io(&path, e))
}

/// Writes the nine report tables and `summary.txt` into `dir`.
pub fn emit_report(inputs: &ReportInputs, dir: &Path) -> Result<ReportSummary> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let outcomes = evaluate_scenarios(&inputs.baseline, &inputs.retrofit)?;
    let front = pareto_front(&outcomes)?;
    let savings = neighborhood_savings(&inputs.baseline, &inputs.retrofit, &inputs.records, inputs.weighting)?;
    let hist = intensity_histograms(&inputs.baseline);
    let curve = cumulative_curve(&inputs.baseline)?;
    let co2 = co2_estimate(&inputs.baseline, inputs.emission_factor_t_per_tj)?;
    let top = top_consumers(&inputs.baseline, TOP_CONSUMER_SHARE);

    write_scenarios_csv(create(dir, REPORT_FILES[0])?, &outcomes)?;
    write_front_csv(create(dir, REPORT_FILES[1])?, &front)?;
    write_binary_map_csv(create(dir, REPORT_FILES[2])?, &binary_map(&front))?;
    write_neighborhood_savings_csv(create(dir, REPORT_FILES[3])?, &savings)?;
    write_before_after_csv(create(dir, REPORT_FILES[4])?, &inputs.baseline, &inputs.retrofit)?;
    write_histograms_csv(create(dir, REPORT_FILES[5])?, &hist)?;
    write_cumulative_csv(create(dir, REPORT_FILES[6])?, &curve)?;
    write_top_consumers_csv(create(dir, REPORT_FILES[7])?, &top)?;
    write_calibration_csv(create(dir, REPORT_FILES[8])?, &inputs.calibration)?;

    let summary = ReportSummary {
        stock_size: inputs.records.len(),
        simulated: inputs.baseline.len(),
        baseline_total_kwh: outcomes[0].total_energy_kwh,
        all_retrofit_total_kwh: outcomes[255].total_energy_kwh,
        mean_total_intensity_kwh_m2: outcomes[0].mean_intensity_kwh_m2,
        x_at_80pct: curve.x_at(CUMULATIVE_TARGET),
        co2_intensity_kg_m2: co2.co2_intensity_kg_m2,
        elbow_radius_m: inputs.elbow_radius_m,
        front_size: front.outcomes.len(),
        front_frequency: archetype_front_frequency(&front),
    };
    let path = dir.join(SUMMARY_FILE);
    std::fs::write(&path, summary.to_text()).map_err(|e| Error::io(&path, e))?;
    Ok(summary)
}
