//! LoD1 building models: extruded prisms with façade windows, envelope
//! parameters and a sector horizon built from neighboring prisms.

use std::fmt::Write as _;
use std::path::Path;

use rstar::primitives::GeomWithData;
use rstar::RTree;
use serde::{Deserialize, Serialize};

use crate::archetypes::{assign_period, ArchetypePeriod, ArchetypeTable, EnvelopeSpec, Variant};
use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use crate::ingest::BuildingRecord;

/// Window-to-plan area ratio required for every model.
pub const WINDOW_TO_FLOOR_RATIO: f64 = 1.0 / 8.0;
/// Largest fraction of a façade that may be glazed.
pub const MAX_WINDOW_TO_WALL: f64 = 0.95;
pub const DEFAULT_SECTORS: usize = 36;
pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Facade {
    /// Outward normal bearing, degrees clockwise from north.
    pub azimuth_deg: f64,
    pub wall_area_m2: f64,
    pub window_area_m2: f64,
    pub mid_height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadingPrism {
    pub footprint: Polygon,
    pub height_m: f64,
    /// Centroid-to-centroid distance to the target building.
    pub distance_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HorizonProfile {
    pub obstruction_deg: Vec<f64>,
    pub sky_view: f64,
}

impl HorizonProfile {
    pub fn open(sectors: usize) -> Self {
        HorizonProfile {
            obstruction_deg: vec![0.0; sectors],
            sky_view: 1.0,
        }
    }

    pub fn from_obstructions(obstruction_deg: Vec<f64>) -> Self {
        let sky_view = obstruction_deg
            .iter()
            .map(|o| o.to_radians().cos().powi(2))
            .sum::<f64>()
            / obstruction_deg.len() as f64;
        HorizonProfile {
            obstruction_deg,
            sky_view,
        }
    }

    pub fn sector_count(&self) -> usize {
        self.obstruction_deg.len()
    }

    pub fn sector_width_deg(&self) -> f64 {
        360.0 / self.sector_count() as f64
    }

    pub fn sector_of(&self, azimuth_deg: f64) -> usize {
        let a = azimuth_deg.rem_euclid(360.0);
        ((a / self.sector_width_deg()) as usize).min(self.sector_count() - 1)
    }

    /// Obstruction elevation in the sector containing `azimuth_deg`.
    pub fn obstruction_at(&self, azimuth_deg: f64) -> f64 {
        self.obstruction_deg[self.sector_of(azimuth_deg)]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingModel {
    pub parcel_id: String,
    pub period: ArchetypePeriod,
    pub height_m: f64,
    /// Number of storeys; conditioned floor area = plan area x storeys.
    pub storeys: u32,
    /// Plan (footprint) area.
    pub floor_area_m2: f64,
    pub conditioned_volume_m3: f64,
    pub roof_area_m2: f64,
    pub facades: Vec<Facade>,
    pub envelope: EnvelopeSpec,
    pub horizon: HorizonProfile,
    pub neighbors: Vec<ShadingPrism>,
    pub site_latitude_deg: f64,
    pub site_longitude_deg: f64,
}

impl BuildingModel {
    pub fn total_wall_area(&self) -> f64 {
        self.facades.iter().map(|f| f.wall_area_m2).sum()
    }

    pub fn total_window_area(&self) -> f64 {
        self.facades.iter().map(|f| f.window_area_m2).sum()
    }

    /// Floor area summed over all storeys; the denominator of energy intensities.
    pub fn conditioned_floor_area(&self) -> f64 {
        self.floor_area_m2 * f64::from(self.storeys)
    }
}

/// Storey count for a prism of the given height.
pub fn storeys_for(height_m: f64, storey_height_m: f64) -> u32 {
    ((height_m / storey_height_m).round() as u32).max(1)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub latitude_deg: f64,
    pub longitude_deg: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelOptions {
    pub radius_m: f64,
    pub min_edge_m: f64,
    pub storey_height_m: f64,
    pub sectors: usize,
    pub fallback_period: ArchetypePeriod,
}

impl Default for ModelOptions {
    fn default() -> Self {
        ModelOptions {
            radius_m: 60.0,
            min_edge_m: 0.5,
            storey_height_m: 3.0,
            sectors: DEFAULT_SECTORS,
            fallback_period: crate::archetypes::DEFAULT_FALLBACK_PERIOD,
        }
    }
}

fn bearing_deg(dx: f64, dy: f64) -> f64 {
    dx.atan2(dy).to_degrees().rem_euclid(360.0)
}

/// Edge lengths and outward bearings, with edges shorter than `min_edge`
/// folded into their longer neighbor.
fn merged_edges(footprint: &Polygon, min_edge: f64) -> Vec<(f64, f64)> {
    // Exterior is counter-clockwise, so the outward normal of (dx, dy) is (dy, -dx).
    let mut edges: Vec<(f64, f64)> = footprint
        .exterior_edges()
        .map(|(a, b)| {
            let (dx, dy) = (b.x - a.x, b.y - a.y);
            (dx.hypot(dy), bearing_deg(dy, -dx))
        })
        .collect();
    while edges.len() > 3 {
        let Some(i) = edges.iter().position(|e| e.0 < min_edge) else {
            break;
        };
        let n = edges.len();
        let (prev, next) = ((i + n - 1) % n, (i + 1) % n);
        let target = if edges[prev].0 >= edges[next].0 { prev } else { next };
        edges[target].0 += edges[i].0;
        edges.remove(i);
    }
    edges
}

/// Extruded prism with bare façades, an open horizon and no neighbors.
pub fn extrude(
    record: &BuildingRecord,
    envelope: EnvelopeSpec,
    period: ArchetypePeriod,
    site: Site,
    opts: &ModelOptions,
) -> Result<BuildingModel> {
    let height = record.height_m.ok_or_else(|| Error::Build {
        parcel_id: record.parcel_id.clone(),
        message: "record has no height".into(),
    })?;
    if !(height > 0.0) {
        return Err(Error::Build {
            parcel_id: record.parcel_id.clone(),
            message: format!("non-positive height {height}"),
        });
    }
    let floor = record.footprint.area();
    let facades = merged_edges(&record.footprint, opts.min_edge_m)
        .into_iter()
        .map(|(len, az)| Facade {
            azimuth_deg: az,
            wall_area_m2: len * height,
            window_area_m2: 0.0,
            mid_height_m: height / 2.0,
        })
        .collect();
    Ok(BuildingModel {
        parcel_id: record.parcel_id.clone(),
        period,
        height_m: height,
        storeys: storeys_for(height, opts.storey_height_m),
        floor_area_m2: floor,
        conditioned_volume_m3: floor * height,
        roof_area_m2: floor,
        facades,
        envelope,
        horizon: HorizonProfile::open(opts.sectors),
        neighbors: Vec::new(),
        site_latitude_deg: site.latitude_deg,
        site_longitude_deg: site.longitude_deg,
    })
}

/// Distributes floor_area / 8 of glazing over the façades in proportion to
/// wall area, capping each façade and spreading overflow over the rest.
pub fn place_windows(mut model: BuildingModel) -> Result<BuildingModel> {
    let demand = model.floor_area_m2 * WINDOW_TO_FLOOR_RATIO;
    let walls: Vec<f64> = model.facades.iter().map(|f| f.wall_area_m2).collect();
    let total_wall: f64 = walls.iter().sum();
    if demand > MAX_WINDOW_TO_WALL * total_wall {
        return Err(Error::Build {
            parcel_id: model.parcel_id.clone(),
            message: format!(
                "window demand {demand:.2} m2 exceeds {MAX_WINDOW_TO_WALL} of wall area {total_wall:.2} m2"
            ),
        });
    }
    let caps: Vec<f64> = walls.iter().map(|w| w * MAX_WINDOW_TO_WALL).collect();
    let mut windows = vec![0.0; walls.len()];
    let mut capped = vec![false; walls.len()];
    let mut remaining = demand;
    loop {
        let open_wall: f64 = walls.iter().zip(&capped).filter(|(_, c)| !**c).map(|(w, _)| w).sum();
        let mut newly_capped = false;
        for i in 0..walls.len() {
            if !capped[i] && windows[i] + remaining * walls[i] / open_wall > caps[i] {
                capped[i] = true;
                newly_capped = true;
            }
        }
        if !newly_capped {
            for i in 0..walls.len() {
                if !capped[i] {
                    windows[i] += remaining * walls[i] / open_wall;
                }
            }
            break;
        }
        for i in 0..walls.len() {
            if capped[i] && windows[i] < caps[i] {
                remaining -= caps[i] - windows[i];
                windows[i] = caps[i];
            }
        }
    }
    for (f, w) in model.facades.iter_mut().zip(windows) {
        f.window_area_m2 = w;
    }
    Ok(model)
}

/// Read-only centroid index over the building stock.
pub struct SpatialIndex<'a> {
    records: &'a [BuildingRecord],
    centroids: Vec<Point>,
    tree: RTree<GeomWithData<[f64; 2], usize>>,
}

/// Slack on the inclusion radius so that centroids sitting exactly on the
/// radius survive floating-point noise.
const RADIUS_SLACK_M: f64 = 1e-6;

impl<'a> SpatialIndex<'a> {
    pub fn new(records: &'a [BuildingRecord]) -> Self {
        let centroids: Vec<Point> = records.iter().map(|r| r.footprint.centroid()).collect();
        let tree = RTree::bulk_load(
            centroids
                .iter()
                .enumerate()
                .map(|(i, c)| GeomWithData::new([c.x, c.y], i))
                .collect(),
        );
        SpatialIndex {
            records,
            centroids,
            tree,
        }
    }

    pub fn records(&self) -> &'a [BuildingRecord] {
        self.records
    }

    /// Indices of records whose centroid is within `radius` of `center`.
    pub fn within(&self, center: Point, radius: f64) -> Vec<(usize, f64)> {
        if radius <= 0.0 {
            return Vec::new();
        }
        let r = radius + RADIUS_SLACK_M;
        self.tree
            .locate_within_distance([center.x, center.y], r * r)
            .map(|g| (g.data, center.distance(&self.centroids[g.data])))
            .collect()
    }
}

/// Neighbors with centroid distance at most `radius_m`, nearest first,
/// ties broken by parcel id. Buildings without a height are skipped.
pub fn collect_neighbors(target: &BuildingRecord, index: &SpatialIndex<'_>, radius_m: f64) -> Vec<ShadingPrism> {
    let center = target.footprint.centroid();
    let mut found: Vec<(f64, &BuildingRecord)> = index
        .within(center, radius_m)
        .into_iter()
        .map(|(i, d)| (d, &index.records()[i]))
        .filter(|(_, r)| r.parcel_id != target.parcel_id)
        .collect();
    found.sort_by(|a, b| a.0.total_cmp(&b.0).then_with(|| a.1.parcel_id.cmp(&b.1.parcel_id)));
    found
        .into_iter()
        .filter_map(|(d, r)| {
            r.height_m.map(|h| ShadingPrism {
                footprint: r.footprint.clone(),
                height_m: h,
                distance_m: d,
            })
        })
        .collect()
}

/// Sector horizon seen from the target's centroid at façade mid-height.
///
/// Each neighbor covers the sectors spanned by its equivalent disc and
/// raises them to `atan((h - mid) / gap)`, where the gap is the centroid
/// distance minus both equivalent radii, floored at 1 m.
pub fn build_horizon(
    target_footprint: &Polygon,
    mid_height_m: f64,
    neighbors: &[ShadingPrism],
    sectors: usize,
) -> HorizonProfile {
    let mut obstruction = vec![0.0f64; sectors];
    let width = 360.0 / sectors as f64;
    let center = target_footprint.centroid();
    let r_target = target_footprint.equivalent_radius();
    for n in neighbors {
        let c = n.footprint.centroid();
        let (dx, dy) = (c.x - center.x, c.y - center.y);
        let dist = dx.hypot(dy);
        let r_n = n.footprint.equivalent_radius();
        let gap = (dist - r_target - r_n).max(1.0);
        let angle = ((n.height_m - mid_height_m) / gap).atan().to_degrees().max(0.0);
        if angle == 0.0 {
            continue;
        }
        let bearing = bearing_deg(dx, dy);
        let half = if dist > r_n {
            (r_n / dist).asin().to_degrees()
        } else {
            90.0
        };
        let first = ((bearing - half) / width).floor() as i64;
        let last = ((bearing + half) / width).floor() as i64;
        for k in first..=last.min(first + sectors as i64 - 1) {
            let s = k.rem_euclid(sectors as i64) as usize;
            obstruction[s] = obstruction[s].max(angle);
        }
    }
    HorizonProfile::from_obstructions(obstruction)
}

/// Full model for one building at baseline envelope.
pub fn build_model(
    record: &BuildingRecord,
    index: &SpatialIndex<'_>,
    table: &ArchetypeTable,
    site: Site,
    opts: &ModelOptions,
) -> Result<BuildingModel> {
    let period = assign_period(record.construction_year, opts.fallback_period)?;
    let envelope = *table.spec(period, Variant::Baseline);
    let mut model = place_windows(extrude(record, envelope, period, site, opts)?)?;
    model.neighbors = collect_neighbors(record, index, opts.radius_m);
    model.horizon = build_horizon(&record.footprint, model.height_m / 2.0, &model.neighbors, opts.sectors);
    Ok(model)
}

fn encode_token(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '%' | '=' | ';' | ',' => {
                let _ = write!(out, "%{:02X}", ch as u32);
            }
            c if c.is_whitespace() || c.is_control() => {
                let mut buf = [0u8; 4];
                for b in c.encode_utf8(&mut buf).bytes() {
                    let _ = write!(out, "%{b:02X}");
                }
            }
            c => out.push(c),
        }
    }
    out
}

fn decode_token(s: &str) -> Result<String> {
    let mut bytes = Vec::with_capacity(s.len());
    let raw = s.as_bytes();
    let mut i = 0;
    while i < raw.len() {
        if raw[i] == b'%' {
            let hex = s
                .get(i + 1..i + 3)
                .ok_or_else(|| Error::Format(format!("bad escape in {s:?}")))?;
            bytes.push(u8::from_str_radix(hex, 16).map_err(|_| Error::Format(format!("bad escape in {s:?}")))?);
            i += 3;
        } else {
            bytes.push(raw[i]);
            i += 1;
        }
    }
    String::from_utf8(bytes).map_err(|_| Error::Format("invalid utf-8 in token".into()))
}

fn polygon_token(p: &Polygon) -> String {
    let ring = |r: &[Point]| {
        r.iter()
            .map(|p| format!("{},{}", p.x, p.y))
            .collect::<Vec<_>>()
            .join(";")
    };
    p.rings().map(ring).collect::<Vec<_>>().join("|")
}

fn parse_polygon_token(s: &str) -> Result<Polygon> {
    let ring = |r: &str| -> Result<Vec<Point>> {
        r.split(';')
            .map(|pair| {
                let (x, y) = pair
                    .split_once(',')
                    .ok_or_else(|| Error::Format(format!("bad vertex {pair:?}")))?;
                Ok(Point::new(parse_f64(x)?, parse_f64(y)?))
            })
            .collect()
    };
    let mut rings = s.split('|');
    let exterior = ring(rings.next().unwrap_or_default())?;
    let holes = rings.map(ring).collect::<Result<Vec<_>>>()?;
    Polygon::new(exterior, holes).map_err(|e| Error::Format(e.to_string()))
}

fn parse_f64(s: &str) -> Result<f64> {
    s.parse::<f64>().map_err(|_| Error::Format(format!("bad number {s:?}")))
}

/// Serializes a model to the `.ubm` tagged text format.
pub fn model_to_string(m: &BuildingModel) -> String {
    let mut out = String::new();
    let e = &m.envelope;
    let _ = writeln!(out, "ubm {MODEL_FORMAT_VERSION}");
    let _ = writeln!(out, "parcel_id {}", encode_token(&m.parcel_id));
    let _ = writeln!(out, "period {}", m.period.label());
    let _ = writeln!(out, "height_m {}", m.height_m);
    let _ = writeln!(out, "storeys {}", m.storeys);
    let _ = writeln!(out, "floor_area_m2 {}", m.floor_area_m2);
    let _ = writeln!(out, "conditioned_volume_m3 {}", m.conditioned_volume_m3);
    let _ = writeln!(out, "roof_area_m2 {}", m.roof_area_m2);
    let _ = writeln!(
        out,
        "site latitude_deg={} longitude_deg={}",
        m.site_latitude_deg, m.site_longitude_deg
    );
    let _ = writeln!(
        out,
        "envelope u_wall={} u_roof={} u_floor={} u_window={} shgc={} infiltration_ach={} capacitance={}",
        e.u_wall, e.u_roof, e.u_floor, e.u_window, e.shgc, e.infiltration_ach, e.thermal_capacitance_per_floor_area
    );
    for f in &m.facades {
        let _ = writeln!(
            out,
            "facade azimuth_deg={} wall_area_m2={} window_area_m2={} mid_height_m={}",
            f.azimuth_deg, f.wall_area_m2, f.window_area_m2, f.mid_height_m
        );
    }
    let _ = writeln!(
        out,
        "horizon sectors={} sky_view={}",
        m.horizon.sector_count(),
        m.horizon.sky_view
    );
    let obs: Vec<String> = m.horizon.obstruction_deg.iter().map(|o| o.to_string()).collect();
    let _ = writeln!(out, "obstruction {}", obs.join(" "));
    for n in &m.neighbors {
        let _ = writeln!(
            out,
            "neighbor height_m={} distance_m={} footprint={}",
            n.height_m,
            n.distance_m,
            polygon_token(&n.footprint)
        );
    }
    out.push_str("end\n");
    out
}

struct Fields<'a> {
    line: usize,
    pairs: Vec<(&'a str, &'a str)>,
}

impl<'a> Fields<'a> {
    fn parse(line: usize, rest: &'a str) -> Result<Self> {
        let pairs = rest
            .split_whitespace()
            .map(|kv| {
                kv.split_once('=')
                    .ok_or_else(|| Error::Format(format!("line {line}: expected key=value, got {kv:?}")))
            })
            .collect::<Result<_>>()?;
        Ok(Fields { line, pairs })
    }

    fn raw(&self, key: &str) -> Result<&'a str> {
        self.pairs
            .iter()
            .find(|(k, _)| *k == key)
            .map(|(_, v)| *v)
            .ok_or_else(|| Error::Format(format!("line {}: missing field {key}", self.line)))
    }

    fn num(&self, key: &str) -> Result<f64> {
        parse_f64(self.raw(key)?)
    }
}

pub fn model_from_str(text: &str) -> Result<BuildingModel> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, first) = lines.next().ok_or_else(|| Error::Format("empty model file".into()))?;
    let version = first
        .strip_prefix("ubm ")
        .and_then(|v| v.trim().parse::<u32>().ok())
        .ok_or_else(|| Error::Format("missing ubm version tag".into()))?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::Format(format!(
            "unsupported model format version {version} (expected {MODEL_FORMAT_VERSION})"
        )));
    }
    let mut parcel_id = None;
    let mut period = None;
    let mut scalars = [None::<f64>; 4];
    let mut storeys = None;
    let mut site = None;
    let mut envelope = None;
    let mut facades = Vec::new();
    let mut sectors = None;
    let mut obstruction = None;
    let mut sky_view = None;
    let mut neighbors = Vec::new();
    let mut ended = false;
    for (no, line) in lines {
        if ended {
            if line.trim().is_empty() {
                continue;
            }
            return Err(Error::Format(format!("line {no}: content after end")));
        }
        let (tag, rest) = line.split_once(' ').unwrap_or((line, ""));
        match tag {
            "parcel_id" => parcel_id = Some(decode_token(rest.trim())?),
            "period" => {
                period = Some(
                    rest.parse::<ArchetypePeriod>()
                        .map_err(|e| Error::Format(e.to_string()))?,
                )
            }
            "height_m" => scalars[0] = Some(parse_f64(rest)?),
            "storeys" => {
                storeys = Some(
                    rest.trim()
                        .parse::<u32>()
                        .map_err(|_| Error::Format(format!("line {no}: bad storeys")))?,
                )
            }
            "floor_area_m2" => scalars[1] = Some(parse_f64(rest)?),
            "conditioned_volume_m3" => scalars[2] = Some(parse_f64(rest)?),
            "roof_area_m2" => scalars[3] = Some(parse_f64(rest)?),
            "site" => {
                let f = Fields::parse(no, rest)?;
                site = Some((f.num("latitude_deg")?, f.num("longitude_deg")?));
            }
            "envelope" => {
                let f = Fields::parse(no, rest)?;
                envelope = Some(EnvelopeSpec {
                    u_wall: f.num("u_wall")?,
                    u_roof: f.num("u_roof")?,
                    u_floor: f.num("u_floor")?,
                    u_window: f.num("u_window")?,
                    shgc: f.num("shgc")?,
                    infiltration_ach: f.num("infiltration_ach")?,
                    thermal_capacitance_per_floor_area: f.num("capacitance")?,
                });
            }
            "facade" => {
                let f = Fields::parse(no, rest)?;
                facades.push(Facade {
                    azimuth_deg: f.num("azimuth_deg")?,
                    wall_area_m2: f.num("wall_area_m2")?,
                    window_area_m2: f.num("window_area_m2")?,
                    mid_height_m: f.num("mid_height_m")?,
                });
            }
            "horizon" => {
                let f = Fields::parse(no, rest)?;
                sectors = Some(
                    f.raw("sectors")?
                        .parse::<usize>()
                        .map_err(|_| Error::Format("bad sectors".into()))?,
                );
                sky_view = Some(f.num("sky_view")?);
            }
            "obstruction" => {
                obstruction = Some(rest.split_whitespace().map(parse_f64).collect::<Result<Vec<_>>>()?);
            }
            "neighbor" => {
                let f = Fields::parse(no, rest)?;
                neighbors.push(ShadingPrism {
                    footprint: parse_polygon_token(f.raw("footprint")?)?,
                    height_m: f.num("height_m")?,
                    distance_m: f.num("distance_m")?,
                });
            }
            "end" => ended = true,
            other => return Err(Error::Format(format!("line {no}: unknown tag {other:?}"))),
        }
    }
    let missing = |what: &str| Error::Format(format!("missing {what}"));
    if !ended {
        return Err(missing("end marker"));
    }
    let obstruction = obstruction.ok_or_else(|| missing("obstruction"))?;
    if Some(obstruction.len()) != sectors || obstruction.is_empty() {
        return Err(Error::Format("horizon sector count mismatch".into()));
    }
    let (lat, lon) = site.ok_or_else(|| missing("site"))?;
    Ok(BuildingModel {
        parcel_id: parcel_id.ok_or_else(|| missing("parcel_id"))?,
        period: period.ok_or_else(|| missing("period"))?,
        height_m: scalars[0].ok_or_else(|| missing("height_m"))?,
        storeys: storeys.ok_or_else(|| missing("storeys"))?,
        floor_area_m2: scalars[1].ok_or_else(|| missing("floor_area_m2"))?,
        conditioned_volume_m3: scalars[2].ok_or_else(|| missing("conditioned_volume_m3"))?,
        roof_area_m2: scalars[3].ok_or_else(|| missing("roof_area_m2"))?,
        facades,
        envelope: envelope.ok_or_else(|| missing("envelope"))?,
        horizon: HorizonProfile {
            obstruction_deg: obstruction,
            sky_view: sky_view.ok_or_else(|| missing("sky_view"))?,
        },
        neighbors,
        site_latitude_deg: lat,
        site_longitude_deg: lon,
    })
}

pub fn write_model(model: &BuildingModel, path: &Path) -> Result<()> {
    std::fs::write(path, model_to_string(model)).map_err(|e| Error::io(path, e))
}

pub fn read_model(path: &Path) -> Result<BuildingModel> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    model_from_str(&text)
}

/// File name used for a parcel's model inside a model directory.
pub fn model_file_name(parcel_id: &str) -> String {
    format!("{}.ubm", encode_token(parcel_id).replace(['/', '\\'], "_"))
}
