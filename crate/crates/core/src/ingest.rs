//! Loading of the footprint, volumetric and civic-number layers and their
//! integration into one building table keyed by parcel code.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use log::warn;
use rstar::primitives::{GeomWithData, Rectangle};
use rstar::{RTree, AABB};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};

/// Neighborhood id given to buildings whose centroid falls in no neighborhood polygon.
pub const UNASSIGNED: &str = "UNASSIGNED";

/// Footprints under this area cannot be extruded into a zone and are dropped.
pub const MIN_FOOTPRINT_AREA_M2: f64 = 1.0;

const EARTH_RADIUS_M: f64 = 6_371_008.8;

/// Spherical transverse-Mercator approximation around a local origin.
///
/// Meter-accurate over a few kilometers of the origin, which is all a single
/// city needs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalProjection {
    pub lon0_deg: f64,
    pub lat0_deg: f64,
}

impl LocalProjection {
    pub fn project(&self, lon_deg: f64, lat_deg: f64) -> Point {
        let lat = lat_deg.to_radians();
        let dlon = (lon_deg - self.lon0_deg).to_radians();
        let b = lat.cos() * dlon.sin();
        let x = EARTH_RADIUS_M * b.atanh();
        let y = EARTH_RADIUS_M * ((lat.tan()).atan2(dlon.cos()) - self.lat0_deg.to_radians());
        Point::new(x, y)
    }

    pub fn unproject(&self, p: Point) -> (f64, f64) {
        let d = p.y / EARTH_RADIUS_M + self.lat0_deg.to_radians();
        let xr = p.x / EARTH_RADIUS_M;
        let lat = (d.sin() / xr.cosh()).asin();
        let dlon = xr.sinh().atan2(d.cos());
        (self.lon0_deg + dlon.to_degrees(), lat.to_degrees())
    }

    /// Origin at the mean of every coordinate in a GeoJSON file.
    pub fn centered_on(path: &Path) -> Result<Self> {
        let features = read_features(path)?;
        let (mut sx, mut sy, mut n) = (0.0, 0.0, 0usize);
        for f in &features {
            if let Some(g) = &f.geometry {
                visit_positions(g.get("coordinates").unwrap_or(&Value::Null), &mut |x, y| {
                    sx += x;
                    sy += y;
                    n += 1;
                });
            }
        }
        if n == 0 {
            return Err(Error::Input(format!("{} has no coordinates", path.display())));
        }
        Ok(LocalProjection {
            lon0_deg: sx / n as f64,
            lat0_deg: sy / n as f64,
        })
    }
}

fn visit_positions(v: &Value, f: &mut impl FnMut(f64, f64)) {
    if let Some(arr) = v.as_array() {
        if arr.len() >= 2 && arr[0].is_number() && arr[1].is_number() {
            f(arr[0].as_f64().unwrap(), arr[1].as_f64().unwrap());
        } else {
            for item in arr {
                visit_positions(item, f);
            }
        }
    }
}

/// Property names and coordinate handling shared by all layer readers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LayerOptions {
    pub parcel_id_property: String,
    pub volume_id_property: String,
    pub height_property: String,
    pub year_property: String,
    pub area_property: String,
    pub neighborhood_id_property: String,
    /// `None` when coordinates are already projected meters.
    pub projection: Option<LocalProjection>,
}

impl Default for LayerOptions {
    fn default() -> Self {
        LayerOptions {
            parcel_id_property: "parcel_id".into(),
            volume_id_property: "volume_id".into(),
            height_property: "height_m".into(),
            year_property: "year".into(),
            area_property: "area_m2".into(),
            neighborhood_id_property: "neighborhood_id".into(),
            projection: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParcelFeature {
    pub parcel_id: String,
    pub footprint: Polygon,
    pub plan_area_m2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumetricFeature {
    pub volume_id: String,
    pub footprint: Polygon,
    pub height_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CivicNumber {
    pub parcel_id: String,
    pub location: Point,
    pub construction_year: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Neighborhood {
    pub id: String,
    pub boundary: Polygon,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildingRecord {
    pub parcel_id: String,
    pub footprint: Polygon,
    pub plan_area_m2: f64,
    pub height_m: Option<f64>,
    pub construction_year: Option<i32>,
    pub neighborhood_id: String,
}

/// Counts of features that were skipped or corrected while loading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct LoadWarnings {
    pub skipped_geometry: usize,
    pub dropped_degenerate: usize,
    pub area_mismatch: usize,
    pub invalid_height: usize,
    pub invalid_year: usize,
}

impl LoadWarnings {
    pub fn total(&self) -> usize {
        self.skipped_geometry + self.dropped_degenerate + self.area_mismatch + self.invalid_height + self.invalid_year
    }

    pub fn merge(&mut self, other: &LoadWarnings) {
        self.skipped_geometry += other.skipped_geometry;
        self.dropped_degenerate += other.dropped_degenerate;
        self.area_mismatch += other.area_mismatch;
        self.invalid_height += other.invalid_height;
        self.invalid_year += other.invalid_year;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Loaded<T> {
    pub features: Vec<T>,
    pub warnings: LoadWarnings,
}

pub(crate) struct RawFeature {
    pub index: usize,
    pub geometry: Option<Value>,
    pub properties: Map<String, Value>,
}

pub(crate) fn read_features(path: &Path) -> Result<Vec<RawFeature>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_features(&text, path)
}

fn parse_features(text: &str, path: &Path) -> Result<Vec<RawFeature>> {
    let err = |index: Option<usize>, message: String| Error::GeoJson {
        path: path.to_path_buf(),
        index,
        message,
    };
    let root: Value = serde_json::from_str(text).map_err(|e| err(None, e.to_string()))?;
    if root.get("type").and_then(Value::as_str) != Some("FeatureCollection") {
        return Err(err(None, "top-level object is not a FeatureCollection".into()));
    }
    let features = root
        .get("features")
        .and_then(Value::as_array)
        .ok_or_else(|| err(None, "missing features array".into()))?;
    features
        .iter()
        .enumerate()
        .map(|(index, f)| {
            if f.get("type").and_then(Value::as_str) != Some("Feature") {
                return Err(err(Some(index), "object is not a Feature".into()));
            }
            let geometry = match f.get("geometry") {
                None | Some(Value::Null) => None,
                Some(g @ Value::Object(_)) => Some(g.clone()),
                Some(_) => return Err(err(Some(index), "geometry is not an object".into())),
            };
            let properties = match f.get("properties") {
                None | Some(Value::Null) => Map::new(),
                Some(Value::Object(m)) => m.clone(),
                Some(_) => return Err(err(Some(index), "properties is not an object".into())),
            };
            Ok(RawFeature {
                index,
                geometry,
                properties,
            })
        })
        .collect()
}

fn property_string(props: &Map<String, Value>, key: &str) -> Option<String> {
    match props.get(key)? {
        Value::String(s) if !s.is_empty() => Some(s.clone()),
        Value::Number(n) => Some(n.to_string()),
        _ => None,
    }
}

fn property_f64(props: &Map<String, Value>, key: &str) -> Option<f64> {
    match props.get(key)? {
        Value::Number(n) => n.as_f64(),
        Value::String(s) => s.trim().parse().ok(),
        _ => None,
    }
}

fn position(v: &Value, opts: &LayerOptions) -> Option<Point> {
    let arr = v.as_array()?;
    let x = arr.first()?.as_f64()?;
    let y = arr.get(1)?.as_f64()?;
    Some(match &opts.projection {
        Some(proj) => proj.project(x, y),
        None => Point::new(x, y),
    })
}

fn ring(v: &Value, opts: &LayerOptions) -> Option<Vec<Point>> {
    v.as_array()?.iter().map(|p| position(p, opts)).collect()
}

enum PolygonParts {
    NotPolygonal,
    Malformed,
    Parts(Vec<Option<Polygon>>),
}

/// Polygon parts of a geometry; invalid parts come back as `None`.
fn polygon_parts(geometry: Option<&Value>, opts: &LayerOptions) -> PolygonParts {
    let Some(g) = geometry else {
        return PolygonParts::NotPolygonal;
    };
    let coords = g.get("coordinates");
    let to_polygon = |rings: &Value| -> Option<Polygon> {
        let rings = rings.as_array()?;
        let mut rings = rings.iter().map(|r| ring(r, opts));
        let exterior = rings.next()??;
        let holes = rings.collect::<Option<Vec<_>>>()?;
        Polygon::new(exterior, holes).ok()
    };
    match g.get("type").and_then(Value::as_str) {
        Some("Polygon") => match coords {
            Some(c) if c.is_array() => PolygonParts::Parts(vec![to_polygon(c)]),
            _ => PolygonParts::Malformed,
        },
        Some("MultiPolygon") => match coords.and_then(Value::as_array) {
            Some(parts) => PolygonParts::Parts(parts.iter().map(to_polygon).collect()),
            None => PolygonParts::Malformed,
        },
        _ => PolygonParts::NotPolygonal,
    }
}

/// Walks polygonal features, splitting multipolygons into suffixed ids.
fn for_each_polygon(
    features: &[RawFeature],
    id_property: &str,
    opts: &LayerOptions,
    path: &Path,
    warnings: &mut LoadWarnings,
    mut f: impl FnMut(&RawFeature, String, Polygon, &mut LoadWarnings),
) -> Result<()> {
    for feature in features {
        let parts = match polygon_parts(feature.geometry.as_ref(), opts) {
            PolygonParts::NotPolygonal => {
                warnings.skipped_geometry += 1;
                continue;
            }
            PolygonParts::Malformed => {
                return Err(Error::GeoJson {
                    path: path.to_path_buf(),
                    index: Some(feature.index),
                    message: "malformed polygon coordinates".into(),
                })
            }
            PolygonParts::Parts(parts) => parts,
        };
        let id = property_string(&feature.properties, id_property).ok_or_else(|| Error::GeoJson {
            path: path.to_path_buf(),
            index: Some(feature.index),
            message: format!("missing id property {id_property:?}"),
        })?;
        let multi = parts.len() > 1;
        for (k, part) in parts.into_iter().enumerate() {
            match part {
                Some(poly) if poly.area() >= MIN_FOOTPRINT_AREA_M2 => {
                    let id = if multi { format!("{id}_{k}") } else { id.clone() };
                    f(feature, id, poly, warnings);
                }
                _ => warnings.dropped_degenerate += 1,
            }
        }
    }
    Ok(())
}

pub fn parse_footprints(text: &str, opts: &LayerOptions) -> Result<Loaded<ParcelFeature>> {
    footprints_from(
        parse_features(text, Path::new("<memory>"))?,
        opts,
        Path::new("<memory>"),
    )
}

pub fn load_footprints(path: &Path, opts: &LayerOptions) -> Result<Loaded<ParcelFeature>> {
    footprints_from(read_features(path)?, opts, path)
}

fn footprints_from(raw: Vec<RawFeature>, opts: &LayerOptions, path: &Path) -> Result<Loaded<ParcelFeature>> {
    let mut warnings = LoadWarnings::default();
    let mut features = Vec::with_capacity(raw.len());
    for_each_polygon(
        &raw,
        &opts.parcel_id_property,
        opts,
        path,
        &mut warnings,
        |f, id, poly, w| {
            let computed = poly.area();
            if let Some(declared) = property_f64(&f.properties, &opts.area_property) {
                if (declared - computed).abs() > 0.01 * computed {
                    w.area_mismatch += 1;
                }
            }
            features.push(ParcelFeature {
                parcel_id: id,
                footprint: poly,
                plan_area_m2: computed,
            });
        },
    )?;
    log_warnings(path, &warnings);
    Ok(Loaded { features, warnings })
}

pub fn load_volumetrics(path: &Path, opts: &LayerOptions) -> Result<Loaded<VolumetricFeature>> {
    let raw = read_features(path)?;
    let mut warnings = LoadWarnings::default();
    let mut features = Vec::with_capacity(raw.len());
    for_each_polygon(
        &raw,
        &opts.volume_id_property,
        opts,
        path,
        &mut warnings,
        |f, id, poly, w| match property_f64(&f.properties, &opts.height_property) {
            Some(h) if h > 0.0 && h <= 300.0 => features.push(VolumetricFeature {
                volume_id: id,
                footprint: poly,
                height_m: h,
            }),
            _ => w.invalid_height += 1,
        },
    )?;
    log_warnings(path, &warnings);
    Ok(Loaded { features, warnings })
}

pub fn load_civics(path: &Path, opts: &LayerOptions) -> Result<Loaded<CivicNumber>> {
    let raw = read_features(path)?;
    let mut warnings = LoadWarnings::default();
    let mut features = Vec::with_capacity(raw.len());
    for f in &raw {
        let g = f.geometry.as_ref();
        let location = match g.and_then(|g| g.get("type")).and_then(Value::as_str) {
            Some("Point") => g.and_then(|g| g.get("coordinates")).and_then(|c| position(c, opts)),
            _ => None,
        };
        let Some(location) = location else {
            warnings.skipped_geometry += 1;
            continue;
        };
        let parcel_id = property_string(&f.properties, &opts.parcel_id_property).ok_or_else(|| Error::GeoJson {
            path: path.to_path_buf(),
            index: Some(f.index),
            message: format!("missing id property {:?}", opts.parcel_id_property),
        })?;
        let construction_year = match property_f64(&f.properties, &opts.year_property) {
            Some(y) if y.fract() == 0.0 && (1000.0..=2100.0).contains(&y) => Some(y as i32),
            Some(_) => {
                warnings.invalid_year += 1;
                None
            }
            None => None,
        };
        features.push(CivicNumber {
            parcel_id,
            location,
            construction_year,
        });
    }
    log_warnings(path, &warnings);
    Ok(Loaded { features, warnings })
}

pub fn load_neighborhoods(path: &Path, opts: &LayerOptions) -> Result<Loaded<Neighborhood>> {
    let raw = read_features(path)?;
    let mut warnings = LoadWarnings::default();
    let mut features = Vec::new();
    for_each_polygon(
        &raw,
        &opts.neighborhood_id_property,
        opts,
        path,
        &mut warnings,
        |_, id, poly, _| features.push(Neighborhood { id, boundary: poly }),
    )?;
    log_warnings(path, &warnings);
    Ok(Loaded { features, warnings })
}

fn log_warnings(path: &Path, w: &LoadWarnings) {
    if w.total() > 0 {
        warn!("{}: {:?}", path.display(), w);
    }
}

type IndexedBox = GeomWithData<Rectangle<[f64; 2]>, usize>;

fn bbox_tree<'a>(polys: impl Iterator<Item = &'a Polygon>) -> RTree<IndexedBox> {
    RTree::bulk_load(
        polys
            .enumerate()
            .map(|(i, p)| {
                let b = p.bbox();
                GeomWithData::new(Rectangle::from_corners([b.min.x, b.min.y], [b.max.x, b.max.y]), i)
            })
            .collect(),
    )
}

/// Heights per parcel from the volumetric layer.
///
/// Each volume goes to the parcel it overlaps most (ties to the smallest
/// parcel id). A parcel receiving several volumes gets the mean of their
/// heights weighted by overlap area.
pub fn spatial_join_volumetrics(parcels: &[ParcelFeature], volumes: &[VolumetricFeature]) -> BTreeMap<String, f64> {
    let tree = bbox_tree(parcels.iter().map(|p| &p.footprint));
    let mut contributions: BTreeMap<&str, Vec<(&str, f64, f64)>> = BTreeMap::new();
    for vol in volumes {
        let b = vol.footprint.bbox();
        let env = AABB::from_corners([b.min.x, b.min.y], [b.max.x, b.max.y]);
        let mut best: Option<(&str, f64)> = None;
        for cand in tree.locate_in_envelope_intersecting(env) {
            let parcel = &parcels[cand.data];
            let overlap = parcel.footprint.intersection_area(&vol.footprint);
            if overlap <= 0.0 {
                continue;
            }
            let better = match best {
                None => true,
                Some((id, a)) => overlap > a || (overlap == a && parcel.parcel_id.as_str() < id),
            };
            if better {
                best = Some((&parcel.parcel_id, overlap));
            }
        }
        if let Some((id, overlap)) = best {
            contributions
                .entry(id)
                .or_default()
                .push((&vol.volume_id, vol.height_m, overlap));
        }
    }
    contributions
        .into_iter()
        .map(|(id, mut parts)| {
            parts.sort_by(|a, b| a.0.cmp(b.0).then(a.1.total_cmp(&b.1)).then(a.2.total_cmp(&b.2)));
            let weight: f64 = parts.iter().map(|p| p.2).sum();
            let weighted: f64 = parts.iter().map(|p| p.1 * p.2).sum();
            let (lo, hi) = parts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                (lo.min(p.1), hi.max(p.1))
            });
            (id.to_string(), (weighted / weight).clamp(lo, hi))
        })
        .collect()
}

/// Construction year per parcel; the oldest year wins when civic numbers disagree.
pub fn attach_years(parcels: &[ParcelFeature], civics: &[CivicNumber]) -> BTreeMap<String, i32> {
    let known: HashSet<&str> = parcels.iter().map(|p| p.parcel_id.as_str()).collect();
    let mut years = BTreeMap::new();
    for civic in civics {
        let Some(year) = civic.construction_year else {
            continue;
        };
        if !known.contains(civic.parcel_id.as_str()) {
            continue;
        }
        years
            .entry(civic.parcel_id.clone())
            .and_modify(|y: &mut i32| *y = (*y).min(year))
            .or_insert(year);
    }
    years
}

/// Id of the neighborhood containing `p`, smallest id on overlap.
pub fn locate_neighborhood(neighborhoods: &[Neighborhood], p: Point) -> Option<&str> {
    neighborhoods
        .iter()
        .filter(|n| n.boundary.contains(p))
        .map(|n| n.id.as_str())
        .min()
}

/// One record per parcel, sorted by parcel id.
pub fn integrate(
    parcels: &[ParcelFeature],
    volumes: &[VolumetricFeature],
    civics: &[CivicNumber],
    neighborhoods: &[Neighborhood],
) -> Result<Vec<BuildingRecord>> {
    let mut seen = HashSet::with_capacity(parcels.len());
    for p in parcels {
        if !seen.insert(p.parcel_id.as_str()) {
            return Err(Error::DuplicateParcel(p.parcel_id.clone()));
        }
    }
    let heights = spatial_join_volumetrics(parcels, volumes);
    let years = attach_years(parcels, civics);
    let mut records: Vec<BuildingRecord> = parcels
        .iter()
        .map(|p| BuildingRecord {
            parcel_id: p.parcel_id.clone(),
            footprint: p.footprint.clone(),
            plan_area_m2: p.plan_area_m2,
            height_m: heights.get(&p.parcel_id).copied(),
            construction_year: years.get(&p.parcel_id).copied(),
            neighborhood_id: locate_neighborhood(neighborhoods, p.footprint.centroid())
                .unwrap_or(UNASSIGNED)
                .to_string(),
        })
        .collect();
    records.sort_by(|a, b| a.parcel_id.cmp(&b.parcel_id));
    Ok(records)
}

fn ring_json(ring: &[Point]) -> Value {
    let mut coords: Vec<Value> = ring.iter().map(|p| serde_json::json!([p.x, p.y])).collect();
    coords.push(serde_json::json!([ring[0].x, ring[0].y]));
    Value::Array(coords)
}

pub fn polygon_geometry(poly: &Polygon) -> Value {
    serde_json::json!({
        "type": "Polygon",
        "coordinates": poly.rings().map(ring_json).collect::<Vec<_>>(),
    })
}

pub fn feature(geometry: Value, properties: Map<String, Value>) -> Value {
    serde_json::json!({ "type": "Feature", "geometry": geometry, "properties": properties })
}

pub fn feature_collection(features: Vec<Value>) -> Value {
    serde_json::json!({ "type": "FeatureCollection", "features": features })
}

/// Writes any GeoJSON value with stable formatting.
pub fn write_geojson(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string(value).expect("serializable json");
    text.push('\n');
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Integrated building table as GeoJSON, the handoff format between stages.
pub fn write_records(path: &Path, records: &[BuildingRecord]) -> Result<()> {
    let features = records
        .iter()
        .map(|r| {
            let mut props = Map::new();
            props.insert("parcel_id".into(), r.parcel_id.clone().into());
            props.insert("plan_area_m2".into(), r.plan_area_m2.into());
            props.insert("height_m".into(), r.height_m.map_or(Value::Null, Value::from));
            props.insert("year".into(), r.construction_year.map_or(Value::Null, Value::from));
            props.insert("neighborhood_id".into(), r.neighborhood_id.clone().into());
            feature(polygon_geometry(&r.footprint), props)
        })
        .collect();
    write_geojson(path, &feature_collection(features))
}

pub fn read_records(path: &Path) -> Result<Vec<BuildingRecord>> {
    let raw = read_features(path)?;
    let opts = LayerOptions::default();
    let mut records = Vec::with_capacity(raw.len());
    for f in &raw {
        let bad = |message: &str| Error::GeoJson {
            path: path.to_path_buf(),
            index: Some(f.index),
            message: message.into(),
        };
        let footprint = match polygon_parts(f.geometry.as_ref(), &opts) {
            PolygonParts::Parts(mut parts) if parts.len() == 1 => {
                parts.pop().flatten().ok_or_else(|| bad("invalid footprint"))?
            }
            _ => return Err(bad("record geometry must be a single polygon")),
        };
        records.push(BuildingRecord {
            parcel_id: property_string(&f.properties, "parcel_id").ok_or_else(|| bad("missing parcel_id"))?,
            plan_area_m2: property_f64(&f.properties, "plan_area_m2").unwrap_or_else(|| footprint.area()),
            footprint,
            height_m: property_f64(&f.properties, "height_m"),
            construction_year: property_f64(&f.properties, "year").map(|y| y as i32),
            neighborhood_id: property_string(&f.properties, "neighborhood_id")
                .unwrap_or_else(|| UNASSIGNED.to_string()),
        });
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square(id: &str, x0: f64, y0: f64, side: f64) -> ParcelFeature {
        let footprint = Polygon::rectangle(x0, y0, x0 + side, y0 + side).unwrap();
        ParcelFeature {
            parcel_id: id.into(),
            plan_area_m2: footprint.area(),
            footprint,
        }
    }

    fn volume(id: &str, poly: Polygon, h: f64) -> VolumetricFeature {
        VolumetricFeature {
            volume_id: id.into(),
            footprint: poly,
            height_m: h,
        }
    }

    #[test]
    fn empty_collection_loads_nothing() {
        let out = parse_footprints(
            r#"{"type":"FeatureCollection","features":[]}"#,
            &LayerOptions::default(),
        )
        .unwrap();
        assert!(out.features.is_empty());
        assert_eq!(out.warnings.total(), 0);
    }

    #[test]
    fn unit_square_parcel() {
        let text = r#"{"type":"FeatureCollection","features":[{"type":"Feature",
            "properties":{"parcel_id":"P1"},
            "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,1],[0,0]]]}}]}"#;
        let out = parse_footprints(text, &LayerOptions::default()).unwrap();
        assert_eq!(out.features.len(), 1);
        assert_eq!(out.features[0].parcel_id, "P1");
        assert_eq!(out.features[0].plan_area_m2, 1.0);
    }

    #[test]
    fn point_feature_is_skipped_with_warning() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"parcel_id":"P1"},
             "geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4],[0,4]]]}},
            {"type":"Feature","properties":{"parcel_id":"P2"},
             "geometry":{"type":"Point","coordinates":[1,1]}}]}"#;
        let out = parse_footprints(text, &LayerOptions::default()).unwrap();
        assert_eq!(out.features.len(), 1);
        assert_eq!(out.warnings.skipped_geometry, 1);
    }

    #[test]
    fn malformed_feature_reports_index() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"parcel_id":"P1"},
             "geometry":{"type":"Polygon","coordinates":[[[0,0],[4,0],[4,4]]]}},
            {"type":"Feature","properties":{"parcel_id":"P2"},
             "geometry":{"type":"Polygon","coordinates":"oops"}}]}"#;
        match parse_footprints(text, &LayerOptions::default()) {
            Err(Error::GeoJson { index, .. }) => assert_eq!(index, Some(1)),
            other => panic!("expected parse error, got {other:?}"),
        }
        assert!(parse_footprints("{not json", &LayerOptions::default()).is_err());
    }

    #[test]
    fn degenerate_and_multipolygon_handling() {
        let text = r#"{"type":"FeatureCollection","features":[
            {"type":"Feature","properties":{"parcel_id":"TINY"},
             "geometry":{"type":"Polygon","coordinates":[[[0,0],[0.5,0],[0.5,0.5],[0,0.5]]]}},
            {"type":"Feature","properties":{"parcel_id":"BOW"},
             "geometry":{"type":"Polygon","coordinates":[[[0,0],[4,4],[4,0],[0,4]]]}},
            {"type":"Feature","properties":{"parcel_id":"M"},
             "geometry":{"type":"MultiPolygon","coordinates":[
                [[[0,0],[4,0],[4,4],[0,4]]], [[[10,0],[14,0],[14,4],[10,4]]]]}}]}"#;
        let out = parse_footprints(text, &LayerOptions::default()).unwrap();
        let ids: Vec<_> = out.features.iter().map(|f| f.parcel_id.as_str()).collect();
        assert_eq!(ids, ["M_0", "M_1"]);
        assert_eq!(out.warnings.dropped_degenerate, 2);
    }

    #[test]
    fn projection_round_trip_and_scale() {
        let proj = LocalProjection {
            lon0_deg: 11.34,
            lat0_deg: 44.49,
        };
        let p = proj.project(11.35, 44.50);
        let (lon, lat) = proj.unproject(p);
        assert!((lon - 11.35).abs() < 1e-9 && (lat - 44.50).abs() < 1e-9);
        // 0.01 degree of latitude is about 1112 m.
        let north = proj.project(11.34, 44.50);
        assert!((north.y - 1111.95).abs() < 1.0, "{north:?}");
        assert!(north.x.abs() < 1e-6);
    }

    #[test]
    fn identical_volume_gives_its_height() {
        let p = square("A", 0., 0., 10.);
        let v = volume("V1", p.footprint.clone(), 12.0);
        let map = spatial_join_volumetrics(&[p], &[v]);
        assert_eq!(map.get("A"), Some(&12.0));
    }

    #[test]
    fn straddling_volume_goes_to_larger_overlap() {
        let a = square("A", 0., 0., 10.);
        let b = square("B", 10., 0., 10.);
        // 10 x 4 volume; 7 m over A and 3 m over B.
        let v = volume("V", Polygon::rectangle(3., 3., 13., 7.).unwrap(), 9.0);
        let map = spatial_join_volumetrics(&[a, b], &[v]);
        assert_eq!(map.len(), 1);
        assert_eq!(map.get("A"), Some(&9.0));
    }

    #[test]
    fn half_and_half_volumes_average_by_area() {
        let p = square("P", 0., 0., 10.);
        let v1 = volume("V1", Polygon::rectangle(0., 0., 5., 10.).unwrap(), 10.0);
        let v2 = volume("V2", Polygon::rectangle(5., 0., 10., 10.).unwrap(), 20.0);
        let map = spatial_join_volumetrics(&[p], &[v1, v2]);
        assert!((map["P"] - 15.0).abs() < 1e-9);
    }

    #[test]
    fn years_take_oldest_and_skip_unknown() {
        let parcels = [square("P1", 0., 0., 5.), square("P2", 10., 0., 5.)];
        let civic = |id: &str, y| CivicNumber {
            parcel_id: id.into(),
            location: Point::new(0., 0.),
            construction_year: Some(y),
        };
        let single = attach_years(&parcels, &[civic("P1", 1950)]);
        assert_eq!(single.get("P1"), Some(&1950));
        let both = attach_years(&parcels, &[civic("P1", 1980), civic("P1", 1950)]);
        assert_eq!(both.get("P1"), Some(&1950));
        let only_p2 = attach_years(&parcels, &[civic("P2", 2001)]);
        assert!(!only_p2.contains_key("P1"));
    }

    #[test]
    fn integrate_composes_joins() {
        let p = square("P", 0., 0., 10.);
        let lonely = square("Q", 100., 100., 10.);
        let v = volume("V", p.footprint.clone(), 9.0);
        let civ = CivicNumber {
            parcel_id: "P".into(),
            location: Point::new(5., 5.),
            construction_year: Some(1970),
        };
        let n1 = Neighborhood {
            id: "N1".into(),
            boundary: Polygon::rectangle(-50., -50., 50., 50.).unwrap(),
        };
        let recs = integrate(&[p, lonely], &[v], &[civ], &[n1]).unwrap();
        assert_eq!(recs[0].height_m, Some(9.0));
        assert_eq!(recs[0].construction_year, Some(1970));
        assert_eq!(recs[0].neighborhood_id, "N1");
        assert_eq!(recs[1].height_m, None);
        assert_eq!(recs[1].construction_year, None);
        assert_eq!(recs[1].neighborhood_id, UNASSIGNED);
    }

    #[test]
    fn duplicate_parcels_are_rejected() {
        let a = square("A", 0., 0., 10.);
        match integrate(&[a.clone(), a], &[], &[], &[]) {
            Err(Error::DuplicateParcel(id)) => assert_eq!(id, "A"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn records_round_trip_through_geojson() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("b.geojson");
        let rec = BuildingRecord {
            parcel_id: "P7".into(),
            footprint: Polygon::rectangle(0.5, 0.25, 10.125, 7.0).unwrap(),
            plan_area_m2: 65.0,
            height_m: Some(12.5),
            construction_year: None,
            neighborhood_id: "N2".into(),
        };
        write_records(&path, std::slice::from_ref(&rec)).unwrap();
        assert_eq!(read_records(&path).unwrap(), vec![rec]);
    }
}
