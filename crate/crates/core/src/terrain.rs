//! DSM/DTM rasters and perimeter-band building height extraction.

use std::fmt::Write as _;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use crate::ingest::BuildingRecord;

/// Header of an ESRI ASCII grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RasterHeader {
    pub ncols: usize,
    pub nrows: usize,
    pub xll: f64,
    pub yll: f64,
    pub cellsize: f64,
    pub nodata: f64,
}

/// Elevation grid; row 0 is the northernmost row.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterGrid {
    header: RasterHeader,
    values: Vec<f64>,
}

/// Raster cell addressed as (row, col).
pub type CellIndex = (usize, usize);

impl RasterGrid {
    pub fn new(header: RasterHeader, values: Vec<f64>) -> Result<Self> {
        if header.ncols == 0 || header.nrows == 0 {
            return Err(Error::Validation("raster must have at least one cell".into()));
        }
        if !(header.cellsize > 0.0) {
            return Err(Error::Validation(format!("cellsize {} must be > 0", header.cellsize)));
        }
        if values.len() != header.ncols * header.nrows {
            return Err(Error::Validation(format!(
                "{} values for a {}x{} grid",
                values.len(),
                header.ncols,
                header.nrows
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() && **v != header.nodata) {
            return Err(Error::Validation(format!("non-finite elevation {v}")));
        }
        Ok(RasterGrid { header, values })
    }

    /// Grid filled by evaluating `f` at every cell center.
    pub fn from_fn(header: RasterHeader, mut f: impl FnMut(Point) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(header.ncols * header.nrows);
        for row in 0..header.nrows {
            for col in 0..header.ncols {
                values.push(f(cell_center(&header, (row, col))));
            }
        }
        RasterGrid::new(header, values)
    }

    pub fn header(&self) -> &RasterHeader {
        &self.header
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn cellsize(&self) -> f64 {
        self.header.cellsize
    }

    pub fn get(&self, (row, col): CellIndex) -> f64 {
        self.values[row * self.header.ncols + col]
    }

    pub fn set(&mut self, (row, col): CellIndex, v: f64) {
        self.values[row * self.header.ncols + col] = v;
    }

    pub fn is_nodata(&self, v: f64) -> bool {
        v == self.header.nodata || v.is_nan()
    }

    pub fn cell_center(&self, cell: CellIndex) -> Point {
        cell_center(&self.header, cell)
    }

    /// Cells whose centers fall inside the axis-aligned box.
    pub fn cells_in_box(&self, min: Point, max: Point) -> impl Iterator<Item = CellIndex> {
        let h = self.header;
        let top = h.yll + h.nrows as f64 * h.cellsize;
        let col_lo = ((min.x - h.xll) / h.cellsize - 0.5).ceil().max(0.0);
        let col_hi = ((max.x - h.xll) / h.cellsize - 0.5).floor().min(h.ncols as f64 - 1.0);
        let row_lo = ((top - max.y) / h.cellsize - 0.5).ceil().max(0.0);
        let row_hi = ((top - min.y) / h.cellsize - 0.5).floor().min(h.nrows as f64 - 1.0);
        let (cols, rows) = if col_lo > col_hi || row_lo > row_hi {
            (0..0, 0..0)
        } else {
            (
                col_lo as usize..col_hi as usize + 1,
                row_lo as usize..row_hi as usize + 1,
            )
        };
        rows.flat_map(move |r| cols.clone().map(move |c| (r, c)))
    }

    /// Checks that both grids share dimensions, origin and cellsize.
    pub fn check_aligned(&self, other: &RasterGrid) -> Result<()> {
        let (a, b) = (&self.header, &other.header);
        let tol = 1e-9 * a.cellsize;
        if a.ncols != b.ncols
            || a.nrows != b.nrows
            || (a.cellsize - b.cellsize).abs() > tol
            || (a.xll - b.xll).abs() > tol
            || (a.yll - b.yll).abs() > tol
        {
            return Err(Error::RasterAlignment(format!("{a:?} vs {b:?}")));
        }
        Ok(())
    }
}

fn cell_center(h: &RasterHeader, (row, col): CellIndex) -> Point {
    Point::new(
        h.xll + (col as f64 + 0.5) * h.cellsize,
        h.yll + (h.nrows as f64 - row as f64 - 0.5) * h.cellsize,
    )
}

pub fn parse_raster(text: &str) -> Result<RasterGrid> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let mut fields: [Option<f64>; 6] = [None; 6];
    const KEYS: [&str; 6] = ["ncols", "nrows", "xllcorner", "yllcorner", "cellsize", "nodata_value"];
    for _ in 0..KEYS.len() {
        let (i, line) = lines.next().ok_or(Error::RasterParse {
            line: 0,
            message: "truncated header".into(),
        })?;
        let mut parts = line.split_whitespace();
        let key = parts.next().unwrap_or_default().to_ascii_lowercase();
        let slot = KEYS.iter().position(|k| *k == key).ok_or_else(|| Error::RasterParse {
            line: i + 1,
            message: format!("unexpected header key {key:?}"),
        })?;
        let value = parts
            .next()
            .and_then(|v| v.parse::<f64>().ok())
            .ok_or_else(|| Error::RasterParse {
                line: i + 1,
                message: format!("bad value for {key}"),
            })?;
        fields[slot] = Some(value);
    }
    let [Some(ncols), Some(nrows), Some(xll), Some(yll), Some(cellsize), Some(nodata)] = fields else {
        return Err(Error::RasterParse {
            line: 6,
            message: "duplicate or missing header key".into(),
        });
    };
    if ncols < 1.0 || nrows < 1.0 || ncols.fract() != 0.0 || nrows.fract() != 0.0 {
        return Err(Error::RasterParse {
            line: 1,
            message: "ncols/nrows must be positive integers".into(),
        });
    }
    let header = RasterHeader {
        ncols: ncols as usize,
        nrows: nrows as usize,
        xll,
        yll,
        cellsize,
        nodata,
    };
    let mut values = Vec::with_capacity(header.ncols * header.nrows);
    let mut rows = 0;
    let mut last_line = 6;
    for (i, line) in lines {
        last_line = i + 1;
        if rows == header.nrows {
            return Err(Error::RasterParse {
                line: i + 1,
                message: format!("more than {} data rows", header.nrows),
            });
        }
        let before = values.len();
        for tok in line.split_ascii_whitespace() {
            values.push(tok.parse::<f64>().map_err(|_| Error::RasterParse {
                line: i + 1,
                message: format!("bad value {tok:?}"),
            })?);
        }
        if values.len() - before != header.ncols {
            return Err(Error::RasterParse {
                line: i + 1,
                message: format!("expected {} values, found {}", header.ncols, values.len() - before),
            });
        }
        rows += 1;
    }
    if rows != header.nrows {
        return Err(Error::RasterParse {
            line: last_line + 1,
            message: format!("expected {} data rows, found {rows}", header.nrows),
        });
    }
    RasterGrid::new(header, values).map_err(|e| Error::RasterParse {
        line: 1,
        message: e.to_string(),
    })
}

pub fn load_raster(path: &Path) -> Result<RasterGrid> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_raster(&text)
}

/// Writes an ESRI ASCII grid; values use shortest round-trip formatting.
pub fn write_raster(path: &Path, grid: &RasterGrid) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let h = &grid.header;
    let mut text = String::new();
    let _ = writeln!(text, "NCOLS {}", h.ncols);
    let _ = writeln!(text, "NROWS {}", h.nrows);
    let _ = writeln!(text, "XLLCORNER {}", h.xll);
    let _ = writeln!(text, "YLLCORNER {}", h.yll);
    let _ = writeln!(text, "CELLSIZE {}", h.cellsize);
    let _ = writeln!(text, "NODATA_VALUE {}", h.nodata);
    for row in grid.values.chunks(h.ncols) {
        for (i, v) in row.iter().enumerate() {
            if i > 0 {
                text.push(' ');
            }
            let _ = write!(text, "{v}");
        }
        text.push('\n');
        if text.len() > 1 << 16 {
            out.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
            text.clear();
        }
    }
    out.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerimeterBand {
    pub source: Polygon,
    pub inner_offset_m: f64,
    pub outer_offset_m: f64,
    pub cells: Vec<CellIndex>,
}

/// Cells whose centers lie within `[inner, outer]` signed distance of the
/// footprint boundary (negative = inside).
pub fn buffered_perimeter_cells(
    footprint: &Polygon,
    grid: &RasterGrid,
    inner: f64,
    outer: f64,
) -> Result<PerimeterBand> {
    if inner > outer {
        return Err(Error::Validation(format!("band inner {inner} > outer {outer}")));
    }
    let reach = inner.abs().max(outer.abs());
    let bbox = footprint.bbox().expanded(reach.max(0.0));
    let cells: Vec<CellIndex> = grid
        .cells_in_box(bbox.min, bbox.max)
        .filter(|&cell| {
            let d = footprint.signed_distance(grid.cell_center(cell));
            d >= inner && d <= outer
        })
        .collect();
    if cells.is_empty() {
        return Err(Error::EmptyBand);
    }
    Ok(PerimeterBand {
        source: footprint.clone(),
        inner_offset_m: inner,
        outer_offset_m: outer,
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeightOptions {
    /// Band offsets in meters; `None` means one cell inward / outward.
    pub buffer_inner_m: Option<f64>,
    pub buffer_outer_m: Option<f64>,
    pub min_height_m: f64,
    pub max_height_m: f64,
}

impl Default for HeightOptions {
    fn default() -> Self {
        HeightOptions {
            buffer_inner_m: None,
            buffer_outer_m: None,
            min_height_m: 2.5,
            max_height_m: 150.0,
        }
    }
}

impl HeightOptions {
    pub fn band(&self, cellsize: f64) -> (f64, f64) {
        (
            self.buffer_inner_m.unwrap_or(-cellsize),
            self.buffer_outer_m.unwrap_or(cellsize),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightExtraction {
    pub height_m: f64,
    /// Maximum DSM - DTM before clamping.
    pub raw_m: f64,
    pub clamped: bool,
}

/// Maximum DSM - DTM over the buffered perimeter band, clamped to the
/// configured physical range.
pub fn extract_height(
    footprint: &Polygon,
    dsm: &RasterGrid,
    dtm: &RasterGrid,
    opts: &HeightOptions,
) -> Result<HeightExtraction> {
    dsm.check_aligned(dtm)?;
    let (inner, outer) = opts.band(dsm.cellsize());
    let band = buffered_perimeter_cells(footprint, dsm, inner, outer)?;
    let raw = band
        .cells
        .iter()
        .filter_map(|&c| {
            let (s, t) = (dsm.get(c), dtm.get(c));
            (!dsm.is_nodata(s) && !dtm.is_nodata(t)).then_some(s - t)
        })
        .fold(None, |acc: Option<f64>, d| Some(acc.map_or(d, |a| a.max(d))))
        .ok_or(Error::AllNodata)?;
    let height = raw.clamp(opts.min_height_m, opts.max_height_m);
    let clamped = height != raw;
    if clamped {
        warn!("extracted height {raw:.2} m clamped to {height:.2} m");
    }
    Ok(HeightExtraction {
        height_m: height,
        raw_m: raw,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeightFillReport {
    pub from_volumetrics: usize,
    pub from_rasters: usize,
    pub clamped: usize,
    pub failed: usize,
}

/// Fills heights missing after ingestion. Volumetric heights are kept.
pub fn fill_heights(
    records: &mut [BuildingRecord],
    dsm: &RasterGrid,
    dtm: &RasterGrid,
    opts: &HeightOptions,
) -> Result<HeightFillReport> {
    dsm.check_aligned(dtm)?;
    let mut report = HeightFillReport::default();
    for rec in records.iter_mut() {
        if rec.height_m.is_some() {
            report.from_volumetrics += 1;
            continue;
        }
        match extract_height(&rec.footprint, dsm, dtm, opts) {
            Ok(h) => {
                rec.height_m = Some(h.height_m);
                report.from_rasters += 1;
                report.clamped += usize::from(h.clamped);
            }
            Err(Error::EmptyBand | Error::AllNodata) => {
                warn!("no height for parcel {}", rec.parcel_id);
                report.failed += 1;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn header(ncols: usize, nrows: usize, cellsize: f64) -> RasterHeader {
        RasterHeader {
            ncols,
            nrows,
            xll: 0.0,
            yll: 0.0,
            cellsize,
            nodata: -9999.0,
        }
    }

    #[test]
    fn constant_grid_parses() {
        let g =
            parse_raster("NCOLS 2\nNROWS 2\nXLLCORNER 0\nYLLCORNER 0\nCELLSIZE 1\nNODATA_VALUE -9999\n5 5\n5.0 5\n")
                .unwrap();
        assert!(g.values().iter().all(|&v| v == 5.0));
    }

    #[test]
    fn nodata_passes_through() {
        let g = parse_raster("ncols 2\nnrows 1\nxllcorner 0\nyllcorner 0\ncellsize 1\nnodata_value -9999\n-9999 3\n")
            .unwrap();
        assert!(g.is_nodata(g.get((0, 0))));
        assert!(!g.is_nodata(g.get((0, 1))));
    }

    #[test]
    fn value_count_mismatch_reports_line() {
        let err =
            parse_raster("NCOLS 3\nNROWS 2\nXLLCORNER 0\nYLLCORNER 0\nCELLSIZE 1\nNODATA_VALUE -9999\n1 2 3\n1 2\n")
                .unwrap_err();
        match err {
            Error::RasterParse { line, .. } => assert_eq!(line, 8),
            e => panic!("{e:?}"),
        }
        let short = parse_raster("NCOLS 1\nNROWS 2\nXLLCORNER 0\nYLLCORNER 0\nCELLSIZE 1\nNODATA_VALUE -9999\n1\n");
        assert!(matches!(short, Err(Error::RasterParse { .. })));
    }

    #[test]
    fn large_grid_round_trips_bit_identically() {
        let h = header(500, 500, 0.5);
        let mut state = 0x2545F4914F6CDD1Du64;
        let grid = RasterGrid::from_fn(h, |_| {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 300.0 - 50.0
        })
        .unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.asc");
        write_raster(&path, &grid).unwrap();
        let back = load_raster(&path).unwrap();
        assert_eq!(back.header(), grid.header());
        assert!(back
            .values()
            .iter()
            .zip(grid.values())
            .all(|(a, b)| a.to_bits() == b.to_bits()));
    }

    /// Brute force over every raster cell, independent of the bbox pruning.
    fn brute_band_count(fp: &Polygon, g: &RasterGrid, inner: f64, outer: f64) -> usize {
        let h = g.header();
        (0..h.nrows)
            .flat_map(|r| (0..h.ncols).map(move |c| (r, c)))
            .filter(|&c| {
                let d = fp.signed_distance(g.cell_center(c));
                d >= inner && d <= outer
            })
            .count()
    }

    #[test]
    fn square_band_matches_ring_estimate() {
        let g = RasterGrid::from_fn(header(60, 60, 0.5), |_| 0.0).unwrap();
        let fp = Polygon::rectangle(10.0, 10.0, 20.0, 20.0).unwrap();
        let band = buffered_perimeter_cells(&fp, &g, -0.5, 0.5).unwrap();
        let estimate = (40.0 / 0.5) * (1.0 / 0.5);
        assert!(
            (band.cells.len() as f64 - estimate).abs() <= 4.0,
            "{}",
            band.cells.len()
        );
        assert_eq!(band.cells.len(), brute_band_count(&fp, &g, -0.5, 0.5));
        for &c in &band.cells {
            let d = fp.signed_distance(g.cell_center(c));
            assert!((-0.5..=0.5).contains(&d));
        }
    }

    #[test]
    fn disjoint_footprint_has_empty_band() {
        let g = RasterGrid::from_fn(header(10, 10, 1.0), |_| 0.0).unwrap();
        let fp = Polygon::rectangle(100.0, 100.0, 110.0, 110.0).unwrap();
        assert!(matches!(
            buffered_perimeter_cells(&fp, &g, -1.0, 1.0),
            Err(Error::EmptyBand)
        ));
    }

    #[test]
    fn zero_width_band_is_empty_off_grid_lines() {
        let g = RasterGrid::from_fn(header(40, 40, 0.5), |_| 0.0).unwrap();
        let fp = Polygon::rectangle(5.0, 5.0, 15.0, 15.0).unwrap();
        assert!(matches!(
            buffered_perimeter_cells(&fp, &g, 0.0, 0.0),
            Err(Error::EmptyBand)
        ));
    }

    #[test]
    fn constant_difference_height() {
        let dsm = RasterGrid::from_fn(header(40, 40, 0.5), |_| 25.0).unwrap();
        let dtm = RasterGrid::from_fn(header(40, 40, 0.5), |_| 10.0).unwrap();
        let fp = Polygon::rectangle(5.0, 5.0, 15.0, 15.0).unwrap();
        let h = extract_height(&fp, &dsm, &dtm, &HeightOptions::default()).unwrap();
        assert_eq!(h.height_m, 15.0);
        assert!(!h.clamped);
    }

    #[test]
    fn low_difference_is_clamped() {
        let dsm = RasterGrid::from_fn(header(40, 40, 0.5), |_| 11.0).unwrap();
        let dtm = RasterGrid::from_fn(header(40, 40, 0.5), |_| 10.0).unwrap();
        let fp = Polygon::rectangle(5.0, 5.0, 15.0, 15.0).unwrap();
        let h = extract_height(&fp, &dsm, &dtm, &HeightOptions::default()).unwrap();
        assert_eq!(h.height_m, 2.5);
        assert_eq!(h.raw_m, 1.0);
        assert!(h.clamped);
    }

    #[test]
    fn prism_on_sloped_terrain() {
        let fp = Polygon::rectangle(10.2, 8.7, 24.9, 19.3).unwrap();
        let dtm = RasterGrid::from_fn(header(80, 60, 0.5), |p| 0.01 * p.x).unwrap();
        let dsm = RasterGrid::from_fn(header(80, 60, 0.5), |p| {
            0.01 * p.x + if fp.contains(p) { 12.0 } else { 0.0 }
        })
        .unwrap();
        let h = extract_height(&fp, &dsm, &dtm, &HeightOptions::default()).unwrap();
        // Exhaustive oracle: max difference over every cell in the band.
        let oracle = (0..60)
            .flat_map(|r| (0..80).map(move |c| (r, c)))
            .filter(|&c| {
                let d = fp.signed_distance(dsm.cell_center(c));
                (-0.5..=0.5).contains(&d)
            })
            .map(|c| dsm.get(c) - dtm.get(c))
            .fold(f64::NEG_INFINITY, f64::max);
        assert_eq!(h.height_m, oracle);
        assert!((h.height_m - 12.0).abs() <= 0.06);
    }

    #[test]
    fn misaligned_rasters_are_rejected() {
        let dsm = RasterGrid::from_fn(header(10, 10, 0.5), |_| 1.0).unwrap();
        let dtm = RasterGrid::from_fn(header(10, 10, 1.0), |_| 1.0).unwrap();
        let fp = Polygon::rectangle(1.0, 1.0, 3.0, 3.0).unwrap();
        assert!(matches!(
            extract_height(&fp, &dsm, &dtm, &HeightOptions::default()),
            Err(Error::RasterAlignment(_))
        ));
    }

    #[test]
    fn all_nodata_band_fails() {
        let dsm = RasterGrid::from_fn(header(40, 40, 0.5), |_| -9999.0).unwrap();
        let dtm = RasterGrid::from_fn(header(40, 40, 0.5), |_| 0.0).unwrap();
        let fp = Polygon::rectangle(5.0, 5.0, 15.0, 15.0).unwrap();
        assert!(matches!(
            extract_height(&fp, &dsm, &dtm, &HeightOptions::default()),
            Err(Error::AllNodata)
        ));
    }
}
