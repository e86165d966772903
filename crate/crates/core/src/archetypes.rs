//! Construction-period archetypes and their envelope parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Construction-period bins, in chronological order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ArchetypePeriod {
    #[serde(rename = "PRE1900")]
    Pre1900,
    #[serde(rename = "Y1901_1920")]
    Y1901To1920,
    #[serde(rename = "Y1921_1945")]
    Y1921To1945,
    #[serde(rename = "Y1946_1960")]
    Y1946To1960,
    #[serde(rename = "Y1961_1975")]
    Y1961To1975,
    #[serde(rename = "Y1976_1990")]
    Y1976To1990,
    #[serde(rename = "Y1991_2005")]
    Y1991To2005,
    #[serde(rename = "POST2005")]
    Post2005,
}

impl ArchetypePeriod {
    pub const ALL: [ArchetypePeriod; 8] = [
        ArchetypePeriod::Pre1900,
        ArchetypePeriod::Y1901To1920,
        ArchetypePeriod::Y1921To1945,
        ArchetypePeriod::Y1946To1960,
        ArchetypePeriod::Y1961To1975,
        ArchetypePeriod::Y1976To1990,
        ArchetypePeriod::Y1991To2005,
        ArchetypePeriod::Post2005,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    pub fn label(self) -> &'static str {
        match self {
            ArchetypePeriod::Pre1900 => "PRE1900",
            ArchetypePeriod::Y1901To1920 => "Y1901_1920",
            ArchetypePeriod::Y1921To1945 => "Y1921_1945",
            ArchetypePeriod::Y1946To1960 => "Y1946_1960",
            ArchetypePeriod::Y1961To1975 => "Y1961_1975",
            ArchetypePeriod::Y1976To1990 => "Y1976_1990",
            ArchetypePeriod::Y1991To2005 => "Y1991_2005",
            ArchetypePeriod::Post2005 => "POST2005",
        }
    }

    /// Inclusive year range covered by the bin. The open ends are capped at
    /// the accepted year bounds.
    pub fn years(self) -> (i32, i32) {
        match self {
            ArchetypePeriod::Pre1900 => (MIN_YEAR, 1900),
            ArchetypePeriod::Y1901To1920 => (1901, 1920),
            ArchetypePeriod::Y1921To1945 => (1921, 1945),
            ArchetypePeriod::Y1946To1960 => (1946, 1960),
            ArchetypePeriod::Y1961To1975 => (1961, 1975),
            ArchetypePeriod::Y1976To1990 => (1976, 1990),
            ArchetypePeriod::Y1991To2005 => (1991, 2005),
            ArchetypePeriod::Post2005 => (2006, MAX_YEAR),
        }
    }
}

impl fmt::Display for ArchetypePeriod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for ArchetypePeriod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|p| p.label() == s.trim())
            .ok_or_else(|| Error::Schema(format!("unknown period {s:?}")))
    }
}

pub const MIN_YEAR: i32 = 1000;
pub const MAX_YEAR: i32 = 2100;

/// Period used when a building has no known construction year.
pub const DEFAULT_FALLBACK_PERIOD: ArchetypePeriod = ArchetypePeriod::Y1946To1960;

pub fn assign_period(year: Option<i32>, fallback: ArchetypePeriod) -> Result<ArchetypePeriod> {
    let Some(year) = year else {
        return Ok(fallback);
    };
    if !(MIN_YEAR..=MAX_YEAR).contains(&year) {
        return Err(Error::Validation(format!(
            "construction year {year} outside [{MIN_YEAR}, {MAX_YEAR}]"
        )));
    }
    Ok(ArchetypePeriod::ALL
        .into_iter()
        .find(|p| year <= p.years().1)
        .unwrap_or(ArchetypePeriod::Post2005))
}

/// Aggregate envelope parameters of one archetype variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopeSpec {
    pub u_wall: f64,
    pub u_roof: f64,
    pub u_floor: f64,
    pub u_window: f64,
    pub shgc: f64,
    pub infiltration_ach: f64,
    /// J/(m2 K) per unit of conditioned floor area.
    pub thermal_capacitance_per_floor_area: f64,
}

impl EnvelopeSpec {
    pub fn u_values(&self) -> [f64; 4] {
        [self.u_wall, self.u_roof, self.u_floor, self.u_window]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, u) in ["u_wall", "u_roof", "u_floor", "u_window"].iter().zip(self.u_values()) {
            if !(u > 0.0 && u <= 6.0) {
                return Err(Error::Validation(format!("{name} = {u} outside (0, 6]")));
            }
        }
        if !(self.shgc > 0.0 && self.shgc <= 1.0) {
            return Err(Error::Validation(format!("shgc = {} outside (0, 1]", self.shgc)));
        }
        if !(self.infiltration_ach > 0.0 && self.infiltration_ach <= 3.0) {
            return Err(Error::Validation(format!(
                "infiltration_ach = {} outside (0, 3]",
                self.infiltration_ach
            )));
        }
        if !(self.thermal_capacitance_per_floor_area > 0.0) {
            return Err(Error::Validation("capacitance must be > 0".into()));
        }
        Ok(())
    }

    /// True when no U-value and no infiltration rate exceeds `baseline`'s.
    pub fn dominates(&self, baseline: &EnvelopeSpec) -> bool {
        self.u_values().iter().zip(baseline.u_values()).all(|(r, b)| *r <= b)
            && self.infiltration_ach <= baseline.infiltration_ach
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeEntry {
    pub baseline: EnvelopeSpec,
    pub standard_retrofit: EnvelopeSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArchetypeTable {
    entries: [ArchetypeEntry; 8],
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Baseline,
    StandardRetrofit,
}

#[derive(Debug, Deserialize, Serialize)]
struct TableRow {
    period: String,
    variant: Variant,
    u_wall: f64,
    u_roof: f64,
    u_floor: f64,
    u_window: f64,
    shgc: f64,
    infiltration_ach: f64,
    capacitance: f64,
}

const BUNDLED_TABLE: &str = include_str!("../data/archetypes.csv");

impl ArchetypeTable {
    /// Table shipped with the crate (residential, Italian climate zone E orders of magnitude).
    pub fn bundled() -> Self {
        Self::parse_csv(BUNDLED_TABLE).expect("bundled archetype table is valid")
    }

    pub fn bundled_csv() -> &'static str {
        BUNDLED_TABLE
    }

    pub fn new(entries: [ArchetypeEntry; 8]) -> Result<Self> {
        let table = ArchetypeTable { entries };
        table.validate()?;
        Ok(table)
    }

    pub fn get(&self, period: ArchetypePeriod) -> &ArchetypeEntry {
        &self.entries[period.index()]
    }

    pub fn spec(&self, period: ArchetypePeriod, variant: Variant) -> &EnvelopeSpec {
        let e = self.get(period);
        match variant {
            Variant::Baseline => &e.baseline,
            Variant::StandardRetrofit => &e.standard_retrofit,
        }
    }

    fn validate(&self) -> Result<()> {
        for (period, e) in ArchetypePeriod::ALL.iter().zip(&self.entries) {
            e.baseline
                .validate()
                .map_err(|err| Error::Validation(format!("{period} baseline: {err}")))?;
            e.standard_retrofit
                .validate()
                .map_err(|err| Error::Validation(format!("{period} retrofit: {err}")))?;
            if !e.standard_retrofit.dominates(&e.baseline) {
                return Err(Error::Validation(format!(
                    "{period}: standard retrofit does not dominate baseline"
                )));
            }
        }
        Ok(())
    }

    /// Baseline U-values that increase from one period to the next.
    pub fn chronology_warnings(&self) -> Vec<String> {
        let names = ["u_wall", "u_roof", "u_floor", "u_window"];
        let mut out = Vec::new();
        for w in ArchetypePeriod::ALL.windows(2) {
            let (a, b) = (self.get(w[0]).baseline.u_values(), self.get(w[1]).baseline.u_values());
            for i in 0..4 {
                if b[i] > a[i] {
                    out.push(format!("{} {} increases from {} to {}", names[i], w[1], a[i], b[i]));
                }
            }
        }
        out
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut found: BTreeMap<(ArchetypePeriod, u8), EnvelopeSpec> = BTreeMap::new();
        for row in reader.deserialize::<TableRow>() {
            let row = row.map_err(|e| Error::Schema(e.to_string()))?;
            let period: ArchetypePeriod = row.period.parse()?;
            let key = (period, row.variant as u8);
            let spec = EnvelopeSpec {
                u_wall: row.u_wall,
                u_roof: row.u_roof,
                u_floor: row.u_floor,
                u_window: row.u_window,
                shgc: row.shgc,
                infiltration_ach: row.infiltration_ach,
                thermal_capacitance_per_floor_area: row.capacitance,
            };
            if found.insert(key, spec).is_some() {
                return Err(Error::Schema(format!("duplicate row {period} {:?}", row.variant)));
            }
        }
        let mut entries = Vec::with_capacity(8);
        for period in ArchetypePeriod::ALL {
            let pick = |v: Variant| {
                found
                    .get(&(period, v as u8))
                    .copied()
                    .ok_or_else(|| Error::Schema(format!("missing {period} {v:?}")))
            };
            entries.push(ArchetypeEntry {
                baseline: pick(Variant::Baseline)?,
                standard_retrofit: pick(Variant::StandardRetrofit)?,
            });
        }
        let table = ArchetypeTable::new(entries.try_into().expect("eight periods"))?;
        for w in table.chronology_warnings() {
            warn!("archetype table: {w}");
        }
        Ok(table)
    }

    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for period in ArchetypePeriod::ALL {
            for variant in [Variant::Baseline, Variant::StandardRetrofit] {
                let s = self.spec(period, variant);
                writer
                    .serialize(TableRow {
                        period: period.label().into(),
                        variant,
                        u_wall: s.u_wall,
                        u_roof: s.u_roof,
                        u_floor: s.u_floor,
                        u_window: s.u_window,
                        shgc: s.shgc,
                        infiltration_ach: s.infiltration_ach,
                        capacitance: s.thermal_capacitance_per_floor_area,
                    })
                    .expect("in-memory csv");
            }
        }
        String::from_utf8(writer.into_inner().expect("in-memory csv")).expect("utf8")
    }
}

pub fn load_archetype_table(path: &Path) -> Result<ArchetypeTable> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ArchetypeTable::parse_csv(&text)
}
