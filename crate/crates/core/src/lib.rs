//! Urban building energy modeling at city scale.
//!
//! The pipeline turns GIS layers (or a generated synthetic city) into one
//! LoD1 model per building and simulates hourly heating and cooling demand.
//! It then evaluates every combination of per-period envelope retrofits.
//!
//! Stages, each writing `<out>/<stage>/`:
//!
//! 1. [`synthcity`]: deterministic footprints, heights, years, rasters and weather.
//! 2. [`ingest`]: footprint, volumetric, civic-number and neighborhood layers into [`ingest::BuildingRecord`]s.
//! 3. [`terrain`]: missing heights from DSM minus DTM along the footprint perimeter.
//! 4. [`model`] with [`archetypes`]: extruded prisms, windows at one eighth of plan area, shading horizons.
//! 5. [`engine`] under [`orchestrator`]: hourly lumped-capacitance and monthly quasi-steady demand.
//! 6. [`scenario`]: 256 retrofit masks, Pareto front, neighborhood savings.
//! 7. [`analytics`]: histograms, cumulative curve, CO2, radius sensitivity, report bundle.
//!
//! [`stages`] wires the modules to the on-disk layout used by the `ubem` binary.
//! [`config::PipelineConfig`] carries every tunable.
//!
//! ```no_run
//! let cfg = ubem::config::PipelineConfig::default();
//! for report in ubem::stages::run_chain(&cfg)? {
//!     println!("{report}");
//! }
//! # Ok::<(), ubem::Error>(())
//! ```

// Negated float comparisons are how validators reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytics;
pub mod archetypes;
pub mod config;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod ingest;
pub mod model;
pub mod orchestrator;
pub mod scenario;
pub mod stages;
pub mod synthcity;
pub mod terrain;

pub use error::{Error, Result};
