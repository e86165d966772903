use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("geojson parse error in {path} (feature {index:?}): {message}")]
    GeoJson {
        path: PathBuf,
        index: Option<usize>,
        message: String,
    },

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("integration error: duplicate parcel id {0:?}")]
    DuplicateParcel(String),

    #[error("raster parse error at line {line}: {message}")]
    RasterParse { line: usize, message: String },

    #[error("raster alignment error: {0}")]
    RasterAlignment(String),

    #[error("no raster cells found in perimeter band")]
    EmptyBand,

    #[error("all perimeter band cells are nodata")]
    AllNodata,

    #[error("validation error: {0}")]
    Validation(String),

    #[error("archetype table schema error: {0}")]
    Schema(String),

    #[error("model build error for {parcel_id}: {message}")]
    Build { parcel_id: String, message: String },

    #[error("model file format error: {0}")]
    Format(String),

    #[error("weather file format error: {0}")]
    Weather(String),

    #[error("non-finite zone state at hour {hour}")]
    Numeric { hour: usize },

    #[error("run aborted: {failed} of {total} tasks failed")]
    RunAborted { failed: usize, total: usize },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("scenario evaluation error: {0}")]
    Scenario(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("missing output of stage '{stage}': {path} not found (run `ubem {stage}` first)")]
    MissingStage { stage: &'static str, path: PathBuf },

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable snake_case tag for machine-readable reporting.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Io { .. } => "io",
            Error::GeoJson { .. } => "geojson",
            Error::Geometry(_) => "geometry",
            Error::DuplicateParcel(_) => "duplicate_parcel",
            Error::RasterParse { .. } => "raster_parse",
            Error::RasterAlignment(_) => "raster_alignment",
            Error::EmptyBand => "empty_band",
            Error::AllNodata => "all_nodata",
            Error::Validation(_) => "validation",
            Error::Schema(_) => "schema",
            Error::Build { .. } => "build",
            Error::Format(_) => "format",
            Error::Weather(_) => "weather",
            Error::Numeric { .. } => "numeric",
            Error::RunAborted { .. } => "run_aborted",
            Error::Input(_) => "input",
            Error::Scenario(_) => "scenario",
            Error::Config(_) => "config",
            Error::MissingStage { .. } => "missing_stage",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
