use thiserror::Error;

/// Errors raised by the measure, projection and estimator routines.
///
/// Each variant carries a stable short code (see [`Error::code`]) that the
/// runner writes into records and diagnostics.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("need at least {needed} usable scales, got {got}")]
    InsufficientScales { needed: usize, got: usize },

    #[error("product would have {atoms} atoms, cap is {cap}")]
    ProductTooLarge { atoms: u128, cap: usize },

    #[error("map produced {got} coordinates, expected {expected}")]
    MapDimension { expected: usize, got: usize },

    #[error("radius or scale {value} is below the resolution floor {floor}")]
    BelowResolution { value: f64, floor: f64 },

    #[error("dimension target {0} outside (0, 1]")]
    BadDimension(f64),

    #[error("construction would have {atoms} atoms, cap is {cap}")]
    TooLarge { atoms: u128, cap: usize },

    #[error("unsupported dimension {0}")]
    UnsupportedDimension(usize),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("frequency {value} is not above {min}")]
    BelowValidRange { value: f64, min: f64 },

    #[error("tail estimate {tail:.3e} exceeds 20% of the truncated value {value:.3e}")]
    TruncationDominated { value: f64, tail: f64 },

    #[error("empty point set")]
    EmptySet,

    #[error("provenance has no level sweep")]
    NoLevelSweep,

    #[error("bin width {width} is below the resolution {resolution}")]
    BinsTooFine { width: f64, resolution: f64 },

    #[error("histogram needs at least two bins")]
    DegenerateBins,

    #[error("distance histograms have different bins")]
    BinMismatch,

    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn code(&self) -> &'static str {
        match self {
            Error::Dimension { .. } => "dimension",
            Error::InvalidMeasure(_) => "invalid_measure",
            Error::InsufficientScales { .. } => "insufficient_scales",
            Error::ProductTooLarge { .. } => "product_too_large",
            Error::MapDimension { .. } => "map_dimension",
            Error::BelowResolution { .. } => "below_resolution",
            Error::BadDimension(_) => "bad_dimension",
            Error::TooLarge { .. } => "too_large",
            Error::UnsupportedDimension(_) => "unsupported_dimension",
            Error::DegenerateInput(_) => "degenerate_input",
            Error::BelowValidRange { .. } => "below_valid_range",
            Error::TruncationDominated { .. } => "truncation_dominated",
            Error::EmptySet => "empty_set",
            Error::NoLevelSweep => "no_level_sweep",
            Error::BinsTooFine { .. } => "bins_too_fine",
            Error::DegenerateBins => "degenerate_bins",
            Error::BinMismatch => "bin_mismatch",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
