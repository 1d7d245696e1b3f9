use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeomError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("point set is not full-dimensional (affine rank {rank} < {dim})")]
    Degenerate { rank: usize, dim: usize },
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("configurations are limited to {max} points, got {got}")]
    TooManyPoints { max: usize, got: usize },
    #[error("duplicate point at indices {0} and {1}")]
    DuplicatePoint(usize, usize),
    #[error("expected {expected} vertices, got {got}")]
    WrongVertexCount { expected: usize, got: usize },
    #[error("configuration is not a lattice configuration")]
    NotLattice,
    #[error("non-finite coordinate {0}")]
    NonFinite(f64),
    #[error("dimension {0} is outside the supported range 1..=5")]
    UnsupportedDimension(usize),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TriError {
    #[error("face {0} is not in the triangulation's closure")]
    FaceNotInClosure(String),
    #[error("lower hull of the lifted points has a non-simplicial cell")]
    DegenerateHeights,
    #[error("expected {expected} heights, got {got}")]
    HeightCount { expected: usize, got: usize },
    #[error("flip action is stale: its removed simplices are not all present")]
    StaleAction,
    #[error("vertex id {0} is not a configuration index")]
    InvalidVertex(usize),
    #[error("triangulation is not regular")]
    NotRegular,
    #[error("triangulation does not use every point")]
    NotFine,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, message: impl Into<String>) -> Self {
        ParseError { line, message: message.into() }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GapError {
    #[error("reference value {value} for instance {index} is not positive")]
    NonPositiveReference { index: usize, value: f64 },
    #[error("{best} best values but {reference} references")]
    LengthMismatch { best: usize, reference: usize },
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormatError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid configuration: {0}")]
    Geom(#[from] GeomError),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GenError {
    #[error("invalid generation spec: {0}")]
    InvalidSpec(String),
    #[error("draw cap reached after {draws} draws with {accepted} of {target} configurations accepted")]
    DrawCap { draws: usize, accepted: usize, target: usize },
}

/// Failure reading a dataset directory.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("{path}: {message}")]
    Io { path: String, message: String },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("manifest: {0}")]
    Manifest(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrstError {
    #[error("configuration is not a lattice configuration")]
    NotLattice,
    #[error("the origin is not one of the points")]
    NoOrigin,
    #[error("the origin is not interior to the hull")]
    OriginOnBoundary,
    #[error("expected all {expected} lattice points of the hull, found {found}")]
    MissingLatticePoints { expected: usize, found: usize },
    #[error(transparent)]
    Geom(#[from] GeomError),
}
