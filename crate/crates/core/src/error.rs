use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph spec: {0}")]
    InvalidSpec(String),

    #[error("generating set does not generate the group (graph is disconnected)")]
    DisconnectedGeneratingSet,

    #[error("graph is disconnected")]
    Disconnected,

    #[error("size cap exceeded: {needed} > {limit}")]
    SizeCapExceeded { limit: u64, needed: u64 },

    #[error("operation needs a finite group but factor {0} is infinite")]
    InfiniteFactorPresent(usize),

    #[error("radius too small: need at least {need}, ball has {have}")]
    RadiusTooSmall { need: u32, have: u32 },

    #[error("vertex set is empty")]
    EmptySet,

    #[error("vertex set is the whole graph")]
    FullSet,

    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("source and ground terminals are not connected")]
    DisconnectedTerminals,

    #[error("bad arguments: {0}")]
    BadArguments(String),

    #[error("invalid cutset family: {0}")]
    InvalidCutsets(String),

    #[error("size {m} outside the range covered by the growth profile")]
    OutOfProfileRange { m: u64 },

    #[error("set has empty boundary")]
    EmptyBoundary,

    #[error("no isoperimetric profile available: {0}")]
    ProfileUnavailable(String),

    #[error("domain error: {0}")]
    DomainError(String),

    #[error("missing parameter `{0}`")]
    MissingParam(&'static str),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid manifest: {0}")]
    InvalidManifest(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    /// Stable snake_case name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid_spec",
            Error::DisconnectedGeneratingSet => "disconnected_generating_set",
            Error::Disconnected => "disconnected",
            Error::SizeCapExceeded { .. } => "size_cap_exceeded",
            Error::InfiniteFactorPresent(_) => "infinite_factor_present",
            Error::RadiusTooSmall { .. } => "radius_too_small",
            Error::EmptySet => "empty_set",
            Error::FullSet => "full_set",
            Error::VertexOutOfRange { .. } => "vertex_out_of_range",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::NonConvergence { .. } => "non_convergence",
            Error::DisconnectedTerminals => "disconnected_terminals",
            Error::BadArguments(_) => "bad_arguments",
            Error::InvalidCutsets(_) => "invalid_cutsets",
            Error::OutOfProfileRange { .. } => "out_of_profile_range",
            Error::EmptyBoundary => "empty_boundary",
            Error::ProfileUnavailable(_) => "profile_unavailable",
            Error::DomainError(_) => "domain_error",
            Error::MissingParam(_) => "missing_param",
            Error::Parse(_) => "parse",
            Error::InvalidManifest(_) => "invalid_manifest",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
        }
    }

    /// One-table TOML record: `[error]` with `kind` and `message`.
    pub fn record(&self) -> String {
        let mut inner = toml::Table::new();
        inner.insert("kind".into(), self.kind().into());
        inner.insert("message".into(), self.to_string().into());
        let mut outer = toml::Table::new();
        outer.insert("error".into(), inner.into());
        outer.to_string()
    }
}
