use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {0:?} is not a masked node of the domain")]
    NodeOutsideMask(Vec<f64>),

    #[error("not enough masked neighbours along axis {axis} for a second-order stencil at cell {cell}")]
    BoundaryStencil { axis: usize, cell: usize },

    #[error("field is not smooth enough for {0}")]
    NotSmooth(&'static str),

    #[error("mollifier radius {eps} is below half the cell width {half_width}")]
    UnresolvedMollifier { eps: f64, half_width: f64 },

    #[error("kernel support radius {support} is smaller than the cell width {cell}")]
    UnderResolvedKernel { support: f64, cell: f64 },

    #[error("kernel takes a negative value {value} at r = {r}")]
    NegativeKernel { r: f64, value: f64 },

    #[error("double integral diverges near the diagonal (local radial exponent {exponent} <= 0)")]
    Divergent { exponent: f64 },

    #[error("ascent step rejected: {0}")]
    StepSize(String),

    #[error("domain containment violated: {0}")]
    ContainmentViolated(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("rotation check failed: q changes by {deviation:e} (> {tolerance:e}) under a change of direction")]
    RotationCheck { deviation: f64, tolerance: f64 },

    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("nodes do not form a complete tensor grid: {0}")]
    TensorGrid(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
