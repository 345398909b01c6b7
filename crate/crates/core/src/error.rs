use thiserror::Error;

pub type Result<T> = std::result::Result<T, ImcfError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ImcfError {
    #[error("ambient dimension must be at least 3, got {0}")]
    DimensionTooSmall(usize),
    #[error("full 2-sphere grids exist only for ambient dimension 3, got {0}")]
    FullGridDimension(usize),
    #[error("resolution must be at least 8, got {0}")]
    ResolutionTooSmall(usize),
    #[error("longitude count must be even, got {0}")]
    OddLongitudeCount(usize),
    #[error("field has {found} values but the grid has {expected} nodes")]
    ShapeMismatch { expected: usize, found: usize },
    #[error("non-finite value at node {node}")]
    NonFinite { node: usize },
    #[error("radius must be positive, found {value} at node {node}")]
    NonPositiveRadius { node: usize, value: f64 },
    #[error("induced metric is not positive definite at node {node}")]
    MetricNotPositiveDefinite { node: usize },
    #[error("mean convexity violated at node {node}: p1 = {p1}")]
    MeanConvexity { node: usize, p1: f64 },
    #[error("field must be strictly positive, found {value} at node {node}")]
    NonPositiveField { node: usize, value: f64 },
    #[error(
        "the Sobolev inequality on S^(n-1) needs n >= 4; at n = {0} form (ii) is undefined \
         and form (i) collapses to the identity omega_2 >= omega_2"
    )]
    BecknerDimension(usize),
    #[error("Hawking mass is defined for surfaces in H^3 only, got n = {0}")]
    HawkingDimension(usize),
    #[error("invalid shape: {0}")]
    InvalidShape(String),
    #[error("invalid flow configuration: {0}")]
    InvalidFlowConfig(String),
}

impl ImcfError {
    /// Short machine-readable tag, stable across releases.
    pub fn kind(&self) -> &'static str {
        match self {
            ImcfError::DimensionTooSmall(_) => "dimension_too_small",
            ImcfError::FullGridDimension(_) => "full_grid_dimension",
            ImcfError::ResolutionTooSmall(_) => "resolution_too_small",
            ImcfError::OddLongitudeCount(_) => "odd_longitude_count",
            ImcfError::ShapeMismatch { .. } => "shape_mismatch",
            ImcfError::NonFinite { .. } => "non_finite",
            ImcfError::NonPositiveRadius { .. } => "non_positive_radius",
            ImcfError::MetricNotPositiveDefinite { .. } => "metric_not_spd",
            ImcfError::MeanConvexity { .. } => "mean_convexity",
            ImcfError::NonPositiveField { .. } => "non_positive_field",
            ImcfError::BecknerDimension(_) => "beckner_dimension",
            ImcfError::HawkingDimension(_) => "hawking_dimension",
            ImcfError::InvalidShape(_) => "invalid_shape",
            ImcfError::InvalidFlowConfig(_) => "invalid_flow_config",
        }
    }
}
