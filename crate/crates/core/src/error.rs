use thiserror::Error;

/// Errors raised by the numerical core and the harness.
#[derive(Debug, Error)]
pub enum Error {
    #[error("grid: {0}")]
    Grid(String),

    #[error("singular metric at point {index} (grid coords {coords:?})")]
    SingularMetric { index: usize, coords: [usize; 3] },

    #[error("metric not positive definite at point {index} (grid coords {coords:?})")]
    MetricNotPositive { index: usize, coords: [usize; 3] },

    #[error("unsupported tensor valence: rank {0} exceeds the supported maximum of 4")]
    UnsupportedValence(usize),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("causality violation: discriminant {discriminant:e} < 0 (state too large)")]
    Causality { discriminant: f64 },

    #[error("transform domain violated: psi + c2 = {psi_plus_c2:e} (c2 = {c2})")]
    TransformDomain { psi_plus_c2: f64, c2: f64 },

    #[error("hyperbolicity lost{}: {detail}", .point.map(|p| format!(" at point {p}")).unwrap_or_default())]
    HyperbolicityLoss { point: Option<usize>, detail: String },

    #[error("coercivity guard violated: delta1 * max|Ric|_op = {product:.4} >= 1")]
    Coercivity { product: f64 },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
