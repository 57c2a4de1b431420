use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point:?} lies outside the model domain")]
    Domain { point: Vec<f64> },

    #[error("matrix is not in the span of the Lie algebra basis (residual {residual:.3e})")]
    Representation { residual: f64 },

    #[error("finite-difference step h = {h:e} is unreliable: Richardson pair disagrees by {disagreement:.3e}")]
    StepSize { h: f64, disagreement: f64 },

    #[error("unknown model `{0}`")]
    UnknownModel(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("singular configuration: {0}")]
    Singularity(String),

    #[error("splitting curvature is not central (residual {residual:.3e})")]
    Centrality { residual: f64 },

    #[error("integrator failed: {0}")]
    Integrator(String),

    #[error(
        "quadrature did not converge: estimated error {estimate:.3e} after {evaluations} cells"
    )]
    Quadrature { estimate: f64, evaluations: usize },

    #[error("model is not of the required geometric type: {0}")]
    Type(String),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
