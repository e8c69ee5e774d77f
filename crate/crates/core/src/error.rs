use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unsupported order {0}: only negative orders are implemented")]
    UnsupportedOrder(i64),

    #[error("singular denominator in {context} (n = {n}, argument = {argument})")]
    SingularDenominator {
        context: &'static str,
        n: usize,
        argument: f64,
    },

    #[error("quadrature did not converge in {context}: estimated error {estimate:e} exceeds {tolerance:e}")]
    Accuracy {
        context: String,
        estimate: f64,
        tolerance: f64,
    },

    #[error("kernel outside the physical regime at q = {q_scaled} (pivot {pivot} = {value:e}); spectral radius of the round-trip operator reached 1")]
    PhysicalRegime {
        q_scaled: f64,
        pivot: usize,
        value: f64,
    },

    #[error("extrapolation rejected: {0}")]
    FitRejected(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// Machine-readable tag used in CLI diagnostics.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::UnsupportedOrder(_) => "unsupported-order",
            Error::SingularDenominator { .. } => "singular-denominator",
            Error::Accuracy { .. } => "accuracy",
            Error::PhysicalRegime { .. } => "physical-regime",
            Error::FitRejected(_) => "fit-rejected",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
            Error::Csv(_) => "csv",
            Error::Json(_) => "json",
        }
    }
}
