use thiserror::Error;

/// Every failure the library reports. The CLI prints `class()` in front of the message.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("unsupported representation: {0}")]
    Unsupported(String),
    #[error("depth error: {0}")]
    Depth(String),
    #[error("precision error at index {index}: {detail}")]
    Precision { index: usize, detail: String },
    #[error("precision error: root not stabilized at horizon {horizon} (s_N = {s_n}, s_2N = {s_2n})")]
    Unstable { horizon: usize, s_n: f64, s_2n: f64 },
    #[error("resolution error at index {index}: {detail}")]
    Resolution { index: usize, detail: String },
    #[error("search error: {0}")]
    Search(String),
    #[error("structural error: {0}")]
    Structural(String),
    #[error("shape error: {0}")]
    Shape(String),
    #[error("construction error: {0}")]
    Construction(String),
}

impl Error {
    pub fn class(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Unsupported(_) => "representation",
            Error::Depth(_) => "depth",
            Error::Precision { .. } | Error::Unstable { .. } => "precision",
            Error::Resolution { .. } => "resolution",
            Error::Search(_) => "search",
            Error::Structural(_) => "structural",
            Error::Shape(_) => "shape",
            Error::Construction(_) => "construction",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
