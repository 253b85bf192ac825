use thiserror::Error;

/// One probe of the characteristic function recorded during eigenvalue bracketing.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Probe {
    pub lambda: f64,
    pub w: f64,
    /// Sign changes of the Cauchy solution on the interior grid nodes.
    pub nodes: usize,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("grid too coarse for lambda = {lambda}: need n_grid >= {required}, have {actual}")]
    Resolution {
        lambda: f64,
        required: usize,
        actual: usize,
    },

    #[error("unsupported domain: {0}")]
    UnsupportedDomain(String),

    #[error("eigenvalue bracketing failed: {message}")]
    Bracketing { message: String, probes: Vec<Probe> },

    #[error("internal consistency: {0}")]
    Consistency(String),

    /// A Wronskian or tail factor that must stay positive did not.
    #[error("{what} not positive: minimum {min:e} at node {node}")]
    Positivity {
        what: &'static str,
        min: f64,
        node: usize,
    },

    #[error("shift hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("inadmissible spectral data: ordering fails at n = {first_violation}")]
    Inadmissible { first_violation: usize },

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("stage {stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    /// Innermost error after unwrapping step and stage tags.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } | Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    pub(crate) fn at_step(self, step: usize) -> Error {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    pub(crate) fn in_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
