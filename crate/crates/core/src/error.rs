use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// User-facing configuration problem; `field` is the offending key path.
    #[error("invalid configuration at `{field}`: {reason}")]
    Config { field: String, reason: String },

    /// A field or intermediate product stopped being finite.
    #[error("non-finite value in {context} at index {index}")]
    NumericalState { context: &'static str, index: usize },

    /// Internal invariant broken; indicates a bug upstream, not bad input.
    #[error("contract violation: {0}")]
    Contract(String),

    #[error("k = {k} lies outside the real band (omega^2 = {omega_sq}){}", band_edge_note(*.band_edge))]
    Evanescent {
        k: f64,
        omega_sq: f64,
        band_edge: Option<f64>,
    },

    #[error("domain error: {0}")]
    Domain(String),

    /// A normalising reference quantity (norm, peak) vanished.
    #[error("undefined reference: {0}")]
    UndefinedReference(String),

    #[error("convergence study aborted at {level}: blow-up at t = {t_blow}")]
    ConvergenceAborted { level: String, t_blow: f64 },

    #[error("i/o error on {path}: {message}")]
    Io { path: String, message: String },
}

fn band_edge_note(edge: Option<f64>) -> String {
    match edge {
        Some(e) => format!("; band edge at |k| = {e}"),
        None => String::new(),
    }
}

impl Error {
    pub fn config(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            field: field.into(),
            reason: reason.into(),
        }
    }

    pub fn io(path: impl AsRef<std::path::Path>, err: std::io::Error) -> Self {
        Error::Io {
            path: path.as_ref().display().to_string(),
            message: err.to_string(),
        }
    }
}
