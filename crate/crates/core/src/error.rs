use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("placement failed: {0}")]
    Placement(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("beam id {id} out of range for codebook of {len} entries")]
    BeamOutOfRange { id: usize, len: usize },

    #[error("codebook size mismatch: expected {expected}, got {got}")]
    CodebookSize { expected: usize, got: usize },

    #[error("label {label} out of range for {classes} classes")]
    LabelOutOfRange { label: usize, classes: usize },

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("non-finite {what} at epoch {epoch}, batch {batch}")]
    NonFinite {
        what: &'static str,
        epoch: usize,
        batch: usize,
    },

    #[error("non-finite model parameter at index {0}")]
    NonFiniteParameter(usize),

    #[error("empty dataset: {0}")]
    EmptyDataset(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}
