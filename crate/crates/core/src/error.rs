use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: field `{field}` must be positive, got {value}")]
    NonPositiveSe {
        line: usize,
        field: &'static str,
        value: f64,
    },

    #[error("line {line}: duplicate variant id `{id}`")]
    DuplicateId { line: usize, id: String },

    #[error("dataset contains no variants")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("variant `{variant}` has a zero association with the exposure")]
    ZeroExposureAssociation { variant: String },

    #[error("need at least {needed} variants, got {got}")]
    TooFewVariants { needed: usize, got: usize },

    #[error("degenerate design: {0}")]
    DegenerateDesign(String),

    #[error("scale mismatch: {0}")]
    WrongScale(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("genotype has no variation")]
    NoGeneticVariation,

    #[error("genotype is not associated with the exposure (zero first-stage slope)")]
    NoFirstStage,

    #[error("instrument stratum g={0} has no observations")]
    EmptyStratum(u8),

    #[error("no compliers in the population")]
    NoCompliers,

    #[error("instrument group g={0} is empty")]
    EmptyInstrumentGroup(u8),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("config line {line}: {message}")]
    Config { line: usize, message: String },
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    pub(crate) fn config(line: usize, message: impl Into<String>) -> Self {
        Error::Config {
            line,
            message: message.into(),
        }
    }
}
