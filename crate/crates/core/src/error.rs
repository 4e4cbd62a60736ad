use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("utterance `{0}` is consistent with no hypothesis")]
    EmptyRow(String),
    #[error("hypothesis `{0}` is consistent with no utterance")]
    EmptyColumn(String),
    #[error("no valid lexicon found after {rounds} rejection rounds")]
    SamplingExhausted { rounds: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("index {index} out of range for {what} of length {len}")]
    IndexOutOfRange {
        what: &'static str,
        index: usize,
        len: usize,
    },
    #[error("normalizer left the double range at depth {depth}")]
    NumericalUnderflow { depth: usize },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("hypothesis {hypothesis} is inconsistent with the utterance at position {position}")]
    InconsistentTarget { hypothesis: usize, position: usize },
    #[error("no program matches all examples")]
    NoConsistentProgram,
    #[error("ranking requested at depth {requested}, chain has depth {available}")]
    DepthTooShallow { requested: usize, available: usize },
    #[error("no utterance keeps hypothesis {0} consistent")]
    SpeakerStuck(usize),
    #[error("no record ranks two or more programs")]
    DegenerateData,
    #[error("malformed program: {0}")]
    MalformedProgram(String),
    #[error("program `{0}` matches no string within the length bound")]
    CoverageImpossible(String),
    #[error("only {available} distinct strings available, {requested} requested")]
    InsufficientStrings { requested: usize, available: usize },
}

pub(crate) fn check_index(what: &'static str, index: usize, len: usize) -> Result<()> {
    if index < len {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange { what, index, len })
    }
}
