use thiserror::Error;

/// Errors raised by the exact and numeric routines in this crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("exponent must be at least 1, got {0}")]
    ExponentBelowOne(String),

    #[error("exponent must be greater than 1, got {0}")]
    ExponentNotAboveOne(String),

    #[error("{what} = {value} is outside the supported range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: &'static str,
    },

    #[error("T_t with t = {0} has an irrational kernel; use the certified evaluator")]
    InexactShift(String),

    #[error("operator {0} is not supported here")]
    UnsupportedOperator(String),

    #[error("tail of {kernel} kernel against {decay} input diverges")]
    DivergentTail {
        kernel: &'static str,
        decay: &'static str,
    },

    #[error("truncation radius {radius} too small: need at least {needed}")]
    TruncationTooSmall { radius: u64, needed: u64 },

    #[error("argument {0}*pi sits on a jump of the symbol")]
    SymbolJump(String),

    #[error("frame syntax error at byte {pos}: {msg}")]
    FrameSyntax { pos: usize, msg: String },

    #[error("expression syntax error at byte {pos}: {msg}")]
    ExprSyntax { pos: usize, msg: String },

    #[error("frame {0} has a set level without a bare bone, so its building is not finitely supported")]
    NotFinitelySupported(String),

    #[error("frame {0} is not a skeleton")]
    NotASkeleton(String),

    #[error("sequence file: {0}")]
    SequenceFile(String),

    #[error("bisection bracket [{lo}, {hi}] does not enclose a root")]
    Bracket { lo: String, hi: String },

    #[error("size mismatch: expected radius {expected}, got {got}")]
    SizeMismatch { expected: usize, got: usize },

    #[error("empty window [{0}, {1}]")]
    EmptyWindow(i64, i64),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn out_of_range(
    what: &'static str,
    value: impl ToString,
    range: &'static str,
) -> Error {
    Error::OutOfRange {
        what,
        value: value.to_string(),
        range,
    }
}
