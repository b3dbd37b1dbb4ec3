use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid frequency span: start {start} + width {width} exceeds 2^{precision} or width is zero")]
    InvalidSpan {
        start: u32,
        width: u32,
        precision: u32,
    },

    #[error("precision {0} is outside the supported range 1..=31")]
    InvalidPrecision(u32),

    /// Popping needed one more 32-bit word than the message holds.
    #[error("message underflow: pop needs 32 more bits of initial buffer (raise init_words)")]
    Underflow,

    /// A codec ran out of initial bits. `required_words` is the buffer size a
    /// dry run needed for the same input.
    #[error("initial buffer exhausted: init_words = {init_words}, this input needs init_words >= {required_words}")]
    InitBufferExhausted {
        init_words: usize,
        required_words: usize,
    },

    #[error("{symbols} symbols cannot be coded at precision {precision}")]
    Capacity { symbols: usize, precision: u32 },

    #[error("invalid probability vector: {0}")]
    InvalidDistribution(&'static str),

    #[error("symbol {symbol} out of range for alphabet of size {size}")]
    SymbolOutOfRange { symbol: usize, size: usize },

    #[error("observation has zero probability under the model at t = {t}")]
    ZeroLikelihood { t: usize },

    #[error("invalid model: {0}")]
    InvalidModel(&'static str),

    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),

    #[error("malformed message: {0}")]
    Format(&'static str),
}
