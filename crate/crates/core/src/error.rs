use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("row {row} out of range for array of {rows} rows")]
    RowOutOfRange { row: usize, rows: usize },
    #[error("inconsistent truth table: {0}")]
    InconsistentTable(String),
    #[error("field `{0}` is not allocated")]
    UnallocatedField(String),
    #[error("insufficient columns: need {needed}, row has {available}")]
    InsufficientColumns { needed: usize, available: usize },
    #[error("infeasible co-location: {0}")]
    InfeasibleColocation(String),
    #[error("no hazard-free schedule: {0}")]
    Hazard(String),
    #[error("strategy not applicable: {0}")]
    NotApplicable(String),
    #[error("width mismatch: {0}")]
    WidthMismatch(String),
    #[error("symbol {symbol:?} is not in the {alphabet} alphabet")]
    SymbolOutOfAlphabet { symbol: char, alphabet: &'static str },
    #[error("sequence of length {len} does not fit an array of {rows} rows")]
    SequenceTooLong { len: usize, rows: usize },
    #[error("database needs {needed} rows, array has {rows}")]
    CapacityExceeded { needed: usize, rows: usize },
    #[error("score width {width} bits is too small, {required} bits required")]
    ScoreWidth { width: u32, required: u32 },
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("database is not populated")]
    EmptyDatabase,
    #[error("requested top {k} of {available} sequences")]
    TopKTooLarge { k: usize, available: usize },
    #[error("truth table with {0} input bits is too large to verify exhaustively")]
    TableTooLarge(usize),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
