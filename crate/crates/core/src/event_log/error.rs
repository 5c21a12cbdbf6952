use thiserror::Error;

/// Errors raised while ingesting or validating an event log.
#[derive(Debug, Error)]
pub enum LogError {
    #[error("malformed XML at line {line}, column {column}: {message}")]
    Xml {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported XES construct <{element}> at line {line}, column {column}: {reason}")]
    Unsupported {
        element: String,
        line: usize,
        column: usize,
        reason: String,
    },
    #[error("trace {case} event {event_index} is missing `{field}`")]
    MissingEventField {
        case: String,
        event_index: usize,
        field: &'static str,
    },
    #[error("trace at position {trace_index} is missing `concept:name`")]
    MissingCaseId { trace_index: usize },
    #[error("trace {case_id} has no events")]
    EmptyTrace { case_id: String },
    #[error("activity label must not be empty")]
    EmptyActivity,
    #[error("case id {0} occurs more than once")]
    DuplicateCaseId(String),
    #[error("attribute `{key}` has invalid {kind} value {value:?}")]
    InvalidAttribute {
        key: String,
        kind: &'static str,
        value: String,
    },
    #[error("column `{0}` is not present in the CSV header")]
    MissingColumn(String),
    #[error("row {row}: cannot parse timestamp {value:?} with format {format:?}")]
    CsvTimestamp {
        row: usize,
        value: String,
        format: String,
    },
    #[error("row {row}: {message}")]
    CsvRow { row: usize, message: String },
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl LogError {
    /// Machine-readable category of the error.
    pub fn code(&self) -> &'static str {
        match self {
            LogError::Xml { .. } | LogError::Csv(_) => "parse_error",
            LogError::MissingColumn(_) => "configuration_error",
            LogError::Io(_) => "io_error",
            _ => "ingestion_error",
        }
    }
}
