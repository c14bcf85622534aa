// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors surfaced by the library. Diagnostics that do not abort processing
/// (count mismatches, missing tech data) are reported as warnings instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: malformed token: {detail}")]
    MalformedToken { line: u32, detail: String },

    #[error("line {line}: expected {expected}, got `{got}`")]
    UnexpectedToken {
        expected: String,
        got: String,
        line: u32,
    },

    #[error("coordinates present but no UNITS DISTANCE MICRONS statement")]
    MissingUnits,

    #[error("duplicate {kind} name `{name}`")]
    DuplicateName { kind: &'static str, name: String },

    #[error("net `{net}` references unknown component `{owner}`")]
    DanglingReference { net: String, owner: String },

    #[error("location requested for unplaced entity `{0}`")]
    Unplaced(String),

    #[error("stage mismatch: {0}")]
    StageMismatch(String),

    #[error("{0} features unavailable at this stage")]
    StageUnavailable(String),

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("merge of zero graphs")]
    EmptyMerge,

    #[error("too few designs for requested split: {0}")]
    TooFewDesigns(String),

    #[error("corrupt bundle file `{file}`: {reason}")]
    CorruptBundle { file: String, reason: String },

    #[error("unknown bundle format version {0}")]
    VersionMismatch(u32),

    #[error("infeasible generator spec: {0}")]
    InfeasibleSpec(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
