use std::fmt;

use thiserror::Error;

/// One problem found while validating a scenario, tagged with the field path
/// it was found at (e.g. `global.I`, `closure.cv`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigIssue {
    pub path: String,
    pub message: String,
}

impl ConfigIssue {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            path: path.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

fn join_issues(issues: &[ConfigIssue]) -> String {
    issues
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Error)]
pub enum Error {
    /// An argument outside the domain of a function (negative time, horizon overrun).
    #[error("domain error: {0}")]
    Domain(String),

    /// Two quantities that must agree do not (payment before its occurrence period).
    #[error("inconsistency: {0}")]
    Inconsistent(String),

    /// Configuration rejected; every issue found is listed.
    #[error("configuration error: {}", join_issues(.0))]
    Config(Vec<ConfigIssue>),

    #[error("config parse error: {0}")]
    Parse(String),

    /// Root finder or sampler failed.
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("claim {claim}: {source}")]
    Claim {
        claim: String,
        #[source]
        source: Box<Error>,
    },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config(vec![ConfigIssue::new(path, message)])
    }

    /// Attach a claim identifier to a lifecycle failure.
    pub fn for_claim(self, claim: impl Into<String>) -> Self {
        Error::Claim {
            claim: claim.into(),
            source: Box::new(self),
        }
    }

    /// Issues carried by a configuration error, re-rooted under `prefix`.
    pub fn into_issues(self, prefix: &str) -> Vec<ConfigIssue> {
        match self {
            Error::Config(issues) => issues
                .into_iter()
                .map(|i| ConfigIssue::new(join_path(prefix, &i.path), i.message))
                .collect(),
            other => vec![ConfigIssue::new(prefix, other.to_string())],
        }
    }

    /// Process exit code for the command-line tool.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Parse(_) | Error::Argument(_) => 2,
            Error::Domain(_) | Error::Inconsistent(_) | Error::Numeric(_) => 3,
            Error::Claim { source, .. } => source.exit_code(),
            Error::Io(_) | Error::Csv(_) | Error::Json(_) => 4,
        }
    }
}

pub(crate) fn join_path(prefix: &str, path: &str) -> String {
    match (prefix.is_empty(), path.is_empty()) {
        (true, _) => path.to_string(),
        (_, true) => prefix.to_string(),
        _ => format!("{prefix}.{path}"),
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
