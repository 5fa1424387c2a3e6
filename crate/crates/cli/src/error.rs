use solvmat_core::group::GroupError;
use solvmat_core::walk::WalkError;
use std::fmt;

#[derive(Debug)]
pub enum CliError {
    /// Unreadable input, malformed JSON or an invalid config value.
    Parse(String),
    /// A matrix outside FG_n(P).
    NotMember(String),
    /// A check ran and failed, or output could not be written.
    Failed(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse(_) => 2,
            CliError::NotMember(_) => 3,
            CliError::Failed(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "input error: {m}"),
            CliError::NotMember(m) => write!(f, "not a member: {m}"),
            CliError::Failed(m) => write!(f, "{m}"),
        }
    }
}

impl From<GroupError> for CliError {
    fn from(e: GroupError) -> Self {
        match e {
            GroupError::NotMember { .. } => CliError::NotMember(e.to_string()),
            GroupError::Arith(_) | GroupError::NotTriangular { .. } | GroupError::Singular => {
                CliError::Parse(e.to_string())
            }
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<WalkError> for CliError {
    fn from(e: WalkError) -> Self {
        match e {
            WalkError::Group(g) => g.into(),
            WalkError::InvalidMeasure(_) | WalkError::BadArgument(_) => CliError::Parse(e.to_string()),
            other => CliError::Failed(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Failed(format!("i/o: {e}"))
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Failed(format!("csv: {e}"))
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Failed(format!("json: {e}"))
    }
}
