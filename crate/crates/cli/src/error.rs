use std::fmt;

/// Command-level failures mapped onto the documented exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags or option values (exit 1).
    Usage(String),
    /// Input files that fail to parse or validate (exit 2).
    Parse(String),
    /// Numerical failures: residual exceedances, solver breakdowns (exit 3).
    Numerical(String),
    /// The search completed but found no reduction-criterion violation
    /// (exit 4).
    NoViolation(String),
    Io(std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Parse(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::NoViolation(_) => 4,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::NoViolation(m) => write!(f, "no violation found: {m}"),
            CliError::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;
