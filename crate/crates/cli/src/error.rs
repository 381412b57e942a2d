use std::fmt;

/// Failure of a CLI run, mapped onto the process exit code.
#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config file or parameter values (exit 2).
    Config(String),
    /// A numerical routine failed (exit 3).
    Numerical(String),
    /// A checked invariant does not hold (exit 4).
    Invariant(String),
    /// Output could not be written (exit 1).
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Io(_) => 1,
            CliError::Config(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Invariant(_) => 4,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Invariant(m) => write!(f, "invariant violated: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<gaussbench::error::Error> for CliError {
    fn from(e: gaussbench::error::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use gaussbench::error::Error;

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::from(Error::Quadrature("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::NonFinite("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::Bracket("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(Error::InvalidArgument("x".into())).exit_code(), 2);
        assert_eq!(CliError::from(Error::Unphysical("x".into())).exit_code(), 2);
        assert_eq!(CliError::Invariant("x".into()).exit_code(), 4);
    }
}
