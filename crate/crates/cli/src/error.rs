use std::path::PathBuf;

use thiserror::Error;

/// Failures surfaced by the command-line front end, each with a process exit
/// code: 2 for unreadable input or bad configuration, 3 for invariant
/// violations, 4 when an instance exceeds the enumeration cap.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    ConfigSyntax {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error(transparent)]
    Core(#[from] sopcc_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use sopcc_core::Error as E;
        match self {
            CliError::Io { .. } | CliError::ConfigSyntax { .. } | CliError::Config(_) | CliError::Csv(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Core(e) => match e {
                E::SizeCap { .. } => 4,
                E::Invariant(_) | E::InvalidPath(_) | E::InvalidEdge { .. } | E::Incomplete => 3,
                E::InvalidInstance(_)
                | E::Parameter(_)
                | E::Parse { .. }
                | E::Closure { .. }
                | E::Io(_)
                | E::Json(_) => 2,
            },
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let io = CliError::io("x", std::io::Error::from(std::io::ErrorKind::NotFound));
        assert_eq!(io.exit_code(), 2);
        assert_eq!(CliError::Config("bad".into()).exit_code(), 2);
        assert_eq!(CliError::Invariant("bad".into()).exit_code(), 3);
        assert_eq!(CliError::from(sopcc_core::Error::SizeCap { n: 12, cap: 10 }).exit_code(), 4);
        assert_eq!(CliError::from(sopcc_core::Error::Invariant("x".into())).exit_code(), 3);
        assert_eq!(CliError::from(sopcc_core::Error::Parameter("x".into())).exit_code(), 2);
    }
}
