use std::path::{Path, PathBuf};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{}:{line}: {message}", file.display())]
    Config {
        file: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{0}")]
    Usage(String),

    #[error("i/o error on {}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("output directory {} is locked by another run ({})", dir.display(), lock.display())]
    Locked { dir: PathBuf, lock: PathBuf },

    #[error(transparent)]
    Core(#[from] inr_core::Error),
}

impl CliError {
    pub fn io(path: impl AsRef<Path>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.as_ref().to_path_buf(),
            source,
        }
    }

    /// 2 for bad configs or arguments, 3 for filesystem and format
    /// problems, 1 otherwise. Divergence (4) is reported by a successful run.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config { .. } | CliError::Usage(_) => 2,
            CliError::Io { .. } | CliError::Locked { .. } => 3,
            CliError::Core(e) if e.is_io() => 3,
            CliError::Core(_) => 1,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_codes() {
        let config = CliError::Config {
            file: "c.json".into(),
            line: 4,
            message: "bad".into(),
        };
        assert_eq!(config.exit_code(), 2);
        assert_eq!(config.to_string(), "c.json:4: bad");
        assert_eq!(CliError::Usage("x".into()).exit_code(), 2);
        assert_eq!(CliError::io("f", std::io::Error::other("x")).exit_code(), 3);
        let png = inr_core::Error::Png {
            path: "a.png".into(),
            message: "truncated".into(),
        };
        assert_eq!(CliError::from(png).exit_code(), 3);
        assert_eq!(CliError::from(inr_core::Error::Domain("x".into())).exit_code(), 1);
    }
}
