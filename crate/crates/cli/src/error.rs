use std::path::PathBuf;

use harq_core::sim_engine::Violation;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{source_name}:{line}:{column}: {message}")]
    Parse {
        source_name: String,
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid value for {what}: {message}")]
    BadValue { what: String, message: String },
    #[error("{}", render_violations(.0))]
    Validation(Vec<Violation>),
    #[error("UnknownSweepField: `{0}` cannot be swept")]
    UnknownSweepField(String),
    #[error("simulation failed: {0}")]
    Simulation(String),
    #[error("{}: {source}", .path.display())]
    Io { path: PathBuf, source: std::io::Error },
}

fn render_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|v| format!("ValidationError {v}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Parse { .. } | CliError::BadValue { .. } => 2,
            CliError::Validation(_) | CliError::UnknownSweepField(_) | CliError::Simulation(_) => 3,
            CliError::Io { .. } => 4,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }

    /// Locates a TOML error in `text` as 1-based line and column.
    pub fn from_toml(source_name: &str, text: &str, e: &toml::de::Error) -> Self {
        let (line, column) = match e.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
                (line, column)
            }
            None => (0, 0),
        };
        CliError::Parse {
            source_name: source_name.into(),
            line,
            column,
            message: e.message().trim().to_string(),
        }
    }
}
