use std::fmt;

/// Exit codes. 0 and 2 are outcomes; the rest follow sysexits.
pub mod code {
    pub const OK: i32 = 0;
    /// Witness, or an infeasible verdict.
    pub const NEGATIVE: i32 = 2;
    pub const USAGE: i32 = 64;
    pub const DATA: i32 = 65;
    pub const NO_INPUT: i32 = 66;
    pub const CANT_CREATE: i32 = 73;
    pub const SOFTWARE: i32 = 70;
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: code::USAGE,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        Self {
            code: code::DATA,
            message: message.into(),
        }
    }

    pub fn output(message: impl Into<String>) -> Self {
        Self {
            code: code::CANT_CREATE,
            message: message.into(),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

impl From<avta::Error> for CliError {
    fn from(e: avta::Error) -> Self {
        use avta::Error as E;
        let code = match &e {
            E::InvalidInput(_)
            | E::IndexOutOfRange { .. }
            | E::DimensionMismatch { .. }
            | E::InvalidParameter { .. }
            | E::HypothesisViolation { .. } => code::USAGE,
            E::Parse(_) | E::Anchor(_) | E::GammaFloor { .. } | E::InsideHull { .. } => code::DATA,
            E::Io(_) => code::NO_INPUT,
            _ => code::SOFTWARE,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

pub type CliResult<T> = Result<T, CliError>;
