use std::fmt;

use wardgeo::Error;

/// A failed run and the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    /// Bad arguments or unreadable, malformed input.
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    /// Inputs that parse but disagree with each other.
    pub fn consistency(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for Failure {}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::DimensionMismatch(_) => 3,
            Error::NonFiniteDelta { .. } => 1,
            _ => 2,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn library_errors_map_to_exit_codes() {
        assert_eq!(Failure::from(Error::DimensionMismatch("x".into())).code, 3);
        assert_eq!(Failure::from(Error::NonFiniteDelta { step: 2 }).code, 1);
        assert_eq!(
            Failure::from(Error::ClusterCountOutOfRange { k: 9, n: 3 }).code,
            2
        );
        assert_eq!(Failure::from(Error::TooFewObservations(1)).code, 2);
    }
}
