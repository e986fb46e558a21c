//! Failure classes and their exit codes.

use std::fmt;

use ipdsaw_core::Error as CoreError;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;
pub const EXIT_SELFTEST: u8 = 4;

/// A request the tool cannot honour as configured.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug)]
pub struct SelftestFailed(pub usize);

impl fmt::Display for SelftestFailed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} selftest check(s) failed", self.0)
    }
}

impl std::error::Error for SelftestFailed {}

pub fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<SelftestFailed>() {
            return EXIT_SELFTEST;
        }
        if let Some(e) = cause.downcast_ref::<CoreError>() {
            return match e {
                CoreError::NoConvergence { .. } | CoreError::OutsideDomain { .. } => EXIT_NUMERICAL,
                _ => EXIT_CONFIG,
            };
        }
    }
    EXIT_CONFIG
}

/// A hint appended to the message for the common numerical failures.
pub fn hint(err: &anyhow::Error) -> Option<&'static str> {
    err.chain().find_map(|c| match c.downcast_ref::<CoreError>()? {
        CoreError::NoConvergence { .. } => Some("try a β further from the critical point or a smaller size"),
        CoreError::OutsideDomain { .. } => Some("the requested point is outside the region where the tilted walk is defined"),
        CoreError::BudgetExceeded { .. } => Some("reduce the length or the number of samples"),
        _ => None,
    })
}
