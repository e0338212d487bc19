use std::fmt;

/// Process exit codes.
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

/// Bad input data or artifacts (exit 2).
#[derive(Debug)]
pub struct DataError(pub String);

/// Inconsistent flags or configuration (exit 1).
#[derive(Debug)]
pub struct UsageError(pub String);

/// A broken internal invariant (exit 3).
#[derive(Debug)]
pub struct InvariantError(pub String);

macro_rules! impl_error {
    ($t:ty) => {
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
        impl std::error::Error for $t {}
    };
}

impl_error!(DataError);
impl_error!(UsageError);
impl_error!(InvariantError);

pub fn data(msg: impl Into<String>) -> anyhow::Error {
    DataError(msg.into()).into()
}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn invariant(msg: impl Into<String>) -> anyhow::Error {
    InvariantError(msg.into()).into()
}

/// Exit code for an error chain. Anything not explicitly classified is
/// treated as a data error: it came from reading or validating inputs.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if cause.is::<InvariantError>() {
            return EXIT_INTERNAL;
        }
        if cause.is::<DataError>() {
            return EXIT_DATA;
        }
    }
    EXIT_DATA
}
