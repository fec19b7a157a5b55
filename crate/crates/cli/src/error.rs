//! Error wrappers and the exit-code contract.

use std::fmt;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

#[derive(Debug)]
pub struct InputError(pub String);

impl InputError {
    pub fn new(msg: impl Into<String>) -> Self {
        InputError(msg.into())
    }
}

impl fmt::Display for InputError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "input error: {}", self.0)
    }
}

impl std::error::Error for InputError {}

#[derive(Debug)]
pub struct CoreError(pub calabi_core::Error);

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl std::error::Error for CoreError {}

pub trait CoreResult<T> {
    fn core(self) -> anyhow::Result<T>;
}

impl<T> CoreResult<T> for calabi_core::Result<T> {
    fn core(self) -> anyhow::Result<T> {
        self.map_err(|e| CoreError(e).into())
    }
}

/// 2 for input-side errors, 3 for numerical failures.
pub fn exit_code(e: &anyhow::Error) -> i32 {
    if let Some(c) = e.downcast_ref::<CoreError>() {
        return if c.0.is_input_error() { EXIT_INPUT } else { EXIT_NUMERIC };
    }
    if e.downcast_ref::<std::io::Error>().is_some() || e.downcast_ref::<csv::Error>().is_some() {
        return EXIT_NUMERIC;
    }
    EXIT_INPUT
}

#[cfg(test)]
mod tests {
    use super::*;
    use calabi_core::Error;

    #[test]
    fn codes() {
        assert_eq!(exit_code(&CoreError(Error::Domain("x".into())).into()), EXIT_INPUT);
        assert_eq!(exit_code(&CoreError(Error::Convergence("x".into())).into()), EXIT_NUMERIC);
        assert_eq!(exit_code(&InputError::new("x").into()), EXIT_INPUT);
    }
}
