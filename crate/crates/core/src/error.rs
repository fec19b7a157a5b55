use alloc::string::String;
use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    Domain(String),
    Range(String),
    Regime(String),
    Convergence(String),
    Window(String),
    Fit(String),
    Theta(String),
    NoRoot(String),
    NoSignChange(String),
    Barrier(String),
}

impl Error {
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::Range(_) => "RangeError",
            Error::Regime(_) => "RegimeError",
            Error::Convergence(_) => "ConvergenceError",
            Error::Window(_) => "WindowError",
            Error::Fit(_) => "FitError",
            Error::Theta(_) => "ThetaError",
            Error::NoRoot(_) => "NoRootError",
            Error::NoSignChange(_) => "NoSignChangeError",
            Error::Barrier(_) => "BarrierError",
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Error::Domain(m)
            | Error::Range(m)
            | Error::Regime(m)
            | Error::Convergence(m)
            | Error::Window(m)
            | Error::Fit(m)
            | Error::Theta(m)
            | Error::NoRoot(m)
            | Error::NoSignChange(m)
            | Error::Barrier(m) => m,
        }
    }

    /// True for input-side errors, false for numerical failures.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::Domain(_) | Error::Range(_) | Error::Regime(_) | Error::Theta(_) | Error::Window(_)
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.kind(), self.message())
    }
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! err {
    ($kind:ident, $($arg:tt)*) => {
        $crate::error::Error::$kind(alloc::format!($($arg)*))
    };
}
pub(crate) use err;
