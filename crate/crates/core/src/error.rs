use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Failure categories, used by front ends to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Config,
    Regime,
    Numerical,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    Config(String),

    #[error("kernel evaluated at its singular point ({0})")]
    SingularPoint(&'static str),

    #[error("particles cannot be packed: {0}")]
    Packing(String),

    #[error("outside the small-particle regime: {0}")]
    Regime(String),

    #[error("target is not realisable with Re h >= 0: {0}")]
    Infeasible(String),

    #[error("pole of the effective-medium formula (1 + 2c0 hN / 3iωμ = 0)")]
    Pole,

    #[error("total moment Q vanishes; gamma is undefined")]
    DegenerateMoment,

    #[error("1 + gamma vanishes; correction factor is singular")]
    SingularCorrection,

    #[error("linear system is singular or ill-conditioned (condition estimate {condition:.3e})")]
    IllConditioned { condition: f64 },

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Config(_) | Error::SingularPoint(_) => ErrorClass::Config,
            Error::Packing(_)
            | Error::Regime(_)
            | Error::Infeasible(_)
            | Error::Pole
            | Error::DegenerateMoment
            | Error::SingularCorrection
            | Error::IllConditioned { .. } => ErrorClass::Regime,
            Error::Numerical(_) => ErrorClass::Numerical,
        }
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }
}
