use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A physical parameter violates its invariant.
    #[error("parameter `{name}` = {value}: {requirement}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        requirement: &'static str,
    },
    #[error("grid precondition violated: {0}")]
    Grid(String),
    #[error("interaction resonance inside the simulation domain: {0}")]
    Resonance(String),
    #[error("step size too large: {0}")]
    StepSize(String),
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error("kernel has a non-negligible imaginary part; stability analysis needs a real kernel")]
    ComplexKernel,
    #[error("pulse mode function is not normalized (∫h² = {0})")]
    Unnormalized(f64),
    #[error("{0}")]
    Domain(String),
}

pub(crate) fn require(cond: bool, name: &'static str, value: f64, requirement: &'static str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            requirement,
        })
    }
}
