use thiserror::Error;

/// Errors raised by the physical models.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("{quantity} = {value} is out of range (expected {expected})")]
    Domain {
        quantity: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error("focal chain is singular: f1 + f2 - d = 0")]
    SingularFocalChain,
    #[error("receiver field of view is unresolved: set a solid angle or a complete focal chain")]
    UnresolvedFov,
    #[error("no molecular absorption entry for {0} nm")]
    MissingWavelength(f64),
    #[error("QBER is undefined when both signal and noise rates are zero")]
    UndefinedQber,
    #[error("gate factor {0} exceeds 1 (gate width x repetition rate)")]
    GateFactor(f64),
    #[error("{field}: {reason}")]
    Invalid { field: String, reason: String },
}

pub type Result<T, E = ModelError> = std::result::Result<T, E>;

/// Returns a domain error unless `ok` holds.
pub(crate) fn ensure(
    ok: bool,
    quantity: &'static str,
    value: f64,
    expected: &'static str,
) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(ModelError::Domain {
            quantity,
            value,
            expected,
        })
    }
}
