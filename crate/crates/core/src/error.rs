use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarketError {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("prices must differ (both operators priced at {0})")]
    EqualPrices(f64),

    #[error("high price {high} must be strictly above low price {low}")]
    PriceOrder { high: f64, low: f64 },

    #[error("closed-form rule requires the uniform user-type distribution, got {0}")]
    RequiresUniform(&'static str),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("brute-force assignment did not settle within {0} iterations")]
    NotConverged(usize),
}

pub type Result<T> = std::result::Result<T, MarketError>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> MarketError {
    MarketError::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

pub(crate) fn ensure_positive(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(invalid(name, format!("must be positive and finite, got {value}")))
    }
}
