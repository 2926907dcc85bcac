use serde::{Deserialize, Serialize};

/// A value with the evaluator's own error indicator.
///
/// `error` is a quadrature self-consistency difference, a series tail bound or
/// a truncation residual depending on the route. `work` counts integrand
/// evaluations or series terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub converged: bool,
    pub work: usize,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Estimate {
            value,
            error: 0.0,
            converged: true,
            work: 0,
        }
    }
}
