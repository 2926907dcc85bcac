//! Special functions and quadrature shared by every evaluator.

mod erf;
mod hermite;
mod quadrature;

pub use erf::{
    erf_real, erfc_complex, erfc_real, erfcx_complex, erfcx_real, faddeeva,
    FADDEEVA_SWITCH_RADIUS,
};
pub(crate) use erf::one_minus_z_erfcx;
pub use hermite::{
    hermite_psi, hermite_psi_prime, hermite_psi_prime_with_cap, hermite_psi_with_cap,
    psi_prime_sequence, psi_sequence, HermiteValues, DEFAULT_N_MAX,
};
pub(crate) use quadrature::unit_rule;
pub use quadrature::{
    adaptive_complex, composite_gauss_legendre, gauss_legendre, AdaptiveOutcome, QuadratureRule,
};

/// Complex scalar used for all complex-valued quantities.
pub type Complex = num_complex::Complex64;
