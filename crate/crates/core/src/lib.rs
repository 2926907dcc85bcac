//! Two-time Leggett-Garg quasi-probabilities for Gaussian states of a
//! harmonic oscillator, by closed-form integral, Hermite series and a
//! truncated Fock-space reference.

pub mod error;
pub mod estimate;
pub mod fock;
pub mod integral;
pub mod jmatrix;
pub mod measurement;
pub mod route;
pub mod scan;
pub mod series;
pub mod special;
pub mod state;
pub mod verify;

pub use error::{Error, Result};
pub use estimate::Estimate;
pub use fock::{qpd_oracle, FockOperator, OracleConfig};
pub use integral::{qpd_integral, IntegralConfig};
pub use jmatrix::{build_jtable, JTable};
pub use measurement::{MeasurementSpec, Sign};
pub use route::{evaluate, Controls, QpdQuery, Route};
pub use scan::{
    global_minimize, minimize_over_t2, scan_plane, scan_plane_with_threads, GlobalOptions,
    GlobalResult, Plane, ScanConfig, ScanResult, T2Search,
};
pub use series::{qpd_series, Summation, TruncationConfig};
pub use special::Complex;
pub use state::{OffsetFunction, StateSpec, UnitsConfig};
