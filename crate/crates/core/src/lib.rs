//! Phaseless compressed sensing: sign-pattern decoders, S-RIP and null-space
//! certificates, the stability constants they feed, and a reproducible
//! experiment harness.
//!
//! The numerical core is generic over [`scalar::Real`]; the aliases below
//! fix it to `f64`.

pub mod bounds;
pub mod certify;
pub mod combin;
pub mod decoders;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod measurements;
pub mod optim;
pub mod polytope;
pub mod rng;
pub mod scalar;
pub mod signals;

pub use error::{Error, Result};
pub use scalar::Real;

pub type SignalVector = signals::Signal<f64>;
pub type Matrix64 = linalg::Matrix<f64>;
pub type MeasurementMatrix64 = measurements::MeasurementMatrix<f64>;
pub type Observation64 = measurements::Observation<f64>;
pub type NoiseModel64 = measurements::NoiseModel<f64>;
pub type DecodeResult64 = decoders::DecodeResult<f64>;
pub type SripReport64 = certify::SripReport<f64>;
pub type NspReport64 = certify::NspReport<f64>;
pub type StabilityConstants64 = bounds::StabilityConstants<f64>;
pub type IoConstants64 = bounds::IoConstants<f64>;
