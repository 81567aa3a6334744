//! Stochastic Liouville simulation of femtosecond stimulated Raman and transient
//! absorption spectra for vibrational modes coupled to a multistate kinetic bath.

pub mod kinetics;
pub mod numerics;
pub mod pulses;
pub mod scenario;
pub mod signals;
pub mod sle;
pub mod sos;
pub mod units;

pub type C64 = num_complex::Complex64;
pub type ComplexMatrix = numerics::CMatrix<f64>;
pub type RealMatrix = numerics::RMatrix<f64>;

/// Any failure of the library, for callers that do not care which layer raised it.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Numerics(#[from] numerics::NumericsError),
    #[error(transparent)]
    Kinetics(#[from] kinetics::KineticsError),
    #[error(transparent)]
    Pulse(#[from] pulses::PulseError),
    #[error(transparent)]
    Model(#[from] sle::ModelError),
    #[error(transparent)]
    Signal(#[from] signals::SignalError),
    #[error(transparent)]
    Sos(#[from] sos::SosError),
    #[error(transparent)]
    Scenario(#[from] scenario::ScenarioError),
}
