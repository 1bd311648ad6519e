//! Decay rates of a frequently measured two-level atom with and without the
//! rotating-wave approximation.
//!
//! Units are reduced: frequencies are multiples of the bare level spacing Ω
//! and times are in 1/Ω.

pub mod analysis;
pub mod error;
pub mod oracle;
pub mod quad;
pub mod rate;
pub mod renorm;
pub mod spectra;

pub use error::{Result, ZenoError};
pub use renorm::{AtomBathModel, CouplingModifier};
pub use spectra::{HydrogenParams, OhmicParams, Spectrum, SpectrumKind};
pub use rate::{Approach, MeasurementProtocol, RatePoint};
pub use analysis::{RateCurve, RegimeReport};
pub use oracle::{discretize_bath, AmplitudeState, DiscretizedBath};
