// `!(x > 0)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod distill;
pub mod error;
pub mod ipea;
pub mod model;
pub mod noise;
pub mod num;
pub mod pea;
pub mod pulsec;
pub mod qcore;
pub mod tomo;

mod optim;

pub use error::{Error, Result};
pub use num::Real;

// Double-precision instantiations.
pub type State = qcore::StateVector<f64>;
pub type Density = qcore::DensityMatrix<f64>;
pub type Operator = qcore::OperatorMatrix<f64>;
pub type Params = model::HeisenbergParams<f64>;
pub type Trial = model::TrialParams<f64>;
pub type Spectrum = model::SpectrumTable<f64>;
pub type ProbeSpectrum = pea::SpectrumEstimate<f64>;
pub type IpeaSettings = ipea::IpeaConfig<f64>;
pub type Estimate = ipea::Refinement<f64>;
pub type Plan = distill::DistillationPlan<f64>;
pub type Report = tomo::StateReport<f64>;
pub type Program = pulsec::PulseProgram<f64>;
pub type Noise = noise::NoiseConfig<f64>;
