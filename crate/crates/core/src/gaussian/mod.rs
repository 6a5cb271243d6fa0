//! Gaussian-state analysis of quadrature records: covariance estimation,
//! background subtraction, squeezing, logarithmic negativity, and a seeded
//! sampler for synthetic data.

pub mod batch;
pub mod covariance;
pub mod measures;
pub mod pipeline;
pub mod sampler;
pub mod states;

pub use batch::{PumpState, QuadratureBatch};
pub use covariance::{
    estimate_covariance, subtract_background, subtract_background_with_gain_systematic, CovMatrix,
};
pub use measures::{
    logarithmic_negativity, principal_squeezing, rotated_squeezing_db, squeezing_db, Negativity,
    PrincipalSqueezing,
};
pub use pipeline::{reconstruct, Reconstruction, SyntheticMeasurement};
pub use sampler::{sample_gaussian, sample_gaussian_stream};
