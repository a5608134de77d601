//! Simulation and numerical verification toolkit for the geometry of the
//! Brownian sphere and Brownian slice.
//!
//! The crate samples discretized Brownian snake excursions and spine
//! decompositions, builds finite metric approximations of the sphere and
//! slice (chain-infimum distances, simple geodesics), and runs the Monte
//! Carlo estimators behind the closed-form checks: the label-minimum
//! formula, Bessel time reversal, Poisson intensities, the product identity
//! for the spine events, and the epsilon-hub rate experiment.

pub mod exact_min;
pub mod rng;
pub mod rmq;
pub mod snake;
pub mod sampler;
pub mod stats;

pub use snake::{DiscreteSnake, FinitePath, SnakeError, TreeIndex};
pub use sampler::{
    apply_scaling, assign_labels, free_measure_estimate, sample_excursion, sample_snake,
    sample_snake_seeded, DurationMixture, FreeMeasureEstimate, SampleConfig, SamplerError,
    SnakeSample, WStarMode,
};
