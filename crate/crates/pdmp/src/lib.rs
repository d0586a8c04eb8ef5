//! Event-driven piecewise deterministic Markov process (PDMP) samplers.
//!
//! A PDMP sampler follows a deterministic flow — here always linear,
//! `dx/dt = v` — punctuated by random events from an inhomogeneous Poisson
//! clock; at each event a transition kernel changes the velocity. This crate
//! implements three such samplers on one engine:
//!
//! * the **coordinate sampler** (velocities `{±e_i}`, one moving coordinate
//!   at a time),
//! * the **zigzag sampler** (velocities `{-1,1}^d`, one component flip per
//!   event),
//! * the **bouncy particle sampler** (continuous velocities, gradient
//!   reflections plus refreshments),
//!
//! together with the benchmark targets (banana, correlated Gaussians,
//! Bayesian logistic posterior, log-Gaussian Cox process) and the
//! diagnostics (continuous-time path averages, batch-means effective sample
//! size, Kolmogorov-Smirnov distances) used to compare their efficiency.
//!
//! ```
//! use pdmp::samplers::{run, SamplerSpec};
//! use pdmp::state::PhaseState;
//! use pdmp::targets::Mvn;
//! use pdmp::rng::RandomSource;
//! use pdmp::diagnostics::{path_average, Observable};
//!
//! let target = Mvn::standard(2);
//! let spec = SamplerSpec::coordinate(0.1);
//! let mut rng = RandomSource::new(7);
//! let v0 = spec.initial_velocity(2, &mut rng);
//! let z0 = PhaseState::new(vec![0.0, 0.0], v0);
//!
//! let (trajectory, stats) = run(&spec, &target, z0, 500.0, &mut rng).unwrap();
//! let mean = path_average(&trajectory, Observable::Coordinate(0));
//! assert!(mean.abs() < 0.5);
//! assert!(stats.events > 0);
//! ```
//!
//! The `book/` directory of the repository walks through the theory and the
//! API chapter by chapter; its code snippets compile and run as doc-tests of
//! this crate (see [`guide`]).

pub mod clocks;
pub mod diagnostics;
mod error;
pub mod guide;
pub mod rng;
pub mod samplers;
pub mod state;
pub mod targets;

pub use error::{Error, Result};

#[cfg(test)]
pub(crate) mod testutil {
    use crate::clocks::RateProfile;
    use crate::targets::Target;

    /// Flat potential: improper uniform "target" whose event rates are pure
    /// refresh. Handy for exercising constant-rate event streams.
    pub struct Flat {
        pub dim: usize,
    }

    impl Target for Flat {
        fn name(&self) -> &str {
            "flat"
        }

        fn dim(&self) -> usize {
            self.dim
        }

        fn potential(&self, _x: &[f64]) -> f64 {
            0.0
        }

        fn gradient(&self, _x: &[f64]) -> Vec<f64> {
            vec![0.0; self.dim]
        }

        fn directional_profile(&self, _x: &[f64], _v: &[f64], lambda_ref: f64) -> RateProfile {
            RateProfile::Constant { c: lambda_ref }
        }

        fn coordinate_profiles(
            &self,
            _x: &[f64],
            _v: &[f64],
            lambda_ref: &[f64],
        ) -> Vec<RateProfile> {
            lambda_ref
                .iter()
                .map(|c| RateProfile::Constant { c: *c })
                .collect()
        }
    }
}
