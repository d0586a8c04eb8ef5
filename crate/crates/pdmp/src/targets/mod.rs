//! Benchmark target distributions.
//!
//! A target supplies its potential `U` (so `pi(x) ∝ exp(-U(x))`), the
//! gradient and per-coordinate partials of `U`, and — the part the samplers
//! actually consume — a [`RateProfile`] describing the event rate along any
//! ray `x + t v`. Gaussian targets yield exact `LinearPlus` profiles; the
//! banana, logistic, and log-Gaussian Cox targets yield `General` profiles
//! with dominating envelopes built from target-specific inequalities.

mod banana;
mod lgcp;
mod logistic;
mod mvn;

pub use banana::Banana;
pub use lgcp::{simulate_lgcp_data, Lgcp, LgcpData};
pub use logistic::{simulate_logistic_data, Logistic, LogisticData};
pub use mvn::{mvn1_covariance, mvn2_covariance, Mvn};

use crate::clocks::RateProfile;

/// A target distribution on R^d, immutable and shareable across runs.
pub trait Target: Send + Sync {
    /// Short name used in reports and thinning-error messages.
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// Potential `U(x)`, i.e. the negative unnormalized log density.
    fn potential(&self, x: &[f64]) -> f64;

    /// Gradient of the potential.
    fn gradient(&self, x: &[f64]) -> Vec<f64>;

    /// Single partial derivative of the potential.
    fn partial(&self, x: &[f64], i: usize) -> f64 {
        self.gradient(x)[i]
    }

    /// Profile of `t -> (<v, grad U(x + t v)>)_+ + lambda_ref` along a ray.
    fn directional_profile(&self, x: &[f64], v: &[f64], lambda_ref: f64) -> RateProfile;

    /// Per-coordinate clock profiles for the zigzag sampler: element `i`
    /// describes `t -> (v_i * dU/dx_i(x + t v))_+ + lambda_ref[i]`.
    fn coordinate_profiles(&self, x: &[f64], v: &[f64], lambda_ref: &[f64]) -> Vec<RateProfile>;
}

/// Directional derivative `<v, grad U(x + t v)>` computed straight from the
/// gradient; reference route for profile audits.
pub fn directional_rate<T: Target + ?Sized>(
    target: &T,
    x: &[f64],
    v: &[f64],
    lambda_ref: f64,
    t: f64,
) -> f64 {
    let xt: Vec<f64> = x.iter().zip(v).map(|(xi, vi)| xi + t * vi).collect();
    let g = target.gradient(&xt);
    let dot: f64 = v.iter().zip(&g).map(|(vi, gi)| vi * gi).sum();
    dot.max(0.0) + lambda_ref
}

/// Format a float with 17 significant digits, enough to round-trip f64.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float17_round_trips() {
        for &x in &[0.0, 1.0, -1.5, std::f64::consts::PI, 1e-300, 2.2e300] {
            let s = float17(x);
            let back: f64 = s.parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits(), "{s}");
        }
    }
}
