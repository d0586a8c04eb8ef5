//! Banana-shaped 2-d target: `U(x) = (x1 - 1)^2 + kappa (x2 - x1^2)^2`.
//!
//! Along any ray the directional derivative of `U` is a cubic polynomial in
//! `t`, so event times are generated by horizon-slice thinning: on each
//! window `[t0, t0 + delta]` the rate is dominated by a constant built from
//! the Taylor-shifted coefficients.

use crate::clocks::{BoundEnvelope, BoundValue, GeneralRate, RateProfile};
use crate::targets::Target;

/// Cubic polynomial `c[0] + c[1] t + c[2] t^2 + c[3] t^3`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Cubic([f64; 4]);

impl Cubic {
    fn constant(c: f64) -> Self {
        Cubic([c, 0.0, 0.0, 0.0])
    }

    fn linear(c0: f64, c1: f64) -> Self {
        Cubic([c0, c1, 0.0, 0.0])
    }

    fn eval(&self, t: f64) -> f64 {
        let c = &self.0;
        ((c[3] * t + c[2]) * t + c[1]) * t + c[0]
    }

    fn add(&self, other: &Cubic) -> Cubic {
        let mut out = [0.0; 4];
        for k in 0..4 {
            out[k] = self.0[k] + other.0[k];
        }
        Cubic(out)
    }

    fn scale(&self, s: f64) -> Cubic {
        let mut out = self.0;
        for c in &mut out {
            *c *= s;
        }
        Cubic(out)
    }

    /// Product, panicking if the true degree would exceed 3.
    fn mul(&self, other: &Cubic) -> Cubic {
        let mut out = [0.0; 7];
        for i in 0..4 {
            for j in 0..4 {
                out[i + j] += self.0[i] * other.0[j];
            }
        }
        assert!(
            out[4..].iter().all(|c| *c == 0.0),
            "cubic overflow in polynomial product"
        );
        Cubic([out[0], out[1], out[2], out[3]])
    }

    /// Coefficients of `p(t0 + s)` as a polynomial in `s` (Taylor shift).
    fn shift(&self, t0: f64) -> Cubic {
        let c = &self.0;
        let p0 = self.eval(t0);
        let p1 = (3.0 * c[3] * t0 + 2.0 * c[2]) * t0 + c[1];
        let p2 = 3.0 * c[3] * t0 + c[2];
        Cubic([p0, p1, p2, c[3]])
    }

    /// Constant dominating `p(s)` on `[0, window]`:
    /// `c0 + sum_k |c_k| window^k`.
    fn window_max(&self, window: f64) -> f64 {
        let c = &self.0;
        c[0] + (c[1].abs() + (c[2].abs() + c[3].abs() * window) * window) * window
    }
}

/// The banana target with curvature parameter `kappa > 0`.
pub struct Banana {
    kappa: f64,
    window: f64,
}

impl Banana {
    pub fn new(kappa: f64) -> Self {
        assert!(kappa > 0.0, "kappa must be positive");
        Self { kappa, window: 1.0 }
    }

    /// Override the thinning window (default 1.0).
    pub fn with_window(mut self, window: f64) -> Self {
        assert!(window > 0.0);
        self.window = window;
        self
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// `dU/dx1` and `dU/dx2` along the ray `x + t v`, as cubics in `t`.
    fn partials_along(&self, x: &[f64], v: &[f64]) -> (Cubic, Cubic) {
        let q1 = Cubic::linear(x[0], v[0]);
        let q2 = Cubic::linear(x[1], v[1]);
        // w = x2 - x1^2 along the ray (degree 2).
        let w = q2.add(&q1.mul(&q1).scale(-1.0));
        // dU/dx1 = 2 (x1 - 1) - 4 kappa x1 w (degree 3).
        let d1 = q1
            .add(&Cubic::constant(-1.0))
            .scale(2.0)
            .add(&q1.mul(&w).scale(-4.0 * self.kappa));
        // dU/dx2 = 2 kappa w (degree 2).
        let d2 = w.scale(2.0 * self.kappa);
        (d1, d2)
    }

    fn thinned_profile(&self, poly: Cubic, lambda_ref: f64) -> RateProfile {
        let window = self.window;
        let envelope = BoundEnvelope::new(window, move |t0| {
            let m = poly.shift(t0).window_max(window).max(0.0) + lambda_ref;
            BoundValue::Constant(m)
        });
        RateProfile::General(GeneralRate::new(
            "banana",
            move |t| poly.eval(t).max(0.0) + lambda_ref,
            envelope,
        ))
    }
}

impl Target for Banana {
    fn name(&self) -> &str {
        "banana"
    }

    fn dim(&self) -> usize {
        2
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let w = x[1] - x[0] * x[0];
        (x[0] - 1.0).powi(2) + self.kappa * w * w
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let w = x[1] - x[0] * x[0];
        vec![
            2.0 * (x[0] - 1.0) - 4.0 * self.kappa * x[0] * w,
            2.0 * self.kappa * w,
        ]
    }

    fn directional_profile(&self, x: &[f64], v: &[f64], lambda_ref: f64) -> RateProfile {
        let (d1, d2) = self.partials_along(x, v);
        let p = d1.scale(v[0]).add(&d2.scale(v[1]));
        self.thinned_profile(p, lambda_ref)
    }

    fn coordinate_profiles(&self, x: &[f64], v: &[f64], lambda_ref: &[f64]) -> Vec<RateProfile> {
        let (d1, d2) = self.partials_along(x, v);
        vec![
            self.thinned_profile(d1.scale(v[0]), lambda_ref[0]),
            self.thinned_profile(d2.scale(v[1]), lambda_ref[1]),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gradient_vanishes_at_mode() {
        for kappa in [0.25, 1.0, 32.0] {
            let g = Banana::new(kappa).gradient(&[1.0, 1.0]);
            assert_eq!(g, vec![0.0, 0.0]);
        }
    }

    #[test]
    fn gradient_at_origin() {
        let g = Banana::new(1.0).gradient(&[0.0, 0.0]);
        assert_eq!(g, vec![-2.0, 0.0]);
    }

    #[test]
    fn profile_rate_matches_gradient_route() {
        let target = Banana::new(2.0);
        let x = [0.4, -0.3];
        let v = [-(0.6f64), 0.8];
        let p = target.directional_profile(&x, &v, 0.3);
        for k in 0..20 {
            let t = 0.17 * k as f64;
            let direct = crate::targets::directional_rate(&target, &x, &v, 0.3, t);
            assert_relative_eq!(p.rate(t), direct, max_relative = 1e-10, epsilon = 1e-12);
        }
    }

    #[test]
    fn cubic_shift_is_exact() {
        let p = Cubic([1.0, -2.0, 0.5, 3.0]);
        let s = p.shift(1.7);
        for t in [0.0, 0.3, 1.1] {
            assert_relative_eq!(s.eval(t), p.eval(1.7 + t), max_relative = 1e-12);
        }
    }

    #[test]
    fn window_bound_dominates_on_grid() {
        let target = Banana::new(8.0);
        let x = [1.3, -2.0];
        let v = [1.0, -1.0];
        let (d1, _) = target.partials_along(&x, &v);
        let p = d1.scale(v[0]);
        for w in 0..5 {
            let t0 = w as f64;
            let m = p.shift(t0).window_max(1.0).max(0.0);
            for j in 0..=100 {
                let s = j as f64 / 100.0;
                assert!(p.eval(t0 + s).max(0.0) <= m * (1.0 + 1e-12) + 1e-12);
            }
        }
    }
}
