//! Event-time generation for time-inhomogeneous Poisson clocks.
//!
//! A first arrival `eta` solves the inversion equation
//! `integral_0^eta lambda(t) dt = -log u` for a uniform `u`. Three routes are
//! provided, matching the rate descriptions a target can supply along a ray:
//!
//! * [`invert_constant`] — closed form for constant rates;
//! * [`invert_linear_plus`] — closed form for `(a + b t)_+ + c` by case
//!   analysis on the sign pattern of `(a, b)`;
//! * [`thin`] — rejection sampling against a dominating envelope for
//!   everything else, with work counters.
//!
//! Competing clocks combine by [`superpose`]: the merged process fires at the
//! minimum of the sub-clock arrivals.
//!
//! "No event in finite time" is a first-class outcome (`None`), not an error:
//! a rate can have finite total mass along a ray, and runs cap arrivals at
//! the remaining horizon.

use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// First arrival of a clock; `None` means no event in finite time.
pub type Arrival = Option<f64>;

/// Description of a rate `t -> lambda(t)` along the current ray.
pub enum RateProfile {
    /// Constant rate `c >= 0`.
    Constant { c: f64 },
    /// `lambda(t) = (a + b t)_+ + c` with `c >= 0`.
    LinearPlus { a: f64, b: f64, c: f64 },
    /// Arbitrary continuous rate with a dominating envelope; simulated by
    /// thinning.
    General(GeneralRate),
}

impl RateProfile {
    /// Rate value at ray time `t`, whatever the variant.
    pub fn rate(&self, t: f64) -> f64 {
        match self {
            RateProfile::Constant { c } => *c,
            RateProfile::LinearPlus { a, b, c } => (a + b * t).max(0.0) + c,
            RateProfile::General(g) => (g.rate)(t),
        }
    }
}

impl std::fmt::Debug for RateProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RateProfile::Constant { c } => write!(f, "Constant {{ c: {c} }}"),
            RateProfile::LinearPlus { a, b, c } => {
                write!(f, "LinearPlus {{ a: {a}, b: {b}, c: {c} }}")
            }
            RateProfile::General(g) => write!(f, "General {{ label: {:?}, .. }}", g.label),
        }
    }
}

/// Envelope bound value on one window, in window-local time `s in [0, window]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundValue {
    Constant(f64),
    /// `a + b s`, required nonnegative on the window.
    Linear { a: f64, b: f64 },
}

impl BoundValue {
    fn at(&self, s: f64) -> f64 {
        match self {
            BoundValue::Constant(m) => *m,
            BoundValue::Linear { a, b } => a + b * s,
        }
    }

    fn is_zero(&self, window: f64) -> bool {
        match self {
            BoundValue::Constant(m) => *m <= 0.0,
            BoundValue::Linear { a, b } => *a <= 0.0 && a + b * window.min(1e300) <= 0.0,
        }
    }
}

/// Windowed dominating envelope: `bound_at(t0)` yields a value valid on
/// `[t0, t0 + window]`; exhausting a window re-anchors at its end.
pub struct BoundEnvelope {
    window: f64,
    bound_at: Box<dyn Fn(f64) -> BoundValue + Send>,
}

impl BoundEnvelope {
    pub fn new(window: f64, bound_at: impl Fn(f64) -> BoundValue + Send + 'static) -> Self {
        assert!(window > 0.0, "envelope window must be positive");
        Self {
            window,
            bound_at: Box::new(bound_at),
        }
    }

    /// Constant bound `m` valid for all `t >= 0`.
    pub fn global(m: f64) -> Self {
        Self::new(f64::INFINITY, move |_| BoundValue::Constant(m))
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    /// Bound value for the window anchored at `t0`.
    pub fn value_at(&self, t0: f64) -> BoundValue {
        (self.bound_at)(t0)
    }
}

/// A general rate along a ray plus its envelope. The `label` names the
/// originating target in bound-violation errors.
pub struct GeneralRate {
    label: String,
    rate: Box<dyn Fn(f64) -> f64 + Send>,
    envelope: BoundEnvelope,
}

impl GeneralRate {
    pub fn new(
        label: impl Into<String>,
        rate: impl Fn(f64) -> f64 + Send + 'static,
        envelope: BoundEnvelope,
    ) -> Self {
        Self {
            label: label.into(),
            rate: Box::new(rate),
            envelope,
        }
    }

    pub fn rate(&self, t: f64) -> f64 {
        (self.rate)(t)
    }

    pub fn envelope(&self) -> &BoundEnvelope {
        &self.envelope
    }
}

/// First arrival of a constant-rate clock: `eta = -log(u) / c`.
///
/// `c = 0` yields no event in finite time.
pub fn invert_constant(c: f64, u: f64) -> Arrival {
    debug_assert!(c >= 0.0, "negative rate {c}");
    debug_assert!(u > 0.0 && u < 1.0, "u outside (0,1)");
    if c <= 0.0 {
        None
    } else {
        Some(-u.ln() / c)
    }
}

/// First arrival for `lambda(t) = (a + b t)_+ + c`, solved in closed form.
///
/// Returns `None` when the total mass along the ray is finite and below
/// `-log u`, which requires `b < 0` (or `b = 0, a <= 0`) together with
/// `c = 0`.
pub fn invert_linear_plus(a: f64, b: f64, c: f64, u: f64) -> Arrival {
    debug_assert!(c >= 0.0, "negative floor rate {c}");
    debug_assert!(u > 0.0 && u < 1.0, "u outside (0,1)");
    let target = -u.ln();

    if b == 0.0 {
        let r = a.max(0.0) + c;
        return if r > 0.0 { Some(target / r) } else { None };
    }

    if b > 0.0 {
        if a >= 0.0 {
            // Mass accumulates as (a + c) t + b t^2 / 2 from the start.
            return Some(quadratic_arrival(a + c, b, target));
        }
        // Rate is c until the kink at t* = -a/b, then grows linearly.
        let t_star = -a / b;
        let mass_before = c * t_star;
        if c > 0.0 && mass_before >= target {
            return Some(target / c);
        }
        let residual = target - mass_before;
        return Some(t_star + quadratic_arrival(c, b, residual));
    }

    // b < 0: the positive part dies at t* = -a/b (if a > 0); after that the
    // rate is just c.
    if a <= 0.0 {
        return if c > 0.0 { Some(target / c) } else { None };
    }
    let t_star = -a / b;
    let mass_at_star = 0.5 * a * t_star + c * t_star;
    if target <= mass_at_star {
        return Some(quadratic_arrival(a + c, b, target));
    }
    if c > 0.0 {
        Some(t_star + (target - mass_at_star) / c)
    } else {
        None
    }
}

/// Smallest positive root of `r t + (b/2) t^2 = mass`, written in the
/// cancellation-free form `2 mass / (r + sqrt(r^2 + 2 b mass))`.
///
/// Requires the root to exist: `r >= 0`, and when `b < 0` the mass must not
/// exceed the parabola's reach (callers guarantee this).
fn quadratic_arrival(r: f64, b: f64, mass: f64) -> f64 {
    debug_assert!(mass >= 0.0);
    if mass == 0.0 {
        return 0.0;
    }
    let disc = (r * r + 2.0 * b * mass).max(0.0);
    2.0 * mass / (r + disc.sqrt())
}

/// Outcome of a thinning simulation: the accepted arrival (if any before the
/// cap) and the work spent finding it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThinOutcome {
    pub arrival: Arrival,
    pub rate_evals: u64,
    pub rejections: u64,
}

/// Windows with zero envelope mass tolerated before declaring "no event".
/// Only reachable when the rate (and its bound) vanish along the whole ray.
const MAX_EMPTY_WINDOWS: u64 = 1_000_000;

/// Simulate the first arrival of a general rate by thinning against its
/// envelope, giving up at `cap` (which may be infinite).
///
/// Candidates are drawn from the envelope process window by window; each is
/// accepted with probability `rate / bound`. An envelope that fails to
/// dominate the rate at a candidate (beyond a 1e-9 relative slack) is a hard
/// error naming the offending target and time.
pub fn thin(gen: &GeneralRate, cap: f64, rng: &mut RandomSource) -> Result<ThinOutcome> {
    let window = gen.envelope.window();
    let mut anchor = 0.0f64;
    let mut evals = 0u64;
    let mut rejections = 0u64;
    let mut empty_windows = 0u64;

    while anchor < cap {
        let bound = gen.envelope.value_at(anchor);
        if bound.is_zero(window) {
            empty_windows += 1;
            if empty_windows > MAX_EMPTY_WINDOWS {
                break;
            }
            anchor += window;
            continue;
        }
        empty_windows = 0;

        // Walk candidates inside [anchor, anchor + window].
        let mut s = 0.0f64; // window-local time
        loop {
            let gap = match bound {
                BoundValue::Constant(m) => invert_constant(m, rng.uniform()),
                // Restarting at local time s shifts the envelope intercept.
                BoundValue::Linear { a, b } => invert_linear_plus(a + b * s, b, 0.0, rng.uniform()),
            };
            let Some(gap) = gap else {
                anchor += window;
                break;
            };
            s += gap;
            if s > window {
                anchor += window;
                break;
            }
            let t = anchor + s;
            if t > cap {
                return Ok(ThinOutcome {
                    arrival: None,
                    rate_evals: evals,
                    rejections,
                });
            }
            let r = gen.rate(t);
            evals += 1;
            let m = bound.at(s);
            if r > m * (1.0 + 1e-9) {
                return Err(Error::BoundViolation {
                    target: gen.label.clone(),
                    t,
                    rate: r,
                    bound: m,
                });
            }
            if rng.uniform() < r / m {
                return Ok(ThinOutcome {
                    arrival: Some(t),
                    rate_evals: evals,
                    rejections,
                });
            }
            rejections += 1;
        }
    }

    Ok(ThinOutcome {
        arrival: None,
        rate_evals: evals,
        rejections,
    })
}

/// Superpose competing clocks: the earliest arrival wins, ties broken by the
/// lowest index. `None` when every sub-clock signals "no event".
pub fn superpose(arrivals: &[Arrival]) -> Option<(f64, usize)> {
    assert!(!arrivals.is_empty(), "superpose over empty clock list");
    let mut best: Option<(f64, usize)> = None;
    for (k, arrival) in arrivals.iter().enumerate() {
        if let Some(eta) = arrival {
            debug_assert!(*eta >= 0.0);
            match best {
                Some((min, _)) if *eta >= min => {}
                _ => best = Some((*eta, k)),
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constant_inversion_closed_forms() {
        assert_relative_eq!(
            invert_constant(1.0, (-2.0f64).exp()).unwrap(),
            2.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            invert_constant(2.0, (-2.0f64).exp()).unwrap(),
            1.0,
            max_relative = 1e-14
        );
        assert_relative_eq!(
            invert_constant(0.5, 0.5).unwrap(),
            2.0 * 2.0f64.ln(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn constant_zero_rate_never_fires() {
        assert_eq!(invert_constant(0.0, 0.3), None);
    }

    #[test]
    fn linear_plus_reduces_to_constant() {
        let eta = invert_linear_plus(1.0, 0.0, 0.0, (-3.0f64).exp()).unwrap();
        assert_relative_eq!(eta, 3.0, max_relative = 1e-14);
    }

    #[test]
    fn linear_plus_pure_ramp() {
        // lambda(t) = 2t, Lambda(t) = t^2 = 1 at eta = 1.
        let eta = invert_linear_plus(0.0, 2.0, 0.0, (-1.0f64).exp()).unwrap();
        assert_relative_eq!(eta, 1.0, max_relative = 1e-14);
    }

    #[test]
    fn linear_plus_delayed_ramp() {
        // Rate 0 on [0,1], then (t-1): Lambda(2) = 1/2.
        let eta = invert_linear_plus(-1.0, 1.0, 0.0, (-0.5f64).exp()).unwrap();
        assert_relative_eq!(eta, 2.0, max_relative = 1e-13);
    }

    #[test]
    fn linear_plus_finite_mass_no_event() {
        // Rate (1 - t)_+ has total mass 1/2; u below exp(-1/2) means no event.
        assert_eq!(invert_linear_plus(1.0, -1.0, 0.0, 0.5), None);
        // With a floor the event always happens.
        assert!(invert_linear_plus(1.0, -1.0, 0.1, 0.5).is_some());
    }

    #[test]
    fn linear_plus_identically_zero() {
        assert_eq!(invert_linear_plus(-1.0, 0.0, 0.0, 0.5), None);
        assert_eq!(invert_linear_plus(0.0, -2.0, 0.0, 0.5), None);
    }

    #[test]
    fn superpose_takes_minimum_with_lowest_index_ties() {
        assert_eq!(
            superpose(&[Some(2.0), Some(1.5), Some(3.0)]),
            Some((1.5, 1))
        );
        assert_eq!(superpose(&[Some(1.0)]), Some((1.0, 0)));
        assert_eq!(superpose(&[Some(2.0), Some(2.0)]), Some((2.0, 0)));
        assert_eq!(superpose(&[None, Some(4.0), None]), Some((4.0, 1)));
        assert_eq!(superpose(&[None, None]), None);
    }

    #[test]
    fn thin_rate_equal_to_bound_never_rejects() {
        let gen = GeneralRate::new("test", |_| 2.0, BoundEnvelope::global(2.0));
        let mut rng = RandomSource::new(5);
        for _ in 0..200 {
            let out = thin(&gen, f64::INFINITY, &mut rng).unwrap();
            assert!(out.arrival.is_some());
            assert_eq!(out.rejections, 0);
            assert_eq!(out.rate_evals, 1);
        }
    }

    #[test]
    fn thin_detects_bound_violation() {
        let gen = GeneralRate::new("bad-target", |_| 3.0, BoundEnvelope::global(2.0));
        let mut rng = RandomSource::new(5);
        let err = thin(&gen, f64::INFINITY, &mut rng).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bad-target"), "got: {msg}");
    }

    #[test]
    fn thin_zero_rate_signals_no_event() {
        let gen = GeneralRate::new(
            "flat",
            |_| 0.0,
            BoundEnvelope::new(1.0, |_| BoundValue::Constant(0.0)),
        );
        let mut rng = RandomSource::new(5);
        let out = thin(&gen, 50.0, &mut rng).unwrap();
        assert_eq!(out.arrival, None);
        assert_eq!(out.rate_evals, 0);
    }

    #[test]
    fn thin_respects_cap() {
        let gen = GeneralRate::new("slow", |_| 1e-6, BoundEnvelope::global(1e-6));
        let mut rng = RandomSource::new(5);
        let out = thin(&gen, 10.0, &mut rng).unwrap();
        if let Some(eta) = out.arrival {
            assert!(eta <= 10.0);
        }
    }
}
