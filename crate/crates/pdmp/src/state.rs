//! Phase-space state, trajectories, and event records.
//!
//! All three samplers share the same linear flow: position moves along the
//! current velocity, the velocity only changes at Poisson events. A run is
//! therefore fully described by its event skeleton `(tau_m, x_m, v_m)`; the
//! state at any intermediate time is linear interpolation along the segment.

/// Augmented state `z = (x, v)` at process time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseState {
    /// Position in R^d.
    pub x: Vec<f64>,
    /// Velocity, same length as `x`.
    pub v: Vec<f64>,
    /// Process time.
    pub t: f64,
}

impl PhaseState {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        assert_eq!(x.len(), v.len(), "position and velocity dimensions differ");
        assert!(!x.is_empty(), "dimension must be at least 1");
        Self { x, v, t: 0.0 }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Follow the linear flow for `dt >= 0`: `x + dt * v`, velocity unchanged.
    pub fn advance(&self, dt: f64) -> PhaseState {
        assert!(dt >= 0.0, "advance called with negative dt = {dt}");
        let x = self
            .x
            .iter()
            .zip(&self.v)
            .map(|(xi, vi)| xi + dt * vi)
            .collect();
        PhaseState {
            x,
            v: self.v.clone(),
            t: self.t + dt,
        }
    }

    /// In-place variant of [`advance`](Self::advance) for the hot loop.
    pub fn advance_mut(&mut self, dt: f64) {
        assert!(dt >= 0.0, "advance called with negative dt = {dt}");
        for (xi, vi) in self.x.iter_mut().zip(&self.v) {
            *xi += dt * vi;
        }
        self.t += dt;
    }
}

/// What happened at an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    /// Coordinate sampler drew a fresh velocity from `{±e_i}`.
    CoordinateSwitch,
    /// Zigzag sampler flipped one velocity component.
    ZigzagFlip,
    /// Bouncy particle sampler reflected the velocity in the gradient.
    Bounce,
    /// Velocity redrawn from the refreshment law.
    Refresh,
}

/// Per-event bookkeeping: when it fired and how much work the clock did
/// since the previous event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventRecord {
    pub time: f64,
    pub kind: EventKind,
    /// Rate-function evaluations spent generating this event time.
    pub rate_evals: u64,
    /// Thinning candidates rejected while generating this event time.
    pub thinning_rejections: u64,
}

/// One skeleton point: the state immediately after the event at `time`.
#[derive(Debug, Clone, PartialEq)]
pub struct SkeletonPoint {
    pub time: f64,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

/// Piecewise-linear trajectory: the event skeleton plus the estimation
/// horizon. The last skeleton time is at or beyond the horizon; estimators
/// truncate at the horizon.
#[derive(Debug, Clone)]
pub struct Trajectory {
    skeleton: Vec<SkeletonPoint>,
    horizon: f64,
}

impl Trajectory {
    pub fn new(skeleton: Vec<SkeletonPoint>, horizon: f64) -> Self {
        assert!(!skeleton.is_empty(), "empty skeleton");
        assert_eq!(skeleton[0].time, 0.0, "skeleton must start at time 0");
        Self { skeleton, horizon }
    }

    pub fn skeleton(&self) -> &[SkeletonPoint] {
        &self.skeleton
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn dim(&self) -> usize {
        self.skeleton[0].x.len()
    }

    /// Position at time `t in [0, horizon]` by segment lookup and linear
    /// interpolation.
    pub fn position_at(&self, t: f64) -> Vec<f64> {
        assert!(
            (0.0..=self.skeleton.last().unwrap().time).contains(&t),
            "time {t} outside trajectory"
        );
        // Index of the last skeleton point with time <= t.
        let idx = match self
            .skeleton
            .binary_search_by(|p| p.time.partial_cmp(&t).unwrap())
        {
            Ok(i) => i,
            Err(i) => i - 1,
        };
        let p = &self.skeleton[idx];
        let dt = t - p.time;
        p.x.iter().zip(&p.v).map(|(xi, vi)| xi + dt * vi).collect()
    }

    /// Largest relative continuity defect over adjacent skeleton pairs:
    /// `|x_{m+1} - (x_m + (dt) v_m)|` scaled by the segment magnitude.
    pub fn continuity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for w in self.skeleton.windows(2) {
            let dt = w[1].time - w[0].time;
            for i in 0..w[0].x.len() {
                let predicted = w[0].x[i] + dt * w[0].v[i];
                let err = (w[1].x[i] - predicted).abs();
                let scale = w[1].x[i].abs().max(predicted.abs()).max(1.0);
                worst = worst.max(err / scale);
            }
        }
        worst
    }
}
