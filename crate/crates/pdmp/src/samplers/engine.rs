//! The event-driven simulation loop shared by all three samplers.
//!
//! One loop, two plug-ins per sampler: a rate-profile factory (how the event
//! rate looks along the current ray) and a transition kernel (what happens
//! to the velocity when the clock fires). Exact profiles invert in closed
//! form; general profiles go through thinning. The zigzag sampler runs `d`
//! competing clocks and superposes them.
//!
//! Trajectories can be arbitrarily long, so the loop streams skeleton points
//! to a [`RunObserver`] instead of forcing callers to hold the full skeleton;
//! [`run`] is the convenience wrapper that collects everything.

use std::time::Instant;

use crate::clocks::{invert_constant, invert_linear_plus, superpose, thin, Arrival, RateProfile};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::state::{EventKind, EventRecord, PhaseState, SkeletonPoint, Trajectory};
use crate::targets::Target;

use super::{bps_step_kernel, cs_transition_from_gradient, SamplerSpec};

/// Stopping rule for a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Budget {
    /// Simulate until process time reaches `T`; the final event may cross it.
    Horizon(f64),
    /// Stop once this many rate evaluations have been spent.
    RateEvals(u64),
    /// Stop after this many events.
    Events(u64),
    /// Stop after this much wall-clock time; inherently machine-relative
    /// and not reproducible across hosts.
    WallSeconds(f64),
}

/// Work and outcome counters for one run.
#[derive(Debug, Clone, Default)]
pub struct RunStats {
    pub events: u64,
    pub coordinate_switches: u64,
    pub zigzag_flips: u64,
    pub bounces: u64,
    pub refreshes: u64,
    /// Occurrence-time generation work: one per exact inversion, one per
    /// thinning candidate. This is the paper-facing cost metric.
    pub rate_evals: u64,
    pub thinning_rejections: u64,
    /// Realized trajectory horizon (estimation window).
    pub total_time: f64,
    pub wall_seconds: f64,
    /// Every refresh rate was zero; uniqueness of the invariant law is then
    /// outside the supported theory and reports flag it.
    pub canonical: bool,
}

impl RunStats {
    fn count(&mut self, kind: EventKind) {
        self.events += 1;
        match kind {
            EventKind::CoordinateSwitch => self.coordinate_switches += 1,
            EventKind::ZigzagFlip => self.zigzag_flips += 1,
            EventKind::Bounce => self.bounces += 1,
            EventKind::Refresh => self.refreshes += 1,
        }
    }
}

/// Receives the skeleton as it is generated.
pub trait RunObserver {
    /// The initial state, before any event.
    fn on_start(&mut self, state: &PhaseState) {
        let _ = state;
    }

    /// A transition just happened; `state` is the post-event state.
    fn on_event(&mut self, record: EventRecord, state: &PhaseState) {
        let _ = (record, state);
    }

    /// The run is over. `state` is the final state (at or beyond the
    /// horizon) and `horizon` the realized estimation window.
    fn on_finish(&mut self, state: &PhaseState, horizon: f64) {
        let _ = (state, horizon);
    }
}

/// Observer that ignores everything.
pub struct NullObserver;

impl RunObserver for NullObserver {}

/// Collects the full skeleton and event records.
#[derive(Default)]
pub struct TrajectoryCollector {
    points: Vec<SkeletonPoint>,
    records: Vec<EventRecord>,
    horizon: f64,
}

impl TrajectoryCollector {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn into_trajectory(self) -> (Trajectory, Vec<EventRecord>) {
        (Trajectory::new(self.points, self.horizon), self.records)
    }
}

impl RunObserver for TrajectoryCollector {
    fn on_start(&mut self, state: &PhaseState) {
        self.points.push(SkeletonPoint {
            time: state.t,
            x: state.x.clone(),
            v: state.v.clone(),
        });
    }

    fn on_event(&mut self, record: EventRecord, state: &PhaseState) {
        self.records.push(record);
        self.points.push(SkeletonPoint {
            time: state.t,
            x: state.x.clone(),
            v: state.v.clone(),
        });
    }

    fn on_finish(&mut self, state: &PhaseState, horizon: f64) {
        if state.t > self.points.last().map_or(0.0, |p| p.time) {
            self.points.push(SkeletonPoint {
                time: state.t,
                x: state.x.clone(),
                v: state.v.clone(),
            });
        }
        self.horizon = horizon;
    }
}

/// Samples positions at known grid times `k * horizon / n` while streaming.
/// Produces exactly what `discretize` would on the full trajectory.
pub struct UniformGridSampler {
    times: Vec<f64>,
    next: usize,
    rows: Vec<Vec<f64>>,
    prev: Option<(f64, Vec<f64>, Vec<f64>)>,
}

impl UniformGridSampler {
    pub fn new(horizon: f64, n: usize) -> Self {
        assert!(horizon > 0.0 && n >= 1);
        Self {
            times: (1..=n).map(|k| k as f64 * horizon / n as f64).collect(),
            next: 0,
            rows: Vec::with_capacity(n),
            prev: None,
        }
    }

    fn emit_until(&mut self, t_new: f64) {
        let Some((t0, x0, v0)) = &self.prev else {
            return;
        };
        while self.next < self.times.len() && self.times[self.next] <= t_new {
            let s = self.times[self.next] - t0;
            self.rows
                .push(x0.iter().zip(v0).map(|(xi, vi)| xi + s * vi).collect());
            self.next += 1;
        }
    }

    pub fn rows(self) -> Vec<Vec<f64>> {
        self.rows
    }
}

impl RunObserver for UniformGridSampler {
    fn on_start(&mut self, state: &PhaseState) {
        self.prev = Some((state.t, state.x.clone(), state.v.clone()));
    }

    fn on_event(&mut self, _record: EventRecord, state: &PhaseState) {
        self.emit_until(state.t);
        self.prev = Some((state.t, state.x.clone(), state.v.clone()));
    }

    fn on_finish(&mut self, state: &PhaseState, _horizon: f64) {
        self.emit_until(state.t);
    }
}

/// Grid sampler for runs whose horizon is unknown in advance (rate-eval or
/// event budgets): samples on a uniform grid with spacing `h`, and whenever
/// the buffer fills, doubles `h` and keeps every other row. The final grid
/// spans the realized horizon with between `capacity/2` and `capacity` rows.
pub struct DoublingGridSampler {
    h: f64,
    capacity: usize,
    rows: Vec<Vec<f64>>,
    emitted: usize,
    prev: Option<(f64, Vec<f64>, Vec<f64>)>,
}

impl DoublingGridSampler {
    /// `h0`: initial grid spacing; `capacity`: maximum rows held (at least 4).
    pub fn new(h0: f64, capacity: usize) -> Self {
        assert!(h0 > 0.0 && capacity >= 4);
        Self {
            h: h0,
            capacity,
            rows: Vec::with_capacity(capacity),
            emitted: 0,
            prev: None,
        }
    }

    fn emit_until(&mut self, t_new: f64) {
        loop {
            let t_next = (self.emitted + 1) as f64 * self.h;
            if t_next > t_new {
                break;
            }
            let (t0, x0, v0) = self.prev.as_ref().expect("start not observed");
            let s = t_next - t0;
            self.rows
                .push(x0.iter().zip(v0).map(|(xi, vi)| xi + s * vi).collect());
            self.emitted += 1;
            if self.rows.len() == self.capacity {
                // Double the spacing: rows at 2h, 4h, ... are the odd indices.
                self.rows = self
                    .rows
                    .iter()
                    .skip(1)
                    .step_by(2)
                    .cloned()
                    .collect();
                self.h *= 2.0;
                self.emitted /= 2;
            }
        }
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    pub fn rows(self) -> Vec<Vec<f64>> {
        self.rows
    }
}

impl RunObserver for DoublingGridSampler {
    fn on_start(&mut self, state: &PhaseState) {
        self.prev = Some((state.t, state.x.clone(), state.v.clone()));
    }

    fn on_event(&mut self, _record: EventRecord, state: &PhaseState) {
        self.emit_until(state.t);
        self.prev = Some((state.t, state.x.clone(), state.v.clone()));
    }

    fn on_finish(&mut self, state: &PhaseState, _horizon: f64) {
        self.emit_until(state.t);
    }
}

/// Online per-coordinate path averages of `x_i` and `x_i^2`, exact per
/// segment, truncated at the realized horizon.
pub struct MomentAccumulator {
    first: Vec<f64>,
    second: Vec<f64>,
    prev: Option<(f64, Vec<f64>, Vec<f64>)>,
    elapsed: f64,
    cap: f64,
}

impl MomentAccumulator {
    /// For budget-mode runs: integrates every full segment.
    pub fn new(dim: usize) -> Self {
        Self::with_cap(dim, f64::INFINITY)
    }

    /// For horizon-mode runs: integration stops at `cap` even though the
    /// final event may cross it.
    pub fn with_cap(dim: usize, cap: f64) -> Self {
        Self {
            first: vec![0.0; dim],
            second: vec![0.0; dim],
            prev: None,
            elapsed: 0.0,
            cap,
        }
    }

    fn integrate_segment(&mut self, t_new: f64) {
        let t_new = t_new.min(self.cap);
        let Some((t0, x0, v0)) = &self.prev else {
            return;
        };
        let dt = t_new - t0;
        if dt <= 0.0 {
            return;
        }
        for i in 0..self.first.len() {
            let (x, v) = (x0[i], v0[i]);
            self.first[i] += dt * (x + 0.5 * dt * v);
            self.second[i] += dt * (x * x + dt * (x * v + dt * v * v / 3.0));
        }
        self.elapsed = t_new;
    }

    /// `(mean of x_i, mean of x_i^2)` per coordinate over `[0, horizon]`.
    pub fn averages(&self) -> (Vec<f64>, Vec<f64>) {
        assert!(self.elapsed > 0.0, "no time accumulated");
        let t = self.elapsed;
        (
            self.first.iter().map(|s| s / t).collect(),
            self.second.iter().map(|s| s / t).collect(),
        )
    }
}

impl RunObserver for MomentAccumulator {
    fn on_start(&mut self, state: &PhaseState) {
        self.prev = Some((state.t, state.x.clone(), state.v.clone()));
    }

    fn on_event(&mut self, _record: EventRecord, state: &PhaseState) {
        self.integrate_segment(state.t);
        self.prev = Some((state.t, state.x.clone(), state.v.clone()));
    }

    fn on_finish(&mut self, state: &PhaseState, horizon: f64) {
        // Truncate the final segment at the horizon, not the crossing event.
        self.integrate_segment(state.t.min(horizon));
    }
}

/// Fan out to several observers.
pub struct Observers<'a>(pub Vec<&'a mut dyn RunObserver>);

impl RunObserver for Observers<'_> {
    fn on_start(&mut self, state: &PhaseState) {
        for o in &mut self.0 {
            o.on_start(state);
        }
    }

    fn on_event(&mut self, record: EventRecord, state: &PhaseState) {
        for o in &mut self.0 {
            o.on_event(record, state);
        }
    }

    fn on_finish(&mut self, state: &PhaseState, horizon: f64) {
        for o in &mut self.0 {
            o.on_finish(state, horizon);
        }
    }
}

/// Draw the first arrival of a profile, capped at `cap`; returns the
/// arrival plus (rate evaluations, rejections) spent.
fn draw_arrival(
    profile: &RateProfile,
    cap: f64,
    rng: &mut RandomSource,
) -> Result<(Arrival, u64, u64)> {
    match profile {
        RateProfile::Constant { c } => Ok((invert_constant(*c, rng.uniform()), 1, 0)),
        RateProfile::LinearPlus { a, b, c } => {
            Ok((invert_linear_plus(*a, *b, *c, rng.uniform()), 1, 0))
        }
        RateProfile::General(g) => {
            let out = thin(g, cap, rng)?;
            Ok((out.arrival, out.rate_evals, out.rejections))
        }
    }
}

/// Simulate one run, streaming skeleton points to `observer`.
pub fn run_with(
    spec: &SamplerSpec,
    target: &dyn Target,
    z0: PhaseState,
    budget: Budget,
    rng: &mut RandomSource,
    observer: &mut dyn RunObserver,
) -> Result<RunStats> {
    let dim = target.dim();
    assert_eq!(z0.dim(), dim, "initial state dimension mismatch");
    spec.validate(dim)?;
    spec.check_velocity(&z0.v)?;
    if let Budget::Horizon(t) = budget {
        assert!(t > 0.0, "horizon must be positive");
    }

    let start = Instant::now();
    let mut stats = RunStats {
        canonical: spec.is_canonical(),
        ..RunStats::default()
    };
    let mut state = z0;
    observer.on_start(&state);

    let abort = |stats: &RunStats, state: &PhaseState, source: Error| {
        let position_norm = state.x.iter().map(|x| x * x).sum::<f64>().sqrt();
        Error::RunAborted {
            event: stats.events as usize,
            time: state.t,
            position_norm,
            source: Box::new(source),
        }
    };

    loop {
        let exhausted = match budget {
            Budget::Horizon(t) => state.t >= t,
            Budget::RateEvals(n) => stats.rate_evals >= n,
            Budget::Events(n) => stats.events >= n,
            Budget::WallSeconds(s) => start.elapsed().as_secs_f64() >= s,
        };
        if exhausted {
            break;
        }
        let cap = match budget {
            Budget::Horizon(t) => t - state.t,
            _ => f64::INFINITY,
        };

        // (i)+(ii): rate profile along the current ray, first arrival.
        let mut event_evals = 0u64;
        let mut event_rejections = 0u64;
        let (arrival, fired_coordinate) = match spec {
            SamplerSpec::Coordinate { lambda_ref } | SamplerSpec::Bouncy { lambda_ref, .. } => {
                let profile = target.directional_profile(&state.x, &state.v, *lambda_ref);
                let (arrival, evals, rejections) =
                    draw_arrival(&profile, cap, rng).map_err(|e| abort(&stats, &state, e))?;
                event_evals += evals;
                event_rejections += rejections;
                (arrival, 0)
            }
            SamplerSpec::Zigzag { lambda_ref } => {
                let profiles = target.coordinate_profiles(&state.x, &state.v, lambda_ref);
                let mut arrivals = Vec::with_capacity(dim);
                for p in &profiles {
                    let (arrival, evals, rejections) =
                        draw_arrival(p, cap, rng).map_err(|e| abort(&stats, &state, e))?;
                    event_evals += evals;
                    event_rejections += rejections;
                    arrivals.push(arrival);
                }
                match superpose(&arrivals) {
                    Some((eta, k)) => (Some(eta), k),
                    None => (None, 0),
                }
            }
        };
        stats.rate_evals += event_evals;
        stats.thinning_rejections += event_rejections;

        let Some(eta) = arrival else {
            // No event before the cap. Under a horizon budget, coast to the
            // horizon exactly; under other budgets the clock is silent
            // forever and the run ends here.
            if let Budget::Horizon(t) = budget {
                state.advance_mut(t - state.t);
            }
            break;
        };

        // (iii): deterministic flow to the event.
        state.advance_mut(eta);

        // (iv): transition kernel.
        let kind = match spec {
            SamplerSpec::Coordinate { lambda_ref } => {
                let gradient = target.gradient(&state.x);
                let (index, sign) = cs_transition_from_gradient(&gradient, *lambda_ref, rng)
                    .map_err(|e| abort(&stats, &state, e))?;
                state.v.fill(0.0);
                state.v[index] = sign;
                EventKind::CoordinateSwitch
            }
            SamplerSpec::Zigzag { .. } => {
                state.v[fired_coordinate] = -state.v[fired_coordinate];
                EventKind::ZigzagFlip
            }
            SamplerSpec::Bouncy { lambda_ref, law } => {
                let (v, kind) =
                    bps_step_kernel(target, &state.x, &state.v, *lambda_ref, *law, rng)
                        .map_err(|e| abort(&stats, &state, e))?;
                state.v = v;
                if kind == EventKind::Bounce && *law == super::VelocityLaw::Sphere {
                    // Keep repeated reflections from drifting off the sphere.
                    let norm = state.v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    for vi in &mut state.v {
                        *vi /= norm;
                    }
                }
                kind
            }
        };
        spec.check_velocity(&state.v)
            .map_err(|e| abort(&stats, &state, e))?;

        let record = EventRecord {
            time: state.t,
            kind,
            rate_evals: event_evals,
            thinning_rejections: event_rejections,
        };
        stats.count(kind);
        observer.on_event(record, &state);
    }

    stats.total_time = match budget {
        Budget::Horizon(t) => t,
        _ => state.t,
    };
    observer.on_finish(&state, stats.total_time);
    stats.wall_seconds = start.elapsed().as_secs_f64();
    Ok(stats)
}

/// Simulate one run up to `horizon` and collect the full trajectory.
pub fn run(
    spec: &SamplerSpec,
    target: &dyn Target,
    z0: PhaseState,
    horizon: f64,
    rng: &mut RandomSource,
) -> Result<(Trajectory, RunStats)> {
    let mut collector = TrajectoryCollector::new();
    let stats = run_with(
        spec,
        target,
        z0,
        Budget::Horizon(horizon),
        rng,
        &mut collector,
    )?;
    let (trajectory, _records) = collector.into_trajectory();
    Ok((trajectory, stats))
}
