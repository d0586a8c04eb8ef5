//! The three PDMP samplers as (event rate, transition kernel) pairs.
//!
//! All three share the linear flow and differ only in their velocity set,
//! event rate, and transition kernel:
//!
//! * **Coordinate sampler** — velocities `{±e_i}`; at an event the velocity
//!   is redrawn from all `2d` atoms with weights `lambda(x, -v*)`.
//! * **Zigzag sampler** — velocities `{-1, 1}^d`; `d` competing coordinate
//!   clocks, the firing clock flips its component.
//! * **Bouncy particle sampler** — continuous velocities; events reflect the
//!   velocity in the gradient hyperplane or refresh it entirely.
//!
//! The simulation loop itself lives once in [`engine`]; sampler-specific
//! code is confined to the kernel functions in this module.

mod engine;

pub use engine::{
    run, run_with, Budget, DoublingGridSampler, MomentAccumulator, NullObserver, Observers,
    RunObserver, RunStats, TrajectoryCollector, UniformGridSampler,
};

use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::state::EventKind;
use crate::targets::Target;

/// Refresh-velocity law for the bouncy particle sampler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VelocityLaw {
    /// Uniform on the unit sphere.
    Sphere,
    /// Standard Gaussian.
    Gaussian,
}

/// Which sampler to run, with its refresh rate(s).
#[derive(Debug, Clone, PartialEq)]
pub enum SamplerSpec {
    Coordinate { lambda_ref: f64 },
    Zigzag { lambda_ref: Vec<f64> },
    Bouncy { lambda_ref: f64, law: VelocityLaw },
}

impl SamplerSpec {
    /// Coordinate sampler with a scalar refresh rate.
    pub fn coordinate(lambda_ref: f64) -> Self {
        assert!(lambda_ref >= 0.0);
        SamplerSpec::Coordinate { lambda_ref }
    }

    /// Zigzag sampler with one refresh rate shared by every coordinate.
    pub fn zigzag(dim: usize, lambda_ref: f64) -> Self {
        assert!(lambda_ref >= 0.0);
        SamplerSpec::Zigzag {
            lambda_ref: vec![lambda_ref; dim],
        }
    }

    /// Bouncy particle sampler.
    pub fn bouncy(lambda_ref: f64, law: VelocityLaw) -> Self {
        assert!(lambda_ref >= 0.0);
        SamplerSpec::Bouncy { lambda_ref, law }
    }

    pub fn name(&self) -> &'static str {
        match self {
            SamplerSpec::Coordinate { .. } => "cs",
            SamplerSpec::Zigzag { .. } => "zigzag",
            SamplerSpec::Bouncy { .. } => "bps",
        }
    }

    /// True when every refresh rate is zero (the paper's "canonical"
    /// setting). Invariance still holds but the uniqueness argument needs a
    /// positive refresh rate, so reports flag canonical runs.
    pub fn is_canonical(&self) -> bool {
        match self {
            SamplerSpec::Coordinate { lambda_ref } => *lambda_ref == 0.0,
            SamplerSpec::Zigzag { lambda_ref } => lambda_ref.iter().all(|l| *l == 0.0),
            SamplerSpec::Bouncy { lambda_ref, .. } => *lambda_ref == 0.0,
        }
    }

    /// Check the spec against a target dimension.
    pub fn validate(&self, dim: usize) -> Result<()> {
        match self {
            SamplerSpec::Zigzag { lambda_ref } if lambda_ref.len() != dim => {
                Err(Error::InvalidVelocity {
                    sampler: "zigzag",
                    detail: format!(
                        "{} refresh rates for dimension {dim}",
                        lambda_ref.len()
                    ),
                })
            }
            _ => Ok(()),
        }
    }

    /// Draw an initial velocity from the sampler's stationary velocity law.
    pub fn initial_velocity(&self, dim: usize, rng: &mut RandomSource) -> Vec<f64> {
        match self {
            SamplerSpec::Coordinate { .. } => {
                let mut v = vec![0.0; dim];
                v[rng.index(dim)] = rng.sign();
                v
            }
            SamplerSpec::Zigzag { .. } => (0..dim).map(|_| rng.sign()).collect(),
            SamplerSpec::Bouncy { law, .. } => draw_velocity(*law, dim, rng),
        }
    }

    /// Velocity-set membership check, applied at construction and after
    /// every transition (not on every advance).
    pub fn check_velocity(&self, v: &[f64]) -> Result<()> {
        let fail = |sampler, detail: String| Err(Error::InvalidVelocity { sampler, detail });
        match self {
            SamplerSpec::Coordinate { .. } => {
                let nonzero: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
                if nonzero.len() != 1 || v[nonzero[0]].abs() != 1.0 {
                    return fail("cs", format!("velocity {v:?} not in {{±e_i}}"));
                }
                Ok(())
            }
            SamplerSpec::Zigzag { .. } => {
                if v.iter().any(|vi| vi.abs() != 1.0) {
                    return fail("zigzag", format!("velocity {v:?} not in {{-1,1}}^d"));
                }
                Ok(())
            }
            SamplerSpec::Bouncy { law, .. } => {
                if v.iter().any(|vi| !vi.is_finite()) {
                    return fail("bps", "non-finite velocity".into());
                }
                if *law == VelocityLaw::Sphere {
                    let norm = v.iter().map(|vi| vi * vi).sum::<f64>().sqrt();
                    if (norm - 1.0).abs() > 1e-12 {
                        return fail("bps", format!("|v| = {norm} off the unit sphere"));
                    }
                }
                Ok(())
            }
        }
    }
}

/// Draw from a BPS velocity law.
pub fn draw_velocity(law: VelocityLaw, dim: usize, rng: &mut RandomSource) -> Vec<f64> {
    let mut v = rng.standard_normal_vec(dim);
    if law == VelocityLaw::Sphere {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        // A zero normal vector has probability zero; guard regardless.
        if norm > 0.0 {
            for x in &mut v {
                *x /= norm;
            }
        } else {
            v[0] = 1.0;
        }
    }
    v
}

/// Coordinate-sampler event rate `(<v, grad U(x)>)_+ + lambda_ref`.
pub fn cs_rate<T: Target + ?Sized>(target: &T, x: &[f64], v: &[f64], lambda_ref: f64) -> f64 {
    let g = target.gradient(x);
    let dot: f64 = v.iter().zip(&g).map(|(vi, gi)| vi * gi).sum();
    dot.max(0.0) + lambda_ref
}

/// Total kernel mass `2 d lambda_ref + sum_i |dU/dx_i|` at `x`.
pub fn cs_total_rate<T: Target + ?Sized>(target: &T, x: &[f64], lambda_ref: f64) -> f64 {
    let g = target.gradient(x);
    2.0 * x.len() as f64 * lambda_ref + g.iter().map(|gi| gi.abs()).sum::<f64>()
}

/// Coordinate-sampler transition: draw `v*` from the `2d` atoms `{±e_i}`
/// with weights `lambda(x, -v*) = (-(v*) . grad U)_+ + lambda_ref`.
pub fn cs_transition<T: Target + ?Sized>(
    target: &T,
    x: &[f64],
    lambda_ref: f64,
    rng: &mut RandomSource,
) -> Result<Vec<f64>> {
    let g = target.gradient(x);
    let (index, sign) = cs_transition_from_gradient(&g, lambda_ref, rng)?;
    let mut v = vec![0.0; x.len()];
    v[index] = sign;
    Ok(v)
}

/// Kernel core reusing an already-computed gradient: returns the index and
/// sign of the new axis velocity.
pub fn cs_transition_from_gradient(
    gradient: &[f64],
    lambda_ref: f64,
    rng: &mut RandomSource,
) -> Result<(usize, f64)> {
    let d = gradient.len();
    let total = 2.0 * d as f64 * lambda_ref + gradient.iter().map(|g| g.abs()).sum::<f64>();
    if total <= 0.0 {
        return Err(Error::UndefinedTransition);
    }
    // Atoms in fixed order (+e_0, -e_0, +e_1, ...): weight of +e_i is
    // (-g_i)_+ + lambda_ref, weight of -e_i is (g_i)_+ + lambda_ref.
    let mut u = rng.uniform() * total;
    for (i, g) in gradient.iter().enumerate() {
        let plus = (-g).max(0.0) + lambda_ref;
        if u < plus {
            return Ok((i, 1.0));
        }
        u -= plus;
        let minus = g.max(0.0) + lambda_ref;
        if u < minus {
            return Ok((i, -1.0));
        }
        u -= minus;
    }
    // Rounding pushed u past the last atom; it belongs there.
    Ok((d - 1, -1.0))
}

/// Zigzag per-coordinate rates `(v_i dU/dx_i)_+ + lambda_ref_i`.
pub fn zz_rates<T: Target + ?Sized>(
    target: &T,
    x: &[f64],
    v: &[f64],
    lambda_ref: &[f64],
) -> Vec<f64> {
    let g = target.gradient(x);
    (0..x.len())
        .map(|i| (v[i] * g[i]).max(0.0) + lambda_ref[i])
        .collect()
}

/// Flip component `i` of the zigzag velocity.
pub fn zz_flip(v: &[f64], i: usize) -> Vec<f64> {
    let mut out = v.to_vec();
    out[i] = -out[i];
    out
}

/// Reflect `v` in the hyperplane orthogonal to `w`:
/// `R_w v = v - 2 (<w,v>/<w,w>) w`.
pub fn bps_bounce(v: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let ww: f64 = w.iter().map(|wi| wi * wi).sum();
    if ww.sqrt() < 1e-14 {
        return Err(Error::BounceAtCriticalPoint { norm: ww.sqrt() });
    }
    let wv: f64 = w.iter().zip(v).map(|(wi, vi)| wi * vi).sum();
    let scale = 2.0 * wv / ww;
    Ok(v.iter().zip(w).map(|(vi, wi)| vi - scale * wi).collect())
}

/// Bouncy-particle transition: bounce with probability
/// `<v, grad U>_+ / lambda(x, v)`, otherwise refresh from the velocity law.
pub fn bps_step_kernel<T: Target + ?Sized>(
    target: &T,
    x: &[f64],
    v: &[f64],
    lambda_ref: f64,
    law: VelocityLaw,
    rng: &mut RandomSource,
) -> Result<(Vec<f64>, EventKind)> {
    let g = target.gradient(x);
    let along: f64 = v.iter().zip(&g).map(|(vi, gi)| vi * gi).sum::<f64>().max(0.0);
    let total = along + lambda_ref;
    if total <= 0.0 {
        return Err(Error::UndefinedTransition);
    }
    if rng.uniform() < along / total {
        Ok((bps_bounce(v, &g)?, EventKind::Bounce))
    } else {
        Ok((draw_velocity(law, v.len(), rng), EventKind::Refresh))
    }
}
