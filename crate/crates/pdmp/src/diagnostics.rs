//! Estimators and statistics over trajectories.
//!
//! The continuous-time estimator `(1/T) \int_0^T h(X_t) dt` is exact for
//! piecewise-linear paths and polynomial `h`; [`path_average`] integrates
//! coordinates and squared coordinates in closed form per segment and falls
//! back to fixed-order Gauss quadrature for generic observables.
//! [`discretize`] produces the familiar equally-spaced sample matrix, and
//! [`ess`] / [`ks_one_sample`] / [`ks_two_sample`] quantify sample quality.

use crate::error::{Error, Result};
use crate::state::Trajectory;
use crate::targets::Target;

/// Discretized samples with their provenance.
#[derive(Debug, Clone)]
pub struct SampleMatrix {
    values: Vec<f64>,
    n: usize,
    dim: usize,
    pub provenance: Provenance,
}

/// Where a sample matrix came from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Provenance {
    pub sampler: String,
    pub target: String,
    pub seed: u64,
    pub horizon: f64,
}

impl SampleMatrix {
    pub fn from_rows(rows: Vec<Vec<f64>>, provenance: Provenance) -> Self {
        assert!(!rows.is_empty(), "empty sample matrix");
        let dim = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == dim));
        let n = rows.len();
        let mut values = Vec::with_capacity(n * dim);
        for r in &rows {
            values.extend_from_slice(r);
        }
        assert!(values.iter().all(|v| v.is_finite()), "non-finite sample");
        Self {
            values,
            n,
            dim,
            provenance,
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    /// Copy of column `j`.
    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.values[i * self.dim + j]).collect()
    }
}

/// Sample the trajectory at times `n T / N`, `n = 1..=N`, `T` the horizon.
pub fn discretize(traj: &Trajectory, n: usize) -> SampleMatrix {
    assert!(n >= 1, "need at least one sample");
    let t_total = traj.horizon();
    assert!(t_total > 0.0, "horizon must be positive");
    let rows = (1..=n)
        .map(|k| traj.position_at(k as f64 * t_total / n as f64))
        .collect();
    SampleMatrix::from_rows(
        rows,
        Provenance {
            horizon: t_total,
            ..Provenance::default()
        },
    )
}

/// Observable for [`path_average`].
pub enum Observable<'a> {
    /// `h(x) = x_i`.
    Coordinate(usize),
    /// `h(x) = x_i^2`.
    SquaredCoordinate(usize),
    /// Arbitrary `h`, integrated by 5-point Gauss-Legendre per segment.
    Generic(&'a dyn Fn(&[f64]) -> f64),
}

/// 5-point Gauss-Legendre nodes and weights on [-1, 1].
const GAUSS5: [(f64, f64); 5] = [
    (-0.906179845938664, 0.236926885056189),
    (-0.538469310105683, 0.478628670499366),
    (0.0, 0.568888888888889),
    (0.538469310105683, 0.478628670499366),
    (0.906179845938664, 0.236926885056189),
];

/// Time average `(1/T) \int_0^T h(X_t) dt` over the trajectory, truncated at
/// the horizon. Coordinate and squared-coordinate observables integrate in
/// closed form; generic observables use per-segment quadrature.
pub fn path_average(traj: &Trajectory, h: Observable<'_>) -> f64 {
    let t_total = traj.horizon();
    assert!(t_total > 0.0, "horizon must be positive");
    let skeleton = traj.skeleton();
    let mut integral = 0.0;
    for w in skeleton.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        if p.time >= t_total {
            break;
        }
        let dt = q.time.min(t_total) - p.time;
        if dt <= 0.0 {
            continue;
        }
        integral += match h {
            Observable::Coordinate(i) => {
                // int_0^dt (x + s v) ds
                dt * (p.x[i] + 0.5 * dt * p.v[i])
            }
            Observable::SquaredCoordinate(i) => {
                // int_0^dt (x + s v)^2 ds
                let (x, v) = (p.x[i], p.v[i]);
                dt * (x * x + dt * (x * v + dt * v * v / 3.0))
            }
            Observable::Generic(f) => {
                let half = 0.5 * dt;
                GAUSS5
                    .iter()
                    .map(|(node, weight)| {
                        let s = half * (node + 1.0);
                        let xt: Vec<f64> =
                            p.x.iter().zip(&p.v).map(|(xi, vi)| xi + s * vi).collect();
                        weight * f(&xt)
                    })
                    .sum::<f64>()
                    * half
            }
        };
    }
    integral / t_total
}

/// Batch-means effective sample size with batch size `floor(sqrt(n))`.
///
/// `ESS = n s^2 / sigma_bm^2`, clipped to `(0, n]`; a constant series is an
/// error.
pub fn ess(series: &[f64]) -> Result<f64> {
    let n = series.len();
    assert!(n >= 100, "need at least 100 observations, got {n}");
    let batch = (n as f64).sqrt().floor() as usize;
    let batches = n / batch;
    let used = batch * batches;
    let data = &series[..used];

    let mean = data.iter().sum::<f64>() / used as f64;
    let variance = data.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (used - 1) as f64;
    if variance == 0.0 {
        return Err(Error::DegenerateSeries);
    }

    let mut between = 0.0;
    for b in 0..batches {
        let bm = data[b * batch..(b + 1) * batch].iter().sum::<f64>() / batch as f64;
        between += (bm - mean).powi(2);
    }
    // Long-run variance estimate: b/(a-1) sum (batch mean - mean)^2.
    let long_run = batch as f64 * between / (batches - 1) as f64;
    Ok((n as f64 * variance / long_run).min(n as f64))
}

/// One-sample Kolmogorov-Smirnov statistic against a CDF.
pub fn ks_one_sample(series: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    assert!(!series.is_empty());
    let mut sorted = series.to_vec();
    sorted.sort_unstable_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d = 0.0f64;
    for (k, x) in sorted.iter().enumerate() {
        let f = cdf(*x);
        let upper = ((k + 1) as f64 / n - f).abs();
        let lower = (k as f64 / n - f).abs();
        d = d.max(upper).max(lower);
    }
    d
}

/// Two-sample Kolmogorov-Smirnov statistic by merge scan of the empirical
/// CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    assert!(!a.is_empty() && !b.is_empty());
    let mut xs = a.to_vec();
    let mut ys = b.to_vec();
    xs.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    ys.sort_unstable_by(|p, q| p.partial_cmp(q).unwrap());
    let (na, nb) = (xs.len() as f64, ys.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d = 0.0f64;
    while i < xs.len() && j < ys.len() {
        let x = xs[i].min(ys[j]);
        while i < xs.len() && xs[i] <= x {
            i += 1;
        }
        while j < ys.len() && ys[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

/// Critical value of the one- or two-sample KS statistic at significance
/// `alpha`, from the asymptotic Kolmogorov distribution. For two samples
/// pass the effective size `n m / (n + m)`.
pub fn ks_critical_value(effective_n: f64, alpha: f64) -> f64 {
    assert!(effective_n > 0.0 && alpha > 0.0 && alpha < 1.0);
    ((2.0 / alpha).ln() / 2.0).sqrt() / effective_n.sqrt()
}

/// Standard normal CDF via Cody's rational approximations to `erfc`;
/// relative error near machine precision. Used for exact marginal KS
/// statistics on Gaussian targets.
pub fn standard_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / std::f64::consts::SQRT_2)
}

/// Complementary error function (Cody 1969, as in netlib specfun).
fn erfc(x: f64) -> f64 {
    let y = x.abs();
    if y <= 0.46875 {
        return 1.0 - erf_small(x);
    }
    let r = if y <= 4.0 {
        const C: [f64; 9] = [
            5.64188496988670089e-1,
            8.88314979438837594e0,
            6.61191906371416295e1,
            2.98635138197400131e2,
            8.81952221241769090e2,
            1.71204761263407058e3,
            2.05107837782607147e3,
            1.23033935479799725e3,
            2.15311535474403846e-8,
        ];
        const D: [f64; 8] = [
            1.57449261107098347e1,
            1.17693950891312499e2,
            5.37181101862009858e2,
            1.62138957456669019e3,
            3.29079923573345963e3,
            4.36261909014324716e3,
            3.43936767414372164e3,
            1.23033935480374942e3,
        ];
        let mut num = C[8] * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + C[i]) * y;
            den = (den + D[i]) * y;
        }
        scaled_tail(y, (num + C[7]) / (den + D[7]))
    } else {
        const P: [f64; 6] = [
            3.05326634961232344e-1,
            3.60344899949804439e-1,
            1.25781726111229246e-1,
            1.60837851487422766e-2,
            6.58749161529837803e-4,
            1.63153871373020978e-2,
        ];
        const Q: [f64; 5] = [
            2.56852019228982242e0,
            1.87295284992346047e0,
            5.27905102951428412e-1,
            6.05183413124413191e-2,
            2.33520497626869185e-3,
        ];
        const INV_SQRT_PI: f64 = 5.6418958354775628695e-1;
        let z = 1.0 / (y * y);
        let mut num = P[5] * z;
        let mut den = z;
        for i in 0..4 {
            num = (num + P[i]) * z;
            den = (den + Q[i]) * z;
        }
        let r = z * (num + P[4]) / (den + Q[4]);
        scaled_tail(y, (INV_SQRT_PI - r) / y)
    };
    if x < 0.0 {
        2.0 - r
    } else {
        r
    }
}

/// Multiply the tail polynomial by `exp(-y^2)` with the split that keeps
/// full precision for large `y`.
fn scaled_tail(y: f64, poly: f64) -> f64 {
    let ysq = (y * 16.0).trunc() / 16.0;
    let del = (y - ysq) * (y + ysq);
    (-ysq * ysq).exp() * (-del).exp() * poly
}

fn erf_small(x: f64) -> f64 {
    const A: [f64; 5] = [
        3.16112374387056560e0,
        1.13864154151050156e2,
        3.77485237685302021e2,
        3.20937758913846947e3,
        1.85777706184603153e-1,
    ];
    const B: [f64; 4] = [
        2.36012909523441209e1,
        2.44024637934444173e2,
        1.28261652607737228e3,
        2.84423683343917062e3,
    ];
    let z = x * x;
    let mut num = A[4] * z;
    let mut den = z;
    for i in 0..3 {
        num = (num + A[i]) * z;
        den = (den + B[i]) * z;
    }
    x * (num + A[3]) / (den + B[3])
}

/// Drift-condition witness `V = exp(U/2) / sqrt(lambda_ref + <grad U, -v>_+)`.
///
/// The denominator must stay positive: a zero refresh rate at a point where
/// the incoming-gradient term vanishes is an error.
pub fn lyapunov<T: Target + ?Sized>(target: &T, x: &[f64], v: &[f64], lambda_ref: f64) -> Result<f64> {
    let g = target.gradient(x);
    let incoming: f64 = g.iter().zip(v).map(|(gi, vi)| gi * -vi).sum::<f64>().max(0.0);
    let denom = lambda_ref + incoming;
    if denom <= 0.0 {
        return Err(Error::LyapunovUndefined);
    }
    Ok((0.5 * target.potential(x)).exp() / denom.sqrt())
}
