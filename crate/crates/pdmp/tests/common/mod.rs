//! Shared oracles for integration tests: independent quadrature, finite
//! differences, and random-point generation. Nothing here touches the
//! implementation paths it is used to check.

#![allow(dead_code)]

use pdmp::rng::RandomSource;
use pdmp::targets::Target;

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance
/// `tol`. Recursion splits until the local Richardson estimate is below the
/// budgeted share of `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(a: f64, fa: f64, b: f64, fb: f64, fm: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }

    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(a, fa, m, fm, flm);
        let right = simpson(m, fm, b, fb, frm);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, flm, left, 0.5 * tol, depth - 1)
            + recurse(f, m, fm, b, fb, frm, right, 0.5 * tol, depth - 1)
    }

    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fb, fm) = (f(a), f(b), f(m));
    let whole = simpson(a, fa, b, fb, fm);
    recurse(f, a, fa, b, fb, fm, whole, tol, 60)
}

/// Central-difference gradient of the target's potential.
pub fn fd_gradient(target: &dyn Target, x: &[f64]) -> Vec<f64> {
    let mut g = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        let h = 1e-5 * (1.0 + x[i].abs());
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[i] += h;
        xm[i] -= h;
        g.push((target.potential(&xp) - target.potential(&xm)) / (2.0 * h));
    }
    g
}

/// Largest relative gradient defect over `points` random points drawn from
/// `scale * N(0, I)` shifted by `center`.
pub fn max_gradient_defect(
    target: &dyn Target,
    points: usize,
    scale: f64,
    center: f64,
    rng: &mut RandomSource,
) -> f64 {
    let mut worst = 0.0f64;
    for _ in 0..points {
        let x: Vec<f64> = (0..target.dim())
            .map(|_| center + scale * rng.standard_normal())
            .collect();
        let exact = target.gradient(&x);
        let approx = fd_gradient(target, &x);
        for (e, a) in exact.iter().zip(&approx) {
            let denom = e.abs().max(1.0);
            worst = worst.max((e - a).abs() / denom);
        }
    }
    worst
}

/// Exponential CDF with the given rate.
pub fn exp_cdf(rate: f64) -> impl Fn(f64) -> f64 {
    move |t: f64| {
        if t <= 0.0 {
            0.0
        } else {
            1.0 - (-rate * t).exp()
        }
    }
}
