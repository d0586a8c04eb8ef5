//! Centered multivariate Gaussian targets.
//!
//! `U(x) = x' Sigma^{-1} x / 2`, so the directional rate along any ray is
//! affine: `<v, grad U(x + t v)> = <v, Sigma^{-1} x> + t <v, Sigma^{-1} v>`
//! with nonnegative slope. Event times invert in closed form — no thinning.
//!
//! All solves go through a cached Cholesky factorization; the inverse is
//! never formed explicitly.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::clocks::RateProfile;
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::targets::Target;

/// Multivariate Gaussian with mean zero and covariance `Sigma`.
pub struct Mvn {
    dim: usize,
    chol: Cholesky<f64, Dyn>,
    /// Diagonal of `Sigma^{-1}`, cached for the axis-ray fast path.
    precision_diag: Vec<f64>,
    marginal_sd: Vec<f64>,
    name: String,
}

impl Mvn {
    pub fn new(covariance: DMatrix<f64>) -> Result<Self> {
        Self::with_name(covariance, "mvn")
    }

    pub fn with_name(covariance: DMatrix<f64>, name: impl Into<String>) -> Result<Self> {
        let dim = covariance.nrows();
        assert!(dim >= 1 && covariance.is_square(), "covariance not square");
        let marginal_sd = (0..dim).map(|i| covariance[(i, i)].sqrt()).collect();
        let chol = Cholesky::new(covariance).ok_or(Error::CovarianceNotSpd)?;
        let mut precision_diag = vec![0.0; dim];
        let mut e = DVector::zeros(dim);
        for i in 0..dim {
            e[i] = 1.0;
            precision_diag[i] = chol.solve(&e)[i];
            e[i] = 0.0;
        }
        Ok(Self {
            dim,
            chol,
            precision_diag,
            marginal_sd,
            name: name.into(),
        })
    }

    /// Standard Gaussian (identity covariance).
    pub fn standard(dim: usize) -> Self {
        Self::with_name(DMatrix::identity(dim, dim), "mvn-standard").expect("identity is SPD")
    }

    /// `Sigma^{-1} y` by Cholesky solve.
    fn precision_apply(&self, y: &[f64]) -> DVector<f64> {
        self.chol.solve(&DVector::from_column_slice(y))
    }

    /// Standard deviation of marginal `i`; used for exact KS statistics.
    pub fn marginal_sd(&self, i: usize) -> f64 {
        self.marginal_sd[i]
    }

    /// Exact draw from the target via the Cholesky factor.
    pub fn sample(&self, rng: &mut RandomSource) -> Vec<f64> {
        let z = DVector::from_vec(rng.standard_normal_vec(self.dim));
        (self.chol.l() * z).iter().copied().collect()
    }
}

/// Index and sign when `v` is `+e_i` or `-e_i`; the coordinate sampler's
/// velocities always are.
fn as_axis(v: &[f64]) -> Option<(usize, f64)> {
    let mut hit = None;
    for (i, &vi) in v.iter().enumerate() {
        if vi != 0.0 {
            if hit.is_some() || (vi != 1.0 && vi != -1.0) {
                return None;
            }
            hit = Some((i, vi));
        }
    }
    hit
}

impl Target for Mvn {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.dim
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let g = self.precision_apply(x);
        0.5 * x.iter().zip(g.iter()).map(|(xi, gi)| xi * gi).sum::<f64>()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        self.precision_apply(x).iter().copied().collect()
    }

    fn directional_profile(&self, x: &[f64], v: &[f64], lambda_ref: f64) -> RateProfile {
        let g = self.precision_apply(x);
        let (a, b) = if let Some((i, sign)) = as_axis(v) {
            (sign * g[i], self.precision_diag[i])
        } else {
            let gv = self.precision_apply(v);
            let a = v.iter().zip(g.iter()).map(|(vi, gi)| vi * gi).sum();
            let b = v.iter().zip(gv.iter()).map(|(vi, gi)| vi * gi).sum();
            (a, b)
        };
        RateProfile::LinearPlus {
            a,
            b,
            c: lambda_ref,
        }
    }

    fn coordinate_profiles(&self, x: &[f64], v: &[f64], lambda_ref: &[f64]) -> Vec<RateProfile> {
        let g = self.precision_apply(x);
        let gv = self.precision_apply(v);
        (0..self.dim)
            .map(|i| RateProfile::LinearPlus {
                a: v[i] * g[i],
                b: v[i] * gv[i],
                c: lambda_ref[i],
            })
            .collect()
    }
}

/// Equicorrelated covariance: unit variances, all off-diagonals 0.9.
pub fn mvn1_covariance(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| if i == j { 1.0 } else { 0.9 })
}

/// Geometric-decay covariance: `A_ij = 0.9^{|i-j|}`.
pub fn mvn2_covariance(dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(dim, dim, |i, j| 0.9f64.powi((i as i32 - j as i32).abs()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn mvn1_covariance_entries() {
        let a = mvn1_covariance(2);
        assert_eq!(a[(0, 0)], 1.0);
        assert_eq!(a[(0, 1)], 0.9);
        assert_eq!(a[(1, 0)], 0.9);
        assert_eq!(a[(1, 1)], 1.0);
    }

    #[test]
    fn mvn2_covariance_first_row() {
        let a = mvn2_covariance(3);
        assert_relative_eq!(a[(0, 0)], 1.0);
        assert_relative_eq!(a[(0, 1)], 0.9);
        assert_relative_eq!(a[(0, 2)], 0.81);
    }

    #[test]
    fn identity_profile_is_plain_linear() {
        let t = Mvn::standard(2);
        let p = t.directional_profile(&[1.0, -2.0], &[1.0, 0.0], 0.25);
        match p {
            RateProfile::LinearPlus { a, b, c } => {
                assert_relative_eq!(a, 1.0);
                assert_relative_eq!(b, 1.0);
                assert_relative_eq!(c, 0.25);
            }
            other => panic!("expected LinearPlus, got {other:?}"),
        }
    }

    #[test]
    fn axis_fast_path_matches_general_path() {
        let t = Mvn::with_name(mvn2_covariance(4), "mvn2").unwrap();
        let x = [0.3, -1.2, 0.7, 2.0];
        // +e_2 through the axis path.
        let axis = t.directional_profile(&x, &[0.0, 0.0, 1.0, 0.0], 0.0);
        // Same ray through the general path (scaled trick not possible, so
        // compare against gradient arithmetic directly).
        let g = t.gradient(&x);
        let gv = t.gradient(&[0.0, 0.0, 1.0, 0.0]);
        match axis {
            RateProfile::LinearPlus { a, b, .. } => {
                assert_relative_eq!(a, g[2], max_relative = 1e-12);
                assert_relative_eq!(b, gv[2], max_relative = 1e-12);
            }
            other => panic!("expected LinearPlus, got {other:?}"),
        }
    }

    #[test]
    fn non_spd_is_rejected() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(Mvn::new(m), Err(Error::CovarianceNotSpd)));
    }

    #[test]
    fn sample_matches_covariance_roughly() {
        let t = Mvn::with_name(mvn1_covariance(2), "mvn1").unwrap();
        let mut rng = RandomSource::new(11);
        let n = 20_000;
        let (mut s00, mut s01) = (0.0, 0.0);
        for _ in 0..n {
            let x = t.sample(&mut rng);
            s00 += x[0] * x[0];
            s01 += x[0] * x[1];
        }
        assert_relative_eq!(s00 / n as f64, 1.0, max_relative = 0.05);
        assert_relative_eq!(s01 / n as f64, 0.9, max_relative = 0.05);
    }
}
