//! Log-Gaussian Cox process posterior on a square grid.
//!
//! Cell counts are Poisson with mean `s exp(x_ij)` given a latent Gaussian
//! field `X` with exponential-decay covariance over the grid. The posterior
//! potential is
//!
//! `U(X) = sum_ij [s exp(x_ij) - y_ij x_ij] + (X - mu 1)' Sigma^{-1} (X - mu 1) / 2`.
//!
//! Along a ray, each coordinate contributes `gamma e^{±t}` plus an affine
//! prior term; both pieces are monotone on a window, so a constant bound
//! evaluated at the window end dominates and thinning applies.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::clocks::{BoundEnvelope, BoundValue, GeneralRate, RateProfile};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::targets::{float17, Target};

/// Grid data and hyperparameters for the LGCP posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct LgcpData {
    /// Grid side; the target dimension is `grid_side^2`.
    pub grid_side: usize,
    /// Poisson counts in row-major cell order.
    pub counts: Vec<u64>,
    pub sigma2: f64,
    pub mu: f64,
    pub beta: f64,
    /// Latent field that generated the counts, when known.
    pub latent: Option<Vec<f64>>,
}

impl LgcpData {
    pub fn new(grid_side: usize, counts: Vec<u64>, sigma2: f64, mu: f64, beta: f64) -> Self {
        assert!(grid_side >= 2, "grid side must be at least 2");
        assert_eq!(counts.len(), grid_side * grid_side);
        assert!(sigma2 > 0.0 && beta > 0.0);
        Self {
            grid_side,
            counts,
            sigma2,
            mu,
            beta,
            latent: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.grid_side * self.grid_side
    }

    /// Cell area scale `s = 1 / grid_side^2`.
    pub fn area_scale(&self) -> f64 {
        1.0 / (self.dim() as f64)
    }

    /// Exponential-decay covariance over grid cells:
    /// `sigma^2 exp(-dist(cells) / (beta * grid_side))`.
    pub fn covariance(&self) -> DMatrix<f64> {
        let d = self.grid_side;
        let scale = self.beta * d as f64;
        DMatrix::from_fn(self.dim(), self.dim(), |p, q| {
            let (i1, j1) = ((p / d) as f64, (p % d) as f64);
            let (i2, j2) = ((q / d) as f64, (q % d) as f64);
            let dist = ((i1 - i2).powi(2) + (j1 - j2).powi(2)).sqrt();
            self.sigma2 * (-dist / scale).exp()
        })
    }

    /// CSV with header `i,j,y,x`: 0-based grid indices, count, latent value.
    pub fn to_csv(&self) -> String {
        let latent = self
            .latent
            .as_ref()
            .expect("latent field required for CSV output");
        let d = self.grid_side;
        let mut out = String::from("i,j,y,x\n");
        for i in 0..d {
            for j in 0..d {
                let k = i * d + j;
                let _ = writeln!(out, "{i},{j},{},{}", self.counts[k], float17(latent[k]));
            }
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Load a grid dataset; hyperparameters are not stored in the CSV and
    /// must be supplied by the caller.
    pub fn load_csv(path: &Path, sigma2: f64, mu: f64, beta: f64) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let shown = path.display().to_string();
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::DataFormat {
            path: shown.clone(),
            line: 1,
            message: "empty file".into(),
        })?;
        if header != "i,j,y,x" {
            return Err(Error::DataFormat {
                path: shown,
                line: 1,
                message: format!("expected header i,j,y,x, got {header:?}"),
            });
        }
        let mut rows = Vec::new();
        for (idx, line) in lines {
            let bad = |message: String| Error::DataFormat {
                path: shown.clone(),
                line: idx + 1,
                message,
            };
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(bad(format!("expected 4 fields, got {}", fields.len())));
            }
            let i: usize = fields[0].parse().map_err(|e| bad(format!("bad i: {e}")))?;
            let j: usize = fields[1].parse().map_err(|e| bad(format!("bad j: {e}")))?;
            let y: u64 = fields[2].parse().map_err(|e| bad(format!("bad y: {e}")))?;
            let x: f64 = fields[3].parse().map_err(|e| bad(format!("bad x: {e}")))?;
            rows.push((i, j, y, x));
        }
        let n = rows.len();
        let side = (n as f64).sqrt().round() as usize;
        if side < 2 || side * side != n {
            return Err(Error::DataFormat {
                path: shown,
                line: 1,
                message: format!("{n} rows is not a square grid"),
            });
        }
        let mut counts = vec![0u64; n];
        let mut latent = vec![0.0f64; n];
        for (idx, (i, j, y, x)) in rows.into_iter().enumerate() {
            if i >= side || j >= side {
                return Err(Error::DataFormat {
                    path: shown,
                    line: idx + 2,
                    message: format!("cell ({i},{j}) outside {side}x{side} grid"),
                });
            }
            counts[i * side + j] = y;
            latent[i * side + j] = x;
        }
        let mut data = Self::new(side, counts, sigma2, mu, beta);
        data.latent = Some(latent);
        Ok(data)
    }
}

/// Draw a latent field from the grid Gaussian process and Poisson counts
/// from it.
pub fn simulate_lgcp_data(
    grid_side: usize,
    sigma2: f64,
    mu: f64,
    beta: f64,
    rng: &mut RandomSource,
) -> Result<LgcpData> {
    let mut data = LgcpData::new(grid_side, vec![0; grid_side * grid_side], sigma2, mu, beta);
    let chol = Cholesky::new(data.covariance()).ok_or(Error::CovarianceNotSpd)?;
    let z = DVector::from_vec(rng.standard_normal_vec(data.dim()));
    let latent: Vec<f64> = (chol.l() * z).iter().map(|g| g + mu).collect();
    let s = data.area_scale();
    data.counts = latent
        .iter()
        .map(|x| sample_poisson(s * x.exp(), rng))
        .collect();
    data.latent = Some(latent);
    Ok(data)
}

fn sample_poisson(mean: f64, rng: &mut RandomSource) -> u64 {
    use rand_distr::{Distribution, Poisson};
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("positive mean").sample(rng) as u64
}

/// LGCP posterior target.
pub struct Lgcp {
    data: LgcpData,
    chol: Cholesky<f64, Dyn>,
    precision_diag: Vec<f64>,
    mean: DVector<f64>,
    area: f64,
    window: f64,
}

impl Lgcp {
    pub fn new(data: LgcpData) -> Result<Self> {
        let dim = data.dim();
        let chol = Cholesky::new(data.covariance()).ok_or(Error::CovarianceNotSpd)?;
        let mut precision_diag = vec![0.0; dim];
        let mut e = DVector::zeros(dim);
        for i in 0..dim {
            e[i] = 1.0;
            precision_diag[i] = chol.solve(&e)[i];
            e[i] = 0.0;
        }
        let mean = DVector::from_element(dim, data.mu);
        let area = data.area_scale();
        Ok(Self {
            data,
            chol,
            precision_diag,
            mean,
            area,
            window: 1.0,
        })
    }

    /// Override the thinning window (default 1.0).
    pub fn with_window(mut self, window: f64) -> Self {
        assert!(window > 0.0);
        self.window = window;
        self
    }

    pub fn data(&self) -> &LgcpData {
        &self.data
    }

    /// Maximum round-trip defect `|L L' - Sigma|_ij` of the factorization.
    pub fn factorization_defect(&self) -> f64 {
        let sigma = self.data.covariance();
        let l = self.chol.l();
        let rebuilt = &l * l.transpose();
        (rebuilt - sigma).abs().max()
    }

    /// `Sigma^{-1} (x - mu 1)`.
    fn prior_pull(&self, x: &[f64]) -> DVector<f64> {
        let centered = DVector::from_column_slice(x) - &self.mean;
        self.chol.solve(&centered)
    }

    fn exp_affine_profile(
        &self,
        terms: Vec<(f64, f64)>,
        affine: f64,
        slope: f64,
        lambda_ref: f64,
    ) -> RateProfile {
        let window = self.window;
        let rate_terms = terms.clone();
        let rate = move |t: f64| {
            let e: f64 = rate_terms
                .iter()
                .map(|(gamma, sign)| gamma * (sign * t).exp())
                .sum();
            (e + affine + slope * t).max(0.0) + lambda_ref
        };
        // Every term gamma e^{sign t} is increasing in t (gamma and sign
        // share their sign), so the window maximum sits at the window end.
        let envelope = BoundEnvelope::new(window, move |t0| {
            let end = t0 + window;
            let e: f64 = terms
                .iter()
                .map(|(gamma, sign)| gamma * (sign * end).exp())
                .sum();
            let m = (e + affine + slope.max(0.0) * end + slope.min(0.0) * t0).max(0.0) + lambda_ref;
            BoundValue::Constant(m)
        });
        RateProfile::General(GeneralRate::new("lgcp", rate, envelope))
    }
}

impl Target for Lgcp {
    fn name(&self) -> &str {
        "lgcp"
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn potential(&self, x: &[f64]) -> f64 {
        let pull = self.prior_pull(x);
        let centered = DVector::from_column_slice(x) - &self.mean;
        let prior = 0.5 * centered.dot(&pull);
        let likelihood: f64 = x
            .iter()
            .zip(&self.data.counts)
            .map(|(xi, y)| self.area * xi.exp() - *y as f64 * xi)
            .sum();
        prior + likelihood
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let pull = self.prior_pull(x);
        x.iter()
            .zip(&self.data.counts)
            .zip(pull.iter())
            .map(|((xi, y), p)| self.area * xi.exp() - *y as f64 + p)
            .collect()
    }

    fn directional_profile(&self, x: &[f64], v: &[f64], lambda_ref: f64) -> RateProfile {
        let pull = self.prior_pull(x);
        // <v, Sigma^{-1} v>: one extra solve unless v is an axis vector.
        let nonzero: Vec<usize> = (0..v.len()).filter(|&i| v[i] != 0.0).collect();
        let slope = if nonzero.len() == 1 && v[nonzero[0]].abs() == 1.0 {
            self.precision_diag[nonzero[0]]
        } else {
            let pv = self.chol.solve(&DVector::from_column_slice(v));
            v.iter().zip(pv.iter()).map(|(vi, pi)| vi * pi).sum()
        };
        let mut affine = 0.0;
        let mut terms = Vec::with_capacity(nonzero.len());
        for &i in &nonzero {
            affine += v[i] * (pull[i] - self.data.counts[i] as f64);
            terms.push((v[i] * self.area * x[i].exp(), v[i]));
        }
        self.exp_affine_profile(terms, affine, slope, lambda_ref)
    }

    fn coordinate_profiles(&self, x: &[f64], v: &[f64], lambda_ref: &[f64]) -> Vec<RateProfile> {
        let pull = self.prior_pull(x);
        let pv = self.chol.solve(&DVector::from_column_slice(v));
        (0..self.dim())
            .map(|i| {
                let affine = v[i] * (pull[i] - self.data.counts[i] as f64);
                let slope = v[i] * pv[i];
                let terms = vec![(v[i] * self.area * x[i].exp(), v[i])];
                self.exp_affine_profile(terms, affine, slope, lambda_ref[i])
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn small_data(rng_seed: u64) -> LgcpData {
        let mut rng = RandomSource::new(rng_seed);
        simulate_lgcp_data(4, 1.91, 126.0f64.ln() - 1.91 / 2.0, 1.0 / 6.0, &mut rng).unwrap()
    }

    #[test]
    fn gradient_vanishes_at_consistency_point() {
        // Pick mu with s exp(mu) = 1 so integer counts y = 1 satisfy
        // y = s exp(x) exactly at X = mu 1; both gradient terms then vanish.
        let mu = 9.0f64.ln();
        let data = LgcpData::new(3, vec![1; 9], 0.5, mu, 0.5);
        let target = Lgcp::new(data).unwrap();
        let g = target.gradient(&vec![mu; 9]);
        for gi in g {
            assert!(gi.abs() < 1e-12, "gradient component {gi}");
        }
    }

    #[test]
    fn factorization_round_trip_is_tight() {
        let target = Lgcp::new(small_data(3)).unwrap();
        assert!(target.factorization_defect() < 1e-8);
    }

    #[test]
    fn directional_profile_matches_gradient_route() {
        let target = Lgcp::new(small_data(5)).unwrap();
        let d = target.dim();
        let mut rng = RandomSource::new(9);
        let x: Vec<f64> = (0..d).map(|_| target.data.mu + rng.standard_normal()).collect();
        // Axis ray.
        let mut v = vec![0.0; d];
        v[7] = -1.0;
        let p = target.directional_profile(&x, &v, 0.1);
        for k in 0..20 {
            let t = 0.11 * k as f64;
            let direct = crate::targets::directional_rate(&target, &x, &v, 0.1, t);
            assert_relative_eq!(p.rate(t), direct, max_relative = 1e-10, epsilon = 1e-12);
        }
        // Diagonal ray (zigzag style).
        let v: Vec<f64> = (0..d).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let profiles = target.coordinate_profiles(&x, &v, &vec![0.05; d]);
        for (i, p) in profiles.iter().enumerate() {
            for k in 0..5 {
                let t = 0.2 * k as f64;
                let xt: Vec<f64> = x.iter().zip(&v).map(|(xi, vi)| xi + t * vi).collect();
                let direct = (v[i] * target.partial(&xt, i)).max(0.0) + 0.05;
                assert_relative_eq!(p.rate(t), direct, max_relative = 1e-9, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn envelope_dominates_along_ray() {
        let target = Lgcp::new(small_data(11)).unwrap();
        let d = target.dim();
        let x = vec![target.data.mu; d];
        let mut v = vec![0.0; d];
        v[3] = 1.0;
        let RateProfile::General(g) = target.directional_profile(&x, &v, 0.2) else {
            panic!("expected General");
        };
        for w in 0..5 {
            let t0 = w as f64 * g.envelope().window();
            let m = match g.envelope().value_at(t0) {
                BoundValue::Constant(m) => m,
                other => panic!("unexpected bound {other:?}"),
            };
            for j in 0..=50 {
                let t = t0 + j as f64 / 50.0 * g.envelope().window();
                assert!(g.rate(t) <= m * (1.0 + 1e-12), "t={t} rate={} m={m}", g.rate(t));
            }
        }
    }

    #[test]
    fn near_degenerate_gp_concentrates_at_mu() {
        let mut rng = RandomSource::new(21);
        let mu = 1.5;
        let data = simulate_lgcp_data(3, 1e-10, mu, 0.5, &mut rng).unwrap();
        for x in data.latent.unwrap() {
            assert_relative_eq!(x, mu, epsilon = 1e-4);
        }
    }

    #[test]
    fn csv_round_trip() {
        let data = small_data(13);
        let dir = std::env::temp_dir().join("pdmp-lgcp-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("grid.csv");
        data.save_csv(&path).unwrap();
        let back = LgcpData::load_csv(&path, data.sigma2, data.mu, data.beta).unwrap();
        assert_eq!(data, back);
    }
}
