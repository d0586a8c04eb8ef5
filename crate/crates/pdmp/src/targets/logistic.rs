//! Bayesian logistic regression under a flat prior.
//!
//! The posterior is the likelihood: `U(x) = sum_n [softplus(x'r_n) - t_n
//! x'r_n]`. Directional rates are not invertible in closed form, but
//! `|sigmoid - t| <= 1` gives a global constant envelope `sum_n |<v, r_n>|`,
//! so thinning needs no window refresh.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::clocks::{BoundEnvelope, GeneralRate, RateProfile};
use crate::error::{Error, Result};
use crate::rng::RandomSource;
use crate::targets::{float17, Target};

/// Simulated or loaded logistic-regression dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticData {
    /// Covariate rows `r_n`, each of length `d`.
    pub covariates: Vec<Vec<f64>>,
    /// Binary labels `t_n`.
    pub labels: Vec<u8>,
}

impl LogisticData {
    pub fn new(covariates: Vec<Vec<f64>>, labels: Vec<u8>) -> Self {
        assert!(!covariates.is_empty(), "empty dataset");
        assert_eq!(covariates.len(), labels.len());
        let d = covariates[0].len();
        assert!(d >= 1 && covariates.iter().all(|r| r.len() == d));
        assert!(labels.iter().all(|t| *t <= 1), "labels must be 0/1");
        Self { covariates, labels }
    }

    pub fn n(&self) -> usize {
        self.covariates.len()
    }

    pub fn dim(&self) -> usize {
        self.covariates[0].len()
    }

    /// CSV with header `r0,..,r{d-1},t`; floats carry 17 significant digits.
    pub fn to_csv(&self) -> String {
        let d = self.dim();
        let mut out = String::new();
        for i in 0..d {
            let _ = write!(out, "r{i},");
        }
        out.push_str("t\n");
        for (row, label) in self.covariates.iter().zip(&self.labels) {
            for value in row {
                let _ = write!(out, "{},", float17(*value));
            }
            let _ = writeln!(out, "{label}");
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn load_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let shown = path.display().to_string();
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::DataFormat {
            path: shown.clone(),
            line: 1,
            message: "empty file".into(),
        })?;
        let columns = header.split(',').count();
        if columns < 2 || !header.ends_with(",t") {
            return Err(Error::DataFormat {
                path: shown,
                line: 1,
                message: format!("expected header r0,..,r{{d-1}},t, got {header:?}"),
            });
        }
        let d = columns - 1;
        let mut covariates = Vec::new();
        let mut labels = Vec::new();
        for (idx, line) in lines {
            let fields: Vec<&str> = line.split(',').collect();
            let bad = |message: String| Error::DataFormat {
                path: shown.clone(),
                line: idx + 1,
                message,
            };
            if fields.len() != columns {
                return Err(bad(format!(
                    "expected {columns} fields, got {}",
                    fields.len()
                )));
            }
            let mut row = Vec::with_capacity(d);
            for f in &fields[..d] {
                row.push(
                    f.parse::<f64>()
                        .map_err(|e| bad(format!("bad covariate {f:?}: {e}")))?,
                );
            }
            let label: u8 = fields[d]
                .parse()
                .map_err(|e| bad(format!("bad label {:?}: {e}", fields[d])))?;
            if label > 1 {
                return Err(bad(format!("label must be 0/1, got {label}")));
            }
            covariates.push(row);
            labels.push(label);
        }
        if covariates.is_empty() {
            return Err(Error::DataFormat {
                path: shown,
                line: 1,
                message: "no data rows".into(),
            });
        }
        Ok(Self::new(covariates, labels))
    }
}

/// Standard-normal covariates, fair-coin labels.
pub fn simulate_logistic_data(n: usize, d: usize, rng: &mut RandomSource) -> LogisticData {
    assert!(n >= 1 && d >= 1);
    let covariates = (0..n).map(|_| rng.standard_normal_vec(d)).collect();
    let labels = (0..n).map(|_| u8::from(rng.uniform() < 0.5)).collect();
    LogisticData::new(covariates, labels)
}

fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

/// Logistic posterior target over the coefficient vector.
pub struct Logistic {
    data: Arc<LogisticData>,
    /// `sum_n |r_{n,i}|` per coordinate: the zigzag clock envelopes.
    column_abs_sums: Vec<f64>,
}

impl Logistic {
    pub fn new(data: LogisticData) -> Self {
        let d = data.dim();
        let mut column_abs_sums = vec![0.0; d];
        for row in &data.covariates {
            for (s, r) in column_abs_sums.iter_mut().zip(row) {
                *s += r.abs();
            }
        }
        Self {
            data: Arc::new(data),
            column_abs_sums,
        }
    }

    pub fn data(&self) -> &LogisticData {
        &self.data
    }

    /// Linear predictors `x' r_n` for every observation.
    fn predictors(&self, x: &[f64]) -> Vec<f64> {
        self.data
            .covariates
            .iter()
            .map(|row| row.iter().zip(x).map(|(r, xi)| r * xi).sum())
            .collect()
    }
}

impl Target for Logistic {
    fn name(&self) -> &str {
        "logistic"
    }

    fn dim(&self) -> usize {
        self.data.dim()
    }

    fn potential(&self, x: &[f64]) -> f64 {
        self.predictors(x)
            .iter()
            .zip(&self.data.labels)
            .map(|(z, t)| softplus(*z) - f64::from(*t) * z)
            .sum()
    }

    fn gradient(&self, x: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.dim()];
        for ((row, t), z) in self
            .data
            .covariates
            .iter()
            .zip(&self.data.labels)
            .zip(self.predictors(x))
        {
            let w = sigmoid(z) - f64::from(*t);
            for (gi, r) in g.iter_mut().zip(row) {
                *gi += r * w;
            }
        }
        g
    }

    fn directional_profile(&self, x: &[f64], v: &[f64], lambda_ref: f64) -> RateProfile {
        let base = self.predictors(x);
        let slopes = self.predictors(v);
        let data = Arc::clone(&self.data);
        let bound: f64 = slopes.iter().map(|c| c.abs()).sum::<f64>() + lambda_ref;
        let rate = move |t: f64| {
            let mut p = 0.0;
            for ((z0, c), label) in base.iter().zip(&slopes).zip(&data.labels) {
                p += c * (sigmoid(z0 + t * c) - f64::from(*label));
            }
            p.max(0.0) + lambda_ref
        };
        RateProfile::General(GeneralRate::new(
            "logistic",
            rate,
            BoundEnvelope::global(bound),
        ))
    }

    fn coordinate_profiles(&self, x: &[f64], v: &[f64], lambda_ref: &[f64]) -> Vec<RateProfile> {
        let base = Arc::new(self.predictors(x));
        let slopes = Arc::new(self.predictors(v));
        (0..self.dim())
            .map(|i| {
                let data = Arc::clone(&self.data);
                let base = Arc::clone(&base);
                let slopes = Arc::clone(&slopes);
                let vi = v[i];
                let floor = lambda_ref[i];
                let bound = self.column_abs_sums[i] + floor;
                let rate = move |t: f64| {
                    let mut p = 0.0;
                    for (n, (z0, c)) in base.iter().zip(slopes.iter()).enumerate() {
                        let w = sigmoid(z0 + t * c) - f64::from(data.labels[n]);
                        p += data.covariates[n][i] * w;
                    }
                    (vi * p).max(0.0) + floor
                };
                RateProfile::General(GeneralRate::new(
                    "logistic",
                    rate,
                    BoundEnvelope::global(bound),
                ))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toy_data() -> LogisticData {
        LogisticData::new(
            vec![vec![1.0, -0.5], vec![0.3, 2.0], vec![-1.2, 0.4]],
            vec![1, 0, 1],
        )
    }

    #[test]
    fn gradient_at_zero_is_half_residual() {
        let data = toy_data();
        let expected: Vec<f64> = (0..2)
            .map(|i| {
                data.covariates
                    .iter()
                    .zip(&data.labels)
                    .map(|(r, t)| r[i] * (0.5 - f64::from(*t)))
                    .sum()
            })
            .collect();
        let g = Logistic::new(data).gradient(&[0.0, 0.0]);
        for (a, b) in g.iter().zip(&expected) {
            assert_relative_eq!(a, b, max_relative = 1e-14);
        }
    }

    #[test]
    fn saturated_likelihood_gradient_decays() {
        // Single observation r=(1), t=1: dU/dx = sigmoid(x) - 1 -> 0.
        let target = Logistic::new(LogisticData::new(vec![vec![1.0]], vec![1]));
        assert!(target.gradient(&[30.0])[0].abs() < 1e-12);
    }

    #[test]
    fn directional_bound_dominates() {
        let target = Logistic::new(toy_data());
        let x = [0.7, -0.2];
        let v = [0.6, -0.8];
        let profile = target.directional_profile(&x, &v, 0.5);
        let RateProfile::General(g) = &profile else {
            panic!("expected General");
        };
        let m = match g.envelope().value_at(0.0) {
            crate::clocks::BoundValue::Constant(m) => m,
            other => panic!("expected constant bound, got {other:?}"),
        };
        for k in 0..1000 {
            let t = k as f64 * 0.01;
            assert!(g.rate(t) <= m * (1.0 + 1e-12));
        }
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let data = toy_data();
        let dir = std::env::temp_dir().join("pdmp-logistic-csv-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("toy.csv");
        data.save_csv(&path).unwrap();
        let back = LogisticData::load_csv(&path).unwrap();
        assert_eq!(data, back);
    }

    #[test]
    fn simulate_matches_requested_shape() {
        let mut rng = RandomSource::new(7);
        let data = simulate_logistic_data(40, 10, &mut rng);
        assert_eq!(data.n(), 40);
        assert_eq!(data.dim(), 10);
    }
}
