use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Per-sample statistics of one observable across trajectories.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SeriesStats {
    pub mean: Vec<f64>,
    /// Population standard deviation (1σ spread of the ensemble).
    pub std: Vec<f64>,
    /// Standard error of the mean, std/√n.
    pub stderr: Vec<f64>,
    /// Finite values contributing at each sample.
    pub count: Vec<usize>,
}

impl SeriesStats {
    /// Column-wise statistics of `rows[trajectory][sample]`, skipping
    /// non-finite entries. Accumulates in row order, so the result does not
    /// depend on how the rows were produced.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n_samples = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != n_samples) {
            return Err(Error::Misaligned("trajectories have different sample counts".into()));
        }
        let mut out = Self {
            mean: vec![0.0; n_samples],
            std: vec![0.0; n_samples],
            stderr: vec![0.0; n_samples],
            count: vec![0; n_samples],
        };
        for j in 0..n_samples {
            let (m, s, n) = mean_std(rows.iter().map(|r| r[j]));
            out.mean[j] = m;
            out.std[j] = s;
            out.count[j] = n;
            out.stderr[j] = if n > 0 { s / (n as f64).sqrt() } else { f64::NAN };
        }
        Ok(out)
    }
}

/// Mean, population standard deviation and count of the finite values.
pub fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64, usize) {
    let (sum, n) = values
        .clone()
        .filter(|v| v.is_finite())
        .fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    if n == 0 {
        return (f64::NAN, f64::NAN, 0);
    }
    let mean = sum / n as f64;
    let var = values.filter(|v| v.is_finite()).map(|v| (v - mean).powi(2)).sum::<f64>() / n as f64;
    (mean, var.sqrt(), n)
}

/// Ensemble statistics of a set of aligned trajectories.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    /// Sample times in oscillator cycles.
    pub times: Vec<f64>,
    pub n_trajectories: usize,
    pub series: BTreeMap<String, SeriesStats>,
    /// Deterministic companions (e.g. master-equation energies), one value
    /// per sample.
    pub deterministic: BTreeMap<String, Vec<f64>>,
    pub truncation_warnings: usize,
    pub max_edge_population: f64,
    pub observable_failures: usize,
}

impl EnsembleStats {
    pub fn get(&self, name: &str) -> Option<&SeriesStats> {
        self.series.get(name)
    }

    /// Index of the first sample at or after `cycle`.
    pub fn index_at(&self, cycle: f64) -> Option<usize> {
        self.times.iter().position(|&t| t >= cycle - 1e-9)
    }

    /// Mean of `name` averaged over samples with time in [from, to].
    pub fn window_mean(&self, name: &str, from: f64, to: f64) -> Option<f64> {
        let s = self.series.get(name)?;
        let vals: Vec<f64> = self
            .times
            .iter()
            .zip(&s.mean)
            .filter(|(t, _)| **t >= from - 1e-9 && **t <= to + 1e-9)
            .map(|(_, v)| *v)
            .collect();
        if vals.is_empty() {
            return None;
        }
        Some(vals.iter().sum::<f64>() / vals.len() as f64)
    }

    /// Least-squares line through the mean of `name` on [from, to].
    pub fn fit(&self, name: &str, from: f64, to: f64) -> Option<LinearFit> {
        let s = self.series.get(name)?;
        let (x, y): (Vec<f64>, Vec<f64>) = self
            .times
            .iter()
            .zip(&s.mean)
            .filter(|(t, _)| **t >= from - 1e-9 && **t <= to + 1e-9)
            .map(|(t, v)| (*t, *v))
            .unzip();
        linear_fit(&x, &y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares y ≈ slope·x + intercept. Needs two distinct x.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Option<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x.iter().zip(y).map(|(a, b)| (b - slope * a - intercept).powi(2)).sum();
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - ss_res / syy };
    Some(LinearFit {
        slope,
        intercept,
        r_squared,
    })
}
