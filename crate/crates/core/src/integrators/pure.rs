//! Kraus updates of a mixture of pure states.
//!
//! When every channel is fully monitored the Kraus update maps
//! ρ = Σ w_n |ψ_n⟩⟨ψ_n| to Σ w_n M|ψ_n⟩⟨ψ_n|M† / Tr(·), so the mixture can be
//! propagated vector by vector. M depends on ρ only through the measurement
//! traces, which are ensemble averages. The result is the same state as the
//! dense update at a fraction of the cost.

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};
use crate::observables::{mixture, SpectralDecomposition};

use super::ops::StepOps;

/// Weights below this (relative to the largest) are dropped when a density
/// matrix is split into pure components.
pub const COMPONENT_CUTOFF: f64 = 1e-15;

#[derive(Clone, Debug, PartialEq)]
pub struct PureEnsemble {
    dim: usize,
    weights: Vec<f64>,
    vectors: Vec<Vec<C64>>,
}

impl PureEnsemble {
    pub fn new(weights: Vec<f64>, vectors: Vec<Vec<C64>>) -> Result<Self> {
        let dim = vectors.first().map(|v| v.len()).unwrap_or(0);
        if dim == 0 || weights.len() != vectors.len() || vectors.iter().any(|v| v.len() != dim) {
            return Err(Error::InvalidState("malformed pure-state ensemble".into()));
        }
        let total: f64 = weights.iter().sum();
        if weights.iter().any(|w| !(*w >= 0.0)) || !(total > 0.0) {
            return Err(Error::InvalidState("ensemble weights must be nonnegative".into()));
        }
        let mut ens = Self {
            dim,
            weights,
            vectors,
        };
        for v in &mut ens.vectors {
            let n = norm(v);
            if n == 0.0 {
                return Err(Error::InvalidState("zero vector in ensemble".into()));
            }
            v.iter_mut().for_each(|z| *z /= n);
        }
        ens.weights.iter_mut().for_each(|w| *w /= total);
        Ok(ens)
    }

    /// Spectral split of a density matrix; diagonal inputs are split exactly
    /// into basis vectors.
    pub fn from_density(rho: &ComplexMatrix) -> Result<Self> {
        let n = rho.dim();
        let diagonal = (0..n).all(|i| (0..n).all(|j| i == j || rho.get(i, j) == ZERO));
        let (weights, vectors): (Vec<f64>, Vec<Vec<C64>>) = if diagonal {
            let max = (0..n).map(|i| rho.get(i, i).re).fold(0.0, f64::max);
            (0..n)
                .filter(|&i| rho.get(i, i).re > COMPONENT_CUTOFF * max)
                .map(|i| {
                    let mut v = vec![ZERO; n];
                    v[i] = C64::new(1.0, 0.0);
                    (rho.get(i, i).re, v)
                })
                .unzip()
        } else {
            let d = SpectralDecomposition::of_hermitian(&rho.hermitian_part())?;
            let max = d.eigenvalues.last().copied().unwrap_or(0.0);
            (0..n)
                .rev()
                .filter(|&k| d.eigenvalues[k] > COMPONENT_CUTOFF * max)
                .map(|k| {
                    let v = (0..n).map(|i| d.eigenvectors.get(i, k)).collect();
                    (d.eigenvalues[k], v)
                })
                .unzip()
        };
        Self::new(weights, vectors)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.vectors.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn vectors(&self) -> &[Vec<C64>] {
        &self.vectors
    }

    pub fn to_density(&self) -> ComplexMatrix {
        mixture(&self.weights, &self.vectors)
    }

    /// Tr(L_r ρ + ρ L_r†) for each monitored channel.
    pub fn measurement_traces(&self, ops: &StepOps, out: &mut [f64]) {
        for (o, &r) in out.iter_mut().zip(&ops.monitored) {
            let op = &ops.channels[r].op;
            *o = self
                .weights
                .iter()
                .zip(&self.vectors)
                .map(|(w, v)| 2.0 * w * op.expectation_vec(v).re)
                .sum();
        }
    }

    /// One Kraus update; every channel of `ops` must be fully monitored.
    pub fn rouchon_step(&mut self, ops: &StepOps, dt: f64, dw: &[f64], scratch: &mut Vec<C64>) -> Result<()> {
        if !ops.all_monitored() {
            return Err(Error::InvalidState(
                "pure-state propagation needs every channel fully monitored".into(),
            ));
        }
        if ops.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: ops.dim(),
            });
        }
        ops.check_noise(dw)?;
        let mut tr = vec![0.0; ops.n_monitored()];
        self.measurement_traces(ops, &mut tr);
        let m = ops.kraus_operator(dt, &tr, dw);
        scratch.resize(self.dim, ZERO);
        let mut total = 0.0;
        for (w, v) in self.weights.iter_mut().zip(self.vectors.iter_mut()) {
            m.mul_vec_into(v, scratch);
            let n = norm(scratch);
            *w *= n * n;
            total += *w;
            if n > 0.0 {
                for (x, s) in v.iter_mut().zip(scratch.iter()) {
                    *x = s / n;
                }
            }
        }
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::BadNormalization(total));
        }
        self.weights.iter_mut().for_each(|w| *w /= total);
        Ok(())
    }
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}
