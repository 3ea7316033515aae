use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Pre-sampled Wiener increments, one row per step and one column per
/// monitored channel.
#[derive(Clone, Debug, PartialEq)]
pub struct WienerGrid {
    n_steps: usize,
    dt: f64,
    n_channels: usize,
    increments: Vec<f64>,
    seed: u64,
    stream: u64,
}

impl WienerGrid {
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn n_channels(&self) -> usize {
        self.n_channels
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    /// Increments of step `i`, one per channel.
    #[inline]
    pub fn step(&self, i: usize) -> &[f64] {
        &self.increments[i * self.n_channels..(i + 1) * self.n_channels]
    }

    pub fn column_sum(&self, channel: usize) -> f64 {
        (0..self.n_steps).map(|i| self.step(i)[channel]).sum()
    }

    /// Wraps externally supplied increments (row-major, step × channel).
    pub fn from_increments(dt: f64, n_channels: usize, increments: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Grid(format!("time step must be positive, got {dt}")));
        }
        let n_steps = if n_channels == 0 {
            return Err(Error::Grid("explicit increments need at least one channel".into()));
        } else {
            increments.len() / n_channels
        };
        if n_steps == 0 || n_steps * n_channels != increments.len() {
            return Err(Error::Grid(format!(
                "{} increments do not fill {n_channels} channels",
                increments.len()
            )));
        }
        Ok(Self {
            n_steps,
            dt,
            n_channels,
            increments,
            seed: 0,
            stream: 0,
        })
    }

    /// Sums each run of `factor` consecutive increments, giving the same
    /// Brownian path on a grid `factor` times coarser.
    pub fn coarsen(&self, factor: usize) -> Result<Self> {
        if factor == 0 || self.n_steps % factor != 0 {
            return Err(Error::Grid(format!(
                "coarsening factor {factor} does not divide {} steps",
                self.n_steps
            )));
        }
        let n_steps = self.n_steps / factor;
        let c = self.n_channels;
        let mut increments = vec![0.0; n_steps * c];
        for j in 0..n_steps {
            let out = &mut increments[j * c..(j + 1) * c];
            for i in j * factor..(j + 1) * factor {
                for (o, w) in out.iter_mut().zip(self.step(i)) {
                    *o += w;
                }
            }
        }
        Ok(Self {
            n_steps,
            dt: self.dt * factor as f64,
            n_channels: c,
            increments,
            seed: self.seed,
            stream: self.stream,
        })
    }
}

/// I.i.d. N(0, dt) increments from stream 0 of `seed`.
pub fn sample_wiener(n_steps: usize, dt: f64, n_channels: usize, seed: u64) -> Result<WienerGrid> {
    sample_wiener_stream(n_steps, dt, n_channels, seed, 0)
}

/// As [`sample_wiener`], drawing from an independent ChaCha stream so that
/// trajectory `stream` of an ensemble can be generated in isolation.
pub fn sample_wiener_stream(
    n_steps: usize,
    dt: f64,
    n_channels: usize,
    seed: u64,
    stream: u64,
) -> Result<WienerGrid> {
    if n_steps == 0 {
        return Err(Error::Grid("a noise grid needs at least one step".into()));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Grid(format!("time step must be positive, got {dt}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let sd = dt.sqrt();
    let increments = (0..n_steps * n_channels)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            z * sd
        })
        .collect();
    Ok(WienerGrid {
        n_steps,
        dt,
        n_channels,
        increments,
        seed,
        stream,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproducible_and_stream_separated() {
        let a = sample_wiener_stream(100, 0.01, 2, 7, 3).unwrap();
        let b = sample_wiener_stream(100, 0.01, 2, 7, 3).unwrap();
        let c = sample_wiener_stream(100, 0.01, 2, 7, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.step(0), c.step(0));
    }

    #[test]
    fn empty_channel_grid() {
        let g = sample_wiener(10, 0.1, 0, 1).unwrap();
        assert_eq!(g.n_steps(), 10);
        assert!(g.step(4).is_empty());
        assert_eq!(g.coarsen(5).unwrap().n_steps(), 2);
    }

    #[test]
    fn moments() {
        let dt = 0.003;
        let n = 1_000_000;
        let g = sample_wiener(n, dt, 1, 11).unwrap();
        let mean = g.column_sum(0) / n as f64;
        let var = (0..n).map(|i| (g.step(i)[0] - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sigma_mean = (dt / n as f64).sqrt();
        assert!(mean.abs() < 4.0 * sigma_mean, "mean {mean}");
        assert!((var / dt - 1.0).abs() < 0.01, "var {var}");
    }

    #[test]
    fn rejects_bad_requests() {
        assert!(sample_wiener(0, 0.1, 1, 0).is_err());
        assert!(sample_wiener(5, -0.1, 1, 0).is_err());
        let g = sample_wiener(10, 0.1, 1, 0).unwrap();
        assert!(g.coarsen(3).is_err());
        assert!(g.coarsen(0).is_err());
        assert!(WienerGrid::from_increments(0.1, 2, vec![0.0; 3]).is_err());
    }

    #[test]
    fn coarsen_identity_and_metadata() {
        let g = sample_wiener_stream(40, 0.5, 2, 9, 1).unwrap();
        assert_eq!(g.coarsen(1).unwrap(), g);
        let c = g.coarsen(4).unwrap();
        assert_eq!(c.dt(), 2.0);
        assert_eq!((c.seed(), c.stream()), (9, 1));
        for j in 0..10 {
            let expect: f64 = (4 * j..4 * j + 4).map(|i| g.step(i)[1]).sum();
            assert_eq!(c.step(j)[1], expect);
        }
    }

    proptest! {
        #[test]
        fn coarsening_composes_and_preserves_totals(seed in 0u64..1000, channels in 1usize..3) {
            let g = sample_wiener(60, 0.01, channels, seed).unwrap();
            let two_step = g.coarsen(2).unwrap().coarsen(5).unwrap();
            let direct = g.coarsen(10).unwrap();
            for j in 0..direct.n_steps() {
                for r in 0..channels {
                    prop_assert!((two_step.step(j)[r] - direct.step(j)[r]).abs() < 1e-15);
                }
            }
            for r in 0..channels {
                prop_assert!((direct.column_sum(r) - g.column_sum(r)).abs() < 1e-13);
            }
        }
    }
}
