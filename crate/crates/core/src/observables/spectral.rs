//! Hermitian eigendecomposition and matrix functions.

use faer::Side;

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix.
/// Column `k` of `eigenvectors` belongs to `eigenvalues[k]`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    /// Only the lower triangle of `a` is read.
    pub fn of_hermitian(a: &ComplexMatrix) -> Result<Self> {
        let evd = a
            .to_faer()
            .self_adjoint_eigen(Side::Lower)
            .map_err(|_| Error::Eigen)?;
        let n = a.dim();
        let s = evd.S().column_vector();
        let u = evd.U();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&x, &y| s[x].re.total_cmp(&s[y].re));
        let eigenvalues = order.iter().map(|&k| s[k].re).collect();
        let eigenvectors = ComplexMatrix::from_fn(n, |i, j| {
            let z = u[(i, order[j])];
            C64::new(z.re, z.im)
        });
        Ok(Self {
            eigenvalues,
            eigenvectors,
        })
    }

    /// V f(Λ) V†.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.eigenvectors.dim();
        let fl: Vec<f64> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let v = self.eigenvectors.as_slice();
        let mut scaled = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                scaled[i * n + k] = v[i * n + k] * fl[k];
            }
        }
        ComplexMatrix::from_row_major(scaled).matmul(&self.eigenvectors.adjoint())
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.map(|l| l)
    }
}

/// Ascending eigenvalues of a Hermitian matrix, lower triangle read.
pub fn hermitian_eigenvalues(a: &ComplexMatrix) -> Result<Vec<f64>> {
    let mut vals = a
        .to_faer()
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|_| Error::Eigen)?;
    vals.sort_by(f64::total_cmp);
    Ok(vals)
}

pub fn singular_values(a: &ComplexMatrix) -> Result<Vec<f64>> {
    a.to_faer().singular_values().map_err(|_| Error::Eigen)
}

/// Positive square root of a Hermitian matrix; eigenvalues below zero are
/// treated as zero.
pub fn psd_sqrt(a: &ComplexMatrix) -> Result<ComplexMatrix> {
    Ok(SpectralDecomposition::of_hermitian(a)?.map(|l| l.max(0.0).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_hermitian(n: usize, seed: u64) -> ComplexMatrix {
        let mut s = seed;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64) / (1u64 << 53) as f64 - 0.5
        };
        let a = ComplexMatrix::from_fn(n, |_, _| C64::new(next(), next()));
        a.hermitian_part()
    }

    #[test]
    fn reconstruction_is_accurate() {
        for &n in &[1usize, 4, 30] {
            let a = random_hermitian(n, n as u64);
            let d = SpectralDecomposition::of_hermitian(&a).unwrap();
            assert!(d.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
            let err = d.reconstruct().max_abs_diff(&a);
            assert!(err <= 1e-9 * a.max_abs().max(1e-300), "n={n} err={err}");
            let vvh = d.eigenvectors.matmul(&d.eigenvectors.adjoint());
            assert!(vvh.approx_eq(&ComplexMatrix::identity(n), 1e-12));
        }
    }

    #[test]
    fn eigenvalue_only_path_agrees() {
        let a = random_hermitian(12, 77);
        let d = SpectralDecomposition::of_hermitian(&a).unwrap();
        let v = hermitian_eigenvalues(&a).unwrap();
        for (x, y) in v.iter().zip(&d.eigenvalues) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn square_root_squares_back() {
        let a = random_hermitian(10, 5);
        let psd = a.matmul(&a);
        let r = psd_sqrt(&psd).unwrap();
        assert!(r.matmul(&r).approx_eq(&psd, 1e-10));
    }
}
