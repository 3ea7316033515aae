use crate::error::{Error, Result};
use crate::hilbert::SubsystemDims;
use crate::linalg::ComplexMatrix;

use super::spectral::hermitian_eigenvalues;

pub const HERMITICITY_TOL: f64 = 1e-10;
pub const TRACE_TOL: f64 = 1e-10;
/// Eigenvalues above this are treated as rounding and clipped to zero;
/// anything more negative is rejected.
pub const NEGATIVE_EIGENVALUE_TOL: f64 = 1e-8;

/// Factorization of a joint space as A ⊗ B, A the slow index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Bipartition {
    pub dim_a: usize,
    pub dim_b: usize,
}

impl Bipartition {
    pub fn new(dim_a: usize, dim_b: usize) -> Self {
        Self { dim_a, dim_b }
    }

    pub fn joint(&self) -> usize {
        self.dim_a * self.dim_b
    }
}

impl From<SubsystemDims> for Bipartition {
    fn from(d: SubsystemDims) -> Self {
        Self::new(d.n_osc, d.n_rot)
    }
}

/// A validated density matrix: Hermitian, unit trace, positive semidefinite
/// (all within the module tolerances).
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
    split: Option<Bipartition>,
}

impl DensityMatrix {
    /// Joint translation ⊗ rotation state.
    pub fn new(matrix: ComplexMatrix, dims: SubsystemDims) -> Result<Self> {
        Self::bipartite(matrix, dims.into())
    }

    pub fn bipartite(matrix: ComplexMatrix, split: Bipartition) -> Result<Self> {
        if matrix.dim() != split.joint() {
            return Err(Error::DimensionMismatch {
                expected: split.joint(),
                got: matrix.dim(),
            });
        }
        validate(&matrix)?;
        Ok(Self {
            matrix,
            split: Some(split),
        })
    }

    /// State of a single (unfactored) system.
    pub fn single(matrix: ComplexMatrix) -> Result<Self> {
        validate(&matrix)?;
        Ok(Self {
            matrix,
            split: None,
        })
    }

    /// Skips validation; for integrator outputs whose invariants hold by
    /// construction and are tested separately.
    pub(crate) fn trusted(matrix: ComplexMatrix, split: Option<Bipartition>) -> Self {
        Self { matrix, split }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn split(&self) -> Option<Bipartition> {
        self.split
    }

    pub(crate) fn require_split(&self) -> Result<Bipartition> {
        self.split
            .ok_or_else(|| Error::InvalidState("state has no bipartition".into()))
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

fn validate(m: &ComplexMatrix) -> Result<()> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm = m.hermiticity_defect();
    if herm > HERMITICITY_TOL {
        return Err(Error::InvalidState(format!(
            "hermiticity defect {herm:.3e}"
        )));
    }
    let tr = m.trace();
    if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
        return Err(Error::InvalidState(format!("trace {tr}")));
    }
    let min = hermitian_eigenvalues(m)?[0];
    if min < -NEGATIVE_EIGENVALUE_TOL {
        return Err(Error::NotPositive {
            min_eigenvalue: min,
        });
    }
    Ok(())
}
