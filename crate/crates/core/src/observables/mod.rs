//! Scalar diagnostics of joint translation–rotation states.
//!
//! Entropies use the natural logarithm. Eigenvalues at or below
//! [`EIGEN_FLOOR`] are dropped from log terms and square roots.

mod spectral;
mod state;

pub use spectral::{hermitian_eigenvalues, psd_sqrt, singular_values, SpectralDecomposition};
pub use state::{
    Bipartition, DensityMatrix, HERMITICITY_TOL, NEGATIVE_EIGENVALUE_TOL, TRACE_TOL,
};

use crate::error::{Error, Result};
use crate::hilbert::SubsystemDims;
use crate::linalg::{ComplexMatrix, C64, ZERO};

pub const EIGEN_FLOOR: f64 = 1e-14;
/// Negativity below zero by less than this is rounding.
pub const NEGATIVITY_TOL: f64 = 1e-12;
pub const MUTUAL_INFORMATION_TOL: f64 = 1e-10;
pub const FIDELITY_TOL: f64 = 1e-10;
/// Inputs to fidelity with an eigenvalue below this are broken states that
/// must be repaired first.
pub const FIDELITY_NEGATIVE_LIMIT: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subsystem {
    A,
    B,
}

/// Tr(ρ²), real part.
pub fn purity(rho: &DensityMatrix) -> f64 {
    purity_of(rho.matrix())
}

/// Tr(m²) for an arbitrary (possibly non-Hermitian) matrix, real part.
pub fn purity_of(m: &ComplexMatrix) -> f64 {
    m.trace_of_product(m).re
}

/// Re Tr(ρH).
pub fn energy(rho: &DensityMatrix, hamiltonian: &ComplexMatrix) -> Result<f64> {
    energy_of(rho.matrix(), hamiltonian)
}

pub fn energy_of(rho: &ComplexMatrix, hamiltonian: &ComplexMatrix) -> Result<f64> {
    if rho.dim() != hamiltonian.dim() {
        return Err(Error::DimensionMismatch {
            expected: hamiltonian.dim(),
            got: rho.dim(),
        });
    }
    Ok(rho.trace_of_product(hamiltonian).re)
}

/// Translational and rotational energies of a joint state, using the
/// diagonal forms n and `energy_ratio`·m².
pub fn subsystem_energies(rho: &ComplexMatrix, dims: &SubsystemDims, energy_ratio: f64) -> (f64, f64) {
    let j = dims.max_m();
    let mut tr = 0.0;
    let mut rot = 0.0;
    for n in 0..dims.n_osc {
        for m in -j..=j {
            let i = dims.index(n, m);
            let p = rho.get(i, i).re;
            tr += n as f64 * p;
            rot += (m * m) as f64 * p;
        }
    }
    (tr, energy_ratio * rot)
}

/// Population in the top oscillator level and in the two rotor edge states
/// m = ±j, the truncation monitors.
pub fn edge_populations(rho: &ComplexMatrix, dims: &SubsystemDims) -> (f64, f64) {
    let j = dims.max_m();
    let top = dims.n_osc - 1;
    let osc: f64 = (-j..=j).map(|m| {
        let i = dims.index(top, m);
        rho.get(i, i).re
    }).sum();
    let rot: f64 = (0..dims.n_osc)
        .map(|n| {
            let lo = dims.index(n, -j);
            let hi = dims.index(n, j);
            rho.get(lo, lo).re + rho.get(hi, hi).re
        })
        .sum();
    (osc, rot)
}

pub fn partial_trace(rho: &DensityMatrix, keep: Subsystem) -> Result<DensityMatrix> {
    let split = rho.require_split()?;
    Ok(DensityMatrix::trusted(
        partial_trace_of(rho.matrix(), split, keep)?,
        None,
    ))
}

/// Reduced matrix of `m` on the kept factor.
pub fn partial_trace_of(m: &ComplexMatrix, split: Bipartition, keep: Subsystem) -> Result<ComplexMatrix> {
    check_split(m, split)?;
    let (na, nb) = (split.dim_a, split.dim_b);
    let out = match keep {
        Subsystem::A => ComplexMatrix::from_fn(na, |a, a2| {
            (0..nb).map(|b| m.get(a * nb + b, a2 * nb + b)).sum()
        }),
        Subsystem::B => ComplexMatrix::from_fn(nb, |b, b2| {
            (0..na).map(|a| m.get(a * nb + b, a * nb + b2)).sum()
        }),
    };
    Ok(out)
}

pub fn partial_transpose(rho: &DensityMatrix, on: Subsystem) -> Result<ComplexMatrix> {
    partial_transpose_of(rho.matrix(), rho.require_split()?, on)
}

pub fn partial_transpose_of(m: &ComplexMatrix, split: Bipartition, on: Subsystem) -> Result<ComplexMatrix> {
    check_split(m, split)?;
    let (na, nb) = (split.dim_a, split.dim_b);
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for a in 0..na {
        for b in 0..nb {
            for a2 in 0..na {
                for b2 in 0..nb {
                    let (src_r, src_c) = match on {
                        Subsystem::A => (a2 * nb + b, a * nb + b2),
                        Subsystem::B => (a * nb + b2, a2 * nb + b),
                    };
                    out.set(a * nb + b, a2 * nb + b2, m.get(src_r, src_c));
                }
            }
        }
    }
    Ok(out)
}

fn check_split(m: &ComplexMatrix, split: Bipartition) -> Result<()> {
    if m.dim() != split.joint() {
        return Err(Error::DimensionMismatch {
            expected: split.joint(),
            got: m.dim(),
        });
    }
    Ok(())
}

/// Sum of singular values. Hermitian inputs go through the eigenvalues.
pub fn trace_norm(a: &ComplexMatrix) -> Result<f64> {
    if a.hermiticity_defect() <= 1e-12 * a.max_abs().max(1.0) {
        Ok(hermitian_eigenvalues(a)?.iter().map(|l| l.abs()).sum())
    } else {
        Ok(singular_values(a)?.iter().sum())
    }
}

/// ½‖a − b‖₁.
pub fn trace_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    Ok(0.5 * trace_norm(&(a - b))?)
}

/// (‖ρ^{T_A}‖₁ − 1)/2.
pub fn negativity(rho: &DensityMatrix) -> Result<f64> {
    negativity_of(rho.matrix(), rho.require_split()?)
}

pub fn negativity_of(m: &ComplexMatrix, split: Bipartition) -> Result<f64> {
    let pt = partial_transpose_of(m, split, Subsystem::A)?;
    // ρ^{T_A} is Hermitian whenever ρ is.
    let norm: f64 = hermitian_eigenvalues(&pt)?.iter().map(|l| l.abs()).sum();
    let n = 0.5 * (norm - 1.0);
    if n < -NEGATIVITY_TOL {
        return Err(Error::InvalidState(format!(
            "partial-transpose trace norm {norm} below 1"
        )));
    }
    Ok(n.max(0.0))
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> Result<f64> {
    entropy_of(rho.matrix())
}

pub fn entropy_of(m: &ComplexMatrix) -> Result<f64> {
    Ok(entropy_from_eigenvalues(&hermitian_eigenvalues(m)?))
}

pub fn entropy_from_eigenvalues(vals: &[f64]) -> f64 {
    vals.iter()
        .filter(|&&l| l > EIGEN_FLOOR)
        .map(|&l| -l * l.ln())
        .sum()
}

/// S(ρ_A) + S(ρ_B) − S(ρ_AB).
pub fn mutual_information(rho: &DensityMatrix) -> Result<f64> {
    mutual_information_of(rho.matrix(), rho.require_split()?)
}

pub fn mutual_information_of(m: &ComplexMatrix, split: Bipartition) -> Result<f64> {
    let sa = entropy_of(&partial_trace_of(m, split, Subsystem::A)?)?;
    let sb = entropy_of(&partial_trace_of(m, split, Subsystem::B)?)?;
    let sab = entropy_of(m)?;
    let mi = sa + sb - sab;
    if mi < -MUTUAL_INFORMATION_TOL {
        return Err(Error::InvalidState(format!("negative mutual information {mi:.3e}")));
    }
    Ok(mi.max(0.0))
}

/// Uhlmann fidelity |Tr √(√ρ_c ρ₀ √ρ_c)|², symmetric in its arguments.
pub fn fidelity(rho0: &ComplexMatrix, rho_c: &ComplexMatrix) -> Result<f64> {
    FidelityReference::new(rho0)?.fidelity(rho_c)
}

pub fn infidelity(rho0: &ComplexMatrix, rho_c: &ComplexMatrix) -> Result<f64> {
    Ok(1.0 - fidelity(rho0, rho_c)?)
}

/// A fixed reference state with its square root cached, for repeated
/// fidelity evaluations against many candidates.
#[derive(Clone, Debug)]
pub struct FidelityReference {
    sqrt: ComplexMatrix,
}

impl FidelityReference {
    pub fn new(reference: &ComplexMatrix) -> Result<Self> {
        let d = SpectralDecomposition::of_hermitian(&reference.hermitian_part())?;
        check_fidelity_input(d.eigenvalues[0])?;
        Ok(Self { sqrt: floored_sqrt(&d) })
    }

    pub fn fidelity(&self, other: &ComplexMatrix) -> Result<f64> {
        let d = SpectralDecomposition::of_hermitian(&other.hermitian_part())?;
        check_fidelity_input(d.eigenvalues[0])?;
        self.fidelity_with_sqrt(&floored_sqrt(&d))
    }

    /// Skips the positivity check on `other`, which must be Hermitian PSD.
    pub(crate) fn fidelity_unchecked(&self, other: &ComplexMatrix) -> Result<f64> {
        let d = SpectralDecomposition::of_hermitian(other)?;
        self.fidelity_with_sqrt(&floored_sqrt(&d))
    }

    /// F = ‖√ρ √σ‖₁². Summing singular values keeps rounding at the ε level.
    /// The equivalent (Tr √(√ρ σ √ρ))² takes square roots of rounding-level
    /// eigenvalues, which biases F by ~√ε per discarded dimension.
    fn fidelity_with_sqrt(&self, sqrt_other: &ComplexMatrix) -> Result<f64> {
        let root_sum: f64 = singular_values(&self.sqrt.matmul(sqrt_other))?.iter().sum();
        let f = root_sum * root_sum;
        if f > 1.0 + FIDELITY_TOL {
            return Err(Error::InvalidState(format!("fidelity {f} exceeds 1")));
        }
        Ok(f.clamp(0.0, 1.0))
    }
}

/// √A of a PSD matrix. Eigenvalues below dim·ε·λ_max are rounding noise and
/// are treated as 0.
fn floored_sqrt(d: &SpectralDecomposition) -> ComplexMatrix {
    let top = d.eigenvalues.last().copied().unwrap_or(0.0).max(0.0);
    let floor = d.eigenvalues.len() as f64 * f64::EPSILON * top;
    d.map(|l| if l > floor { l.sqrt() } else { 0.0 })
}

fn check_fidelity_input(min_eigenvalue: f64) -> Result<()> {
    if min_eigenvalue < -FIDELITY_NEGATIVE_LIMIT {
        Err(Error::NotPositive { min_eigenvalue })
    } else {
        Ok(())
    }
}

/// A sampled state.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub time: f64,
    pub state: ComplexMatrix,
}

/// Mean of the per-snapshot infidelity between two aligned series.
pub fn time_averaged_infidelity(traj: &[Snapshot], reference: &[Snapshot]) -> Result<f64> {
    if traj.len() != reference.len() || traj.is_empty() {
        return Err(Error::Misaligned(format!(
            "{} vs {} snapshots",
            traj.len(),
            reference.len()
        )));
    }
    let mut total = 0.0;
    for (a, b) in traj.iter().zip(reference) {
        if (a.time - b.time).abs() > 1e-9 * a.time.abs().max(1.0) {
            return Err(Error::Misaligned(format!("t = {} vs {}", a.time, b.time)));
        }
        total += infidelity(&b.state, &a.state)?;
    }
    Ok(total / traj.len() as f64)
}

/// How a raw (possibly broken) integrator output was turned into a state.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RepairReport {
    pub hermiticity_defect: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
    /// Negative eigenvalues were clipped.
    pub clipped: bool,
}

/// Hermitian part, negative eigenvalues clipped to zero, trace renormalized.
pub fn repair_state(m: &ComplexMatrix) -> Result<(ComplexMatrix, RepairReport)> {
    if !m.is_finite() {
        return Err(Error::NonFinite);
    }
    let herm = m.hermitian_part();
    let d = SpectralDecomposition::of_hermitian(&herm)?;
    let min = d.eigenvalues[0];
    let clipped = min < 0.0;
    let mut fixed = if clipped { d.map(|l| l.max(0.0)) } else { herm };
    let tr = fixed.trace().re;
    if !(tr > 0.0) {
        return Err(Error::BadNormalization(tr));
    }
    fixed = fixed.scale_real(1.0 / tr);
    Ok((
        fixed,
        RepairReport {
            hermiticity_defect: m.hermiticity_defect(),
            min_eigenvalue: min,
            trace: m.trace().re,
            clipped,
        },
    ))
}

/// ρ = Σ w_k |ψ_k⟩⟨ψ_k|.
pub fn mixture(weights: &[f64], vectors: &[Vec<C64>]) -> ComplexMatrix {
    let n = vectors.first().map_or(1, |v| v.len());
    let mut out = vec![ZERO; n * n];
    for (w, v) in weights.iter().zip(vectors) {
        for i in 0..n {
            let a = v[i] * *w;
            if a == ZERO {
                continue;
            }
            let row = &mut out[i * n..(i + 1) * n];
            for (o, b) in row.iter_mut().zip(v) {
                *o += a * b.conj();
            }
        }
    }
    ComplexMatrix::from_row_major(out)
}
