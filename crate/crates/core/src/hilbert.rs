//! Truncated single-subsystem operators and their joint-space embeddings.
//!
//! Subsystem A is the translational oscillator and is always the slow index
//! of the joint basis; subsystem B is the planar rotor (fast index). A joint
//! basis state |n⟩⊗|m⟩ sits at index `n * n_rot + (m + j)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, C64, ZERO};

/// Truncation sizes of the two subsystems.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubsystemDims {
    pub n_osc: usize,
    pub n_rot: usize,
}

impl Default for SubsystemDims {
    fn default() -> Self {
        Self { n_osc: 11, n_rot: 15 }
    }
}

impl SubsystemDims {
    pub fn new(n_osc: usize, n_rot: usize) -> Result<Self> {
        let dims = Self { n_osc, n_rot };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_osc < 2 {
            return Err(Error::InvalidDimension(format!(
                "oscillator needs at least 2 levels, got {}",
                self.n_osc
            )));
        }
        if self.n_rot < 3 || self.n_rot % 2 == 0 {
            return Err(Error::InvalidDimension(format!(
                "rotor level count must be odd and at least 3, got {}",
                self.n_rot
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn joint(&self) -> usize {
        self.n_osc * self.n_rot
    }

    /// Largest |m| kept in the rotor basis.
    #[inline]
    pub fn max_m(&self) -> i64 {
        ((self.n_rot - 1) / 2) as i64
    }

    /// Joint index of |n⟩⊗|m⟩.
    #[inline]
    pub fn index(&self, n: usize, m: i64) -> usize {
        n * self.n_rot + (m + self.max_m()) as usize
    }
}

/// Ladder operators of the truncated oscillator.
#[derive(Clone, Debug)]
pub struct OscillatorOps {
    pub annihilate: ComplexMatrix,
    pub create: ComplexMatrix,
    pub number: ComplexMatrix,
}

pub fn oscillator_ops(n_osc: usize) -> Result<OscillatorOps> {
    if n_osc < 2 {
        return Err(Error::InvalidDimension(format!(
            "oscillator needs at least 2 levels, got {n_osc}"
        )));
    }
    let mut annihilate = ComplexMatrix::zeros(n_osc);
    for n in 1..n_osc {
        annihilate.set(n - 1, n, C64::new((n as f64).sqrt(), 0.0));
    }
    let create = annihilate.adjoint();
    // a†a, written exactly rather than as a rounded product of square roots
    let number = ComplexMatrix::from_real_diagonal(&(0..n_osc).map(|n| n as f64).collect::<Vec<_>>());
    Ok(OscillatorOps {
        annihilate,
        create,
        number,
    })
}

/// Angular momentum and angle-function operators of the truncated planar
/// rotor, in the |m⟩ basis with m = −j…+j.
#[derive(Clone, Debug)]
pub struct RotorOps {
    pub jz: ComplexMatrix,
    pub sine: ComplexMatrix,
    pub cosine: ComplexMatrix,
}

pub fn rotor_ops(n_rot: usize) -> Result<RotorOps> {
    if n_rot < 3 || n_rot % 2 == 0 {
        return Err(Error::InvalidDimension(format!(
            "rotor level count must be odd and at least 3, got {n_rot}"
        )));
    }
    let j = ((n_rot - 1) / 2) as f64;
    let jz = ComplexMatrix::from_real_diagonal(
        &(0..n_rot).map(|k| k as f64 - j).collect::<Vec<_>>(),
    );
    // Unit shift m -> m+1, annihilating the top state.
    let mut raise = ComplexMatrix::zeros(n_rot);
    for k in 0..n_rot - 1 {
        raise.set(k + 1, k, C64::new(1.0, 0.0));
    }
    let lower = raise.adjoint();
    let sine = (&raise - &lower).scale(C64::new(0.0, -0.5)); // (E − E†)/(2i)
    let cosine = (&raise + &lower).scale_real(0.5);
    Ok(RotorOps { jz, sine, cosine })
}

/// Kronecker product, first factor slow.
pub fn tensor(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kron(b)
}

/// `op ⊗ I_rot`.
pub fn embed_osc(op: &ComplexMatrix, dims: &SubsystemDims) -> ComplexMatrix {
    tensor(op, &ComplexMatrix::identity(dims.n_rot))
}

/// `I_osc ⊗ op`.
pub fn embed_rot(op: &ComplexMatrix, dims: &SubsystemDims) -> ComplexMatrix {
    tensor(&ComplexMatrix::identity(dims.n_osc), op)
}

/// Spot position in zero-point units: (a + a†) ⊗ I + r · I ⊗ S, where r is
/// the sphere radius divided by the zero-point length.
pub fn spot_position_op(dims: &SubsystemDims, radius_over_xzpf: f64) -> Result<ComplexMatrix> {
    dims.validate()?;
    let osc = oscillator_ops(dims.n_osc)?;
    let rot = rotor_ops(dims.n_rot)?;
    let x = embed_osc(&(&osc.annihilate + &osc.create), dims);
    let s = embed_rot(&rot.sine, dims).scale_real(radius_over_xzpf);
    Ok(&x + &s)
}

/// Basis vector |n⟩⊗|m⟩ on the joint space.
pub fn basis_state(dims: &SubsystemDims, n: usize, m: i64) -> Vec<C64> {
    let mut v = vec![ZERO; dims.joint()];
    v[dims.index(n, m)] = C64::new(1.0, 0.0);
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::I;

    fn column(m: &ComplexMatrix, j: usize) -> Vec<C64> {
        (0..m.dim()).map(|i| m.get(i, j)).collect()
    }

    #[test]
    fn ladder_matrix_elements() {
        let ops = oscillator_ops(3).unwrap();
        let e1 = [ZERO, C64::new(1.0, 0.0), ZERO];
        let e2 = [ZERO, ZERO, C64::new(1.0, 0.0)];
        let a1 = ops.annihilate.mul_vec(&e1);
        assert_eq!(a1, vec![C64::new(1.0, 0.0), ZERO, ZERO]);
        let a2 = ops.annihilate.mul_vec(&e2);
        assert!((a2[1] - C64::new(2f64.sqrt(), 0.0)).norm() < 1e-15);
        assert_eq!(a2[0], ZERO);
        assert_eq!(a2[2], ZERO);
        let diag: Vec<f64> = ops.number.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.0, 1.0, 2.0]);
        assert_eq!(ops.create, ops.annihilate.adjoint());
        assert!(ops.number.approx_eq(&ops.create.matmul(&ops.annihilate), 1e-14));
    }

    #[test]
    fn truncated_ladder_commutator() {
        let ops = oscillator_ops(11).unwrap();
        let comm = ops.annihilate.commutator(&ops.create);
        let mut expect = ComplexMatrix::identity(11);
        expect.set(10, 10, C64::new(-10.0, 0.0));
        assert!(comm.approx_eq(&expect, 1e-12));
    }

    #[test]
    fn rejects_small_oscillator() {
        assert!(oscillator_ops(1).is_err());
    }

    #[test]
    fn rotor_spectrum_and_hermiticity() {
        let ops = rotor_ops(3).unwrap();
        let diag: Vec<f64> = ops.jz.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![-1.0, 0.0, 1.0]);
        let big = rotor_ops(15).unwrap();
        assert_eq!(big.sine.hermiticity_defect(), 0.0);
        assert_eq!(big.cosine.hermiticity_defect(), 0.0);
        assert!(big.jz.as_slice().iter().all(|z| z.im == 0.0));
    }

    #[test]
    fn rotor_rejects_even_or_tiny() {
        assert!(rotor_ops(4).is_err());
        assert!(rotor_ops(1).is_err());
    }

    #[test]
    fn sine_jz_commutator_on_middle_state() {
        let ops = rotor_ops(3).unwrap();
        let lhs = ops.sine.commutator(&ops.jz);
        let col_lhs = column(&lhs, 1);
        let col_rhs = column(&ops.cosine.scale(I), 1);
        for (a, b) in col_lhs.iter().zip(&col_rhs) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn sine_jz_commutator_truncated() {
        let ops = rotor_ops(15).unwrap();
        let defect = &ops.sine.commutator(&ops.jz) - &ops.cosine.scale(I);
        // The unit-shift phase operator satisfies [E, Jz] = −E on the
        // truncated ladder as well, so the relation holds on every column.
        for col in 0..15 {
            let worst = column(&defect, col).iter().map(|z| z.norm()).fold(0.0, f64::max);
            assert_eq!(worst, 0.0, "column {col}");
        }
        // Truncation shows up in S² + C², which is short of the identity
        // by 1/2 on the two edge states only.
        let sc = &ops.sine.matmul(&ops.sine) + &ops.cosine.matmul(&ops.cosine);
        for k in 0..15 {
            let expect = if k == 0 || k == 14 { 0.5 } else { 1.0 };
            assert!((sc.get(k, k).re - expect).abs() < 1e-15, "diag {k}");
        }
    }

    #[test]
    fn tensor_layout() {
        let id6 = tensor(&ComplexMatrix::identity(2), &ComplexMatrix::identity(3));
        assert_eq!(id6, ComplexMatrix::identity(6));
        let t = tensor(
            &ComplexMatrix::from_real_diagonal(&[0.0, 1.0]),
            &ComplexMatrix::identity(3),
        );
        let diag: Vec<f64> = t.diagonal().iter().map(|z| z.re).collect();
        assert_eq!(diag, vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0]);
    }

    #[test]
    fn mixed_product_property() {
        let osc = oscillator_ops(3).unwrap();
        let rot = rotor_ops(3).unwrap();
        let lhs = tensor(&osc.annihilate, &rot.sine).matmul(&tensor(&osc.create, &rot.jz));
        let rhs = tensor(
            &osc.annihilate.matmul(&osc.create),
            &rot.sine.matmul(&rot.jz),
        );
        assert!(lhs.approx_eq(&rhs, 1e-14));
        let assoc_l = tensor(&tensor(&osc.number, &rot.cosine), &rot.jz);
        let assoc_r = tensor(&osc.number, &tensor(&rot.cosine, &rot.jz));
        assert_eq!(assoc_l, assoc_r);
    }

    #[test]
    fn spot_position_zero_radius_and_ground_expectation() {
        let dims = SubsystemDims::default();
        let osc = oscillator_ops(dims.n_osc).unwrap();
        let x0 = spot_position_op(&dims, 0.0).unwrap();
        assert_eq!(x0, embed_osc(&(&osc.annihilate + &osc.create), &dims));
        let x = spot_position_op(&dims, 1.56).unwrap();
        assert!(x.hermiticity_defect() < 1e-15);
        let g = basis_state(&dims, 0, 0);
        let mean: C64 = g.iter().zip(x.mul_vec(&g)).map(|(a, b)| a.conj() * b).sum();
        assert!(mean.norm() < 1e-15);
    }
}
