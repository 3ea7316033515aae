use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{ComplexMatrix, SparseOp, C64, I, ZERO};
use crate::model::Channel;
use crate::observables::SpectralDecomposition;

/// How the stochastic schemes treat the Hamiltonian over one step.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HamiltonianPart {
    /// Exact propagator e^{−iHdt} applied before the dissipative and
    /// measurement update (Lie splitting). Unconditionally stable in H.
    #[default]
    Propagator,
    /// −iH dt inside the first-order expansion, as in the textbook forms of
    /// both schemes. Amplifies high-energy components by 1 + (E dt)² per step.
    Linearized,
}

/// One channel in sparse form with its cached products.
#[derive(Clone, Debug)]
pub struct SparseChannel {
    pub op: SparseOp,
    pub op_adj: SparseOp,
    /// L†L.
    pub op_dag_op: SparseOp,
    pub efficiency: f64,
}

/// Operators hoisted out of the per-step loop.
#[derive(Clone, Debug)]
pub struct StepOps {
    dim: usize,
    pub hamiltonian: SparseOp,
    pub channels: Vec<SparseChannel>,
    /// Indices into `channels` of those with η > 0, in order.
    pub monitored: Vec<usize>,
    /// ΣL†L over all channels.
    pub sum_dag_op: SparseOp,
    /// G = −iH − ½ΣL†L, the non-Hermitian drift generator.
    pub drift: SparseOp,
    /// L_r L_s for monitored (r, s), row-major over `monitored`.
    pub pair_products: Vec<SparseOp>,
    /// (L_r L_s)† = L_s† L_r†, same layout.
    pub pair_products_adj: Vec<SparseOp>,
    commuting: bool,
    kraus: KrausLayout,
    hamiltonian_part: HamiltonianPart,
    /// Energies when H is diagonal in the working basis.
    h_diagonal: Option<Vec<f64>>,
    /// Eigen-decomposition of a non-diagonal H, for the propagator.
    h_spectral: Option<SpectralDecomposition>,
}

/// Value vectors of every term of the Kraus operator laid out on one common
/// sparsity pattern, so the operator for a step is assembled in O(nnz).
#[derive(Clone, Debug)]
struct KrausLayout {
    pattern: SparseOp,
    identity: Vec<C64>,
    drift: Vec<C64>,
    monitored: Vec<Vec<C64>>,
    pairs: Vec<Vec<C64>>,
}

impl StepOps {
    /// Step operators with the exact Hamiltonian propagator.
    pub fn new(hamiltonian: &ComplexMatrix, channels: &[Channel]) -> Result<Self> {
        Self::with_hamiltonian_part(hamiltonian, channels, HamiltonianPart::Propagator)
    }

    pub fn with_hamiltonian_part(
        hamiltonian: &ComplexMatrix,
        channels: &[Channel],
        hamiltonian_part: HamiltonianPart,
    ) -> Result<Self> {
        let dim = hamiltonian.dim();
        if !hamiltonian.is_hermitian(1e-12 * hamiltonian.max_abs().max(1.0)) {
            return Err(Error::InvalidState("Hamiltonian is not Hermitian".into()));
        }
        let mut sparse = Vec::with_capacity(channels.len());
        let mut sum_dag_op = ComplexMatrix::zeros(dim);
        for c in channels {
            if c.op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: c.op.dim(),
                });
            }
            if !(0.0..=1.0).contains(&c.efficiency) {
                return Err(Error::InvalidParameter {
                    name: "efficiency",
                    reason: format!("must lie in [0, 1], got {}", c.efficiency),
                });
            }
            let adj = c.op.adjoint();
            let dag_op = adj.matmul(&c.op);
            sum_dag_op += &dag_op;
            sparse.push(SparseChannel {
                op: SparseOp::from_dense(&c.op),
                op_adj: SparseOp::from_dense(&adj),
                op_dag_op: SparseOp::from_dense(&dag_op),
                efficiency: c.efficiency,
            });
        }
        let monitored: Vec<usize> = (0..channels.len())
            .filter(|&r| channels[r].efficiency > 0.0)
            .collect();

        let dissipative = sum_dag_op.scale_real(-0.5);
        let drift = SparseOp::from_dense(&(&hamiltonian.scale(-I) + &dissipative));
        // The Kraus operator carries H only in the linearized form.
        let kraus_drift = match hamiltonian_part {
            HamiltonianPart::Linearized => drift.clone(),
            HamiltonianPart::Propagator => SparseOp::from_dense(&dissipative),
        };
        let is_diagonal = (0..dim).all(|i| (0..dim).all(|j| i == j || hamiltonian.get(i, j) == ZERO));
        let h_diagonal = is_diagonal.then(|| hamiltonian.diagonal().iter().map(|z| z.re).collect::<Vec<_>>());
        let h_spectral = match (hamiltonian_part, is_diagonal) {
            (HamiltonianPart::Propagator, false) => Some(SpectralDecomposition::of_hermitian(hamiltonian)?),
            _ => None,
        };

        let mut pair_products = Vec::new();
        let mut pair_products_adj = Vec::new();
        let mut commuting = true;
        for &r in &monitored {
            for &s in &monitored {
                let p = channels[r].op.matmul(&channels[s].op);
                if r < s {
                    let q = channels[s].op.matmul(&channels[r].op);
                    let scale = p.max_abs().max(1.0);
                    if p.max_abs_diff(&q) > 1e-12 * scale {
                        commuting = false;
                    }
                }
                pair_products_adj.push(SparseOp::from_dense(&p.adjoint()));
                pair_products.push(SparseOp::from_dense(&p));
            }
        }

        let identity = SparseOp::from_dense(&ComplexMatrix::identity(dim));
        let mut members: Vec<&SparseOp> = vec![&identity, &kraus_drift];
        members.extend(monitored.iter().map(|&r| &sparse[r].op));
        members.extend(pair_products.iter());
        let pattern = SparseOp::union_pattern(dim, &members);
        let kraus = KrausLayout {
            identity: identity.values_on(&pattern),
            drift: kraus_drift.values_on(&pattern),
            monitored: monitored.iter().map(|&r| sparse[r].op.values_on(&pattern)).collect(),
            pairs: pair_products.iter().map(|p| p.values_on(&pattern)).collect(),
            pattern,
        };

        Ok(Self {
            dim,
            hamiltonian: SparseOp::from_dense(hamiltonian),
            channels: sparse,
            monitored,
            sum_dag_op: SparseOp::from_dense(&sum_dag_op),
            drift,
            pair_products,
            pair_products_adj,
            commuting,
            kraus,
            hamiltonian_part,
            h_diagonal,
            h_spectral,
        })
    }

    pub fn hamiltonian_part(&self) -> HamiltonianPart {
        self.hamiltonian_part
    }

    /// Diagonal of e^{−iHdt} when H is diagonal.
    pub(crate) fn propagator_phases(&self, dt: f64) -> Option<Vec<C64>> {
        self.h_diagonal
            .as_ref()
            .map(|e| e.iter().map(|&e| C64::from_polar(1.0, -e * dt)).collect())
    }

    /// e^{−iHdt} as a dense matrix.
    pub fn propagator(&self, dt: f64) -> ComplexMatrix {
        match (&self.h_diagonal, &self.h_spectral) {
            (Some(_), _) => {
                let phases = self.propagator_phases(dt).unwrap();
                ComplexMatrix::from_fn(self.dim, |i, j| if i == j { phases[i] } else { ZERO })
            }
            (None, Some(spec)) => {
                let v = &spec.eigenvectors;
                let phases = ComplexMatrix::from_fn(self.dim, |i, j| {
                    if i == j {
                        C64::from_polar(1.0, -spec.eigenvalues[i] * dt)
                    } else {
                        ZERO
                    }
                });
                v.matmul(&phases).matmul(&v.adjoint())
            }
            (None, None) => {
                let spec = SpectralDecomposition::of_hermitian(&self.hamiltonian.to_dense())
                    .expect("Hermitian eigensolver");
                let v = &spec.eigenvectors;
                let phases = ComplexMatrix::from_fn(self.dim, |i, j| {
                    if i == j {
                        C64::from_polar(1.0, -spec.eigenvalues[i] * dt)
                    } else {
                        ZERO
                    }
                });
                v.matmul(&phases).matmul(&v.adjoint())
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_monitored(&self) -> usize {
        self.monitored.len()
    }

    /// Whether all monitored channels commute, the condition under which the
    /// Kraus update keeps the state positive.
    pub fn monitored_commute(&self) -> bool {
        self.commuting
    }

    /// Every channel is fully monitored, so a pure-state ensemble stays pure
    /// under the Kraus update.
    pub fn all_monitored(&self) -> bool {
        self.channels.iter().all(|c| c.efficiency == 1.0)
    }

    /// Kraus operator
    /// M = [I + G dt + Σ_r √η_r (√η_r tr_r dt + ΔW_r) L_r
    ///       + Σ_{r,s} ½√(η_r η_s) (ΔW_r ΔW_s − δ_rs dt) L_r L_s] · U
    /// with G = −iH − ½ΣL†L and U = I in the linearized form, and
    /// G = −½ΣL†L, U = e^{−iHdt} with the propagator; where `tr[r]` = Tr(L_r ρ + ρ L_r†) for the r-th monitored channel.
    pub fn kraus_operator(&self, dt: f64, tr: &[f64], dw: &[f64]) -> SparseOp {
        let k = &self.kraus;
        let mut m = k.pattern.clone();
        let vals = m.values_mut();
        let dt_c = C64::new(dt, 0.0);
        for ((v, a), b) in vals.iter_mut().zip(&k.identity).zip(&k.drift) {
            *v = a + b * dt_c;
        }
        let n = self.monitored.len();
        for (idx, &r) in self.monitored.iter().enumerate() {
            let eta = self.channels[r].efficiency;
            let coeff = eta.sqrt() * (eta.sqrt() * tr[idx] * dt + dw[idx]);
            add_scaled(vals, coeff, &k.monitored[idx]);
        }
        for a in 0..n {
            for b in 0..n {
                let eta_a = self.channels[self.monitored[a]].efficiency;
                let eta_b = self.channels[self.monitored[b]].efficiency;
                let delta = if a == b { dt } else { 0.0 };
                let coeff = 0.5 * (eta_a * eta_b).sqrt() * (dw[a] * dw[b] - delta);
                add_scaled(vals, coeff, &k.pairs[a * n + b]);
            }
        }
        if self.hamiltonian_part == HamiltonianPart::Propagator {
            match self.propagator_phases(dt) {
                // M_L · diag(u): scale column j by u_j
                Some(u) => m.scale_columns(&u),
                None => m = SparseOp::from_dense(&m.to_dense().matmul(&self.propagator(dt))),
            }
        }
        m
    }

    /// Dense M for inspection and tests.
    pub fn kraus_dense(&self, dt: f64, tr: &[f64], dw: &[f64]) -> ComplexMatrix {
        self.kraus_operator(dt, tr, dw).to_dense()
    }

    pub(crate) fn check_noise(&self, dw: &[f64]) -> Result<()> {
        if dw.len() != self.monitored.len() {
            return Err(Error::DimensionMismatch {
                expected: self.monitored.len(),
                got: dw.len(),
            });
        }
        Ok(())
    }
}

#[inline]
fn add_scaled(vals: &mut [C64], coeff: f64, term: &[C64]) {
    if coeff == 0.0 {
        return;
    }
    for (v, t) in vals.iter_mut().zip(term) {
        *v += t * coeff;
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::SubsystemDims;
    use crate::linalg::ONE;
    use crate::model::{build_model, build_model_with, MeasurementModel, PhysicalParams};

    #[test]
    fn caches_match_definitions() {
        let model = build_model(&PhysicalParams::default(), SubsystemDims::new(4, 5).unwrap()).unwrap();
        let ops = StepOps::new(&model.hamiltonian, &model.channels).unwrap();
        assert_eq!(ops.monitored, vec![0]);
        assert!(ops.monitored_commute());
        assert!(!ops.all_monitored());
        let mut sum = ComplexMatrix::zeros(20);
        for c in &model.channels {
            sum += &c.op.adjoint().matmul(&c.op);
        }
        assert!(ops.sum_dag_op.to_dense().approx_eq(&sum, 1e-14));
        let g = &model.hamiltonian.scale(-I) - &sum.scale_real(0.5);
        assert!(ops.drift.to_dense().approx_eq(&g, 1e-14));
        let l = &model.channels[0].op;
        assert!(ops.pair_products[0].to_dense().approx_eq(&l.matmul(l), 1e-14));
    }

    #[test]
    fn kraus_operator_matches_dense_assembly() {
        let model = build_model_with(
            &PhysicalParams::default(),
            SubsystemDims::new(3, 5).unwrap(),
            MeasurementModel::Separate,
        )
        .unwrap();
        let ops = StepOps::with_hamiltonian_part(&model.hamiltonian, &model.channels, HamiltonianPart::Linearized)
            .unwrap();
        assert_eq!(ops.n_monitored(), 2);
        let (dt, tr, dw) = (0.01, [0.3, -0.2], [0.05, -0.12]);
        let l0 = &model.channels[0].op;
        let l1 = &model.channels[1].op;
        let id = ComplexMatrix::identity(15);
        let mut expect = &id + &ops.drift.to_dense().scale_real(dt);
        expect += &l0.scale_real(tr[0] * dt + dw[0]);
        expect += &l1.scale_real(tr[1] * dt + dw[1]);
        expect += &l0.matmul(l0).scale_real(0.5 * (dw[0] * dw[0] - dt));
        expect += &l1.matmul(l1).scale_real(0.5 * (dw[1] * dw[1] - dt));
        expect += &l0.matmul(l1).scale_real(0.5 * dw[0] * dw[1]);
        expect += &l1.matmul(l0).scale_real(0.5 * dw[1] * dw[0]);
        assert!(ops.kraus_dense(dt, &tr, &dw).approx_eq(&expect, 1e-14));

        // Propagator form: the same expansion without H, times e^{−iHdt}.
        let split = StepOps::new(&model.hamiltonian, &model.channels).unwrap();
        let h_part = model.hamiltonian.scale(C64::new(0.0, -dt));
        let without_h = &expect - &h_part;
        let expect = without_h.matmul(&split.propagator(dt));
        assert!(split.kraus_dense(dt, &tr, &dw).approx_eq(&expect, 1e-14));
        for i in 0..15 {
            let e = model.hamiltonian.get(i, i).re;
            assert!((split.propagator(dt).get(i, i) - C64::from_polar(1.0, -e * dt)).norm() < 1e-15);
        }
    }

    #[test]
    fn detects_noncommuting_measurements() {
        let x = ComplexMatrix::from_fn(2, |i, j| if i != j { ONE } else { C64::new(0.0, 0.0) });
        let z = ComplexMatrix::from_real_diagonal(&[1.0, -1.0]);
        let chan = |op: ComplexMatrix| Channel {
            op,
            efficiency: 1.0,
            role: crate::model::ChannelRole::Measurement,
        };
        let ops = StepOps::new(&ComplexMatrix::zeros(2), &[chan(x), chan(z)]).unwrap();
        assert!(!ops.monitored_commute());
    }
}
