//! Single-step updates of the conditioned state.
//!
//! All kernels work on row-major dense states and sparse operators. The
//! public `*_step` functions allocate; [`Stepper`] keeps scratch buffers for
//! use inside trajectory loops.

use crate::error::{Error, Result};
use crate::linalg::{adjoint_into, mirror_upper, symmetrize_in_place, trace_of, ComplexMatrix, C64, ONE, ZERO};

use super::ops::{HamiltonianPart, StepOps};

/// ρ ← U ρ U† with U = e^{−iHdt}.
fn apply_propagator(rho: &mut [C64], ops: &StepOps, dt: f64, scratch: &mut [C64]) {
    let n = ops.dim();
    match ops.propagator_phases(dt) {
        Some(u) => {
            for i in 0..n {
                for j in 0..n {
                    rho[i * n + j] *= u[i] * u[j].conj();
                }
            }
        }
        None => {
            let u = ops.propagator(dt);
            let r = ComplexMatrix::from_row_major(rho.to_vec());
            let out = u.matmul(&r).matmul(&u.adjoint());
            scratch.copy_from_slice(out.as_slice());
            rho.copy_from_slice(scratch);
        }
    }
}

/// Tr(L_r ρ + ρ L_r†) for each monitored channel, real part, for a Hermitian
/// state.
pub fn measurement_traces(rho: &ComplexMatrix, ops: &StepOps) -> Vec<f64> {
    let mut out = vec![0.0; ops.n_monitored()];
    fill_traces(rho.as_slice(), ops, &mut out);
    out
}

fn fill_traces(rho: &[C64], ops: &StepOps, out: &mut [f64]) {
    for (o, &r) in out.iter_mut().zip(&ops.monitored) {
        let c = &ops.channels[r];
        *o = (c.op.trace_with(rho) + c.op_adj.trace_with(rho)).re;
    }
}

/// y_r ← y_r + √η_r Tr(L_r ρ + ρ L_r†) dt + ΔW_r, one entry per monitored
/// channel.
pub fn advance_record(y: &mut [f64], rho: &ComplexMatrix, ops: &StepOps, dt: f64, dw: &[f64]) -> Result<()> {
    ops.check_noise(dw)?;
    ops.check_noise(y)?;
    let tr = measurement_traces(rho, ops);
    for (idx, &r) in ops.monitored.iter().enumerate() {
        y[idx] += ops.channels[r].efficiency.sqrt() * tr[idx] * dt + dw[idx];
    }
    Ok(())
}

/// Inverts the record update: the Wiener increments implied by observed
/// record increments `dy` from state `rho`.
pub fn recover_increments(dy: &[f64], rho: &ComplexMatrix, ops: &StepOps, dt: f64) -> Result<Vec<f64>> {
    ops.check_noise(dy)?;
    let tr = measurement_traces(rho, ops);
    Ok(ops
        .monitored
        .iter()
        .enumerate()
        .map(|(idx, &r)| dy[idx] - ops.channels[r].efficiency.sqrt() * tr[idx] * dt)
        .collect())
}

pub fn rouchon_step(rho: &ComplexMatrix, ops: &StepOps, dt: f64, dw: &[f64]) -> Result<ComplexMatrix> {
    let mut out = rho.clone();
    Stepper::new(ops.dim()).rouchon(out.as_mut_slice(), ops, dt, dw)?;
    Ok(out)
}

pub fn milstein_step(rho: &ComplexMatrix, ops: &StepOps, dt: f64, dw: &[f64]) -> Result<ComplexMatrix> {
    let mut out = rho.clone();
    Stepper::new(ops.dim()).milstein(out.as_mut_slice(), ops, dt, dw, true)?;
    Ok(out)
}

pub fn euler_maruyama_step(rho: &ComplexMatrix, ops: &StepOps, dt: f64, dw: &[f64]) -> Result<ComplexMatrix> {
    let mut out = rho.clone();
    Stepper::new(ops.dim()).milstein(out.as_mut_slice(), ops, dt, dw, false)?;
    Ok(out)
}

pub fn lindblad_step(rho: &ComplexMatrix, ops: &StepOps, dt: f64) -> Result<ComplexMatrix> {
    let mut out = rho.clone();
    Stepper::new(ops.dim()).lindblad(out.as_mut_slice(), ops, dt)?;
    Ok(out)
}

/// Reusable scratch space for the dense steppers.
#[derive(Clone, Debug)]
pub struct Stepper {
    n: usize,
    a: Vec<C64>,
    b: Vec<C64>,
    c: Vec<C64>,
    tr: Vec<f64>,
    // Milstein per-monitored-channel products
    l_rho: Vec<Vec<C64>>,
    rho_ldag: Vec<Vec<C64>>,
    l_rho_ldag: Vec<Vec<C64>>,
    // Runge-Kutta stages
    stages: Vec<Vec<C64>>,
}

impl Stepper {
    pub fn new(dim: usize) -> Self {
        let z = || vec![ZERO; dim * dim];
        Self {
            n: dim,
            a: z(),
            b: z(),
            c: z(),
            tr: Vec::new(),
            l_rho: Vec::new(),
            rho_ldag: Vec::new(),
            l_rho_ldag: Vec::new(),
            stages: Vec::new(),
        }
    }

    fn check(&self, rho: &[C64], ops: &StepOps, dt: f64) -> Result<()> {
        if ops.dim() != self.n || rho.len() != self.n * self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: ops.dim(),
            });
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "dt",
                reason: format!("must be positive, got {dt}"),
            });
        }
        Ok(())
    }

    /// Kraus-map update
    /// ρ ← (MρM† + Σ(1−η_r) L_r ρ L_r† dt) / Tr(·), in place.
    /// `rho` must be Hermitian.
    pub fn rouchon(&mut self, rho: &mut [C64], ops: &StepOps, dt: f64, dw: &[f64]) -> Result<()> {
        self.check(rho, ops, dt)?;
        ops.check_noise(dw)?;
        let n = self.n;
        self.tr.resize(ops.n_monitored(), 0.0);
        fill_traces(rho, ops, &mut self.tr);
        let m = ops.kraus_operator(dt, &self.tr, dw);

        // M ρ M† = M (M ρ)†, upper triangle only.
        m.mul_dense_into(rho, &mut self.a);
        adjoint_into(&self.a, &mut self.b, n);
        m.mul_dense_upper_into(&self.b, &mut self.c);

        for ch in &ops.channels {
            let w = (1.0 - ch.efficiency) * dt;
            if w == 0.0 {
                continue;
            }
            ch.op.mul_dense_into(rho, &mut self.a);
            adjoint_into(&self.a, &mut self.b, n);
            ch.op.mul_dense_upper_acc(C64::new(w, 0.0), &self.b, &mut self.c);
        }

        mirror_upper(&mut self.c, n);
        let norm: f64 = (0..n).map(|i| self.c[i * n + i].re).sum();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::BadNormalization(norm));
        }
        let inv = 1.0 / norm;
        for (r, v) in rho.iter_mut().zip(&self.c) {
            *r = v * inv;
        }
        Ok(())
    }

    /// ρ ← ρ + Δρ with Δρ the strong order-1 increment (or the Euler-Maruyama
    /// increment when `second_order` is false). No symmetrization or
    /// renormalization. With the propagator form, ρ is first rotated by
    /// e^{−iHdt} and Δρ drops the commutator term.
    pub fn milstein(
        &mut self,
        rho: &mut [C64],
        ops: &StepOps,
        dt: f64,
        dw: &[f64],
        second_order: bool,
    ) -> Result<()> {
        self.check(rho, ops, dt)?;
        ops.check_noise(dw)?;
        let n = self.n;
        let nm = ops.n_monitored();
        let zeros = || vec![ZERO; n * n];
        self.l_rho.resize_with(nm, zeros);
        self.rho_ldag.resize_with(nm, zeros);
        self.l_rho_ldag.resize_with(nm, zeros);
        let linearized = ops.hamiltonian_part() == HamiltonianPart::Linearized;
        if !linearized {
            apply_propagator(rho, ops, dt, &mut self.a);
        }
        let delta = &mut self.c;
        delta.fill(ZERO);

        // −i[H, ρ] dt
        if linearized {
            ops.hamiltonian.mul_dense_acc(C64::new(0.0, -dt), rho, delta);
            ops.hamiltonian.dense_mul_acc(C64::new(0.0, dt), rho, delta);
        }

        // Σ_r { L ρ L† − ½(L†L ρ + ρ L†L) } dt, every channel.
        let mut slot = 0;
        for (r, ch) in ops.channels.iter().enumerate() {
            let monitored = ops.monitored.get(slot) == Some(&r);
            let (rl, lrl) = if monitored {
                (&mut self.rho_ldag[slot], &mut self.l_rho_ldag[slot])
            } else {
                (&mut self.a, &mut self.b)
            };
            ch.op_adj.dense_mul_into(rho, rl);
            ch.op.mul_dense_into(rl, lrl);
            for (d, v) in delta.iter_mut().zip(lrl.iter()) {
                *d += v * dt;
            }
            ch.op_dag_op.mul_dense_acc(C64::new(-0.5 * dt, 0.0), rho, delta);
            ch.op_dag_op.dense_mul_acc(C64::new(-0.5 * dt, 0.0), rho, delta);
            if monitored {
                ch.op.mul_dense_into(rho, &mut self.l_rho[slot]);
                slot += 1;
            }
        }

        // Σ_r √η (L ρ + ρ L† − Tr(L ρ + ρ L†) ρ) ΔW
        let mut tr = vec![ZERO; nm];
        for (idx, &r) in ops.monitored.iter().enumerate() {
            let (lr, rl) = (&self.l_rho[idx], &self.rho_ldag[idx]);
            tr[idx] = trace_of(lr, n) + trace_of(rl, n);
            let w = ops.channels[r].efficiency.sqrt() * dw[idx];
            let t = tr[idx];
            for (((d, a), b), p) in delta.iter_mut().zip(lr).zip(rl).zip(rho.iter()) {
                *d += (a + b - t * p) * w;
            }
        }

        if second_order {
            for a in 0..nm {
                for b in 0..nm {
                    let eta_a = ops.channels[ops.monitored[a]].efficiency;
                    let eta_b = ops.channels[ops.monitored[b]].efficiency;
                    let kron = if a == b { dt } else { 0.0 };
                    let w = 0.5 * (eta_a * eta_b).sqrt() * (dw[a] * dw[b] - kron);
                    if w == 0.0 {
                        continue;
                    }
                    // G = L_a L_b ρ + ρ L_a† L_b† + L_b ρ L_a† + L_a ρ L_b†
                    let g = &mut self.a;
                    ops.pair_products[a * nm + b].mul_dense_into(rho, g);
                    ops.pair_products_adj[b * nm + a].dense_mul_acc(ONE, rho, g);
                    if a == b {
                        for (x, v) in g.iter_mut().zip(&self.l_rho_ldag[a]) {
                            *x += v * 2.0;
                        }
                    } else {
                        let la = &ops.channels[ops.monitored[a]].op;
                        let lb = &ops.channels[ops.monitored[b]].op;
                        lb.mul_dense_acc(ONE, &self.rho_ldag[a], g);
                        la.mul_dense_acc(ONE, &self.rho_ldag[b], g);
                    }
                    let tg = trace_of(g, n);
                    let (ta, tb) = (tr[a], tr[b]);
                    let two_tt = ta * tb * 2.0;
                    let g = &self.a;
                    let (lra, rla) = (&self.l_rho[a], &self.rho_ldag[a]);
                    let (lrb, rlb) = (&self.l_rho[b], &self.rho_ldag[b]);
                    for i in 0..n * n {
                        let p = rho[i];
                        let term = g[i] - tg * p - tb * (lra[i] + rla[i]) - ta * (lrb[i] + rlb[i])
                            + two_tt * p;
                        delta[i] += term * w;
                    }
                }
            }
        }

        for (r, d) in rho.iter_mut().zip(delta.iter()) {
            *r += d;
        }
        if rho.iter().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::NonFinite);
        }
        Ok(())
    }

    /// Classical fourth-order Runge-Kutta step of the averaged master
    /// equation, then Hermitian part and unit trace.
    pub fn lindblad(&mut self, rho: &mut [C64], ops: &StepOps, dt: f64) -> Result<()> {
        self.check(rho, ops, dt)?;
        let n = self.n;
        let zeros = || vec![ZERO; n * n];
        self.stages.resize_with(3, zeros);
        let (acc, rest) = self.stages.split_at_mut(1);
        let (probe, k) = rest.split_at_mut(1);
        let (acc, probe, k) = (&mut acc[0], &mut probe[0], &mut k[0]);

        // k1
        lindblad_rhs(rho, ops, &mut self.a, &mut self.b, k, n);
        for ((s, p), (r, v)) in acc.iter_mut().zip(probe.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *s = v / 6.0;
            *p = r + v * (0.5 * dt);
        }
        // k2
        lindblad_rhs(probe, ops, &mut self.a, &mut self.b, k, n);
        for ((s, p), (r, v)) in acc.iter_mut().zip(probe.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *s += v / 3.0;
            *p = r + v * (0.5 * dt);
        }
        // k3
        lindblad_rhs(probe, ops, &mut self.a, &mut self.b, k, n);
        for ((s, p), (r, v)) in acc.iter_mut().zip(probe.iter_mut()).zip(rho.iter().zip(k.iter())) {
            *s += v / 3.0;
            *p = r + v * dt;
        }
        // k4
        lindblad_rhs(probe, ops, &mut self.a, &mut self.b, k, n);
        for ((r, s), v) in rho.iter_mut().zip(acc.iter()).zip(k.iter()) {
            *r += (s + v / 6.0) * dt;
        }

        symmetrize_in_place(rho, n);
        let norm: f64 = (0..n).map(|i| rho[i * n + i].re).sum();
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::BadNormalization(norm));
        }
        for r in rho.iter_mut() {
            *r /= norm;
        }
        Ok(())
    }
}

/// out = Gρ + (Gρ)† + Σ L ρ L† for Hermitian ρ, with G = −iH − ½ΣL†L.
fn lindblad_rhs(rho: &[C64], ops: &StepOps, a: &mut [C64], b: &mut [C64], out: &mut [C64], n: usize) {
    ops.drift.mul_dense_into(rho, a);
    adjoint_into(a, out, n);
    for (o, v) in out.iter_mut().zip(a.iter()) {
        *o += v;
    }
    for ch in &ops.channels {
        ch.op.mul_dense_into(rho, a);
        adjoint_into(a, b, n);
        ch.op.mul_dense_acc(ONE, b, out);
    }
}
