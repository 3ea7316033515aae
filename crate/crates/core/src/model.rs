//! Physical parameters of the trapped sphere and the dimensionless operators
//! built from them.
//!
//! Units: ħ = 1, energies in ħω_t, time in 1/ω_t, lengths in the zero-point
//! spread x_zpf = √(ħ/(2mω_t)). A measurement rate `k` quoted as a fraction
//! of ω_t is then directly the coefficient of the dimensionless spot operator.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::{
    embed_osc, embed_rot, oscillator_ops, rotor_ops, spot_position_op, SubsystemDims,
};
use crate::linalg::{ComplexMatrix, C64};
use crate::observables::DensityMatrix;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const K_BOLTZMANN: f64 = 1.380_649e-23;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Sphere radius in meters.
    pub radius: f64,
    /// Mass density in kg/m³.
    pub density: f64,
    /// Trap angular frequency in rad/s.
    pub trap_freq: f64,
    /// Bath temperature in kelvin.
    pub temperature: f64,
    pub quality: f64,
    /// Measurement strength as a fraction of the trap frequency.
    pub meas_rate_k: f64,
    pub bath_enabled: bool,
    pub meas_efficiency: f64,
}

impl Default for PhysicalParams {
    fn default() -> Self {
        Self {
            radius: 1.75e-9,
            density: 2201.0,
            trap_freq: 2.0 * std::f64::consts::PI * 135e3,
            temperature: 5e-6,
            quality: 100.0,
            meas_rate_k: 0.005,
            bath_enabled: true,
            meas_efficiency: 1.0,
        }
    }
}

impl PhysicalParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("radius", self.radius),
            ("density", self.density),
            ("trap_freq", self.trap_freq),
            ("temperature", self.temperature),
            ("quality", self.quality),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("must be strictly positive, got {v}"),
                });
            }
        }
        if !(self.meas_rate_k >= 0.0 && self.meas_rate_k.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "meas_rate_k",
                reason: format!("must be nonnegative, got {}", self.meas_rate_k),
            });
        }
        if !(0.0..=1.0).contains(&self.meas_efficiency) {
            return Err(Error::InvalidParameter {
                name: "meas_efficiency",
                reason: format!("must lie in [0, 1], got {}", self.meas_efficiency),
            });
        }
        Ok(())
    }
}

/// Mass, moment of inertia and the derived scales of the sphere.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mechanics {
    pub mass: f64,
    pub inertia: f64,
    pub xzpf: f64,
    /// Rotational quantum ħ²/(2I) over the trap quantum ħω_t.
    pub energy_ratio: f64,
}

pub fn derived_mechanics(p: &PhysicalParams) -> Mechanics {
    let mass = 4.0 / 3.0 * std::f64::consts::PI * p.radius.powi(3) * p.density;
    let inertia = 0.4 * mass * p.radius * p.radius;
    let xzpf = (HBAR / (2.0 * mass * p.trap_freq)).sqrt();
    let energy_ratio = HBAR / (2.0 * inertia * p.trap_freq);
    Mechanics {
        mass,
        inertia,
        xzpf,
        energy_ratio,
    }
}

/// Bose-Einstein occupation of the trap mode.
pub fn thermal_occupation(trap_freq: f64, temperature: f64) -> f64 {
    let x = HBAR * trap_freq / (K_BOLTZMANN * temperature);
    1.0 / x.exp_m1()
}

/// How the spot is observed: one record of x = X + R·S, or two separate
/// records of X and R·S.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasurementModel {
    #[default]
    Combined,
    Separate,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelRole {
    Measurement,
    BathLoss,
    BathGain,
}

/// One Lindblad channel, in units of √ω_t.
#[derive(Clone, Debug)]
pub struct Channel {
    pub op: ComplexMatrix,
    pub efficiency: f64,
    pub role: ChannelRole,
}

impl Channel {
    pub fn is_monitored(&self) -> bool {
        self.efficiency > 0.0
    }
}

#[derive(Clone, Debug)]
pub struct ModelOps {
    pub dims: SubsystemDims,
    pub hamiltonian: ComplexMatrix,
    /// Channels at the model's own measurement rate; monitored ones first.
    pub channels: Vec<Channel>,
    pub energy_ratio: f64,
    pub nbar: f64,
    pub xzpf: f64,
    pub radius_over_xzpf: f64,
    pub measurement_model: MeasurementModel,
    pub meas_rate_k: f64,
    pub meas_efficiency: f64,
    /// Rate-free measured observables (x̃, or X̃ and r·S̃).
    pub observables: Vec<ComplexMatrix>,
    bath: Vec<Channel>,
    h_translational: ComplexMatrix,
    h_rotational: ComplexMatrix,
}

impl ModelOps {
    /// The channel list at measurement rate `k`. With `k = 0` only the bath
    /// channels remain.
    pub fn channels_at_rate(&self, k: f64) -> Vec<Channel> {
        let mut out = Vec::with_capacity(self.observables.len() + self.bath.len());
        if k > 0.0 {
            let amp = (2.0 * k).sqrt();
            out.extend(self.observables.iter().map(|obs| Channel {
                op: obs.scale_real(amp),
                efficiency: self.meas_efficiency,
                role: ChannelRole::Measurement,
            }));
        }
        out.extend(self.bath.iter().cloned());
        out
    }

    /// Number of noise columns a Wiener grid for this model needs. Stays
    /// fixed across measurement-rate changes.
    pub fn noise_channels(&self) -> usize {
        if self.meas_efficiency > 0.0 {
            self.observables.len()
        } else {
            0
        }
    }

    pub fn h_translational(&self) -> &ComplexMatrix {
        &self.h_translational
    }

    pub fn h_rotational(&self) -> &ComplexMatrix {
        &self.h_rotational
    }
}

pub fn build_model(p: &PhysicalParams, dims: SubsystemDims) -> Result<ModelOps> {
    build_model_with(p, dims, MeasurementModel::Combined)
}

pub fn build_model_with(
    p: &PhysicalParams,
    dims: SubsystemDims,
    measurement_model: MeasurementModel,
) -> Result<ModelOps> {
    p.validate()?;
    dims.validate()?;
    let mech = derived_mechanics(p);
    let nbar = thermal_occupation(p.trap_freq, p.temperature);
    let radius_over_xzpf = p.radius / mech.xzpf;

    let osc = oscillator_ops(dims.n_osc)?;
    let rot = rotor_ops(dims.n_rot)?;

    let h_translational = embed_osc(&osc.number, &dims);
    let h_rotational = embed_rot(&rot.jz.matmul(&rot.jz), &dims).scale_real(mech.energy_ratio);
    let hamiltonian = &h_translational + &h_rotational;

    let observables = match measurement_model {
        MeasurementModel::Combined => vec![spot_position_op(&dims, radius_over_xzpf)?],
        MeasurementModel::Separate => vec![
            embed_osc(&(&osc.annihilate + &osc.create), &dims),
            embed_rot(&rot.sine, &dims).scale_real(radius_over_xzpf),
        ],
    };

    let bath = if p.bath_enabled {
        vec![
            Channel {
                op: embed_osc(&osc.annihilate, &dims).scale_real(((nbar + 1.0) / p.quality).sqrt()),
                efficiency: 0.0,
                role: ChannelRole::BathLoss,
            },
            Channel {
                op: embed_osc(&osc.create, &dims).scale_real((nbar / p.quality).sqrt()),
                efficiency: 0.0,
                role: ChannelRole::BathGain,
            },
        ]
    } else {
        Vec::new()
    };

    let mut model = ModelOps {
        dims,
        hamiltonian,
        channels: Vec::new(),
        energy_ratio: mech.energy_ratio,
        nbar,
        xzpf: mech.xzpf,
        radius_over_xzpf,
        measurement_model,
        meas_rate_k: p.meas_rate_k,
        meas_efficiency: p.meas_efficiency,
        observables,
        bath,
        h_translational,
        h_rotational,
    };
    model.channels = model.channels_at_rate(p.meas_rate_k);
    Ok(model)
}

/// Truncated geometric occupation p_n ∝ (n̄/(n̄+1))ⁿ, renormalized over
/// `n_osc` levels.
pub fn thermal_populations(nbar: f64, n_osc: usize) -> Vec<f64> {
    let q = nbar / (nbar + 1.0);
    let raw: Vec<f64> = (0..n_osc).map(|n| q.powi(n as i32)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|p| p / total).collect()
}

/// Thermal oscillator ⊗ rotor ground state |m = 0⟩.
pub fn initial_state(p: &PhysicalParams, dims: SubsystemDims) -> Result<DensityMatrix> {
    p.validate()?;
    dims.validate()?;
    let nbar = thermal_occupation(p.trap_freq, p.temperature);
    let pops = thermal_populations(nbar, dims.n_osc);
    let mut rho = ComplexMatrix::zeros(dims.joint());
    for (n, &pn) in pops.iter().enumerate() {
        let i = dims.index(n, 0);
        rho.set(i, i, C64::new(pn, 0.0));
    }
    DensityMatrix::new(rho, dims)
}
