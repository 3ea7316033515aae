//! Flat JSON scenario files with unit-suffixed keys.
//!
//! Values are layered: campaign preset, then the file, then `--set`
//! overrides, then the dedicated flags. Every key is checked; unknown keys
//! and ill-typed values are reported with the key that caused them.

use std::f64::consts::PI;
use std::path::Path;

use serde_json::{Map, Value};
use sme_core::experiments::{Experiment, ScenarioConfig, Sweep};
use sme_core::hilbert::SubsystemDims;
use sme_core::integrators::{HamiltonianPart, ObservableSet, Scheme};
use sme_core::model::MeasurementModel;

/// A problem with one configuration key.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config key `{key}`: {reason}")]
pub struct ConfigError {
    pub key: String,
    pub reason: String,
}

fn err<T>(key: &str, reason: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        key: key.to_string(),
        reason: reason.into(),
    })
}

/// Every accepted key, in manifest order.
pub const KEYS: &[&str] = &[
    "name",
    "experiment",
    "radius_nm",
    "density_kg_m3",
    "trap_freq_khz",
    "temperature_uk",
    "quality_factor",
    "k_over_omega",
    "meas_efficiency",
    "bath_enabled",
    "n_osc",
    "n_rot",
    "scheme",
    "steps_per_cycle",
    "n_cycles",
    "n_trajectories",
    "seed",
    "samples_per_cycle",
    "k_schedule",
    "switch_off_cycle",
    "radii_nm",
    "step_grid",
    "outputs",
    "measurement_model",
    "hamiltonian_part",
    "hermitize",
    "master_equation",
    "steady_start_cycle",
    "reference_steps_per_cycle",
    "workers",
];

const OUTPUT_NAMES: [&str; 4] = ["purity", "energies", "correlations", "edges"];

/// Cycle of the default switch-off.
pub const DEFAULT_SWITCH_OFF_CYCLE: f64 = 50.0;

/// The outcome of layering and validation.
#[derive(Debug, Clone)]
pub struct ResolvedConfig {
    pub scenario: ScenarioConfig,
    /// All keys with their final values, defaults included.
    pub flat: Map<String, Value>,
    /// Keys given in the file, as written.
    pub file_values: Map<String, Value>,
    /// Keys given on the command line (`--set` and the dedicated flags).
    pub overrides: Map<String, Value>,
    /// Trajectory-count multiplier applied after layering.
    pub scale: f64,
}

/// Command-line layers on top of the file.
#[derive(Debug, Clone, Default)]
pub struct CliLayers {
    /// `KEY=VALUE` strings; VALUE is read as JSON, or as a bare string if it
    /// does not parse.
    pub sets: Vec<String>,
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub scale: Option<f64>,
}

pub fn read_config_file(path: &Path) -> Result<Map<String, Value>, ConfigError> {
    let text = std::fs::read_to_string(path).or_else(|e| err(&path.display().to_string(), e.to_string()))?;
    parse_config_text(&text)
}

pub fn parse_config_text(text: &str) -> Result<Map<String, Value>, ConfigError> {
    match serde_json::from_str::<Value>(text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => err("<root>", "the config must be a JSON object"),
        Err(e) => err("<root>", format!("malformed JSON: {e}")),
    }
}

pub fn parse_set(s: &str) -> Result<(String, Value), ConfigError> {
    let Some((key, raw)) = s.split_once('=') else {
        return err(s, "expected KEY=VALUE");
    };
    let key = key.trim();
    let value = serde_json::from_str(raw.trim()).unwrap_or_else(|_| Value::String(raw.trim().to_string()));
    Ok((key.to_string(), value))
}

/// Layers `file` and `cli` over the preset of the chosen campaign. The
/// campaign comes from the `experiment` key if given, else `default`.
pub fn resolve(
    file: Map<String, Value>,
    cli: &CliLayers,
    default: Experiment,
) -> Result<ResolvedConfig, ConfigError> {
    let mut overrides = Map::new();
    for s in &cli.sets {
        let (k, v) = parse_set(s)?;
        overrides.insert(k, v);
    }
    if let Some(seed) = cli.seed {
        overrides.insert("seed".into(), seed.into());
    }
    if let Some(w) = cli.workers {
        overrides.insert("workers".into(), w.into());
    }
    for key in file.keys().chain(overrides.keys()) {
        if !KEYS.contains(&key.as_str()) {
            return err(key, "unknown key");
        }
    }
    let mut layered = file.clone();
    layered.extend(overrides.clone());

    let experiment = match layered.get("experiment") {
        Some(v) => parse_experiment(v)?,
        None => default,
    };
    let mut cfg = ScenarioConfig::preset(experiment);
    let mut pending = Pending::default();
    for key in KEYS {
        if let Some(v) = layered.get(*key) {
            apply(&mut cfg, &mut pending, key, v)?;
        }
    }
    pending.finish(&mut cfg, layered.contains_key("k_schedule"))?;

    let scale = cli.scale.unwrap_or(1.0);
    if !(scale > 0.0 && scale.is_finite()) {
        return err("scale", format!("must be positive, got {scale}"));
    }
    if scale != 1.0 {
        cfg.n_trajectories = ((cfg.n_trajectories as f64 * scale).round() as usize).max(1);
    }

    cfg.validate().map_err(|e| match e {
        sme_core::Error::Config { key, reason } => ConfigError {
            key: flat_key(&key, &cfg).to_string(),
            reason,
        },
        other => ConfigError {
            key: "<config>".into(),
            reason: other.to_string(),
        },
    })?;
    let flat = flatten(&cfg);
    Ok(ResolvedConfig {
        scenario: cfg,
        flat,
        file_values: file,
        overrides,
        scale,
    })
}

#[derive(Default)]
struct Pending {
    n_osc: Option<usize>,
    n_rot: Option<usize>,
    switch_off_cycle: Option<f64>,
}

impl Pending {
    fn finish(&self, cfg: &mut ScenarioConfig, explicit_schedule: bool) -> Result<(), ConfigError> {
        if self.n_osc.is_some() || self.n_rot.is_some() {
            let auto = cfg.resolved_dims();
            let dims = SubsystemDims::new(self.n_osc.unwrap_or(auto.n_osc), self.n_rot.unwrap_or(auto.n_rot));
            cfg.dims = Some(dims.or_else(|e| {
                let key = if self.n_osc.is_some() && e.to_string().contains("oscillator") {
                    "n_osc"
                } else {
                    "n_rot"
                };
                err(key, e.to_string())
            })?);
        }
        if cfg.experiment == Experiment::Switchoff {
            if explicit_schedule && self.switch_off_cycle.is_some() {
                return err("switch_off_cycle", "give either k_schedule or switch_off_cycle");
            }
            if !explicit_schedule {
                let at = self.switch_off_cycle.unwrap_or(DEFAULT_SWITCH_OFF_CYCLE);
                cfg.k_schedule = vec![(0.0, cfg.physical.meas_rate_k), (at, 0.0)];
            }
        } else if self.switch_off_cycle.is_some() {
            return err("switch_off_cycle", "only used by the switchoff experiment");
        }
        Ok(())
    }
}

fn num(key: &str, v: &Value) -> Result<f64, ConfigError> {
    match v.as_f64() {
        Some(x) if x.is_finite() => Ok(x),
        _ => err(key, format!("expected a number, got {v}")),
    }
}

fn uint(key: &str, v: &Value) -> Result<u64, ConfigError> {
    v.as_u64()
        .map_or_else(|| err(key, format!("expected a nonnegative integer, got {v}")), Ok)
}

fn usize_(key: &str, v: &Value) -> Result<usize, ConfigError> {
    Ok(uint(key, v)? as usize)
}

fn boolean(key: &str, v: &Value) -> Result<bool, ConfigError> {
    v.as_bool().map_or_else(|| err(key, format!("expected true or false, got {v}")), Ok)
}

fn text<'a>(key: &str, v: &'a Value) -> Result<&'a str, ConfigError> {
    v.as_str().map_or_else(|| err(key, format!("expected a string, got {v}")), Ok)
}

fn positive(key: &str, v: &Value) -> Result<f64, ConfigError> {
    let x = num(key, v)?;
    if x > 0.0 {
        Ok(x)
    } else {
        err(key, format!("must be positive, got {x}"))
    }
}

fn list<'a>(key: &str, v: &'a Value) -> Result<&'a Vec<Value>, ConfigError> {
    v.as_array().map_or_else(|| err(key, format!("expected a list, got {v}")), Ok)
}

/// Deserializes a snake_case enum name.
fn enum_value<T: serde::de::DeserializeOwned>(key: &str, v: &Value, allowed: &str) -> Result<T, ConfigError> {
    serde_json::from_value(v.clone()).or_else(|_| err(key, format!("expected one of {allowed}, got {v}")))
}

fn parse_experiment(v: &Value) -> Result<Experiment, ConfigError> {
    let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.name()).collect();
    let s = text("experiment", v)?;
    Experiment::ALL
        .into_iter()
        .find(|e| e.name() == s)
        .map_or_else(|| err("experiment", format!("expected one of {}, got {v}", names.join(", "))), Ok)
}

fn apply(cfg: &mut ScenarioConfig, pending: &mut Pending, key: &str, v: &Value) -> Result<(), ConfigError> {
    let p = &mut cfg.physical;
    match key {
        "name" => {
            let s = text(key, v)?;
            if s.is_empty() || s.contains(['/', '\\']) {
                return err(key, "must be a non-empty file-name-safe string");
            }
            cfg.name = s.to_string();
        }
        "experiment" => {} // chosen before the preset
        "radius_nm" => p.radius = positive(key, v)? / 1e9,
        "density_kg_m3" => p.density = positive(key, v)?,
        "trap_freq_khz" => p.trap_freq = 2.0 * PI * positive(key, v)? * 1e3,
        "temperature_uk" => p.temperature = positive(key, v)? / 1e6,
        "quality_factor" => p.quality = positive(key, v)?,
        "k_over_omega" => {
            let k = num(key, v)?;
            if k < 0.0 {
                return err(key, format!("must be nonnegative, got {k}"));
            }
            p.meas_rate_k = k;
        }
        "meas_efficiency" => {
            let e = num(key, v)?;
            if !(0.0..=1.0).contains(&e) {
                return err(key, format!("must lie in [0, 1], got {e}"));
            }
            p.meas_efficiency = e;
        }
        "bath_enabled" => p.bath_enabled = boolean(key, v)?,
        "n_osc" => pending.n_osc = Some(usize_(key, v)?),
        "n_rot" => pending.n_rot = Some(usize_(key, v)?),
        "scheme" => cfg.scheme = enum_value::<Scheme>(key, v, "rouchon, milstein, euler_maruyama")?,
        "steps_per_cycle" => cfg.steps_per_cycle = usize_(key, v)?,
        "n_cycles" => cfg.n_cycles = usize_(key, v)?,
        "n_trajectories" => cfg.n_trajectories = usize_(key, v)?,
        "seed" => cfg.seed = uint(key, v)?,
        "samples_per_cycle" => cfg.samples_per_cycle = usize_(key, v)?,
        "k_schedule" => {
            let mut out = Vec::new();
            for (i, item) in list(key, v)?.iter().enumerate() {
                let ik = format!("{key}[{i}]");
                match item.as_array().map(Vec::as_slice) {
                    Some([c, k]) => out.push((num(&ik, c)?, num(&ik, k)?)),
                    _ => return err(&ik, format!("expected [start_cycle, k], got {item}")),
                }
            }
            cfg.k_schedule = out;
        }
        "switch_off_cycle" => pending.switch_off_cycle = Some(num(key, v)?),
        "radii_nm" => {
            let radii = list(key, v)?
                .iter()
                .enumerate()
                .map(|(i, x)| positive(&format!("{key}[{i}]"), x))
                .collect::<Result<Vec<_>, _>>()?;
            if !matches!(cfg.experiment, Experiment::RadiusSweep) {
                return err(key, "only used by the radius_sweep experiment");
            }
            cfg.sweep = Some(Sweep::RadiusNm(radii));
        }
        "step_grid" => {
            let grid = list(key, v)?
                .iter()
                .enumerate()
                .map(|(i, x)| usize_(&format!("{key}[{i}]"), x))
                .collect::<Result<Vec<_>, _>>()?;
            if !matches!(cfg.experiment, Experiment::AccuracySweep) {
                return err(key, "only used by the accuracy_sweep experiment");
            }
            cfg.sweep = Some(Sweep::StepsPerCycle(grid));
        }
        "outputs" => {
            let mut set = ObservableSet::none();
            for (i, item) in list(key, v)?.iter().enumerate() {
                match text(&format!("{key}[{i}]"), item)? {
                    "purity" => set.purity = true,
                    "energies" => set.energies = true,
                    "correlations" => set.correlations = true,
                    "edges" => set.edges = true,
                    other => {
                        return err(
                            &format!("{key}[{i}]"),
                            format!("unknown output {other:?}; expected one of {}", OUTPUT_NAMES.join(", ")),
                        )
                    }
                }
            }
            cfg.outputs = set;
        }
        "measurement_model" => {
            cfg.measurement_model = enum_value::<MeasurementModel>(key, v, "combined, separate")?
        }
        "hamiltonian_part" => {
            cfg.hamiltonian_part = enum_value::<HamiltonianPart>(key, v, "propagator, linearized")?
        }
        "hermitize" => cfg.hermitize = boolean(key, v)?,
        "master_equation" => cfg.master_equation = boolean(key, v)?,
        "steady_start_cycle" => cfg.steady_start_cycle = num(key, v)?,
        "reference_steps_per_cycle" => cfg.reference_steps_per_cycle = usize_(key, v)?,
        "workers" => cfg.workers = usize_(key, v)?,
        _ => return err(key, "unknown key"),
    }
    Ok(())
}

/// Maps a validation key of the scenario onto the flat key a user writes.
fn flat_key<'a>(key: &'a str, cfg: &ScenarioConfig) -> &'a str {
    match key {
        "physical.radius" => "radius_nm",
        "physical.density" => "density_kg_m3",
        "physical.trap_freq" => "trap_freq_khz",
        "physical.temperature" => "temperature_uk",
        "physical.quality" => "quality_factor",
        "physical.meas_rate_k" => "k_over_omega",
        "physical.meas_efficiency" => "meas_efficiency",
        "dims" => "n_osc",
        "sweep" => match cfg.experiment {
            Experiment::AccuracySweep => "step_grid",
            _ => "radii_nm",
        },
        other => other,
    }
}

/// The resolved scenario as flat keys, every default materialized.
pub fn flatten(cfg: &ScenarioConfig) -> Map<String, Value> {
    let p = &cfg.physical;
    let dims = cfg.resolved_dims();
    let mut m = Map::new();
    let mut put = |k: &str, v: Value| {
        m.insert(k.to_string(), v);
    };
    put("name", cfg.name.clone().into());
    put("experiment", cfg.experiment.name().into());
    put("radius_nm", (p.radius * 1e9).into());
    put("density_kg_m3", p.density.into());
    put("trap_freq_khz", (p.trap_freq / (2.0 * PI) / 1e3).into());
    put("temperature_uk", (p.temperature * 1e6).into());
    put("quality_factor", p.quality.into());
    put("k_over_omega", p.meas_rate_k.into());
    put("meas_efficiency", p.meas_efficiency.into());
    put("bath_enabled", p.bath_enabled.into());
    put("n_osc", dims.n_osc.into());
    put("n_rot", dims.n_rot.into());
    put("scheme", cfg.scheme.name().into());
    put("steps_per_cycle", cfg.steps_per_cycle.into());
    put("n_cycles", cfg.n_cycles.into());
    put("n_trajectories", cfg.n_trajectories.into());
    put("seed", cfg.seed.into());
    put("samples_per_cycle", cfg.samples_per_cycle.into());
    // A schedule that k_over_omega and switch_off_cycle already describe is
    // left implicit, so that re-running a manifest with a new k still works.
    let k = p.meas_rate_k;
    match cfg.k_schedule.as_slice() {
        [] | [(0.0, _)] if cfg.experiment != Experiment::Switchoff && cfg.k_schedule.iter().all(|s| s.1 == k) => {}
        [(0.0, k0), (at, 0.0)] if cfg.experiment == Experiment::Switchoff && *k0 == k => {
            put("switch_off_cycle", (*at).into())
        }
        s => put(
            "k_schedule",
            s.iter().map(|&(c, k)| serde_json::json!([c, k])).collect::<Vec<_>>().into(),
        ),
    }
    match &cfg.sweep {
        Some(Sweep::RadiusNm(r)) => put("radii_nm", r.clone().into()),
        Some(Sweep::StepsPerCycle(s)) => put("step_grid", s.clone().into()),
        None => {}
    }
    let o = cfg.outputs;
    let outputs: Vec<Value> = OUTPUT_NAMES
        .iter()
        .zip([o.purity, o.energies, o.correlations, o.edges])
        .filter(|(_, on)| *on)
        .map(|(n, _)| (*n).into())
        .collect();
    put("outputs", outputs.into());
    put("measurement_model", serde_json::to_value(cfg.measurement_model).unwrap_or_default());
    put("hamiltonian_part", serde_json::to_value(cfg.hamiltonian_part).unwrap_or_default());
    put("hermitize", cfg.hermitize.into());
    put("master_equation", cfg.master_equation.into());
    put("steady_start_cycle", cfg.steady_start_cycle.into());
    put("reference_steps_per_cycle", cfg.reference_steps_per_cycle.into());
    put("workers", cfg.workers.into());
    m
}
