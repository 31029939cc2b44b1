//! TOML scenario files.
//!
//! Sensor parameters use the simulator's published names verbatim
//! (`"Gyroscope noise density"`, `kPaPerM`, ...); snake_case aliases are also
//! accepted. Unknown keys are rejected. Every section is optional and falls
//! back to the defaults.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::ekf::{GateConfig, ProcessNoise};
use crate::error::{Error, Result};
use crate::sensors::{
    DvlParams, ImuParams, PressureParams, SensorKind, SurfaceFixParams, UsblParams,
};
use crate::sim::{
    FilterConfig, MotionLimits, RectangleSpec, ScenarioConfig, SensorRates, SensorSuiteParams,
};
use crate::state::STATE_DIM;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub label: String,
    pub seed: u64,
    /// Seeds used by comparison runs.
    pub seeds: Vec<u64>,
    /// s
    pub duration: f64,
    /// s between surface fixes
    pub surface_period: f64,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        ExperimentSection {
            label: ScenarioConfig::default().label,
            seed: 0,
            seeds: vec![1, 2, 3, 4, 5],
            duration: 200.0,
            surface_period: SurfaceFixParams::default().period,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub origin: [f64; 2],
    pub length_x: f64,
    pub length_y: f64,
    pub speed: f64,
    pub depth: f64,
    pub hold: f64,
    pub max_acceleration: f64,
    pub max_yaw_rate: f64,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self::from_spec(&RectangleSpec::default())
    }
}

impl TrajectorySection {
    fn from_spec(r: &RectangleSpec) -> Self {
        TrajectorySection {
            origin: r.origin,
            length_x: r.length_x,
            length_y: r.length_y,
            speed: r.speed,
            depth: r.depth,
            hold: r.hold,
            max_acceleration: r.limits.max_acceleration,
            max_yaw_rate: r.limits.max_yaw_rate,
        }
    }

    fn to_spec(&self) -> RectangleSpec {
        RectangleSpec {
            origin: self.origin,
            length_x: self.length_x,
            length_y: self.length_y,
            speed: self.speed,
            depth: self.depth,
            hold: self.hold,
            limits: MotionLimits {
                max_acceleration: self.max_acceleration,
                max_yaw_rate: self.max_yaw_rate,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FilterSection {
    /// Hz
    pub rate: f64,
    pub process_noise: [f64; STATE_DIM],
    pub initial_covariance: [f64; STATE_DIM],
    pub gating: bool,
    pub gate_threshold: f64,
}

impl Default for FilterSection {
    fn default() -> Self {
        let f = FilterConfig::default();
        FilterSection {
            rate: f.rate,
            process_noise: f.process_noise.diagonal(),
            initial_covariance: f.initial_covariance,
            gating: f.gate.enabled,
            gate_threshold: f.gate.threshold,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImuSection {
    pub enabled: bool,
    pub rate: f64,
    #[serde(rename = "Gyroscope noise density", alias = "gyro_noise_density")]
    pub gyro_noise_density: f64,
    #[serde(rename = "Gyroscope random walk", alias = "gyro_random_walk")]
    pub gyro_random_walk: f64,
    #[serde(rename = "Gyroscope bias correlation time", alias = "gyro_bias_corr_time")]
    pub gyro_bias_corr_time: f64,
    #[serde(rename = "Gyroscope turn on bias sigma", alias = "gyro_turn_on_bias_sigma")]
    pub gyro_turn_on_bias_sigma: f64,
    #[serde(rename = "Accelerometer noise density", alias = "accel_noise_density")]
    pub accel_noise_density: f64,
    #[serde(rename = "Accelerometer random walk", alias = "accel_random_walk")]
    pub accel_random_walk: f64,
    #[serde(rename = "Accelerometer bias correlation time", alias = "accel_bias_corr_time")]
    pub accel_bias_corr_time: f64,
    #[serde(rename = "Accelerometer turn on bias sigma", alias = "accel_turn_on_bias_sigma")]
    pub accel_turn_on_bias_sigma: f64,
    #[serde(rename = "Orientation noise sigma", alias = "orientation_noise_sigma")]
    pub orientation_noise_sigma: f64,
}

impl Default for ImuSection {
    fn default() -> Self {
        Self::from_params(true, SensorRates::default().imu, &ImuParams::default())
    }
}

impl ImuSection {
    fn from_params(enabled: bool, rate: f64, p: &ImuParams) -> Self {
        ImuSection {
            enabled,
            rate,
            gyro_noise_density: p.gyro_noise_density,
            gyro_random_walk: p.gyro_random_walk,
            gyro_bias_corr_time: p.gyro_bias_corr_time,
            gyro_turn_on_bias_sigma: p.gyro_turn_on_bias_sigma,
            accel_noise_density: p.accel_noise_density,
            accel_random_walk: p.accel_random_walk,
            accel_bias_corr_time: p.accel_bias_corr_time,
            accel_turn_on_bias_sigma: p.accel_turn_on_bias_sigma,
            orientation_noise_sigma: p.orientation_noise_sigma,
        }
    }

    fn params(&self) -> ImuParams {
        ImuParams {
            gyro_noise_density: self.gyro_noise_density,
            gyro_random_walk: self.gyro_random_walk,
            gyro_bias_corr_time: self.gyro_bias_corr_time,
            gyro_turn_on_bias_sigma: self.gyro_turn_on_bias_sigma,
            accel_noise_density: self.accel_noise_density,
            accel_random_walk: self.accel_random_walk,
            accel_bias_corr_time: self.accel_bias_corr_time,
            accel_turn_on_bias_sigma: self.accel_turn_on_bias_sigma,
            orientation_noise_sigma: self.orientation_noise_sigma,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DvlSection {
    pub enabled: bool,
    pub rate: f64,
    #[serde(rename = "Noise sigma", alias = "noise_sigma")]
    pub noise_sigma: f64,
    #[serde(rename = "Noise amplitude", alias = "noise_amplitude")]
    pub noise_amplitude: f64,
}

impl Default for DvlSection {
    fn default() -> Self {
        let p = DvlParams::default();
        DvlSection {
            enabled: true,
            rate: SensorRates::default().dvl,
            noise_sigma: p.noise_sigma,
            noise_amplitude: p.noise_amplitude,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PressureSection {
    pub enabled: bool,
    pub rate: f64,
    #[serde(rename = "Noise sigma", alias = "noise_sigma")]
    pub noise_sigma: f64,
    #[serde(rename = "Noise amplitude", alias = "noise_amplitude")]
    pub noise_amplitude: f64,
    #[serde(rename = "Standard pressure", alias = "standard_pressure")]
    pub standard_pressure: f64,
    #[serde(rename = "kPaPerM", alias = "kpa_per_m")]
    pub kpa_per_m: f64,
}

impl Default for PressureSection {
    fn default() -> Self {
        let p = PressureParams::default();
        PressureSection {
            enabled: true,
            rate: SensorRates::default().pressure,
            noise_sigma: p.noise_sigma,
            noise_amplitude: p.noise_amplitude,
            standard_pressure: p.standard_pressure,
            kpa_per_m: p.kpa_per_m,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct UsblSection {
    pub enabled: bool,
    pub rate: f64,
    #[serde(rename = "Noise sigma", alias = "noise_sigma")]
    pub noise_sigma: f64,
    #[serde(rename = "Stuck probability", alias = "stuck_probability")]
    pub stuck_probability: f64,
    #[serde(rename = "Stuck duration", alias = "stuck_duration")]
    pub stuck_duration: f64,
}

impl Default for UsblSection {
    fn default() -> Self {
        let p = UsblParams::default();
        UsblSection {
            enabled: true,
            rate: SensorRates::default().usbl,
            noise_sigma: p.noise_sigma,
            stuck_probability: p.stuck_probability,
            stuck_duration: p.stuck_duration,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceFixSection {
    pub enabled: bool,
    #[serde(rename = "Noise sigma", alias = "noise_sigma")]
    pub noise_sigma: f64,
}

impl Default for SurfaceFixSection {
    fn default() -> Self {
        SurfaceFixSection {
            enabled: false,
            noise_sigma: SurfaceFixParams::default().noise_sigma,
        }
    }
}

/// On-disk scenario description.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub experiment: ExperimentSection,
    pub trajectory: TrajectorySection,
    pub filter: FilterSection,
    pub imu: ImuSection,
    pub dvl: DvlSection,
    pub pressure: PressureSection,
    pub usbl: UsblSection,
    pub surface_fix: SurfaceFixSection,
}

impl ConfigFile {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::parse_with_overrides(text, &[])
    }

    /// Parses `text`, applying `section.key=value` overrides first.
    pub fn parse_with_overrides(text: &str, overrides: &[String]) -> Result<Self> {
        let mut table: toml::Table =
            toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        for ov in overrides {
            apply_override(&mut table, ov)?;
        }
        let cfg: ConfigFile = toml::Value::Table(table)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[String]) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse_with_overrides(&text, overrides)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.experiment.seed > i64::MAX as u64 {
            return Err(Error::invalid("experiment.seed", "must fit in a signed 64-bit integer"));
        }
        if self.experiment.seeds.iter().any(|&s| s > i64::MAX as u64) {
            return Err(Error::invalid("experiment.seeds", "must fit in a signed 64-bit integer"));
        }
        ProcessNoise::new(self.filter.process_noise)?;
        self.to_scenario().validate()
    }

    pub fn to_scenario(&self) -> ScenarioConfig {
        let mut sensors = BTreeSet::new();
        for (on, kind) in [
            (self.imu.enabled, SensorKind::Imu),
            (self.pressure.enabled, SensorKind::Pressure),
            (self.dvl.enabled, SensorKind::Dvl),
            (self.usbl.enabled, SensorKind::Usbl),
            (self.surface_fix.enabled, SensorKind::SurfaceFix),
        ] {
            if on {
                sensors.insert(kind);
            }
        }
        let f = &self.filter;
        ScenarioConfig {
            label: self.experiment.label.clone(),
            sensors,
            params: SensorSuiteParams {
                imu: self.imu.params(),
                dvl: DvlParams {
                    noise_sigma: self.dvl.noise_sigma,
                    noise_amplitude: self.dvl.noise_amplitude,
                },
                pressure: PressureParams {
                    noise_sigma: self.pressure.noise_sigma,
                    noise_amplitude: self.pressure.noise_amplitude,
                    standard_pressure: self.pressure.standard_pressure,
                    kpa_per_m: self.pressure.kpa_per_m,
                },
                usbl: UsblParams {
                    noise_sigma: self.usbl.noise_sigma,
                    stuck_probability: self.usbl.stuck_probability,
                    stuck_duration: self.usbl.stuck_duration,
                },
                surface_fix: SurfaceFixParams {
                    noise_sigma: self.surface_fix.noise_sigma,
                    period: self.experiment.surface_period,
                },
            },
            rates: SensorRates {
                imu: self.imu.rate,
                dvl: self.dvl.rate,
                pressure: self.pressure.rate,
                usbl: self.usbl.rate,
            },
            filter: FilterConfig {
                rate: f.rate,
                // range-checked by ScenarioConfig::validate
                process_noise: ProcessNoise::new(f.process_noise)
                    .unwrap_or_else(|_| ProcessNoise::default()),
                initial_covariance: f.initial_covariance,
                gate: GateConfig {
                    enabled: f.gating,
                    threshold: f.gate_threshold,
                },
            },
            trajectory: self.trajectory.to_spec(),
            seed: self.experiment.seed,
            duration: self.experiment.duration,
        }
    }

    /// Inverse of [`ConfigFile::to_scenario`]; `seeds` is carried separately.
    pub fn from_scenario(cfg: &ScenarioConfig, seeds: Vec<u64>) -> Self {
        let p = &cfg.params;
        ConfigFile {
            experiment: ExperimentSection {
                label: cfg.label.clone(),
                seed: cfg.seed,
                seeds,
                duration: cfg.duration,
                surface_period: p.surface_fix.period,
            },
            trajectory: TrajectorySection::from_spec(&cfg.trajectory),
            filter: FilterSection {
                rate: cfg.filter.rate,
                process_noise: cfg.filter.process_noise.diagonal(),
                initial_covariance: cfg.filter.initial_covariance,
                gating: cfg.filter.gate.enabled,
                gate_threshold: cfg.filter.gate.threshold,
            },
            imu: ImuSection::from_params(cfg.has(SensorKind::Imu), cfg.rates.imu, &p.imu),
            dvl: DvlSection {
                enabled: cfg.has(SensorKind::Dvl),
                rate: cfg.rates.dvl,
                noise_sigma: p.dvl.noise_sigma,
                noise_amplitude: p.dvl.noise_amplitude,
            },
            pressure: PressureSection {
                enabled: cfg.has(SensorKind::Pressure),
                rate: cfg.rates.pressure,
                noise_sigma: p.pressure.noise_sigma,
                noise_amplitude: p.pressure.noise_amplitude,
                standard_pressure: p.pressure.standard_pressure,
                kpa_per_m: p.pressure.kpa_per_m,
            },
            usbl: UsblSection {
                enabled: cfg.has(SensorKind::Usbl),
                rate: cfg.rates.usbl,
                noise_sigma: p.usbl.noise_sigma,
                stuck_probability: p.usbl.stuck_probability,
                stuck_duration: p.usbl.stuck_duration,
            },
            surface_fix: SurfaceFixSection {
                enabled: cfg.has(SensorKind::SurfaceFix),
                noise_sigma: p.surface_fix.noise_sigma,
            },
        }
    }
}

/// Applies `section.key=value`. The value is read as a TOML literal, or as a
/// bare string if it does not parse as one.
fn apply_override(table: &mut toml::Table, spec: &str) -> Result<()> {
    let (path, raw) = spec
        .split_once('=')
        .ok_or_else(|| Error::Config(format!("override `{spec}` is not of the form key=value")))?;
    let path = path.trim();
    let raw = raw.trim();
    let (section, key) = path
        .split_once('.')
        .ok_or_else(|| Error::Config(format!("override key `{path}` must be section.key")))?;

    let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()));

    let entry = table
        .entry(section.to_string())
        .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    match entry {
        toml::Value::Table(t) => {
            t.insert(key.to_string(), value);
            Ok(())
        }
        _ => Err(Error::Config(format!("`{section}` is not a section"))),
    }
}
