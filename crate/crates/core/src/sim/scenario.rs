use std::collections::BTreeSet;

use nalgebra::Matrix3;

use crate::ekf::{correct, init_filter, predict, FilterState, GateConfig, ProcessNoise};
use crate::error::{Error, Result};
use crate::sensors::{
    DvlParams, DvlSensor, ImuParams, ImuSensor, PressureParams, PressureSensor, SensorKind,
    SurfaceFixParams, SurfaceFixSensor, UsblParams, UsblSensor,
};
use crate::sim::trajectory::RectangleSpec;
use crate::state::{idx, StateMatrix, StateVector, STATE_DIM};

/// Parameters for every sensor, enabled or not.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SensorSuiteParams {
    pub imu: ImuParams,
    pub dvl: DvlParams,
    pub pressure: PressureParams,
    pub usbl: UsblParams,
    pub surface_fix: SurfaceFixParams,
}

impl SensorSuiteParams {
    /// Every noise, bias and fault term zeroed.
    pub fn noiseless() -> Self {
        SensorSuiteParams {
            imu: ImuParams::noiseless(),
            dvl: DvlParams {
                noise_sigma: 0.0,
                ..Default::default()
            },
            pressure: PressureParams {
                noise_sigma: 0.0,
                ..Default::default()
            },
            usbl: UsblParams {
                noise_sigma: 0.0,
                stuck_probability: 0.0,
                ..Default::default()
            },
            surface_fix: SurfaceFixParams {
                noise_sigma: 0.0,
                ..Default::default()
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.imu.validate()?;
        self.dvl.validate()?;
        self.pressure.validate()?;
        self.usbl.validate()?;
        self.surface_fix.validate()
    }
}

/// Sample rates in Hz. Surface fixes use [`SurfaceFixParams::period`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SensorRates {
    pub imu: f64,
    pub dvl: f64,
    pub pressure: f64,
    pub usbl: f64,
}

impl Default for SensorRates {
    fn default() -> Self {
        SensorRates {
            imu: 20.0,
            dvl: 10.0,
            pressure: 10.0,
            usbl: 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterConfig {
    /// Hz
    pub rate: f64,
    pub process_noise: ProcessNoise,
    /// Diagonal of the initial covariance.
    pub initial_covariance: [f64; STATE_DIM],
    pub gate: GateConfig,
}

impl Default for FilterConfig {
    fn default() -> Self {
        FilterConfig {
            rate: 20.0,
            process_noise: ProcessNoise::default(),
            initial_covariance: [1e-9; STATE_DIM],
            gate: GateConfig::disabled(),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioConfig {
    pub label: String,
    pub sensors: BTreeSet<SensorKind>,
    pub params: SensorSuiteParams,
    pub rates: SensorRates,
    pub filter: FilterConfig,
    pub trajectory: RectangleSpec,
    pub seed: u64,
    /// s
    pub duration: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            label: "IMU+DVL+USBL".into(),
            sensors: [
                SensorKind::Imu,
                SensorKind::Pressure,
                SensorKind::Dvl,
                SensorKind::Usbl,
            ]
            .into_iter()
            .collect(),
            params: SensorSuiteParams::default(),
            rates: SensorRates::default(),
            filter: FilterConfig::default(),
            trajectory: RectangleSpec::default(),
            seed: 0,
            duration: 200.0,
        }
    }
}

impl ScenarioConfig {
    /// Default scenario with the given label and sensor set.
    pub fn with_sensors(label: impl Into<String>, sensors: &[SensorKind]) -> Self {
        ScenarioConfig {
            label: label.into(),
            sensors: sensors.iter().copied().collect(),
            ..Default::default()
        }
    }

    pub fn has(&self, kind: SensorKind) -> bool {
        self.sensors.contains(&kind)
    }

    pub fn filter_dt(&self) -> f64 {
        1.0 / self.filter.rate
    }

    pub fn tick_count(&self) -> usize {
        (self.duration * self.filter.rate).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(key, format!("must be > 0, got {v}")))
            }
        };
        positive("filter.rate", self.filter.rate)?;
        positive("experiment.duration", self.duration)?;
        for (i, p0) in self.filter.initial_covariance.iter().enumerate() {
            if !(*p0 >= 0.0 && p0.is_finite()) {
                return Err(Error::invalid(
                    format!("filter.initial_covariance[{i}]"),
                    format!("must be >= 0, got {p0}"),
                ));
            }
        }
        ProcessNoise::new(self.filter.process_noise.diagonal())?;
        self.filter.gate.validate()?;
        self.params.validate()?;

        let clocked = [
            (SensorKind::Imu, "imu.rate", self.rates.imu),
            (SensorKind::Dvl, "dvl.rate", self.rates.dvl),
            (SensorKind::Pressure, "pressure.rate", self.rates.pressure),
        ];
        for (kind, key, rate) in clocked {
            positive(key, rate)?;
            if self.has(kind) && rate > self.filter.rate * (1.0 + 1e-12) {
                return Err(Error::invalid(
                    key,
                    format!("{rate} Hz exceeds the filter rate {} Hz", self.filter.rate),
                ));
            }
        }
        positive("usbl.rate", self.rates.usbl)?;

        let t = &self.trajectory;
        positive("trajectory.speed", t.speed)?;
        positive("trajectory.max_acceleration", t.limits.max_acceleration)?;
        positive("trajectory.max_yaw_rate", t.limits.max_yaw_rate)?;
        if t.hold.is_nan() || t.hold < 0.0 {
            return Err(Error::invalid("trajectory.hold", "must be >= 0"));
        }
        Ok(())
    }
}

/// Filter output at one tick.
#[derive(Clone, Debug, PartialEq)]
pub struct TickRecord {
    pub time: f64,
    pub truth: StateVector,
    pub estimate: StateVector,
    pub covariance_diagonal: [f64; STATE_DIM],
    pub position_covariance: Matrix3<f64>,
}

/// A measurement as delivered to the filter.
#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementRecord {
    pub time: f64,
    pub sensor: SensorKind,
    pub values: Vec<f64>,
    pub accepted: bool,
    pub mahalanobis2: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunLog {
    pub label: String,
    pub seed: u64,
    pub ticks: Vec<TickRecord>,
    pub measurements: Vec<MeasurementRecord>,
}

/// Fires once per `period`, at the first tick at or after each multiple.
struct Schedule {
    period: f64,
    next: u64,
}

impl Schedule {
    fn new(period: f64) -> Self {
        Schedule { period, next: 0 }
    }

    fn due(&mut self, t: f64) -> bool {
        let mut fired = false;
        // tolerance absorbs k·dt rounding against multiples of the period
        while self.next as f64 * self.period <= t + 1e-9 {
            self.next += 1;
            fired = true;
        }
        fired
    }
}

struct Suite {
    imu: Option<(ImuSensor, Schedule)>,
    pressure: Option<(PressureSensor, Schedule)>,
    dvl: Option<(DvlSensor, Schedule)>,
    usbl: Option<(UsblSensor, Schedule)>,
    surface: Option<(SurfaceFixSensor, Schedule)>,
}

/// Simulates truth, sensors and filter at the filter rate.
///
/// Each tick predicts to the tick time, then fuses every measurement that
/// fell due since the previous tick, in [`SensorKind`] order.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunLog> {
    cfg.validate()?;
    let dt = cfg.filter_dt();
    let trajectory = cfg.trajectory.build(dt)?;
    let p = &cfg.params;
    let imu_dt = 1.0 / cfg.rates.imu;

    let mut suite = Suite {
        imu: cfg.has(SensorKind::Imu).then(|| {
            (
                ImuSensor::new(p.imu, SensorKind::Imu.rng(cfg.seed)),
                Schedule::new(imu_dt),
            )
        }),
        pressure: cfg.has(SensorKind::Pressure).then(|| {
            (
                PressureSensor::new(p.pressure, SensorKind::Pressure.rng(cfg.seed)),
                Schedule::new(1.0 / cfg.rates.pressure),
            )
        }),
        dvl: cfg.has(SensorKind::Dvl).then(|| {
            (
                DvlSensor::new(p.dvl, SensorKind::Dvl.rng(cfg.seed)),
                Schedule::new(1.0 / cfg.rates.dvl),
            )
        }),
        usbl: cfg.has(SensorKind::Usbl).then(|| {
            (
                UsblSensor::new(p.usbl, SensorKind::Usbl.rng(cfg.seed)),
                Schedule::new(1.0 / cfg.rates.usbl),
            )
        }),
        surface: cfg.has(SensorKind::SurfaceFix).then(|| {
            (
                SurfaceFixSensor::new(p.surface_fix, SensorKind::SurfaceFix.rng(cfg.seed)),
                Schedule::new(p.surface_fix.period),
            )
        }),
    };

    let n = cfg.tick_count();
    let p0 = StateMatrix::from_diagonal(&cfg.filter.initial_covariance.into());
    let mut fs = init_filter(trajectory.state_at(0), p0, 0.0)?;
    let mut ticks = Vec::with_capacity(n);
    let mut measurements = Vec::new();

    for k in 0..n {
        let t = k as f64 * dt;
        let truth = trajectory.state_at(k);
        if k > 0 {
            fs = predict(&fs, dt, &cfg.filter.process_noise)?;
            fs.time = t;
        }

        let mut due = Vec::with_capacity(5);
        if let Some((s, sched)) = suite.imu.as_mut() {
            if sched.due(t) {
                due.push(s.measure(&truth, t, imu_dt)?);
            }
        }
        if let Some((s, sched)) = suite.pressure.as_mut() {
            if sched.due(t) {
                due.push(s.measure(&truth, t)?);
            }
        }
        if let Some((s, sched)) = suite.dvl.as_mut() {
            if sched.due(t) {
                due.push(s.measure(&truth, t)?);
            }
        }
        if let Some((s, sched)) = suite.usbl.as_mut() {
            if sched.due(t) {
                due.push(s.measure(&truth, t)?);
            }
        }
        if let Some((s, sched)) = suite.surface.as_mut() {
            if sched.due(t) {
                due.push(s.measure(&truth, t)?);
            }
        }

        for z in due {
            let outcome = correct(&fs, &z, &cfg.filter.gate)?;
            fs = outcome.state;
            measurements.push(MeasurementRecord {
                time: z.time,
                sensor: sensor_of(&z.sensor_id),
                values: z.values.iter().copied().collect(),
                accepted: outcome.accepted,
                mahalanobis2: outcome.mahalanobis2,
            });
        }

        ticks.push(tick_record(t, truth, &fs));
    }

    Ok(RunLog {
        label: cfg.label.clone(),
        seed: cfg.seed,
        ticks,
        measurements,
    })
}

fn sensor_of(id: &str) -> SensorKind {
    SensorKind::ALL
        .into_iter()
        .find(|k| k.id() == id)
        .expect("measurements are produced by known sensors")
}

fn tick_record(time: f64, truth: StateVector, fs: &FilterState) -> TickRecord {
    let mut covariance_diagonal = [0.0; STATE_DIM];
    for (i, d) in covariance_diagonal.iter_mut().enumerate() {
        *d = fs.covariance[(i, i)];
    }
    TickRecord {
        time,
        truth,
        estimate: fs.estimate,
        covariance_diagonal,
        position_covariance: fs
            .covariance
            .fixed_view::<3, 3>(idx::POSITION, idx::POSITION)
            .into_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_fires_on_period_multiples() {
        let mut s = Schedule::new(0.1);
        let fired: Vec<usize> = (0..40).filter(|&k| s.due(k as f64 * 0.05)).collect();
        assert_eq!(fired, (0..40).step_by(2).collect::<Vec<_>>());

        let mut s = Schedule::new(1.0);
        let count = (0..200).filter(|&k| s.due(k as f64 * 0.05)).count();
        assert_eq!(count, 10);
    }

    #[test]
    fn tick_count_matches_duration() {
        let cfg = ScenarioConfig {
            duration: 10.0,
            ..Default::default()
        };
        let log = run_scenario(&cfg).unwrap();
        assert_eq!(log.ticks.len(), 200);
        assert!(log.ticks.windows(2).all(|w| w[1].time > w[0].time));
    }

    #[test]
    fn sensor_rate_above_filter_rate_is_rejected() {
        let mut cfg = ScenarioConfig::default();
        cfg.rates.dvl = 40.0;
        let err = cfg.validate().unwrap_err().to_string();
        assert!(err.contains("dvl.rate"), "{err}");
    }

    #[test]
    fn measurements_are_time_ordered() {
        let cfg = ScenarioConfig {
            duration: 20.0,
            ..Default::default()
        };
        let log = run_scenario(&cfg).unwrap();
        assert!(log.measurements.windows(2).all(|w| w[1].time >= w[0].time));
        let usbl = log
            .measurements
            .iter()
            .filter(|m| m.sensor == SensorKind::Usbl)
            .count();
        assert_eq!(usbl, 20);
    }
}
