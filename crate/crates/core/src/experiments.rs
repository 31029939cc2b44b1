//! Canned experiment sets: sensor-configuration comparison and the two
//! surface-feedback studies.

use std::fmt;
use std::str::FromStr;

use crate::sensors::SensorKind::{self, Dvl, Imu, Pressure, SurfaceFix, Usbl};
use crate::sim::ScenarioConfig;

/// Which comparison table to reproduce.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Experiment {
    /// Underwater-only sensor configurations (IMU / +USBL / +DVL / +DVL+USBL).
    T2,
    /// IMU+USBL with surface fixes every 1, 5 or 10 s.
    T3,
    /// IMU only, with and without 30 s surface fixes.
    T4,
}

impl Experiment {
    pub const ALL: [Experiment; 3] = [Experiment::T2, Experiment::T3, Experiment::T4];

    pub fn title(self) -> &'static str {
        match self {
            Experiment::T2 => "MSE for underwater-only pose estimation",
            Experiment::T3 => "Estimate MSE for USBL with surface position measurements",
            Experiment::T4 => "Estimate MSE for IMU with surface position measurements",
        }
    }

    /// Header of the row-label column.
    pub fn row_header(self) -> &'static str {
        match self {
            Experiment::T2 => "Sensor Configuration",
            Experiment::T3 | Experiment::T4 => "Surface feedback period",
        }
    }

    /// Number of pose axes reported (surface fixes carry no attitude).
    pub fn axes(self) -> usize {
        match self {
            Experiment::T2 => 6,
            Experiment::T3 | Experiment::T4 => 3,
        }
    }

    /// Scenario rows derived from `base`. A depth sensor is always on.
    pub fn configs(self, base: &ScenarioConfig) -> Vec<ScenarioConfig> {
        let row = |label: &str, sensors: &[SensorKind], period: Option<f64>| {
            let mut cfg = base.clone();
            cfg.label = label.to_string();
            cfg.sensors = sensors.iter().copied().chain([Pressure]).collect();
            if let Some(p) = period {
                cfg.params.surface_fix.period = p;
            }
            cfg
        };
        match self {
            Experiment::T2 => vec![
                row("IMU", &[Imu], None),
                row("IMU+USBL", &[Imu, Usbl], None),
                row("IMU+DVL", &[Imu, Dvl], None),
                row("IMU+DVL+USBL", &[Imu, Dvl, Usbl], None),
            ],
            Experiment::T3 => vec![
                row("no feedback", &[Imu, Usbl], None),
                row("1 sec", &[Imu, Usbl, SurfaceFix], Some(1.0)),
                row("5 sec", &[Imu, Usbl, SurfaceFix], Some(5.0)),
                row("10 sec", &[Imu, Usbl, SurfaceFix], Some(10.0)),
            ],
            Experiment::T4 => vec![
                row("IMU only", &[Imu], None),
                row("30 sec", &[Imu, SurfaceFix], Some(30.0)),
            ],
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Experiment::T2 => "T2",
            Experiment::T3 => "T3",
            Experiment::T4 => "T4",
        };
        f.write_str(s)
    }
}

impl FromStr for Experiment {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "T2" => Ok(Experiment::T2),
            "T3" => Ok(Experiment::T3),
            "T4" => Ok(Experiment::T4),
            other => Err(format!("unknown table `{other}` (expected T2, T3 or T4)")),
        }
    }
}
