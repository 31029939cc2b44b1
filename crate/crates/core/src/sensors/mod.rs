//! Simulated sensor suite.
//!
//! Every sensor observes state fields directly with additive Gaussian noise.
//! The IMU additionally carries Gauss–Markov biases that the filter does not
//! model, and the USBL can get stuck repeating one fix.

mod dvl;
mod imu;
mod pressure;
mod surface;
mod usbl;

pub use dvl::{sample_dvl, DvlParams, DvlSensor};
pub use imu::{init_bias, sample_imu, step_bias, BiasState, ImuParams, ImuSensor};
pub use pressure::{
    depth_from_pressure, pressure_of_depth, sample_pressure, simulate_pressure, PressureParams,
    PressureSensor,
};
pub use surface::{sample_surface_fix, SurfaceFixParams, SurfaceFixSensor};
pub use usbl::{sample_usbl, StuckState, UsblParams, UsblSensor};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Random source owned by each sensor instance.
pub type SensorRng = ChaCha8Rng;

/// Lower bound on reported measurement variances, so that noise-free
/// sensors still yield a positive-definite `R`.
pub const MIN_VARIANCE: f64 = 1e-12;

/// Sensor kinds, in the order measurements at a common timestamp are fused.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SensorKind {
    Imu,
    Pressure,
    Dvl,
    Usbl,
    SurfaceFix,
}

impl SensorKind {
    pub const ALL: [SensorKind; 5] = [
        SensorKind::Imu,
        SensorKind::Pressure,
        SensorKind::Dvl,
        SensorKind::Usbl,
        SensorKind::SurfaceFix,
    ];

    pub fn id(self) -> &'static str {
        match self {
            SensorKind::Imu => "imu",
            SensorKind::Pressure => "pressure",
            SensorKind::Dvl => "dvl",
            SensorKind::Usbl => "usbl",
            SensorKind::SurfaceFix => "surface_fix",
        }
    }

    /// Independent RNG stream index per sensor kind.
    fn stream(self) -> u64 {
        self as u64 + 1
    }

    pub fn rng(self, seed: u64) -> SensorRng {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(self.stream());
        rng
    }
}

impl std::fmt::Display for SensorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.id())
    }
}

pub(crate) fn gaussian<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> f64 {
    let n: f64 = rng.sample(StandardNormal);
    sigma * n
}

pub(crate) fn variance(sigma: f64) -> f64 {
    (sigma * sigma).max(MIN_VARIANCE)
}

pub(crate) fn check_nonnegative(key: &str, value: f64) -> Result<()> {
    if !(value >= 0.0 && !value.is_nan()) || value == f64::INFINITY {
        return Err(Error::invalid(
            key,
            format!("must be finite and >= 0, got {value}"),
        ));
    }
    Ok(())
}

pub(crate) fn check_positive(key: &str, value: f64) -> Result<()> {
    if value.is_nan() || value <= 0.0 {
        return Err(Error::invalid(key, format!("must be > 0, got {value}")));
    }
    Ok(())
}
