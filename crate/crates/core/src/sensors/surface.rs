use rand::Rng;

use super::{check_nonnegative, check_positive, gaussian, variance, SensorKind, SensorRng};
use crate::ekf::Measurement;
use crate::error::Result;
use crate::state::{idx, StateVector};

/// High-precision position fix available while at (or visible from) the
/// surface, e.g. GPS or an overhead camera.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceFixParams {
    /// m
    pub noise_sigma: f64,
    /// s between fixes
    pub period: f64,
}

impl Default for SurfaceFixParams {
    fn default() -> Self {
        SurfaceFixParams {
            noise_sigma: 0.05,
            period: 1.0,
        }
    }
}

impl SurfaceFixParams {
    pub fn validate(&self) -> Result<()> {
        check_nonnegative("surface_fix.Noise sigma", self.noise_sigma)?;
        check_positive("experiment.surface_period", self.period)
    }
}

pub fn sample_surface_fix<R: Rng + ?Sized>(
    truth: &StateVector,
    p: &SurfaceFixParams,
    t: f64,
    rng: &mut R,
) -> Result<Measurement> {
    let pos = truth.position();
    let values = [
        pos[0] + gaussian(rng, p.noise_sigma),
        pos[1] + gaussian(rng, p.noise_sigma),
        pos[2] + gaussian(rng, p.noise_sigma),
    ];
    let var = variance(p.noise_sigma);
    Measurement::diagonal(
        t,
        SensorKind::SurfaceFix.id(),
        &[idx::X, idx::Y, idx::Z],
        &values,
        &[var; 3],
    )
}

#[derive(Clone, Debug)]
pub struct SurfaceFixSensor {
    pub params: SurfaceFixParams,
    rng: SensorRng,
}

impl SurfaceFixSensor {
    pub fn new(params: SurfaceFixParams, rng: SensorRng) -> Self {
        SurfaceFixSensor { params, rng }
    }

    pub fn measure(&mut self, truth: &StateVector, t: f64) -> Result<Measurement> {
        sample_surface_fix(truth, &self.params, t, &mut self.rng)
    }
}
