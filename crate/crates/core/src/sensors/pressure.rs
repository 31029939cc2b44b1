use rand::Rng;

use super::{check_nonnegative, check_positive, gaussian, variance, SensorKind, SensorRng};
use crate::ekf::Measurement;
use crate::error::Result;
use crate::state::{idx, StateVector};

/// Pressure transducer. Depth is `−z` in the z-up world frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PressureParams {
    /// kPa
    pub noise_sigma: f64,
    /// Stored for completeness; has no effect on the simulation.
    pub noise_amplitude: f64,
    /// kPa at the surface
    pub standard_pressure: f64,
    /// kPa per meter of depth
    pub kpa_per_m: f64,
}

impl Default for PressureParams {
    fn default() -> Self {
        PressureParams {
            noise_sigma: 3.0,
            noise_amplitude: 0.0,
            standard_pressure: 101.325,
            kpa_per_m: 9.80638,
        }
    }
}

impl PressureParams {
    pub fn validate(&self) -> Result<()> {
        check_nonnegative("pressure.Noise sigma", self.noise_sigma)?;
        check_nonnegative("pressure.Noise amplitude", self.noise_amplitude)?;
        check_nonnegative("pressure.Standard pressure", self.standard_pressure)?;
        check_positive("pressure.kPaPerM", self.kpa_per_m)
    }
}

/// Absolute pressure in kPa at `depth` meters.
pub fn pressure_of_depth(depth: f64, p: &PressureParams) -> f64 {
    p.standard_pressure + p.kpa_per_m * depth
}

/// Inverse of [`pressure_of_depth`].
pub fn depth_from_pressure(pressure: f64, p: &PressureParams) -> f64 {
    (pressure - p.standard_pressure) / p.kpa_per_m
}

/// Noisy absolute pressure reading (kPa) for the true state.
pub fn simulate_pressure<R: Rng + ?Sized>(truth: &StateVector, p: &PressureParams, rng: &mut R) -> f64 {
    pressure_of_depth(-truth[idx::Z], p) + gaussian(rng, p.noise_sigma)
}

/// Pressure reading converted to a z-position measurement.
pub fn sample_pressure<R: Rng + ?Sized>(
    truth: &StateVector,
    p: &PressureParams,
    t: f64,
    rng: &mut R,
) -> Result<Measurement> {
    let pressure = simulate_pressure(truth, p, rng);
    let z = -depth_from_pressure(pressure, p);
    let sigma_m = p.noise_sigma / p.kpa_per_m;
    Measurement::diagonal(
        t,
        SensorKind::Pressure.id(),
        &[idx::Z],
        &[z],
        &[variance(sigma_m)],
    )
}

#[derive(Clone, Debug)]
pub struct PressureSensor {
    pub params: PressureParams,
    rng: SensorRng,
}

impl PressureSensor {
    pub fn new(params: PressureParams, rng: SensorRng) -> Self {
        PressureSensor { params, rng }
    }

    pub fn measure(&mut self, truth: &StateVector, t: f64) -> Result<Measurement> {
        sample_pressure(truth, &self.params, t, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn quiet() -> PressureParams {
        PressureParams {
            noise_sigma: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn surface_reads_standard_pressure() {
        let truth = StateVector::zeros();
        let mut rng = SensorKind::Pressure.rng(0);
        assert_eq!(simulate_pressure(&truth, &quiet(), &mut rng), 101.325);
        let z = sample_pressure(&truth, &quiet(), 0.0, &mut rng).unwrap();
        assert_eq!(z.values[0], 0.0);
        assert_eq!(z.mask, vec![idx::Z]);
    }

    #[test]
    fn one_meter_down() {
        let mut truth = StateVector::zeros();
        truth[idx::Z] = -1.0;
        let mut rng = SensorKind::Pressure.rng(0);
        let kpa = simulate_pressure(&truth, &quiet(), &mut rng);
        assert!((kpa - 111.13138).abs() < 1e-12);
        let z = sample_pressure(&truth, &quiet(), 0.0, &mut rng).unwrap();
        assert!((z.values[0] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn depth_round_trip() {
        let p = PressureParams::default();
        let mut rng = SensorKind::Pressure.rng(7);
        for _ in 0..100 {
            let d: f64 = rng.random_range(0.0..200.0);
            let back = depth_from_pressure(pressure_of_depth(d, &p), &p);
            assert!((back - d).abs() < 1e-12, "{d} -> {back}");
        }
    }

    #[test]
    fn variance_in_meters() {
        let p = PressureParams::default();
        let z = sample_pressure(&StateVector::zeros(), &p, 0.0, &mut SensorKind::Pressure.rng(0))
            .unwrap();
        let expected = (3.0f64 / 9.80638).powi(2);
        assert!((z.covariance[(0, 0)] - expected).abs() < 1e-15);
    }
}
