use rand::Rng;

use super::{check_nonnegative, gaussian, variance, SensorKind, SensorRng};
use crate::ekf::Measurement;
use crate::error::Result;
use crate::state::{idx, StateVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DvlParams {
    /// m/s
    pub noise_sigma: f64,
    /// Stored for completeness; has no effect on the simulation.
    pub noise_amplitude: f64,
}

impl Default for DvlParams {
    fn default() -> Self {
        DvlParams {
            noise_sigma: 0.05,
            noise_amplitude: 2.0,
        }
    }
}

impl DvlParams {
    pub fn validate(&self) -> Result<()> {
        check_nonnegative("dvl.Noise sigma", self.noise_sigma)?;
        check_nonnegative("dvl.Noise amplitude", self.noise_amplitude)
    }
}

const DVL_MASK: [usize; 3] = [idx::VX, idx::VY, idx::VZ];

/// Body-frame velocity plus white Gaussian noise.
pub fn sample_dvl<R: Rng + ?Sized>(
    truth: &StateVector,
    p: &DvlParams,
    t: f64,
    rng: &mut R,
) -> Result<Measurement> {
    let v = truth.linear_velocity();
    let values = [
        v[0] + gaussian(rng, p.noise_sigma),
        v[1] + gaussian(rng, p.noise_sigma),
        v[2] + gaussian(rng, p.noise_sigma),
    ];
    let var = variance(p.noise_sigma);
    Measurement::diagonal(t, SensorKind::Dvl.id(), &DVL_MASK, &values, &[var; 3])
}

#[derive(Clone, Debug)]
pub struct DvlSensor {
    pub params: DvlParams,
    rng: SensorRng,
}

impl DvlSensor {
    pub fn new(params: DvlParams, rng: SensorRng) -> Self {
        DvlSensor { params, rng }
    }

    pub fn measure(&mut self, truth: &StateVector, t: f64) -> Result<Measurement> {
        sample_dvl(truth, &self.params, t, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::Vector3;

    #[test]
    fn noiseless_dvl_is_exact() {
        let mut truth = StateVector::zeros();
        truth.set_linear_velocity(Vector3::new(0.5, -0.1, 0.02));
        let p = DvlParams {
            noise_sigma: 0.0,
            ..Default::default()
        };
        let z = sample_dvl(&truth, &p, 0.0, &mut SensorKind::Dvl.rng(0)).unwrap();
        assert_eq!(z.values.as_slice(), &[0.5, -0.1, 0.02]);
        assert_eq!(z.mask, vec![6, 7, 8]);
    }

    #[test]
    fn five_sigma_bound() {
        let mut truth = StateVector::zeros();
        truth.set_linear_velocity(Vector3::new(0.5, 0.0, 0.0));
        let p = DvlParams::default();
        let mut rng = SensorKind::Dvl.rng(99);
        let n = 100_000;
        let outside = (0..n)
            .filter(|_| {
                let z = sample_dvl(&truth, &p, 0.0, &mut rng).unwrap();
                (z.values[0] - 0.5).abs() > 0.25
            })
            .count();
        // P(|N| > 5σ) ≈ 5.7e-7, so 1e5 draws should essentially never exceed it
        assert!(outside as f64 / n as f64 <= 1e-5);
    }

    #[test]
    fn negative_sigma_names_key() {
        let p = DvlParams {
            noise_sigma: -0.1,
            ..Default::default()
        };
        let err = p.validate().unwrap_err().to_string();
        assert!(err.contains("dvl.Noise sigma"), "{err}");
    }
}
