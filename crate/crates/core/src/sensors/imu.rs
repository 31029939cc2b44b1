use nalgebra::Vector3;
use rand::Rng;

use super::{check_nonnegative, check_positive, gaussian, variance, SensorKind, SensorRng};
use crate::ekf::Measurement;
use crate::error::Result;
use crate::state::{idx, StateVector};

/// IMU noise model. Defaults are the simulator's gyroscope/accelerometer
/// parameters; `orientation_noise_sigma` covers the attitude output of the
/// 9-DOF unit.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ImuParams {
    /// rad/s/√Hz
    pub gyro_noise_density: f64,
    /// rad/s²/√Hz
    pub gyro_random_walk: f64,
    /// s
    pub gyro_bias_corr_time: f64,
    /// rad/s
    pub gyro_turn_on_bias_sigma: f64,
    /// m/s²/√Hz
    pub accel_noise_density: f64,
    /// m/s³/√Hz
    pub accel_random_walk: f64,
    /// s
    pub accel_bias_corr_time: f64,
    /// m/s²
    pub accel_turn_on_bias_sigma: f64,
    /// rad
    pub orientation_noise_sigma: f64,
}

impl Default for ImuParams {
    fn default() -> Self {
        ImuParams {
            gyro_noise_density: 3.394e-4,
            gyro_random_walk: 3.8785e-5,
            gyro_bias_corr_time: 1000.0,
            gyro_turn_on_bias_sigma: 0.0087,
            accel_noise_density: 0.004,
            accel_random_walk: 0.006,
            accel_bias_corr_time: 300.0,
            accel_turn_on_bias_sigma: 0.1960,
            orientation_noise_sigma: 0.005,
        }
    }
}

impl ImuParams {
    /// All noise and bias terms zeroed.
    pub fn noiseless() -> Self {
        ImuParams {
            gyro_noise_density: 0.0,
            gyro_random_walk: 0.0,
            gyro_turn_on_bias_sigma: 0.0,
            accel_noise_density: 0.0,
            accel_random_walk: 0.0,
            accel_turn_on_bias_sigma: 0.0,
            orientation_noise_sigma: 0.0,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        check_nonnegative("imu.Gyroscope noise density", self.gyro_noise_density)?;
        check_nonnegative("imu.Gyroscope random walk", self.gyro_random_walk)?;
        check_positive("imu.Gyroscope bias correlation time", self.gyro_bias_corr_time)?;
        check_nonnegative("imu.Gyroscope turn on bias sigma", self.gyro_turn_on_bias_sigma)?;
        check_nonnegative("imu.Accelerometer noise density", self.accel_noise_density)?;
        check_nonnegative("imu.Accelerometer random walk", self.accel_random_walk)?;
        check_positive(
            "imu.Accelerometer bias correlation time",
            self.accel_bias_corr_time,
        )?;
        check_nonnegative(
            "imu.Accelerometer turn on bias sigma",
            self.accel_turn_on_bias_sigma,
        )?;
        check_nonnegative("imu.Orientation noise sigma", self.orientation_noise_sigma)?;
        Ok(())
    }
}

/// Current gyroscope and accelerometer biases.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct BiasState {
    /// rad/s
    pub gyro_bias: Vector3<f64>,
    /// m/s²
    pub accel_bias: Vector3<f64>,
}

fn gaussian3<R: Rng + ?Sized>(rng: &mut R, sigma: f64) -> Vector3<f64> {
    Vector3::new(
        gaussian(rng, sigma),
        gaussian(rng, sigma),
        gaussian(rng, sigma),
    )
}

/// Draws turn-on biases from N(0, turn_on_sigma²).
pub fn init_bias<R: Rng + ?Sized>(p: &ImuParams, rng: &mut R) -> BiasState {
    let gyro_bias = gaussian3(rng, p.gyro_turn_on_bias_sigma);
    let accel_bias = gaussian3(rng, p.accel_turn_on_bias_sigma);
    BiasState {
        gyro_bias,
        accel_bias,
    }
}

/// First-order Gauss–Markov step: `b' = exp(−dt/τ)·b + N(0, rw²·dt)`.
pub fn step_bias<R: Rng + ?Sized>(b: &BiasState, p: &ImuParams, dt: f64, rng: &mut R) -> BiasState {
    let gyro_decay = (-dt / p.gyro_bias_corr_time).exp();
    let accel_decay = (-dt / p.accel_bias_corr_time).exp();
    let sqrt_dt = dt.max(0.0).sqrt();
    let gyro_w = gaussian3(rng, p.gyro_random_walk * sqrt_dt);
    let accel_w = gaussian3(rng, p.accel_random_walk * sqrt_dt);
    BiasState {
        gyro_bias: b.gyro_bias * gyro_decay + gyro_w,
        accel_bias: b.accel_bias * accel_decay + accel_w,
    }
}

const IMU_MASK: [usize; 9] = [
    idx::ROLL,
    idx::PITCH,
    idx::YAW,
    idx::WX,
    idx::WY,
    idx::WZ,
    idx::AX,
    idx::AY,
    idx::AZ,
];

/// Orientation, angular rate and (gravity-compensated) body acceleration.
///
/// White-noise densities are converted to per-sample sigmas as
/// `density / √dt`, with `dt` the IMU sample period.
pub fn sample_imu<R: Rng + ?Sized>(
    truth: &StateVector,
    b: &BiasState,
    p: &ImuParams,
    t: f64,
    dt: f64,
    rng: &mut R,
) -> Result<Measurement> {
    let gyro_sigma = p.gyro_noise_density / dt.sqrt();
    let accel_sigma = p.accel_noise_density / dt.sqrt();
    let mut values = [0.0; 9];
    let mut variances = [0.0; 9];
    for k in 0..3 {
        values[k] = truth[idx::ROLL + k] + gaussian(rng, p.orientation_noise_sigma);
        variances[k] = variance(p.orientation_noise_sigma);
    }
    for k in 0..3 {
        values[3 + k] = truth[idx::WX + k] + b.gyro_bias[k] + gaussian(rng, gyro_sigma);
        variances[3 + k] = variance(gyro_sigma);
    }
    for k in 0..3 {
        values[6 + k] = truth[idx::AX + k] + b.accel_bias[k] + gaussian(rng, accel_sigma);
        variances[6 + k] = variance(accel_sigma);
    }
    for v in values.iter_mut().take(3) {
        *v = crate::state::normalize_angle(*v);
    }
    Measurement::diagonal(t, SensorKind::Imu.id(), &IMU_MASK, &values, &variances)
}

/// IMU with its own bias process and random stream.
#[derive(Clone, Debug)]
pub struct ImuSensor {
    pub params: ImuParams,
    bias: BiasState,
    rng: SensorRng,
    last_time: Option<f64>,
}

impl ImuSensor {
    pub fn new(params: ImuParams, mut rng: SensorRng) -> Self {
        let bias = init_bias(&params, &mut rng);
        ImuSensor {
            params,
            bias,
            rng,
            last_time: None,
        }
    }

    pub fn bias(&self) -> &BiasState {
        &self.bias
    }

    /// Advances the bias to `t` and samples. `sample_dt` is the nominal
    /// sample period used for the noise-density conversion.
    pub fn measure(&mut self, truth: &StateVector, t: f64, sample_dt: f64) -> Result<Measurement> {
        if let Some(last) = self.last_time {
            let dt = t - last;
            if dt > 0.0 {
                self.bias = step_bias(&self.bias, &self.params, dt, &mut self.rng);
            }
        }
        self.last_time = Some(t);
        sample_imu(truth, &self.bias, &self.params, t, sample_dt, &mut self.rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sensors::SensorKind;

    #[test]
    fn zero_turn_on_sigma_gives_zero_bias() {
        let mut rng = SensorKind::Imu.rng(3);
        let b = init_bias(&ImuParams::noiseless(), &mut rng);
        assert_eq!(b, BiasState::default());
    }

    #[test]
    fn bias_init_is_deterministic() {
        let p = ImuParams::default();
        let a = init_bias(&p, &mut SensorKind::Imu.rng(11));
        let b = init_bias(&p, &mut SensorKind::Imu.rng(11));
        assert_eq!(a, b);
        let c = init_bias(&p, &mut SensorKind::Imu.rng(12));
        assert_ne!(a, c);
    }

    #[test]
    fn bias_without_random_walk_or_decay_is_constant() {
        let p = ImuParams {
            gyro_random_walk: 0.0,
            accel_random_walk: 0.0,
            gyro_bias_corr_time: f64::INFINITY,
            accel_bias_corr_time: f64::INFINITY,
            ..Default::default()
        };
        let mut rng = SensorKind::Imu.rng(5);
        let b0 = init_bias(&p, &mut rng);
        let mut b = b0;
        for _ in 0..100 {
            b = step_bias(&b, &p, 0.05, &mut rng);
        }
        assert_eq!(b, b0);
    }

    #[test]
    fn bias_decay_factor() {
        let p = ImuParams {
            gyro_random_walk: 0.0,
            accel_random_walk: 0.0,
            ..Default::default()
        };
        let b = BiasState {
            gyro_bias: Vector3::new(1.0, 1.0, 1.0),
            accel_bias: Vector3::new(1.0, 1.0, 1.0),
        };
        let out = step_bias(&b, &p, 0.05, &mut SensorKind::Imu.rng(0));
        // exp(-0.05 / 1000) = exp(-5e-5)
        assert!((out.gyro_bias[0] - 0.999_950_001_249_979).abs() < 1e-12);
        assert!((out.accel_bias[0] - (-0.05f64 / 300.0).exp()).abs() < 1e-15);
    }

    #[test]
    fn noiseless_imu_reports_masked_truth() {
        let mut truth = StateVector::zeros();
        for i in 0..15 {
            truth[i] = 0.1 * (i as f64 + 1.0);
        }
        let z = sample_imu(
            &truth,
            &BiasState::default(),
            &ImuParams::noiseless(),
            2.0,
            0.05,
            &mut SensorKind::Imu.rng(1),
        )
        .unwrap();
        assert_eq!(z.mask, IMU_MASK.to_vec());
        for (k, &i) in z.mask.iter().enumerate() {
            assert_eq!(z.values[k], truth[i]);
        }
        assert_eq!(z.angular, vec![true, true, true, false, false, false, false, false, false]);
        assert_eq!(z.time, 2.0);
    }
}
