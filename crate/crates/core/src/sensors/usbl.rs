use nalgebra::Vector3;
use rand::Rng;

use super::{check_nonnegative, gaussian, variance, SensorKind, SensorRng};
use crate::ekf::Measurement;
use crate::error::{Error, Result};
use crate::state::{idx, StateVector};

/// Acoustic position fix with a stuck-output fault.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UsblParams {
    /// m
    pub noise_sigma: f64,
    /// Chance that a fresh fix latches.
    pub stuck_probability: f64,
    /// s the latched value is repeated for
    pub stuck_duration: f64,
}

impl Default for UsblParams {
    fn default() -> Self {
        UsblParams {
            noise_sigma: 0.5,
            stuck_probability: 0.05,
            stuck_duration: 10.0,
        }
    }
}

impl UsblParams {
    pub fn validate(&self) -> Result<()> {
        check_nonnegative("usbl.Noise sigma", self.noise_sigma)?;
        if !(0.0..=1.0).contains(&self.stuck_probability) {
            return Err(Error::invalid(
                "usbl.Stuck probability",
                format!("must be in [0, 1], got {}", self.stuck_probability),
            ));
        }
        check_nonnegative("usbl.Stuck duration", self.stuck_duration)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Hold {
    until: f64,
    value: Vector3<f64>,
}

/// Whether the USBL is currently repeating a latched fix.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StuckState {
    hold: Option<Hold>,
}

impl StuckState {
    pub fn free() -> Self {
        StuckState { hold: None }
    }

    pub fn stuck(until: f64, value: Vector3<f64>) -> Self {
        StuckState {
            hold: Some(Hold { until, value }),
        }
    }

    pub fn stuck_until(&self) -> Option<f64> {
        self.hold.map(|h| h.until)
    }

    pub fn held_value(&self) -> Option<Vector3<f64>> {
        self.hold.map(|h| h.value)
    }

    pub fn is_stuck_at(&self, t: f64) -> bool {
        self.hold.is_some_and(|h| t < h.until)
    }
}

/// One USBL fix at time `t`.
///
/// While stuck, the held value is returned without consuming randomness.
/// Otherwise a fresh noisy fix is drawn and latches with
/// `stuck_probability`.
pub fn sample_usbl<R: Rng + ?Sized>(
    truth: &StateVector,
    st: &StuckState,
    p: &UsblParams,
    t: f64,
    rng: &mut R,
) -> Result<(Measurement, StuckState)> {
    let var = variance(p.noise_sigma);
    let mask = [idx::X, idx::Y, idx::Z];
    if let Some(hold) = st.hold.filter(|h| t < h.until) {
        let z = Measurement::diagonal(t, SensorKind::Usbl.id(), &mask, hold.value.as_slice(), &[var; 3])?;
        return Ok((z, *st));
    }

    let pos = truth.position();
    let value = Vector3::new(
        pos[0] + gaussian(rng, p.noise_sigma),
        pos[1] + gaussian(rng, p.noise_sigma),
        pos[2] + gaussian(rng, p.noise_sigma),
    );
    let latch = rng.random::<f64>() < p.stuck_probability;
    let next = if latch {
        StuckState::stuck(t + p.stuck_duration, value)
    } else {
        StuckState::free()
    };
    let z = Measurement::diagonal(t, SensorKind::Usbl.id(), &mask, value.as_slice(), &[var; 3])?;
    Ok((z, next))
}

#[derive(Clone, Debug)]
pub struct UsblSensor {
    pub params: UsblParams,
    state: StuckState,
    rng: SensorRng,
}

impl UsblSensor {
    pub fn new(params: UsblParams, rng: SensorRng) -> Self {
        UsblSensor {
            params,
            state: StuckState::free(),
            rng,
        }
    }

    pub fn stuck_state(&self) -> &StuckState {
        &self.state
    }

    pub fn measure(&mut self, truth: &StateVector, t: f64) -> Result<Measurement> {
        let (z, next) = sample_usbl(truth, &self.state, &self.params, t, &mut self.rng)?;
        self.state = next;
        Ok(z)
    }
}
