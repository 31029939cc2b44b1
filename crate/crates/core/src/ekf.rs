//! Extended Kalman filter over the 15-element vehicle state, plus the
//! textbook linear Kalman step used to cross-check it.
//!
//! Sensors observe state fields directly, so every measurement model is a
//! selection matrix built from the measurement's mask. Angular components of
//! the innovation are taken along the shortest arc.

use nalgebra::{DMatrix, DVector, SVector};

use crate::error::{Error, Result};
use crate::state::{
    angle_diff, propagate_state, transition_jacobian, StateMatrix, StateVector, STATE_DIM,
};

const SYMMETRY_TOL: f64 = 1e-9;
const PSD_TOL: f64 = 1e-9;

/// Process model `f` and its Jacobian.
pub trait ProcessModel {
    fn propagate(&self, s: &StateVector, dt: f64) -> Result<StateVector>;
    fn jacobian(&self, s: &StateVector, dt: f64) -> Result<StateMatrix>;
}

/// Rigid-body kinematics from [`crate::state`].
#[derive(Clone, Copy, Debug, Default)]
pub struct KinematicModel;

impl ProcessModel for KinematicModel {
    fn propagate(&self, s: &StateVector, dt: f64) -> Result<StateVector> {
        propagate_state(s, dt)
    }

    fn jacobian(&self, s: &StateVector, dt: f64) -> Result<StateMatrix> {
        transition_jacobian(s, dt)
    }
}

/// Diagonal process noise density. Each predict injects `Q·dt`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProcessNoise(SVector<f64, STATE_DIM>);

impl ProcessNoise {
    /// Default diagonal, ordered like [`StateVector`].
    pub const DEFAULT_DIAGONAL: [f64; STATE_DIM] = [
        1e-3, 1e-3, 1e-3, 0.3, 0.3, 0.3, 0.5, 0.5, 0.1, 0.3, 0.3, 0.3, 0.3, 0.3, 0.3,
    ];

    pub fn new(diagonal: [f64; STATE_DIM]) -> Result<Self> {
        for (i, q) in diagonal.iter().enumerate() {
            if !(q.is_finite() && *q >= 0.0) {
                return Err(Error::invalid(
                    format!("filter.process_noise[{i}]"),
                    format!("must be finite and >= 0, got {q}"),
                ));
            }
        }
        Ok(ProcessNoise(SVector::from(diagonal)))
    }

    pub fn zero() -> Self {
        ProcessNoise(SVector::zeros())
    }

    pub fn diagonal(&self) -> [f64; STATE_DIM] {
        self.0.into()
    }

    pub fn matrix(&self) -> StateMatrix {
        StateMatrix::from_diagonal(&self.0)
    }
}

impl Default for ProcessNoise {
    fn default() -> Self {
        ProcessNoise(SVector::from(Self::DEFAULT_DIAGONAL))
    }
}

/// Mahalanobis outlier gate on the innovation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GateConfig {
    pub enabled: bool,
    /// Squared Mahalanobis distance; 13.8 is the 0.997 quantile of χ²(3).
    pub threshold: f64,
}

impl GateConfig {
    pub const DEFAULT_THRESHOLD: f64 = 13.8;

    pub fn disabled() -> Self {
        GateConfig {
            enabled: false,
            threshold: Self::DEFAULT_THRESHOLD,
        }
    }

    pub fn enabled(threshold: f64) -> Result<Self> {
        let gate = GateConfig {
            enabled: true,
            threshold,
        };
        gate.validate()?;
        Ok(gate)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.threshold.is_finite() && self.threshold > 0.0) {
            return Err(Error::invalid(
                "filter.gate_threshold",
                format!("must be > 0, got {}", self.threshold),
            ));
        }
        Ok(())
    }
}

impl Default for GateConfig {
    fn default() -> Self {
        Self::disabled()
    }
}

/// A timestamped direct observation of a subset of the state.
#[derive(Clone, Debug, PartialEq)]
pub struct Measurement {
    pub time: f64,
    pub sensor_id: String,
    pub values: DVector<f64>,
    pub covariance: DMatrix<f64>,
    /// State field observed by each component.
    pub mask: Vec<usize>,
    /// Marks components that are angles.
    pub angular: Vec<bool>,
}

impl Measurement {
    /// Builds a measurement, checking mask and covariance invariants.
    pub fn new(
        time: f64,
        sensor_id: impl Into<String>,
        values: DVector<f64>,
        covariance: DMatrix<f64>,
        mask: Vec<usize>,
        angular: Vec<bool>,
    ) -> Result<Self> {
        let z = Measurement {
            time,
            sensor_id: sensor_id.into(),
            values,
            covariance,
            mask,
            angular,
        };
        z.validate()?;
        Ok(z)
    }

    /// Measurement with diagonal covariance; angular flags follow the mask.
    pub fn diagonal(
        time: f64,
        sensor_id: impl Into<String>,
        mask: &[usize],
        values: &[f64],
        variances: &[f64],
    ) -> Result<Self> {
        let angular = mask.iter().map(|&i| crate::state::idx::is_angle(i)).collect();
        Self::new(
            time,
            sensor_id,
            DVector::from_column_slice(values),
            DMatrix::from_diagonal(&DVector::from_column_slice(variances)),
            mask.to_vec(),
            angular,
        )
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |reason: String| Error::InvalidMeasurement {
            sensor: self.sensor_id.clone(),
            reason,
        };
        let m = self.mask.len();
        if m == 0 {
            return Err(bad("empty mask".into()));
        }
        if self.values.len() != m || self.angular.len() != m {
            return Err(bad(format!(
                "mask has {m} entries but values/angular flags have {}/{}",
                self.values.len(),
                self.angular.len()
            )));
        }
        if self.covariance.shape() != (m, m) {
            return Err(bad(format!(
                "covariance shape {:?}, expected ({m}, {m})",
                self.covariance.shape()
            )));
        }
        let mut seen = [false; STATE_DIM];
        for &i in &self.mask {
            if i >= STATE_DIM {
                return Err(bad(format!("mask index {i} out of range")));
            }
            if seen[i] {
                return Err(bad(format!("duplicate mask index {i}")));
            }
            seen[i] = true;
        }
        if !self.time.is_finite() || self.values.iter().any(|v| !v.is_finite()) {
            return Err(bad("non-finite time or value".into()));
        }
        let asym = max_asymmetry(&self.covariance);
        if asym > SYMMETRY_TOL {
            return Err(bad(format!("covariance asymmetric by {asym:e}")));
        }
        if self.covariance.clone().cholesky().is_none() {
            return Err(bad("covariance is not positive definite".into()));
        }
        Ok(())
    }

    /// Selection matrix `H` (m × 15).
    pub fn observation_matrix(&self) -> DMatrix<f64> {
        let mut h = DMatrix::zeros(self.dim(), STATE_DIM);
        for (row, &col) in self.mask.iter().enumerate() {
            h[(row, col)] = 1.0;
        }
        h
    }
}

/// Filter estimate, covariance and the time they refer to.
#[derive(Clone, Debug, PartialEq)]
pub struct FilterState {
    pub estimate: StateVector,
    pub covariance: StateMatrix,
    pub time: f64,
}

/// Result of a correction step.
#[derive(Clone, Debug)]
pub struct Correction {
    pub state: FilterState,
    pub accepted: bool,
    /// Squared Mahalanobis distance of the innovation, `νᵀ S⁻¹ ν`.
    pub mahalanobis2: f64,
}

fn max_asymmetry<R: nalgebra::Dim, C: nalgebra::Dim, S>(m: &nalgebra::Matrix<f64, R, C, S>) -> f64
where
    S: nalgebra::RawStorage<f64, R, C>,
{
    let (rows, cols) = m.shape();
    let mut worst = 0.0f64;
    for i in 0..rows {
        for j in (i + 1)..cols {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

/// Max |P − Pᵀ| and minimum eigenvalue of a covariance.
pub fn covariance_health(p: &StateMatrix) -> (f64, f64) {
    let asym = max_asymmetry(p);
    let sym = (p + p.transpose()) * 0.5;
    let min_eig = sym.symmetric_eigenvalues().min();
    (asym, min_eig)
}

fn symmetrize(p: &StateMatrix) -> StateMatrix {
    (p + p.transpose()) * 0.5
}

/// Starts a filter; rejects a prior covariance that is asymmetric or indefinite.
pub fn init_filter(x0: StateVector, p0: StateMatrix, t0: f64) -> Result<FilterState> {
    if !x0.is_finite() || p0.iter().any(|v| !v.is_finite()) || !t0.is_finite() {
        return Err(Error::NonFinite {
            context: "init_filter",
        });
    }
    let (asym, min_eig) = covariance_health(&p0);
    if asym > SYMMETRY_TOL {
        return Err(Error::NotSymmetric { asymmetry: asym });
    }
    if min_eig < -PSD_TOL {
        return Err(Error::NotPositiveSemidefinite {
            min_eigenvalue: min_eig,
        });
    }
    let mut estimate = x0;
    estimate.normalize_angles();
    Ok(FilterState {
        estimate,
        covariance: symmetrize(&p0),
        time: t0,
    })
}

/// Time update with the kinematic model.
pub fn predict(fs: &FilterState, dt: f64, q: &ProcessNoise) -> Result<FilterState> {
    predict_with(&KinematicModel, fs, dt, q)
}

/// Time update: `x ← f(x)`, `P ← A·P·Aᵀ + Q·dt`.
pub fn predict_with<M: ProcessModel + ?Sized>(
    model: &M,
    fs: &FilterState,
    dt: f64,
    q: &ProcessNoise,
) -> Result<FilterState> {
    if dt < 0.0 {
        return Err(Error::NegativeTimeStep { dt });
    }
    if dt == 0.0 {
        return Ok(fs.clone());
    }
    let a = model.jacobian(&fs.estimate, dt)?;
    let estimate = model.propagate(&fs.estimate, dt)?;
    let p = a * fs.covariance * a.transpose() + q.matrix() * dt;
    Ok(FilterState {
        estimate,
        covariance: symmetrize(&p),
        time: fs.time + dt,
    })
}

/// Measurement update with optional innovation gating.
///
/// A gated-out measurement leaves the state untouched and reports
/// `accepted = false`.
pub fn correct(fs: &FilterState, z: &Measurement, gate: &GateConfig) -> Result<Correction> {
    z.validate()?;
    if z.time < fs.time {
        return Err(Error::LateMeasurement {
            sensor: z.sensor_id.clone(),
            measurement_time: z.time,
            filter_time: fs.time,
        });
    }

    let m = z.dim();
    let p = &fs.covariance;
    let x = fs.estimate.as_vector();

    let innovation = DVector::from_iterator(
        m,
        z.mask.iter().zip(z.values.iter()).zip(&z.angular).map(
            |((&i, &y), &is_angle)| {
                if is_angle {
                    angle_diff(y, x[i])
                } else {
                    y - x[i]
                }
            },
        ),
    );

    // P·Hᵀ is the masked columns of P; H·P·Hᵀ the masked sub-block.
    let pht = DMatrix::from_fn(STATE_DIM, m, |r, c| p[(r, z.mask[c])]);
    let s = DMatrix::from_fn(m, m, |r, c| p[(z.mask[r], z.mask[c])]) + &z.covariance;

    let chol = s
        .cholesky()
        .ok_or_else(|| Error::SingularInnovation {
            sensor: z.sensor_id.clone(),
        })?;
    let mahalanobis2 = innovation.dot(&chol.solve(&innovation));
    if !mahalanobis2.is_finite() {
        return Err(Error::SingularInnovation {
            sensor: z.sensor_id.clone(),
        });
    }

    if gate.enabled && mahalanobis2 > gate.threshold {
        return Ok(Correction {
            state: fs.clone(),
            accepted: false,
            mahalanobis2,
        });
    }

    // K = P·Hᵀ·S⁻¹, via S·Kᵀ = H·P
    let gain = chol.solve(&pht.transpose()).transpose();

    let dx = &gain * &innovation;
    let mut estimate = *x;
    for i in 0..STATE_DIM {
        estimate[i] += dx[i];
    }

    // (I − K·H)·P; K·H only has nonzero columns at the mask
    let mut kh = StateMatrix::zeros();
    for (c, &col) in z.mask.iter().enumerate() {
        for r in 0..STATE_DIM {
            kh[(r, col)] = gain[(r, c)];
        }
    }
    let covariance = (StateMatrix::identity() - kh) * p;

    let estimate = StateVector::from_vector(estimate);
    if !estimate.is_finite() {
        return Err(Error::NonFinite { context: "correct" });
    }
    Ok(Correction {
        state: FilterState {
            estimate,
            covariance: symmetrize(&covariance),
            time: fs.time,
        },
        accepted: true,
        mahalanobis2,
    })
}

/// One predict + correct of the linear Kalman filter
/// `x' = A·x + B·u + w`, `y = H·x + v`.
#[allow(clippy::too_many_arguments)]
pub fn linear_kf_step(
    x: &DVector<f64>,
    p: &DMatrix<f64>,
    a: &DMatrix<f64>,
    b: &DMatrix<f64>,
    u: &DVector<f64>,
    q: &DMatrix<f64>,
    y: &DVector<f64>,
    h: &DMatrix<f64>,
    r: &DMatrix<f64>,
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let n = x.len();
    let m = y.len();
    let dims_ok = p.shape() == (n, n)
        && a.shape() == (n, n)
        && b.nrows() == n
        && b.ncols() == u.len()
        && q.shape() == (n, n)
        && h.shape() == (m, n)
        && r.shape() == (m, m);
    if !dims_ok {
        return Err(Error::Dimension(format!(
            "state {n}, measurement {m}: A {:?}, B {:?}, u {}, P {:?}, Q {:?}, H {:?}, R {:?}",
            a.shape(),
            b.shape(),
            u.len(),
            p.shape(),
            q.shape(),
            h.shape(),
            r.shape()
        )));
    }

    let x_pred = a * x + b * u;
    let p_pred = a * p * a.transpose() + q;

    let s = h * &p_pred * h.transpose() + r;
    let s_inv = s
        .try_inverse()
        .ok_or_else(|| Error::SingularInnovation {
            sensor: "linear".into(),
        })?;
    let k = &p_pred * h.transpose() * s_inv;
    let x_new = &x_pred + &k * (y - h * &x_pred);
    let p_new = (DMatrix::identity(n, n) - &k * h) * &p_pred;
    Ok((x_new, p_new))
}
