//! Vehicle state conventions and the rigid-body kinematic process model.
//!
//! The state is a 15-vector ordered
//! `[x y z roll pitch yaw vx vy vz wx wy wz ax ay az]`. Position is in a
//! z-up world frame, orientation is intrinsic Z-Y-X Euler angles, and the
//! velocity, angular velocity and acceleration blocks are expressed in the
//! body frame.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::ops::{Index, IndexMut};

use nalgebra::{Matrix3, SMatrix, SVector, Vector3};

use crate::error::{Error, Result};

pub const STATE_DIM: usize = 15;

pub type StateMatrix = SMatrix<f64, STATE_DIM, STATE_DIM>;

/// Field indices into [`StateVector`].
pub mod idx {
    pub const X: usize = 0;
    pub const Y: usize = 1;
    pub const Z: usize = 2;
    pub const ROLL: usize = 3;
    pub const PITCH: usize = 4;
    pub const YAW: usize = 5;
    pub const VX: usize = 6;
    pub const VY: usize = 7;
    pub const VZ: usize = 8;
    pub const WX: usize = 9;
    pub const WY: usize = 10;
    pub const WZ: usize = 11;
    pub const AX: usize = 12;
    pub const AY: usize = 13;
    pub const AZ: usize = 14;

    pub const POSITION: usize = X;
    pub const ORIENTATION: usize = ROLL;
    pub const LINEAR_VELOCITY: usize = VX;
    pub const ANGULAR_VELOCITY: usize = WX;
    pub const LINEAR_ACCELERATION: usize = AX;

    pub const NAMES: [&str; super::STATE_DIM] = [
        "x", "y", "z", "roll", "pitch", "yaw", "vx", "vy", "vz", "wx", "wy", "wz", "ax", "ay",
        "az",
    ];

    /// True for the three Euler-angle fields.
    pub fn is_angle(i: usize) -> bool {
        (ROLL..=YAW).contains(&i)
    }
}

/// Vehicle state. Angles are kept in (−π, π].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateVector(SVector<f64, STATE_DIM>);

impl Default for StateVector {
    fn default() -> Self {
        Self::zeros()
    }
}

impl StateVector {
    pub fn zeros() -> Self {
        StateVector(SVector::zeros())
    }

    /// Wraps a raw vector, normalizing the Euler angles.
    pub fn from_vector(v: SVector<f64, STATE_DIM>) -> Self {
        let mut s = StateVector(v);
        s.normalize_angles();
        s
    }

    pub fn from_parts(
        position: Vector3<f64>,
        orientation: Vector3<f64>,
        linear_velocity: Vector3<f64>,
        angular_velocity: Vector3<f64>,
        linear_acceleration: Vector3<f64>,
    ) -> Self {
        let mut s = Self::zeros();
        s.set_block(idx::POSITION, &position);
        s.set_block(idx::ORIENTATION, &orientation);
        s.set_block(idx::LINEAR_VELOCITY, &linear_velocity);
        s.set_block(idx::ANGULAR_VELOCITY, &angular_velocity);
        s.set_block(idx::LINEAR_ACCELERATION, &linear_acceleration);
        s.normalize_angles();
        s
    }

    pub fn as_vector(&self) -> &SVector<f64, STATE_DIM> {
        &self.0
    }

    pub fn into_vector(self) -> SVector<f64, STATE_DIM> {
        self.0
    }

    fn block(&self, start: usize) -> Vector3<f64> {
        self.0.fixed_rows::<3>(start).into_owned()
    }

    fn set_block(&mut self, start: usize, v: &Vector3<f64>) {
        self.0.fixed_rows_mut::<3>(start).copy_from(v);
    }

    pub fn position(&self) -> Vector3<f64> {
        self.block(idx::POSITION)
    }

    /// (roll, pitch, yaw)
    pub fn orientation(&self) -> Vector3<f64> {
        self.block(idx::ORIENTATION)
    }

    pub fn linear_velocity(&self) -> Vector3<f64> {
        self.block(idx::LINEAR_VELOCITY)
    }

    pub fn angular_velocity(&self) -> Vector3<f64> {
        self.block(idx::ANGULAR_VELOCITY)
    }

    pub fn linear_acceleration(&self) -> Vector3<f64> {
        self.block(idx::LINEAR_ACCELERATION)
    }

    pub fn set_position(&mut self, v: Vector3<f64>) {
        self.set_block(idx::POSITION, &v);
    }

    pub fn set_orientation(&mut self, v: Vector3<f64>) {
        self.set_block(idx::ORIENTATION, &v);
        self.normalize_angles();
    }

    pub fn set_linear_velocity(&mut self, v: Vector3<f64>) {
        self.set_block(idx::LINEAR_VELOCITY, &v);
    }

    pub fn set_angular_velocity(&mut self, v: Vector3<f64>) {
        self.set_block(idx::ANGULAR_VELOCITY, &v);
    }

    pub fn set_linear_acceleration(&mut self, v: Vector3<f64>) {
        self.set_block(idx::LINEAR_ACCELERATION, &v);
    }

    /// Pose as `[x, y, z, roll, pitch, yaw]`.
    pub fn pose(&self) -> [f64; 6] {
        let v = &self.0;
        [v[0], v[1], v[2], v[3], v[4], v[5]]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub fn normalize_angles(&mut self) {
        for i in idx::ROLL..=idx::YAW {
            self.0[i] = normalize_angle(self.0[i]);
        }
    }
}

impl Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Writes through indexing skip angle normalization; call
/// [`StateVector::normalize_angles`] afterwards when touching angles.
impl IndexMut<usize> for StateVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

/// Orthonormal body-to-world rotation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn body_to_world(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn world_to_body(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0.transpose() * v
    }
}

fn rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(1.0, 0.0, 0.0, 0.0, c, -s, 0.0, s, c)
}

fn rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

fn rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn d_rot_x(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(0.0, 0.0, 0.0, 0.0, -s, -c, 0.0, c, -s)
}

fn d_rot_y(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(-s, 0.0, c, 0.0, 0.0, 0.0, -c, 0.0, -s)
}

fn d_rot_z(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(-s, -c, 0.0, c, -s, 0.0, 0.0, 0.0, 0.0)
}

/// `R = Rz(yaw) · Ry(pitch) · Rx(roll)`.
pub fn rotation_from_euler(rpy: [f64; 3]) -> RotationMatrix {
    let [roll, pitch, yaw] = rpy;
    RotationMatrix(rot_z(yaw) * rot_y(pitch) * rot_x(roll))
}

/// Partial derivatives of the rotation with respect to roll, pitch and yaw.
fn rotation_partials(rpy: [f64; 3]) -> [Matrix3<f64>; 3] {
    let [roll, pitch, yaw] = rpy;
    let (rx, ry, rz) = (rot_x(roll), rot_y(pitch), rot_z(yaw));
    [
        rz * ry * d_rot_x(roll),
        rz * d_rot_y(pitch) * rx,
        d_rot_z(yaw) * ry * rx,
    ]
}

/// Wraps an angle into (−π, π].
pub fn normalize_angle(a: f64) -> f64 {
    let d = a.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if d > PI {
        d - TAU
    } else {
        d
    }
}

/// Signed shortest-arc difference `a ⊖ b`, in (−π, π].
pub fn angle_diff(a: f64, b: f64) -> f64 {
    normalize_angle(a - b)
}

const GIMBAL_MARGIN: f64 = 1e-6;

fn check_gimbal(pitch: f64) -> Result<()> {
    if (pitch.abs() - FRAC_PI_2).abs() < GIMBAL_MARGIN {
        return Err(Error::GimbalLock { pitch });
    }
    Ok(())
}

/// Maps body angular velocity to Euler-angle rates.
fn euler_rate_matrix(roll: f64, pitch: f64) -> Matrix3<f64> {
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let tp = sp / cp;
    Matrix3::new(
        1.0,
        sr * tp,
        cr * tp,
        0.0,
        cr,
        -sr,
        0.0,
        sr / cp,
        cr / cp,
    )
}

/// Constant-acceleration rigid-body kinematics, integrated with one Euler
/// step per call (exact second-order position term).
///
/// Angular velocity and acceleration are held constant across the step.
pub fn propagate_state(s: &StateVector, dt: f64) -> Result<StateVector> {
    if dt < 0.0 {
        return Err(Error::NegativeTimeStep { dt });
    }
    let rpy = s.orientation();
    check_gimbal(rpy[1])?;

    let r = rotation_from_euler([rpy[0], rpy[1], rpy[2]]);
    let v = s.linear_velocity();
    let a = s.linear_acceleration();
    let w = s.angular_velocity();

    let mut out = *s;
    out.set_position(s.position() + r.body_to_world(&(v * dt + a * (0.5 * dt * dt))));
    out.set_linear_velocity(v + a * dt);
    out.set_orientation(rpy + euler_rate_matrix(rpy[0], rpy[1]) * w * dt);

    if !out.is_finite() {
        return Err(Error::NonFinite {
            context: "propagate_state",
        });
    }
    Ok(out)
}

/// Jacobian `∂propagate_state/∂state` at `s`.
pub fn transition_jacobian(s: &StateVector, dt: f64) -> Result<StateMatrix> {
    if dt < 0.0 {
        return Err(Error::NegativeTimeStep { dt });
    }
    let rpy = s.orientation();
    let (roll, pitch, yaw) = (rpy[0], rpy[1], rpy[2]);
    check_gimbal(pitch)?;

    let mut jac = StateMatrix::identity();
    if dt == 0.0 {
        return Ok(jac);
    }

    let r = rotation_from_euler([roll, pitch, yaw]);
    let disp = s.linear_velocity() * dt + s.linear_acceleration() * (0.5 * dt * dt);
    let partials = rotation_partials([roll, pitch, yaw]);

    // position rows
    for (k, dr) in partials.iter().enumerate() {
        let col = dr * disp;
        jac.fixed_view_mut::<3, 1>(idx::POSITION, idx::ORIENTATION + k)
            .copy_from(&col);
    }
    jac.fixed_view_mut::<3, 3>(idx::POSITION, idx::LINEAR_VELOCITY)
        .copy_from(&(r.matrix() * dt));
    jac.fixed_view_mut::<3, 3>(idx::POSITION, idx::LINEAR_ACCELERATION)
        .copy_from(&(r.matrix() * (0.5 * dt * dt)));

    // orientation rows
    let w = s.angular_velocity();
    let (wy, wz) = (w[1], w[2]);
    let (sr, cr) = roll.sin_cos();
    let (sp, cp) = pitch.sin_cos();
    let tp = sp / cp;
    let sec2 = 1.0 / (cp * cp);

    let d_roll = Vector3::new(
        cr * tp * wy - sr * tp * wz,
        -sr * wy - cr * wz,
        (cr * wy - sr * wz) / cp,
    );
    let d_pitch = Vector3::new(
        (sr * wy + cr * wz) * sec2,
        0.0,
        (sr * wy + cr * wz) * sp * sec2,
    );
    let mut rot_block = Matrix3::identity();
    rot_block.set_column(0, &(Vector3::x() + d_roll * dt));
    rot_block.set_column(1, &(Vector3::y() + d_pitch * dt));
    jac.fixed_view_mut::<3, 3>(idx::ORIENTATION, idx::ORIENTATION)
        .copy_from(&rot_block);
    jac.fixed_view_mut::<3, 3>(idx::ORIENTATION, idx::ANGULAR_VELOCITY)
        .copy_from(&(euler_rate_matrix(roll, pitch) * dt));

    // body velocity rows
    jac.fixed_view_mut::<3, 3>(idx::LINEAR_VELOCITY, idx::LINEAR_ACCELERATION)
        .copy_from(&(Matrix3::identity() * dt));

    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    macro_rules! assert_close {
        ($a:expr, $b:expr, $tol:expr) => {{
            let (a, b, tol): (f64, f64, f64) = ($a, $b, $tol);
            assert!((a - b).abs() <= tol, "{} vs {} (tol {})", a, b, tol);
        }};
    }

    #[test]
    fn identity_rotation() {
        let r = rotation_from_euler([0.0, 0.0, 0.0]);
        assert_eq!(*r.matrix(), Matrix3::identity());
    }

    #[test]
    fn quarter_turn_yaw_maps_x_to_y() {
        let r = rotation_from_euler([0.0, 0.0, FRAC_PI_2]);
        let out = r.body_to_world(&Vector3::x());
        assert_close!(out[0], 0.0, 1e-15);
        assert_close!(out[1], 1.0, 1e-15);
        assert_close!(out[2], 0.0, 1e-15);
    }

    #[test]
    fn angle_diff_cases() {
        assert_close!(angle_diff(0.1, 0.05), 0.05, 1e-15);
        assert_close!(angle_diff(PI - 0.01, -PI + 0.01), -0.02, 1e-12);
        assert_close!(angle_diff(0.0, 0.0), 0.0, 0.0);
        assert_eq!(normalize_angle(-PI), PI);
        assert!(normalize_angle(-1e-300) <= PI);
    }

    #[test]
    fn three_pi_wraps_to_pi() {
        // brute force: the unique k with 3π − 2πk in (−π, π]
        let a = 3.0 * PI;
        let k = (-5..=5)
            .find(|&k| {
                let d = a - TAU * k as f64;
                d > -PI && d <= PI + 1e-12
            })
            .unwrap();
        let expected = a - TAU * k as f64;
        let got = angle_diff(a, 0.0);
        assert!(got > -PI && got <= PI);
        assert_close!(got.abs(), expected.abs(), 1e-12);
        assert!(got > 0.0);
    }

    #[test]
    fn zero_motion_is_fixed_point() {
        let mut s = StateVector::zeros();
        s.set_position(Vector3::new(1.0, -2.0, -5.0));
        s.set_orientation(Vector3::new(0.1, -0.2, 2.5));
        for dt in [0.0, 0.05, 3.0] {
            assert_eq!(propagate_state(&s, dt).unwrap(), s);
        }
    }

    #[test]
    fn gimbal_lock_is_rejected() {
        let mut s = StateVector::zeros();
        s[idx::PITCH] = FRAC_PI_2;
        assert!(matches!(propagate_state(&s, 0.05), Err(Error::GimbalLock { .. })));
        assert!(matches!(transition_jacobian(&s, 0.05), Err(Error::GimbalLock { .. })));
        s[idx::PITCH] = -FRAC_PI_2 + 5e-7;
        assert!(propagate_state(&s, 0.05).is_err());
        s[idx::PITCH] = -FRAC_PI_2 + 2e-6;
        assert!(propagate_state(&s, 0.05).is_ok());
    }

    #[test]
    fn negative_dt_is_rejected() {
        let s = StateVector::zeros();
        assert!(matches!(propagate_state(&s, -0.1), Err(Error::NegativeTimeStep { .. })));
    }

    #[test]
    fn zero_step_jacobian_is_identity() {
        let mut s = StateVector::zeros();
        s.set_orientation(Vector3::new(0.3, 0.2, -1.0));
        s.set_linear_velocity(Vector3::new(1.0, 2.0, 3.0));
        assert_eq!(transition_jacobian(&s, 0.0).unwrap(), StateMatrix::identity());
    }

    #[test]
    fn rest_jacobian_position_velocity_block_is_rotation_times_dt() {
        let mut s = StateVector::zeros();
        s.set_orientation(Vector3::new(0.2, -0.1, 0.7));
        let dt = 0.05;
        let jac = transition_jacobian(&s, dt).unwrap();
        let r = rotation_from_euler([0.2, -0.1, 0.7]);
        let block = jac.fixed_view::<3, 3>(idx::POSITION, idx::LINEAR_VELOCITY);
        assert!((block - r.matrix() * dt).abs().max() < 1e-15);
        // at rest nothing couples orientation into position
        let pos_rpy = jac.fixed_view::<3, 3>(idx::POSITION, idx::ORIENTATION);
        assert_eq!(pos_rpy.abs().max(), 0.0);
    }
}
