//! Scripted ground-truth trajectories.
//!
//! Samples are taken on a uniform grid and every motion phase spans a whole
//! number of steps, so acceleration and angular rate are piecewise constant
//! between samples. Each sample stores the acceleration and angular rate that
//! apply until the next sample.

use nalgebra::{Vector2, Vector3};

use crate::error::{Error, Result};
use crate::state::{angle_diff, normalize_angle, StateVector};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Waypoint {
    /// m, world frame. Only x and y are used by the rectangle builder.
    pub position: Vector3<f64>,
    /// m/s cruise speed on the leg leaving this waypoint.
    pub speed: f64,
}

/// Acceleration and turn-rate limits used to shape the speed profile.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MotionLimits {
    /// m/s²
    pub max_acceleration: f64,
    /// rad/s
    pub max_yaw_rate: f64,
}

impl Default for MotionLimits {
    fn default() -> Self {
        MotionLimits {
            max_acceleration: 0.1,
            max_yaw_rate: 0.2,
        }
    }
}

/// Uniformly sampled ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    dt: f64,
    samples: Vec<StateVector>,
}

impl Trajectory {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[StateVector] {
        &self.samples
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }

    /// Time of the last sample.
    pub fn duration(&self) -> f64 {
        self.time(self.samples.len().saturating_sub(1))
    }

    /// Sample `k`; past the end the vehicle rests at the final pose.
    pub fn state_at(&self, k: usize) -> StateVector {
        match self.samples.get(k) {
            Some(s) => *s,
            None => {
                let mut s = *self.samples.last().expect("trajectory is never empty");
                s.set_linear_velocity(Vector3::zeros());
                s.set_angular_velocity(Vector3::zeros());
                s.set_linear_acceleration(Vector3::zeros());
                s
            }
        }
    }
}

#[derive(Clone, Copy, Debug)]
enum Phase {
    Hold {
        position: Vector3<f64>,
        yaw: f64,
        steps: usize,
    },
    Turn {
        position: Vector3<f64>,
        yaw0: f64,
        rate: f64,
        steps: usize,
    },
    Leg {
        start: Vector3<f64>,
        direction: Vector3<f64>,
        yaw: f64,
        cruise: f64,
        accel: f64,
        ramp_steps: usize,
        cruise_steps: usize,
    },
}

impl Phase {
    fn steps(&self) -> usize {
        match *self {
            Phase::Hold { steps, .. } | Phase::Turn { steps, .. } => steps,
            Phase::Leg {
                ramp_steps,
                cruise_steps,
                ..
            } => 2 * ramp_steps + cruise_steps,
        }
    }

    fn sample(&self, j: usize, dt: f64) -> StateVector {
        let pose = |position: Vector3<f64>, yaw: f64| {
            StateVector::from_parts(
                position,
                Vector3::new(0.0, 0.0, yaw),
                Vector3::zeros(),
                Vector3::zeros(),
                Vector3::zeros(),
            )
        };
        match *self {
            Phase::Hold { position, yaw, .. } => pose(position, yaw),
            Phase::Turn {
                position,
                yaw0,
                rate,
                ..
            } => {
                let mut s = pose(position, normalize_angle(yaw0 + rate * j as f64 * dt));
                s.set_angular_velocity(Vector3::new(0.0, 0.0, rate));
                s
            }
            Phase::Leg {
                start,
                direction,
                yaw,
                cruise,
                accel,
                ramp_steps,
                cruise_steps,
            } => {
                let t_ramp = ramp_steps as f64 * dt;
                let t_cruise = cruise_steps as f64 * dt;
                let (dist, speed, acc) = if j < ramp_steps {
                    let tau = j as f64 * dt;
                    (0.5 * accel * tau * tau, accel * tau, accel)
                } else if j < ramp_steps + cruise_steps {
                    let tau = (j - ramp_steps) as f64 * dt;
                    (0.5 * accel * t_ramp * t_ramp + cruise * tau, cruise, 0.0)
                } else {
                    let tau = (j - ramp_steps - cruise_steps) as f64 * dt;
                    (
                        0.5 * accel * t_ramp * t_ramp + cruise * t_cruise + cruise * tau
                            - 0.5 * accel * tau * tau,
                        cruise - accel * tau,
                        -accel,
                    )
                };
                let mut s = pose(start + direction * dist, yaw);
                s.set_linear_velocity(Vector3::new(speed, 0.0, 0.0));
                s.set_linear_acceleration(Vector3::new(acc, 0.0, 0.0));
                s
            }
        }
    }
}

fn turn(position: Vector3<f64>, from: f64, to: f64, dt: f64, limits: &MotionLimits) -> Option<Phase> {
    let delta = angle_diff(to, from);
    if delta == 0.0 {
        return None;
    }
    let steps = (delta.abs() / (limits.max_yaw_rate * dt)).ceil().max(1.0) as usize;
    Some(Phase::Turn {
        position,
        yaw0: from,
        rate: delta / (steps as f64 * dt),
        steps,
    })
}

/// Trapezoidal straight leg. Phase lengths are rounded to whole steps and the
/// cruise speed rescaled so the leg covers its length exactly.
fn leg(start: Vector3<f64>, end: Vector3<f64>, speed: f64, dt: f64, limits: &MotionLimits) -> Phase {
    let delta = end - start;
    let length = delta.norm();
    let direction = delta / length;
    // triangular profile when the leg is too short to reach cruise speed
    let peak = speed.min((length * limits.max_acceleration).sqrt());
    let ramp_steps = (peak / (limits.max_acceleration * dt)).ceil().max(1.0) as usize;
    let ramp_time = ramp_steps as f64 * dt;
    let cruise_steps = ((length / peak - ramp_time) / dt).round().max(0.0) as usize;
    let cruise = length / ((ramp_steps + cruise_steps) as f64 * dt);
    Phase::Leg {
        start,
        direction,
        yaw: direction[1].atan2(direction[0]),
        cruise,
        accel: cruise / ramp_time,
        ramp_steps,
        cruise_steps,
    }
}

fn check_rectangle(corners: &[Waypoint; 4]) -> Result<()> {
    let xy = |w: &Waypoint| Vector2::new(w.position[0], w.position[1]);
    let edges: Vec<Vector2<f64>> = (0..4)
        .map(|i| xy(&corners[(i + 1) % 4]) - xy(&corners[i]))
        .collect();
    for (i, e) in edges.iter().enumerate() {
        if e.norm().is_nan() || e.norm() <= 1e-9 {
            return Err(Error::DegenerateTrajectory(format!("edge {i} has zero length")));
        }
    }
    let scale = edges.iter().map(|e| e.norm()).fold(0.0, f64::max);
    let tol = 1e-6 * scale;
    if (edges[0] + edges[2]).norm() > tol || (edges[1] + edges[3]).norm() > tol {
        return Err(Error::DegenerateTrajectory(
            "opposite edges are not equal and parallel".into(),
        ));
    }
    if edges[0].dot(&edges[1]).abs() > tol * scale {
        return Err(Error::DegenerateTrajectory("adjacent edges are not perpendicular".into()));
    }
    for (i, w) in corners.iter().enumerate() {
        if !(w.speed > 0.0 && w.speed.is_finite()) {
            return Err(Error::invalid(
                format!("trajectory.corner[{i}].speed"),
                format!("must be > 0, got {}", w.speed),
            ));
        }
    }
    Ok(())
}

/// Constant-depth loop around four corners with default motion limits.
pub fn build_rectangle_trajectory(
    corners: &[Waypoint; 4],
    depth: f64,
    dt: f64,
    hold: f64,
) -> Result<Trajectory> {
    build_rectangle_trajectory_with(corners, depth, dt, hold, &MotionLimits::default())
}

/// Holds at the first corner, drives each edge with turn-in-place at the
/// corners, turns back to the initial heading, and holds again.
pub fn build_rectangle_trajectory_with(
    corners: &[Waypoint; 4],
    depth: f64,
    dt: f64,
    hold: f64,
    limits: &MotionLimits,
) -> Result<Trajectory> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::invalid("filter.rate", format!("time step must be > 0, got {dt}")));
    }
    if !(hold >= 0.0 && hold.is_finite()) {
        return Err(Error::invalid("trajectory.hold", format!("must be >= 0, got {hold}")));
    }
    if !depth.is_finite() {
        return Err(Error::invalid("trajectory.depth", "must be finite"));
    }
    if !(limits.max_acceleration > 0.0 && limits.max_yaw_rate > 0.0) {
        return Err(Error::invalid(
            "trajectory.max_acceleration",
            "motion limits must be > 0",
        ));
    }
    check_rectangle(corners)?;

    let at_depth = |w: &Waypoint| Vector3::new(w.position[0], w.position[1], -depth);
    let hold_steps = (hold / dt).round() as usize;

    let mut phases = Vec::new();
    let start = at_depth(&corners[0]);
    let first = leg(start, at_depth(&corners[1]), corners[0].speed, dt, limits);
    let Phase::Leg { yaw: yaw0, .. } = first else {
        unreachable!()
    };
    phases.push(Phase::Hold {
        position: start,
        yaw: yaw0,
        steps: hold_steps,
    });

    let mut heading = yaw0;
    for i in 0..4 {
        let from = at_depth(&corners[i]);
        let to = at_depth(&corners[(i + 1) % 4]);
        let next = leg(from, to, corners[i].speed, dt, limits);
        let Phase::Leg { yaw, .. } = next else {
            unreachable!()
        };
        phases.extend(turn(from, heading, yaw, dt, limits));
        phases.push(next);
        heading = yaw;
    }
    phases.extend(turn(start, heading, yaw0, dt, limits));
    phases.push(Phase::Hold {
        position: start,
        yaw: yaw0,
        steps: hold_steps,
    });

    let mut samples = Vec::with_capacity(phases.iter().map(Phase::steps).sum::<usize>() + 1);
    for phase in &phases {
        samples.extend((0..phase.steps()).map(|j| phase.sample(j, dt)));
    }
    samples.push(Phase::Hold {
        position: start,
        yaw: yaw0,
        steps: 1,
    }
    .sample(0, dt));

    Ok(Trajectory { dt, samples })
}

/// Axis-aligned rectangle description used by scenario configs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RectangleSpec {
    /// m, first corner (x, y)
    pub origin: [f64; 2],
    /// m along world x
    pub length_x: f64,
    /// m along world y
    pub length_y: f64,
    /// m/s
    pub speed: f64,
    /// m below the surface
    pub depth: f64,
    /// s stationary at the start and at the end
    pub hold: f64,
    pub limits: MotionLimits,
}

impl Default for RectangleSpec {
    fn default() -> Self {
        RectangleSpec {
            origin: [0.0, 0.0],
            length_x: 20.0,
            length_y: 10.0,
            speed: 0.5,
            depth: 5.0,
            hold: 10.0,
            limits: MotionLimits::default(),
        }
    }
}

impl RectangleSpec {
    pub fn corners(&self) -> [Waypoint; 4] {
        let [x0, y0] = self.origin;
        let w = |x: f64, y: f64| Waypoint {
            position: Vector3::new(x, y, -self.depth),
            speed: self.speed,
        };
        [
            w(x0, y0),
            w(x0 + self.length_x, y0),
            w(x0 + self.length_x, y0 + self.length_y),
            w(x0, y0 + self.length_y),
        ]
    }

    pub fn build(&self, dt: f64) -> Result<Trajectory> {
        build_rectangle_trajectory_with(&self.corners(), self.depth, dt, self.hold, &self.limits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_length_edge_is_degenerate() {
        let spec = RectangleSpec {
            length_y: 0.0,
            ..Default::default()
        };
        assert!(matches!(spec.build(0.05), Err(Error::DegenerateTrajectory(_))));
    }

    #[test]
    fn skewed_quad_is_rejected() {
        let mut corners = RectangleSpec::default().corners();
        corners[2].position[0] += 3.0;
        assert!(build_rectangle_trajectory(&corners, 5.0, 0.05, 0.0).is_err());
    }

    #[test]
    fn short_leg_uses_triangular_profile() {
        let spec = RectangleSpec {
            length_x: 0.5,
            length_y: 0.5,
            hold: 0.0,
            ..Default::default()
        };
        let traj = spec.build(0.05).unwrap();
        let top = traj
            .samples()
            .iter()
            .map(|s| s.linear_velocity()[0])
            .fold(0.0, f64::max);
        // sqrt(0.5 m * 0.1 m/s²) ≈ 0.224 m/s < 0.5 m/s
        assert!(top < 0.25, "{top}");
        let end = traj.samples().last().unwrap().position();
        assert!(end.xy().norm() < 1e-9);
    }

    #[test]
    fn past_the_end_is_at_rest() {
        let traj = RectangleSpec::default().build(0.05).unwrap();
        let s = traj.state_at(traj.len() + 100);
        assert_eq!(s.position(), traj.samples().last().unwrap().position());
        assert_eq!(s.linear_velocity(), Vector3::zeros());
    }
}
