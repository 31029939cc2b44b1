use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uuvnav::state::{
    angle_diff, idx, propagate_state, rotation_from_euler, transition_jacobian, StateVector,
    STATE_DIM,
};

fn random_state(rng: &mut ChaCha8Rng, max_pitch: f64, max_rate: f64, max_speed: f64) -> StateVector {
    let mut u = |lo: f64, hi: f64| rng.random_range(lo..hi);
    StateVector::from_parts(
        Vector3::new(u(-20.0, 20.0), u(-20.0, 20.0), u(-10.0, 0.0)),
        Vector3::new(u(-PI, PI), u(-max_pitch, max_pitch), u(-PI, PI)),
        Vector3::new(u(-max_speed, max_speed), u(-max_speed, max_speed), u(-max_speed, max_speed)),
        Vector3::new(u(-max_rate, max_rate), u(-max_rate, max_rate), u(-max_rate, max_rate)),
        Vector3::new(u(-0.2, 0.2), u(-0.2, 0.2), u(-0.2, 0.2)),
    )
}

fn component_diff(a: &StateVector, b: &StateVector, i: usize) -> f64 {
    if idx::is_angle(i) {
        angle_diff(a[i], b[i])
    } else {
        a[i] - b[i]
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let h = 1e-6;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let s = random_state(&mut rng, 1.3, 1.0, 2.0);
        for dt in [0.01, 0.05, 0.1] {
            let jac = transition_jacobian(&s, dt).unwrap();
            for j in 0..STATE_DIM {
                let mut plus = *s.as_vector();
                let mut minus = plus;
                plus[j] += h;
                minus[j] -= h;
                let fp = propagate_state(&StateVector::from_vector(plus), dt).unwrap();
                let fm = propagate_state(&StateVector::from_vector(minus), dt).unwrap();
                for i in 0..STATE_DIM {
                    let fd = component_diff(&fp, &fm, i) / (2.0 * h);
                    worst = worst.max((fd - jac[(i, j)]).abs());
                }
            }
        }
    }
    assert!(worst < 1e-5, "max abs error {worst:e}");
}

/// Continuous kinematics with constant body rates and acceleration,
/// integrated with many small Euler steps.
fn fine_integrate(s: &StateVector, dt: f64, substeps: usize) -> StateVector {
    let h = dt / substeps as f64;
    let mut p = s.position();
    let mut rpy = s.orientation();
    let mut v = s.linear_velocity();
    let w = s.angular_velocity();
    let a = s.linear_acceleration();
    for _ in 0..substeps {
        let r = rotation_from_euler([rpy[0], rpy[1], rpy[2]]);
        let (sr, cr) = rpy[0].sin_cos();
        let (sp, cp) = rpy[1].sin_cos();
        let t = Matrix3::new(
            1.0, sr * sp / cp, cr * sp / cp,
            0.0, cr, -sr,
            0.0, sr / cp, cr / cp,
        );
        p += r.matrix() * (v * h + a * (0.5 * h * h));
        rpy += t * w * h;
        v += a * h;
    }
    StateVector::from_parts(p, rpy, v, w, a)
}

#[test]
fn quarter_turn_heading_moves_along_y() {
    let mut s = StateVector::zeros();
    s[idx::YAW] = FRAC_PI_2;
    s[idx::VX] = 1.0;
    let out = propagate_state(&s, 1.0).unwrap();
    let oracle = fine_integrate(&s, 1.0, 1000);
    for (i, want) in [(idx::X, 0.0), (idx::Y, 1.0), (idx::Z, 0.0)] {
        assert!((out[i] - want).abs() < 1e-12);
        assert!((out[i] - oracle[i]).abs() < 1e-12);
    }
}

#[test]
fn single_step_matches_fine_integration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..200 {
        let s = random_state(&mut rng, 1.0, 0.1, 0.2);
        let out = propagate_state(&s, 0.05).unwrap();
        let oracle = fine_integrate(&s, 0.05, 1000);
        for i in 0..STATE_DIM {
            let e = component_diff(&out, &oracle, i).abs();
            assert!(e < 1e-4, "component {} off by {e:e}", idx::NAMES[i]);
        }
    }
}

#[test]
fn two_step_composition_error_is_second_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let max_err = |s: &StateVector, dt: f64| {
        let two = propagate_state(&propagate_state(s, dt).unwrap(), dt).unwrap();
        let oracle = fine_integrate(s, 2.0 * dt, 2000);
        (0..STATE_DIM)
            .map(|i| component_diff(&two, &oracle, i).abs())
            .fold(0.0, f64::max)
    };
    for _ in 0..20 {
        let s = random_state(&mut rng, 1.0, 0.5, 1.0);
        let coarse = max_err(&s, 0.05);
        let fine = max_err(&s, 0.005);
        assert!(coarse < 1e-2, "coarse error {coarse:e}");
        // O(dt²): a 10x smaller step shrinks the error by roughly 100x
        assert!(fine < coarse / 50.0 + 1e-12, "coarse {coarse:e}, fine {fine:e}");
    }
}

#[test]
fn zero_step_is_identity() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = random_state(&mut rng, 1.3, 1.0, 1.0);
    assert_eq!(propagate_state(&s, 0.0).unwrap(), s);
    assert_eq!(
        transition_jacobian(&s, 0.0).unwrap(),
        nalgebra::SMatrix::<f64, STATE_DIM, STATE_DIM>::identity()
    );
}

#[test]
fn rotation_oracle_from_elementary_matrices() {
    let (r, p, y) = (0.1_f64, -0.2_f64, 0.3_f64);
    let rx = Matrix3::new(1.0, 0.0, 0.0, 0.0, r.cos(), -r.sin(), 0.0, r.sin(), r.cos());
    let ry = Matrix3::new(p.cos(), 0.0, p.sin(), 0.0, 1.0, 0.0, -p.sin(), 0.0, p.cos());
    let rz = Matrix3::new(y.cos(), -y.sin(), 0.0, y.sin(), y.cos(), 0.0, 0.0, 0.0, 1.0);
    let got = rotation_from_euler([r, p, y]);
    assert!((got.matrix() - rz * ry * rx).abs().max() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rotations_are_orthonormal(
        roll in -10.0f64..10.0,
        pitch in -10.0f64..10.0,
        yaw in -10.0f64..10.0,
    ) {
        let r = *rotation_from_euler([roll, pitch, yaw]).matrix();
        prop_assert!((r.transpose() * r - Matrix3::identity()).abs().max() < 1e-12);
        prop_assert!((r.determinant() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn propagated_angles_stay_wrapped(
        yaw in -PI..PI,
        roll in -PI..PI,
        pitch in -1.4f64..1.4,
        wz in -5.0f64..5.0,
        dt in 0.0f64..2.0,
    ) {
        let s = StateVector::from_parts(
            Vector3::zeros(),
            Vector3::new(roll, pitch, yaw),
            Vector3::new(1.0, 0.0, 0.0),
            Vector3::new(0.0, 0.0, wz),
            Vector3::zeros(),
        );
        let out = propagate_state(&s, dt).unwrap();
        for i in [idx::ROLL, idx::PITCH, idx::YAW] {
            prop_assert!(out[i] > -PI && out[i] <= PI);
        }
    }

    #[test]
    fn angle_diff_is_shortest_arc(a in -20.0f64..20.0, b in -20.0f64..20.0) {
        let d = angle_diff(a, b);
        prop_assert!(d > -PI && d <= PI);
        let k = ((a - b - d) / std::f64::consts::TAU).round();
        prop_assert!((a - b - d - k * std::f64::consts::TAU).abs() < 1e-9);
    }
}
