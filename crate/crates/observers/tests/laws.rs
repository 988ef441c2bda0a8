//! Algebraic identities of the correction terms and end-to-end convergence
//! of the adaptive observer on the reference flight scenario.

use observers::{
    apparent_accel_estimate, error_state, observer_step, sigma_r, GainConfig, ObserverLaw,
    ObserverState,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rigid_body_sim::{apparent_accel, step, RigidBodyState, TrajectorySpec};
use sensor_suite::{deg_to_rad, sample, SensorConfig, SensorFrame};
use so3_core::{angle_axis, psi, skew, Mat3, RotationMatrix, Vec3};

fn random_unit(rng: &mut ChaCha8Rng) -> Vec3 {
    loop {
        let v = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        );
        let n = v.norm();
        if n > 1e-3 && n <= 1.0 {
            return v / n;
        }
    }
}

fn random_rotation(rng: &mut ChaCha8Rng) -> RotationMatrix {
    let axis = random_unit(rng);
    let angle = rng.gen_range(0.0..std::f64::consts::PI);
    angle_axis(angle, axis).unwrap()
}

/// The attitude correction equals the weighted-projection form driven by the
/// attitude error, minus the coupling introduced by the acceleration estimate.
#[test]
fn attitude_correction_matches_error_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..100 {
        let g = GainConfig {
            k_v: rng.gen_range(0.5..3.0),
            k_r: rng.gen_range(0.5..3.0),
            k_b: rng.gen_range(0.5..3.0),
            rho1: rng.gen_range(0.1..2.0),
            rho2: rng.gen_range(0.1..2.0),
            c5: 0.3,
            eps_proj: 0.03,
        };
        let r = random_rotation(&mut rng);
        let r_hat = random_rotation(&mut rng);
        let r_m = rng.gen_range(0.1..2.0) * random_unit(&mut rng);
        let r_a = rng.gen_range(1.0..15.0) * random_unit(&mut rng);
        let v = 3.0 * random_unit(&mut rng);
        let v_hat = v + rng.gen_range(0.0..3.0) * random_unit(&mut rng);

        let frame = SensorFrame {
            omega_y: Vec3::zeros(),
            b_a: r.transpose() * r_a,
            b_m: r.transpose() * r_m,
            v,
            t: 0.0,
        };
        let st = ObserverState {
            v_hat,
            r_hat,
            b_hat: Vec3::zeros(),
        };

        let lhs = sigma_r(&frame, &st, &g, r_m);

        let a = g.rho1 * r_m * r_m.transpose() + g.rho2 * r_a * r_a.transpose();
        let rh_t: Mat3 = st.r_hat.matrix().transpose();
        let r_tilde: Mat3 = r.matrix() * rh_t;
        let ra_tilde = r_a - apparent_accel_estimate(&frame, &st, &g);
        let rhs = 2.0 * (rh_t * psi(a * r_tilde)) - g.rho2 * frame.b_a.cross(&(rh_t * ra_tilde));

        assert!(
            (lhs - rhs).norm() <= 1e-10,
            "correction mismatch {:.3e}",
            (lhs - rhs).norm()
        );
    }
}

/// Along the reference trajectory the combined direction matrix stays
/// positive definite, so the two reference directions never become parallel.
#[test]
fn direction_matrix_positive_definite_on_reference_run() {
    let spec = TrajectorySpec::Lissajous;
    let r_m = Vec3::new(0.18, 0.0, 0.54);
    let dt = 1e-2;
    let mut min_eig = f64::INFINITY;
    for k in 0..=6000 {
        let t = k as f64 * dt;
        let r_a = apparent_accel(&spec, t);
        let a_bar: Mat3 =
            -0.5 * skew(r_m) * skew(r_m) - 0.5 * skew(r_a) * skew(r_a);
        let eigs = a_bar.symmetric_eigen().eigenvalues;
        min_eig = min_eig.min(eigs.min());
    }
    assert!(
        min_eig > 1e-6,
        "direction matrix nearly singular: min eigenvalue {:.3e}",
        min_eig
    );
}

/// From a half-turn attitude error with a constant 5 deg/s gyro bias, the
/// adaptive observer converges on the reference scenario.
#[test]
fn reference_scenario_converges_by_thirty_seconds() {
    let spec = TrajectorySpec::Lissajous;
    let r_m = Vec3::new(0.18, 0.0, 0.54);
    let b_omega = deg_to_rad(Vec3::new(5.0, 5.0, 5.0));
    let cfg = SensorConfig::exact(r_m, b_omega);
    let g = GainConfig::reference();
    let dt = 1e-3;

    let mut truth = RigidBodyState {
        r: spec.r0(),
        v: spec.v_fn(0.0),
    };
    let mut st = ObserverState {
        v_hat: spec.v_fn(0.0),
        r_hat: RotationMatrix::identity(),
        b_hat: Vec3::zeros(),
    };

    let steps = 30_000;
    for k in 0..steps {
        let t = k as f64 * dt;
        let omega = spec.omega_fn(t);
        let r_a = apparent_accel(&spec, t);
        let frame = sample(&cfg, &truth, omega, r_a, t);
        st = observer_step(&frame, &st, &g, r_m, dt, ObserverLaw::BiasAdaptive);
        truth = step(&truth, omega, frame.b_a, dt);
        truth.v = spec.v_fn(t + dt);
    }
    let t_end = steps as f64 * dt;
    let frame = sample(
        &cfg,
        &truth,
        spec.omega_fn(t_end),
        apparent_accel(&spec, t_end),
        t_end,
    );
    let err = error_state(&truth, &st, b_omega, &frame, &g);
    let angle_deg = (2.0 * so3_core::so3_distance(&err.r_tilde).asin()).to_degrees();
    assert!(
        angle_deg < 5.0,
        "attitude error {angle_deg:.3} deg at t = 30"
    );
    assert!(
        err.b_tilde.norm() < 0.01,
        "bias error {:.3e} at t = 30",
        err.b_tilde.norm()
    );
}
