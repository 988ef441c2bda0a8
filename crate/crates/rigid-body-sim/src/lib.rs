//! Ground-truth generator for the estimation benchmarks.
//!
//! A [`TrajectorySpec`] gives inertial velocity, its analytic derivative, and
//! body angular velocity in closed form; [`step`] integrates the kinematics
//!
//! ```text
//! v̇ = g·e₃ + R·b_a,    Ṙ = R·[ω]ₓ
//! ```
//!
//! with fixed-step RK4 and renormalizes R afterwards. Velocity ground truth is
//! always evaluated analytically (never integrated) so accelerometer
//! consistency is not polluted by integrator error.

use so3_core::{angle_axis, renormalize, skew, Mat3, RotationMatrix, Vec3};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

/// e₃, the inertial up axis used by the gravity term.
pub fn e3() -> Vec3 {
    Vec3::new(0.0, 0.0, 1.0)
}

/// True attitude (body→inertial) and inertial velocity.
#[derive(Debug, Clone, Copy)]
pub struct RigidBodyState {
    pub r: RotationMatrix,
    pub v: Vec3,
}

/// Closed-form flight profile: v_fn, its exact derivative vdot_fn, the body
/// rate omega_fn, and the initial attitude r0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrajectorySpec {
    /// The benchmark profile: three-axis cosine velocity at 0.5/1.25 rad/s
    /// with slow sinusoidal body rates, started from a half-turn about e₂.
    Lissajous,
    /// Constant velocity and constant body rate; v̇ ≡ 0 so r_a = −g·e₃.
    Hover { v0: Vec3, omega: Vec3 },
    /// v̇ = g·e₃, the case where the apparent acceleration vanishes.
    FreeFall,
}

impl TrajectorySpec {
    pub fn v_fn(&self, t: f64) -> Vec3 {
        match self {
            Self::Lissajous => Vec3::new(
                2.0 * (0.5 * t + 0.5).cos(),
                3.75 * (1.25 * t + 0.5).cos(),
                0.5 * (0.5 * t + 0.5).cos(),
            ),
            Self::Hover { v0, .. } => *v0,
            Self::FreeFall => GRAVITY * t * e3(),
        }
    }

    /// Analytic derivative of [`Self::v_fn`].
    pub fn vdot_fn(&self, t: f64) -> Vec3 {
        match self {
            Self::Lissajous => Vec3::new(
                -(0.5 * t + 0.5).sin(),
                -4.6875 * (1.25 * t + 0.5).sin(),
                -0.25 * (0.5 * t + 0.5).sin(),
            ),
            Self::Hover { .. } => Vec3::zeros(),
            Self::FreeFall => GRAVITY * e3(),
        }
    }

    /// Analytic second derivative of [`Self::v_fn`]; used for curvature
    /// bounds on the apparent acceleration.
    pub fn vddot_fn(&self, t: f64) -> Vec3 {
        match self {
            Self::Lissajous => Vec3::new(
                -0.5 * (0.5 * t + 0.5).cos(),
                -5.859375 * (1.25 * t + 0.5).cos(),
                -0.125 * (0.5 * t + 0.5).cos(),
            ),
            Self::Hover { .. } | Self::FreeFall => Vec3::zeros(),
        }
    }

    pub fn omega_fn(&self, t: f64) -> Vec3 {
        match self {
            Self::Lissajous => Vec3::new(
                (0.1 * t + std::f64::consts::PI).sin(),
                0.5 * (0.2 * t).sin(),
                0.1 * (0.3 * t + std::f64::consts::FRAC_PI_3).sin(),
            ),
            Self::Hover { omega, .. } => *omega,
            Self::FreeFall => Vec3::zeros(),
        }
    }

    pub fn r0(&self) -> RotationMatrix {
        match self {
            Self::Lissajous => {
                angle_axis(std::f64::consts::PI, Vec3::new(0.0, 1.0, 0.0)).unwrap()
            }
            Self::Hover { .. } | Self::FreeFall => RotationMatrix::identity(),
        }
    }
}

/// Apparent acceleration r_a(t) = v̇(t) − g·e₃.
pub fn apparent_accel(spec: &TrajectorySpec, t: f64) -> Vec3 {
    spec.vdot_fn(t) - GRAVITY * e3()
}

/// One RK4 step of the kinematics with ω and b_a held constant over the
/// step (zero-order hold), followed by attitude renormalization.
pub fn step(state: &RigidBodyState, omega: Vec3, b_a: Vec3, dt: f64) -> RigidBodyState {
    assert!(dt > 0.0 && dt <= 0.1, "step dt must lie in (0, 0.1], got {dt}");
    let w = skew(omega);
    let deriv = |r: &Mat3, _v: &Vec3| -> (Mat3, Vec3) { (r * w, GRAVITY * e3() + r * b_a) };

    let r0 = *state.r.matrix();
    let v0 = state.v;
    let (kr1, kv1) = deriv(&r0, &v0);
    let (kr2, kv2) = deriv(&(r0 + 0.5 * dt * kr1), &(v0 + 0.5 * dt * kv1));
    let (kr3, kv3) = deriv(&(r0 + 0.5 * dt * kr2), &(v0 + 0.5 * dt * kv2));
    let (kr4, kv4) = deriv(&(r0 + dt * kr3), &(v0 + dt * kv3));

    let r_raw = r0 + (dt / 6.0) * (kr1 + 2.0 * kr2 + 2.0 * kr3 + kr4);
    let v = v0 + (dt / 6.0) * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    let r = renormalize(r_raw).expect("RK4 attitude update left the renormalization radius");
    RigidBodyState { r, v }
}

/// Ground truth at the given sample times: v evaluated analytically, R
/// integrated from r0 via [`step`] with ω held per grid interval.
///
/// The grid must be strictly increasing, start at 0, and keep spacings
/// within [`step`]'s dt domain.
pub fn truth_at(spec: &TrajectorySpec, t_grid: &[f64]) -> Vec<RigidBodyState> {
    assert!(!t_grid.is_empty(), "truth_at needs at least one sample time");
    assert!(t_grid[0] == 0.0, "truth grid must start at t = 0");
    assert!(
        t_grid.windows(2).all(|w| w[1] > w[0]),
        "truth grid must be strictly increasing"
    );

    let mut states = Vec::with_capacity(t_grid.len());
    let mut state = RigidBodyState { r: spec.r0(), v: spec.v_fn(0.0) };
    states.push(state);
    for w in t_grid.windows(2) {
        let (t, dt) = (w[0], w[1] - w[0]);
        let b_a = state.r.transpose() * apparent_accel(spec, t);
        let r = step(&state, spec.omega_fn(t), b_a, dt).r;
        state = RigidBodyState { r, v: spec.v_fn(w[1]) };
        states.push(state);
    }
    states
}
