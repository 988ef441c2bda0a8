//! Sensor sampling from rigid-body ground truth.
//!
//! Measurement model (body frame):
//!
//! ```text
//! ω_y = ω + b_ω        gyro, constant bias
//! b_a = Rᵀ r_a         accelerometer (apparent acceleration)
//! b_m = Rᵀ r_m         magnetometer
//! v                    inertial velocity (GPS-class)
//! ```
//!
//! Noise is optional additive zero-mean Gaussian per channel. The noise
//! stream is a pure function of `(seed, t)` so a run is bit-identical however
//! samples are ordered or recomputed; all internal units are radians.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rigid_body_sim::RigidBodyState;
use so3_core::Vec3;

/// Per-channel standard deviations; zero means the channel is exact.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct NoiseStd {
    pub gyro: f64,
    pub accel: f64,
    pub mag: f64,
    pub vel: f64,
}

impl NoiseStd {
    pub fn is_zero(&self) -> bool {
        self.gyro == 0.0 && self.accel == 0.0 && self.mag == 0.0 && self.vel == 0.0
    }
}

/// Sensor installation and disturbance description.
///
/// `b_omega` is the true constant gyro bias in rad/s (any degree-based
/// configuration must convert at parse time); `r_m` is the inertial magnetic
/// field direction and must be nonzero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorConfig {
    pub r_m: Vec3,
    pub b_omega: Vec3,
    pub noise_std: NoiseStd,
    pub seed: u64,
}

impl SensorConfig {
    /// Noise-free configuration with the given field direction and bias.
    pub fn exact(r_m: Vec3, b_omega: Vec3) -> Self {
        Self { r_m, b_omega, noise_std: NoiseStd::default(), seed: 0 }
    }
}

/// One synchronized measurement set at time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SensorFrame {
    pub omega_y: Vec3,
    pub b_a: Vec3,
    pub b_m: Vec3,
    pub v: Vec3,
    pub t: f64,
}

fn normal3(rng: &mut ChaCha8Rng, std: f64) -> Vec3 {
    let n = Vec3::new(
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
        rng.sample(StandardNormal),
    );
    std * n
}

/// Samples the sensor suite against ground truth.
///
/// The per-sample RNG is seeded from `(cfg.seed, t)`, and all four channels
/// draw in a fixed order, so the stream does not depend on call order.
pub fn sample(
    cfg: &SensorConfig,
    truth: &RigidBodyState,
    omega: Vec3,
    r_a: Vec3,
    t: f64,
) -> SensorFrame {
    assert!(cfg.r_m.norm() > 0.0, "magnetic field direction must be nonzero");
    let rt = truth.r.transpose();
    let mut frame = SensorFrame {
        omega_y: omega + cfg.b_omega,
        b_a: rt * r_a,
        b_m: rt * cfg.r_m,
        v: truth.v,
        t,
    };
    if !cfg.noise_std.is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(t.to_bits());
        frame.omega_y += normal3(&mut rng, cfg.noise_std.gyro);
        frame.b_a += normal3(&mut rng, cfg.noise_std.accel);
        frame.b_m += normal3(&mut rng, cfg.noise_std.mag);
        frame.v += normal3(&mut rng, cfg.noise_std.vel);
    }
    frame
}

/// Degrees to radians, the only unit conversion the suite performs.
pub fn deg_to_rad(deg: Vec3) -> Vec3 {
    deg * (std::f64::consts::PI / 180.0)
}
