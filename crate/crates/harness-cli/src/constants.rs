//! Trajectory constants sampled over a run horizon.
//!
//! The gain certificate needs a handful of suprema/infima of the flight
//! profile: an observability margin between the magnetic field and the
//! apparent acceleration, norm bounds on the apparent acceleration and its
//! derivative, the peak body rate, and eigenvalue bounds of the direction
//! matrix Ā(t) = −½[r_m]ₓ² − ½[r_a(t)]ₓ². All of them are evaluated on a
//! uniform grid; refining the grid can only widen the reported ranges.

use rigid_body_sim::{apparent_accel, TrajectorySpec};
use so3_core::{skew, Mat3, Vec3};

/// ‖r_a‖ below this is treated as a vanishing apparent acceleration.
const ACCEL_FLOOR: f64 = 1e-12;
/// Observability sine margin at or below this counts as collinear.
const SINE_FLOOR: f64 = 1e-12;

/// Bounds of one flight profile over a sampled horizon.
///
/// Invariants: `c1 ≤ c2`, all `c*` nonnegative, and `lambda_min_abar > 0`
/// exactly when the observability margin held everywhere on the grid.
/// Violations are reported in-band (first violating grid time) so callers
/// can still read the remaining bounds; the CLI maps them to exit code 2.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryConstants {
    /// inf ‖r_m × r_a‖ / (‖r_m‖‖r_a‖), the observability margin.
    pub c0: f64,
    /// inf ‖r_a‖.
    pub c1: f64,
    /// sup ‖r_a‖.
    pub c2: f64,
    /// sup ‖ṙ_a‖, from the profile's analytic derivative.
    pub c3: f64,
    /// sup ‖ω‖.
    pub c4: f64,
    /// Bias ball radius, passed through from the gain configuration.
    pub c5: f64,
    /// √8·c3 + c2·c_b, the acceleration-error drive bound.
    pub c_a: f64,
    /// 2·c5, the worst-case bias mismatch.
    pub c_b: f64,
    pub lambda_min_abar: f64,
    pub lambda_max_abar: f64,
    /// First grid time where the directions were collinear, if any.
    pub observability_violation: Option<f64>,
    /// First grid time where ‖r_a‖ vanished, if any.
    pub accel_floor_violation: Option<f64>,
}

impl TrajectoryConstants {
    pub fn assumptions_hold(&self) -> bool {
        self.observability_violation.is_none() && self.accel_floor_violation.is_none()
    }
}

/// Samples the profile on `t = 0, grid_dt, …, t_end` and takes the extrema.
///
/// The grid must resolve the horizon: `grid_dt ≤ 1e-3·t_end`. A vanishing
/// apparent acceleration contributes a zero observability margin (its
/// direction is undefined), so a free-fall interval reports both violations.
pub fn extract_constants(
    spec: &TrajectorySpec,
    r_m: Vec3,
    c5: f64,
    grid_dt: f64,
    t_end: f64,
) -> TrajectoryConstants {
    assert!(t_end > 0.0, "constants horizon must be positive, got {t_end}");
    assert!(
        grid_dt > 0.0 && grid_dt <= 1e-3 * t_end,
        "grid_dt must lie in (0, t_end/1000], got {grid_dt} for t_end {t_end}"
    );
    assert!(r_m.norm() > 0.0, "magnetic field direction must be nonzero");
    assert!(c5 >= 0.0, "bias ball radius must be nonnegative, got {c5}");

    let n = (t_end / grid_dt).round() as usize;
    let rm_norm = r_m.norm();
    let km = skew(r_m);
    // −½[r_m]ₓ², the constant magnetometer part of Ā.
    let abar_mag = -0.5 * (km * km);

    let mut c0 = f64::INFINITY;
    let mut c1 = f64::INFINITY;
    let mut c2 = 0.0f64;
    let mut c3 = 0.0f64;
    let mut c4 = 0.0f64;
    let mut lambda_min = f64::INFINITY;
    let mut lambda_max = f64::NEG_INFINITY;
    let mut observability_violation = None;
    let mut accel_floor_violation = None;

    for k in 0..=n {
        let t = k as f64 * grid_dt;
        let r_a = apparent_accel(spec, t);
        let nra = r_a.norm();
        c1 = c1.min(nra);
        c2 = c2.max(nra);
        c3 = c3.max(spec.vddot_fn(t).norm());
        c4 = c4.max(spec.omega_fn(t).norm());

        let sine = if nra <= ACCEL_FLOOR {
            if accel_floor_violation.is_none() {
                accel_floor_violation = Some(t);
            }
            0.0
        } else {
            r_m.cross(&r_a).norm() / (rm_norm * nra)
        };
        if sine <= SINE_FLOOR && observability_violation.is_none() {
            observability_violation = Some(t);
        }
        c0 = c0.min(sine);

        // −½[r_a]ₓ² = ½(‖r_a‖²I − r_a r_aᵀ).
        let abar = abar_mag + 0.5 * (nra * nra * Mat3::identity() - r_a * r_a.transpose());
        let eig = abar.symmetric_eigen().eigenvalues;
        lambda_min = lambda_min.min(eig.min());
        lambda_max = lambda_max.max(eig.max());
    }

    let c_b = 2.0 * c5;
    TrajectoryConstants {
        c0,
        c1,
        c2,
        c3,
        c4,
        c5,
        c_a: 8.0f64.sqrt() * c3 + c2 * c_b,
        c_b,
        lambda_min_abar: lambda_min,
        lambda_max_abar: lambda_max,
        observability_violation,
        accel_floor_violation,
    }
}
