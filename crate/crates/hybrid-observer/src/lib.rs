//! Hybrid extension of the adaptive attitude observer.
//!
//! The continuous correction stalls when the attitude estimate is near a
//! half turn away from the truth. A surrogate Φ of the attitude discrepancy,
//! computable from sensor data alone, detects that region; once Φ reaches a
//! threshold δ the estimate is reset by a half turn about whichever basis
//! axis minimizes the post-reset surrogate. Runs produce hybrid arcs indexed
//! by (t, j), where j counts resets and t freezes while a reset happens.

use observers::{
    apparent_accel_estimate, error_state, lyapunov_v, observer_step, ErrorState, GainConfig,
    ObserverLaw, ObserverState,
};
use rigid_body_sim::{apparent_accel, step, RigidBodyState, TrajectorySpec};
use sensor_suite::{sample, SensorConfig, SensorFrame};
use so3_core::{Mat3, RotationMatrix, Vec3};
use thiserror::Error;

/// Relative floor on ‖b_m × b_a‖ below which Φ is not evaluated. The two
/// reference directions span the information Φ uses; nearly parallel
/// directions make the surrogate meaningless, so the observer just flows.
pub const OBSERVABILITY_GUARD: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum HybridError {
    #[error("magnetometer direction is zero")]
    ZeroMagnetometer,
    #[error(
        "reference directions nearly parallel: ‖b_m × b_a‖ = {cross_norm:.3e} < {threshold:.3e}"
    )]
    DegenerateDirections { cross_norm: f64, threshold: f64 },
    #[error("perturbation budget alpha = {alpha} outside (0, 2/7)")]
    InvalidAlpha { alpha: f64 },
    #[error("threshold delta = {delta} outside (3 + 5·alpha/2, 4 − alpha) for alpha = {alpha}")]
    InvalidThreshold { delta: f64, alpha: f64 },
    #[error("jump basis is not orthonormal: deviation {deviation:.3e}")]
    BasisNotOrthonormal { deviation: f64 },
    #[error("livelock: {count} consecutive jumps without flow at t = {t}")]
    Livelock { t: f64, count: u32 },
}

/// Reset policy: threshold δ, surrogate error budget α, and the three
/// orthonormal candidate axes for the half-turn reset.
///
/// Admissibility requires 0 < α < 2/7 and 3 + 5α/2 < δ < 4 − α; inside that
/// range every reset strictly decreases the attitude error whenever the
/// surrogate stays within its budget.
#[derive(Debug, Clone, Copy)]
pub struct HybridConfig {
    delta: f64,
    alpha: f64,
    basis: [Vec3; 3],
}

impl HybridConfig {
    pub fn new(delta: f64, alpha: f64, basis: [Vec3; 3]) -> Result<Self, HybridError> {
        if !(alpha > 0.0 && alpha < 2.0 / 7.0) {
            return Err(HybridError::InvalidAlpha { alpha });
        }
        if !(delta > 3.0 + 2.5 * alpha && delta < 4.0 - alpha) {
            return Err(HybridError::InvalidThreshold { delta, alpha });
        }
        let mut deviation = 0.0f64;
        for i in 0..3 {
            for k in 0..3 {
                let target = if i == k { 1.0 } else { 0.0 };
                deviation = deviation.max((basis[i].dot(&basis[k]) - target).abs());
            }
        }
        if deviation > 1e-9 {
            return Err(HybridError::BasisNotOrthonormal { deviation });
        }
        Ok(Self { delta, alpha, basis })
    }

    /// δ = 3.6, α = 0.1, standard basis.
    pub fn reference() -> Self {
        Self::new(3.6, 0.1, [Vec3::x(), Vec3::y(), Vec3::z()]).unwrap()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn basis(&self) -> [Vec3; 3] {
        self.basis
    }

    /// Largest energy cross-weight μ for which every admissible reset also
    /// decreases the energy function, given the bias ball radius c5.
    pub fn energy_weight(&self, c5: f64) -> f64 {
        assert!(c5 > 0.0, "energy weight needs a positive bias ball radius");
        (self.delta - 2.5 * self.alpha - 3.0) / (24.0 * 2.0 * c5)
    }
}

/// Estimate plus hybrid time: `t` is continuous time, `j` counts resets.
#[derive(Debug, Clone, Copy)]
pub struct HybridObserverState {
    pub base: ObserverState,
    pub j: u32,
    pub t: f64,
}

/// One reset, recorded post-hoc. `phi_after < phi_before` holds for every
/// admissible configuration because the chosen axis minimizes the
/// post-reset surrogate and the three candidates average below 3.
#[derive(Debug, Clone, Copy)]
pub struct JumpEvent {
    pub t: f64,
    pub j_before: u32,
    pub phi_before: f64,
    pub phi_after: f64,
    pub axis: Vec3,
}

fn half_turn(u: Vec3) -> Mat3 {
    2.0 * u * u.transpose() - Mat3::identity()
}

fn phi0_raw(r_hat: &Mat3, b_m: Vec3, b_a: Vec3, r_a: Vec3, r_m: Vec3) -> f64 {
    let bxa = b_m.cross(&b_a);
    let t1 = r_m.dot(&(r_hat * b_m)) / b_m.norm_squared();
    let w2 = r_m.cross(&r_a);
    let t2 = w2.dot(&(r_hat * bxa)) / bxa.norm_squared();
    let w3r = r_m.cross(&w2);
    let w3b = b_m.cross(&bxa);
    let t3 = w3r.dot(&(r_hat * w3b)) / w3b.norm_squared();
    3.0 - t1 - t2 - t3
}

fn check_directions(b_m: Vec3, b_a: Vec3) -> Result<(), HybridError> {
    if b_m.norm_squared() == 0.0 {
        return Err(HybridError::ZeroMagnetometer);
    }
    let cross_norm = b_m.cross(&b_a).norm();
    let threshold = OBSERVABILITY_GUARD * b_m.norm() * b_a.norm();
    if cross_norm < threshold || cross_norm == 0.0 {
        return Err(HybridError::DegenerateDirections {
            cross_norm,
            threshold,
        });
    }
    Ok(())
}

/// Attitude discrepancy surrogate. With noise-free directions and the true
/// apparent acceleration it equals tr(I − R̃) = 4·|R̃|²_I, the full attitude
/// error; with an estimated acceleration it deviates by at most
/// 2‖r̃_a‖/(c₁c₀²) along trajectories with observability margin c₀ and
/// acceleration floor c₁.
pub fn phi0(
    r_hat: &RotationMatrix,
    b_m: Vec3,
    b_a: Vec3,
    r_a: Vec3,
    r_m: Vec3,
) -> Result<f64, HybridError> {
    check_directions(b_m, b_a)?;
    Ok(phi0_raw(r_hat.matrix(), b_m, b_a, r_a, r_m))
}

/// Measured surrogate: [`phi0`] evaluated with the apparent-acceleration
/// estimate k_v(v − v̂) + R̂·b_a, so it is computable in flight.
pub fn phi(
    frame: &SensorFrame,
    st: &ObserverState,
    g: &GainConfig,
    r_m: Vec3,
) -> Result<f64, HybridError> {
    let r_a_est = apparent_accel_estimate(frame, st, g);
    phi0(&st.r_hat, frame.b_m, frame.b_a, r_a_est, r_m)
}

/// Axis whose half-turn reset minimizes the measured surrogate; each
/// candidate is scored with its own apparent-acceleration estimate. Ties
/// resolve to the lowest-index axis.
pub fn select_jump_axis(
    frame: &SensorFrame,
    st: &ObserverState,
    g: &GainConfig,
    r_m: Vec3,
    cfg: &HybridConfig,
) -> Vec3 {
    check_directions(frame.b_m, frame.b_a)
        .expect("jump axis selection needs non-degenerate reference directions");
    let vel_term = g.k_v * (frame.v - st.v_hat);
    let mut best_axis = cfg.basis[0];
    let mut best_phi = f64::INFINITY;
    for u in cfg.basis {
        let cand = half_turn(u / u.norm()) * st.r_hat.matrix();
        let r_a_est = vel_term + cand * frame.b_a;
        let p = phi0_raw(&cand, frame.b_m, frame.b_a, r_a_est, r_m);
        if p < best_phi {
            best_phi = p;
            best_axis = u;
        }
    }
    best_axis
}

/// One hybrid transition. If the measured surrogate is at or above δ the
/// estimate jumps (half-turn reset, `t` frozen, `j` incremented) and the
/// event is reported; otherwise the adaptive observer flows for `dt`.
/// The overlap Φ = δ resolves to a jump.
pub fn hybrid_step(
    hst: &HybridObserverState,
    frame: &SensorFrame,
    g: &GainConfig,
    r_m: Vec3,
    cfg: &HybridConfig,
    dt: f64,
) -> Result<(HybridObserverState, Option<JumpEvent>), HybridError> {
    assert!(
        dt > 0.0 && dt <= 0.1,
        "hybrid_step dt must lie in (0, 0.1], got {dt}"
    );
    let phi_before = phi(frame, &hst.base, g, r_m)?;
    if phi_before >= cfg.delta {
        let axis = select_jump_axis(frame, &hst.base, g, r_m, cfg);
        let flip = RotationMatrix::new(half_turn(axis / axis.norm()))
            .expect("half turn about a unit axis is a rotation");
        let base = ObserverState {
            v_hat: hst.base.v_hat,
            r_hat: flip * hst.base.r_hat,
            b_hat: hst.base.b_hat,
        };
        let phi_after = phi(frame, &base, g, r_m)?;
        let event = JumpEvent {
            t: hst.t,
            j_before: hst.j,
            phi_before,
            phi_after,
            axis,
        };
        Ok((
            HybridObserverState {
                base,
                j: hst.j + 1,
                t: hst.t,
            },
            Some(event),
        ))
    } else {
        let base = observer_step(frame, &hst.base, g, r_m, dt, ObserverLaw::BiasAdaptive);
        Ok((
            HybridObserverState {
                base,
                j: hst.j,
                t: hst.t + dt,
            },
            None,
        ))
    }
}

/// Closed-loop run description: flight profile, sensor model, initial
/// estimate. The truth always starts at the profile's own initial state.
#[derive(Debug, Clone, Copy)]
pub struct Scenario {
    pub spec: TrajectorySpec,
    pub sensors: SensorConfig,
    pub init: ObserverState,
}

/// One telemetry row of a hybrid arc. `phi` is `None` where the
/// observability guard rejected the sample; `v` is the energy function with
/// the reset-dissipating cross-weight.
#[derive(Debug, Clone, Copy)]
pub struct ArcSample {
    pub t: f64,
    pub j: u32,
    pub truth: RigidBodyState,
    pub state: ObserverState,
    pub errors: ErrorState,
    pub phi: Option<f64>,
    pub v: f64,
}

#[derive(Debug)]
pub struct HybridArc {
    pub samples: Vec<ArcSample>,
    pub events: Vec<JumpEvent>,
    pub guard_violations: usize,
}

/// Run the hybrid observer against simulated truth on a fixed grid.
///
/// Each grid instant contributes one row per hybrid state visited there:
/// a jump re-evaluates at the same `t` with `j + 1` before any time passes.
/// Degenerate sensor directions suppress the jump decision for that sample
/// (the observer flows) and are counted in `guard_violations`. More than
/// three jumps without intervening flow abort the run as livelock; with an
/// orthonormal basis the post-jump surrogate always lands strictly below δ,
/// so this valve is purely defensive.
pub fn run_hybrid(
    scenario: &Scenario,
    g: &GainConfig,
    cfg: &HybridConfig,
    t_end: f64,
    dt: f64,
) -> Result<HybridArc, HybridError> {
    assert!(t_end > 0.0, "run_hybrid needs t_end > 0");
    assert!(
        dt > 0.0 && dt <= 0.1,
        "run_hybrid dt must lie in (0, 0.1], got {dt}"
    );
    let n = (t_end / dt).round() as usize;
    assert!(n >= 1, "t_end shorter than one step");
    let r_m = scenario.sensors.r_m;
    let mu = cfg.energy_weight(g.c5);

    let mut truth = RigidBodyState {
        r: scenario.spec.r0(),
        v: scenario.spec.v_fn(0.0),
    };
    let mut hst = HybridObserverState {
        base: scenario.init,
        j: 0,
        t: 0.0,
    };
    let mut samples = Vec::with_capacity(n + 2);
    let mut events = Vec::new();
    let mut guard_violations = 0usize;
    let mut jumps_since_flow = 0u32;

    for k in 0..=n {
        let t = k as f64 * dt;
        hst.t = t;
        let omega = scenario.spec.omega_fn(t);
        let r_a = apparent_accel(&scenario.spec, t);
        let frame = sample(&scenario.sensors, &truth, omega, r_a, t);
        loop {
            let phi_now = phi(&frame, &hst.base, g, r_m).ok();
            let errors = error_state(&truth, &hst.base, scenario.sensors.b_omega, &frame, g);
            let v = lyapunov_v(&errors, &hst.base, g, mu).v;
            samples.push(ArcSample {
                t,
                j: hst.j,
                truth,
                state: hst.base,
                errors,
                phi: phi_now,
                v,
            });
            if k == n {
                break;
            }
            match phi_now {
                Some(p) if p >= cfg.delta => {
                    jumps_since_flow += 1;
                    if jumps_since_flow > 3 {
                        return Err(HybridError::Livelock {
                            t,
                            count: jumps_since_flow,
                        });
                    }
                    let (next, event) = hybrid_step(&hst, &frame, g, r_m, cfg, dt)
                        .expect("directions already validated for this frame");
                    hst = next;
                    events.push(event.expect("surrogate at threshold forces a jump"));
                }
                other => {
                    if other.is_none() {
                        guard_violations += 1;
                    }
                    hst.base =
                        observer_step(&frame, &hst.base, g, r_m, dt, ObserverLaw::BiasAdaptive);
                    hst.t = t + dt;
                    let b_a_true = truth.r.transpose() * r_a;
                    truth = step(&truth, omega, b_a_true, dt);
                    truth.v = scenario.spec.v_fn(t + dt);
                    jumps_since_flow = 0;
                    break;
                }
            }
        }
    }
    Ok(HybridArc {
        samples,
        events,
        guard_violations,
    })
}
