//! Closed-loop execution of a configured scenario.
//!
//! The hybrid mode delegates to the hybrid runner; the three pure-flow
//! observers share one loop here with identical grid semantics (one row per
//! sample instant, the final sample does not contribute a guard decision),
//! so CSVs from different modes line up row for row when no jumps occur.

use crate::config::{Mode, ScenarioConfig};
use crate::telemetry::TelemetryRow;
use crate::HarnessError;
use hybrid_observer::{phi, run_hybrid, JumpEvent};
use observers::{error_state, lyapunov_v, observer_step, ErrorState, ObserverLaw};
use rigid_body_sim::{apparent_accel, step, RigidBodyState};
use sensor_suite::sample;

/// Aggregates the caller usually wants without re-scanning the rows.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub mode: Mode,
    pub rows: usize,
    pub jump_events: Vec<JumpEvent>,
    pub guard_violations: usize,
    /// Earliest time from which the attitude error stays below 1° for the
    /// rest of the run; `None` if the final sample is still at or above 1°.
    pub time_to_one_degree: Option<f64>,
    pub final_attitude_error_deg: f64,
    pub final_bias_error_norm: f64,
    pub final_accel_error_norm: f64,
}

#[derive(Debug)]
pub struct RunOutput {
    pub rows: Vec<TelemetryRow>,
    pub summary: RunSummary,
}

fn row_from(t: f64, j: u32, err: &ErrorState, phi: Option<f64>, v: f64, jump: bool) -> TelemetryRow {
    let d = so3_core::so3_distance(&err.r_tilde);
    TelemetryRow {
        t,
        j,
        attitude_error_deg: (2.0 * d.asin()).to_degrees(),
        dist_ri: d,
        btilde: err.b_tilde,
        ratilde_norm: err.r_a_tilde.norm(),
        phi: phi.unwrap_or(f64::NAN),
        v,
        jump_flag: jump,
    }
}

fn summarize(
    mode: Mode,
    rows: &[TelemetryRow],
    jump_events: Vec<JumpEvent>,
    guard_violations: usize,
) -> RunSummary {
    let last = rows.last().expect("a run produces at least one row");
    let last_bad = rows.iter().rposition(|r| !(r.attitude_error_deg < 1.0));
    let time_to_one_degree = match last_bad {
        None => Some(rows[0].t),
        Some(i) if i + 1 < rows.len() => Some(rows[i + 1].t),
        Some(_) => None,
    };
    RunSummary {
        mode,
        rows: rows.len(),
        jump_events,
        guard_violations,
        time_to_one_degree,
        final_attitude_error_deg: last.attitude_error_deg,
        final_bias_error_norm: last.btilde.norm(),
        final_accel_error_norm: last.ratilde_norm,
    }
}

/// Run the configured scenario to `t_end` and return telemetry plus a
/// summary. Degenerate-sensor samples are counted, not fatal; the only
/// error paths are invalid configuration and hybrid livelock.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunOutput, HarnessError> {
    let scenario = cfg.scenario()?;
    let g = cfg.gains;
    let mu = cfg.hybrid.energy_weight(g.c5);

    if cfg.mode == Mode::Hybrid {
        let arc = run_hybrid(&scenario, &g, &cfg.hybrid, cfg.t_end, cfg.dt)?;
        let mut rows = Vec::with_capacity(arc.samples.len());
        let mut prev_j = 0u32;
        for s in &arc.samples {
            rows.push(row_from(s.t, s.j, &s.errors, s.phi, s.v, s.j > prev_j));
            prev_j = s.j;
        }
        let summary = summarize(cfg.mode, &rows, arc.events, arc.guard_violations);
        return Ok(RunOutput { rows, summary });
    }

    let law = match cfg.mode {
        Mode::Continuous => ObserverLaw::BiasAdaptive,
        Mode::Hua2010 => ObserverLaw::Hua2010,
        Mode::Roberts2011 => ObserverLaw::Roberts2011,
        Mode::Hybrid => unreachable!(),
    };
    let n = (cfg.t_end / cfg.dt).round() as usize;
    let r_m = scenario.sensors.r_m;
    let mut truth = RigidBodyState { r: scenario.spec.r0(), v: scenario.spec.v_fn(0.0) };
    let mut st = scenario.init;
    let mut rows = Vec::with_capacity(n + 1);
    let mut guard_violations = 0usize;
    for k in 0..=n {
        let t = k as f64 * cfg.dt;
        let omega = scenario.spec.omega_fn(t);
        let r_a = apparent_accel(&scenario.spec, t);
        let frame = sample(&scenario.sensors, &truth, omega, r_a, t);
        let phi_now = phi(&frame, &st, &g, r_m).ok();
        let errors = error_state(&truth, &st, scenario.sensors.b_omega, &frame, &g);
        let v = lyapunov_v(&errors, &st, &g, mu).v;
        rows.push(row_from(t, 0, &errors, phi_now, v, false));
        if k == n {
            break;
        }
        if phi_now.is_none() {
            guard_violations += 1;
        }
        st = observer_step(&frame, &st, &g, r_m, cfg.dt, law);
        let b_a_true = truth.r.transpose() * r_a;
        truth = step(&truth, omega, b_a_true, cfg.dt);
        truth.v = scenario.spec.v_fn(t + cfg.dt);
    }
    let summary = summarize(cfg.mode, &rows, Vec::new(), guard_violations);
    Ok(RunOutput { rows, summary })
}
