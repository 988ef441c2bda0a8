//! Gain-certificate evaluation.
//!
//! The exponential-stability argument for the adaptive observer is a chain
//! of sufficient inequalities: a cross-weight cap on μ, floors on k_R and
//! k_v, positive definiteness of four comparison matrices, and a dwell-time
//! ordering that keeps the attitude error inside its analysis region while
//! the acceleration error settles. [`evaluate_certificate`] computes every
//! quantity in the chain for concrete gains and reports each condition with
//! its margin; it never fails, and identical inputs produce identical
//! reports. The conditions are sufficient only: the reference scenario's
//! stock gains violate the floors by design yet converge in simulation.

use crate::constants::TrajectoryConstants;
use nalgebra::{Matrix2, Matrix3};
use observers::GainConfig;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// One inequality of the chain with its signed margin (positive ⟺ holds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionReport {
    pub name: &'static str,
    pub satisfied: bool,
    pub margin: f64,
}

/// Full certificate report for one (constants, gains, parameters) tuple.
///
/// `k_v_min = max(k_v_star, c_a/(r_a0_norm + epsilon_a))`: the starred bound
/// collects every term that does not depend on the initial acceleration
/// error. The four comparison matrices are reported verbatim so callers can
/// re-check definiteness independently of the minor-based flags.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub epsilon_r: f64,
    pub epsilon_a: f64,
    pub mu: f64,
    pub b_a: f64,
    pub r_a0_norm: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub alpha3: f64,
    pub alpha4: f64,
    /// Largest admissible cross-weight, λ_min(Ā)(1−ε_R²)/α₂.
    pub mu_max: f64,
    pub k_r_min: f64,
    pub k_v_star: f64,
    pub k_v_min: f64,
    /// Shortest time the attitude error needs to leave its analysis ball.
    pub t_r_lower: f64,
    /// Longest time the acceleration error needs to enter ‖r̃_a‖ ≤ B_a/k_R.
    pub t_a_upper: f64,
    pub p1: Matrix3<f64>,
    pub p12: Matrix2<f64>,
    pub p13: Matrix2<f64>,
    pub p23: Matrix2<f64>,
    pub conditions: Vec<ConditionReport>,
    /// True iff every condition holds.
    pub satisfied: bool,
}

impl Certificate {
    pub fn condition(&self, name: &str) -> Option<&ConditionReport> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Cross-weight cap λ_min(Ā)(1−ε_R²)/α₂ for the given attitude margin.
/// Nonpositive when the observability margin failed (λ_min ≤ 0).
pub fn mu_cap(tc: &TrajectoryConstants, eps_r: f64) -> f64 {
    assert!(eps_r > 0.0 && eps_r < 1.0, "attitude margin must lie in (0, 1), got {eps_r}");
    let alpha2 = 4.0 * tc.lambda_max_abar * tc.c_b * (4.0 + SQRT_2);
    tc.lambda_min_abar * (1.0 - eps_r * eps_r) / alpha2
}

/// Smallest leading principal minor; positive ⟺ the symmetric matrix is
/// positive definite.
fn min_minor3(m: &Matrix3<f64>) -> f64 {
    let m1 = m[(0, 0)];
    let m2 = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
    m1.min(m2).min(m.determinant())
}

fn min_minor2(m: &Matrix2<f64>) -> f64 {
    m[(0, 0)].min(m.determinant())
}

/// Evaluates the whole inequality chain at the given gains.
///
/// `eps_r` ∈ (0, 1) is the attitude-error ceiling of the analysis region,
/// `b_a` the numerator of the settled acceleration-error ball B_a/k_R,
/// `eps_a` the slack on the initial acceleration error, and `r_a0_norm` the
/// initial acceleration-error magnitude ‖r̃_a(0)‖. As `eps_r → 1` the k_R
/// floor grows without bound; the report carries the blown-up requirement.
pub fn evaluate_certificate(
    tc: &TrajectoryConstants,
    g: &GainConfig,
    eps_r: f64,
    b_a: f64,
    eps_a: f64,
    mu: f64,
    r_a0_norm: f64,
) -> Certificate {
    assert!(eps_r > 0.0 && eps_r < 1.0, "attitude margin must lie in (0, 1), got {eps_r}");
    assert!(b_a > 0.0, "acceleration ceiling must be positive, got {b_a}");
    assert!(eps_a > 0.0, "acceleration slack must be positive, got {eps_a}");
    assert!(mu > 0.0, "cross-weight must be positive, got {mu}");
    assert!(r_a0_norm >= 0.0, "initial error norm must be nonnegative");

    let (c1, c2, c3) = (tc.c1, tc.c2, tc.c3);
    let (lam_min, lam_max) = (tc.lambda_min_abar, tc.lambda_max_abar);
    let (c_a, c_b) = (tc.c_a, tc.c_b);
    let c_omega = tc.c4;
    let one_minus = 1.0 - eps_r * eps_r;
    // λ_min(Ā)(1 − ε_R²), the effective curvature inside the analysis ball.
    let lam_eff = lam_min * one_minus;

    let alpha1 = 2.0 * c_b * c_b + 8.0 * lam_max * g.k_b;
    let alpha2 = 4.0 * lam_max * c_b * (4.0 + SQRT_2);
    let alpha3 = 2.0 * g.rho2 * c2 * g.k_b;
    let alpha4 = g.rho2 * c2 * c_b * (4.0 + SQRT_2);
    let mu_max = lam_min * one_minus / alpha2;

    let k_r_min = ((c_b + g.rho2 * c2 * b_a) / (4.0 * lam_min * eps_r * eps_r * one_minus))
        .max(2.0 * mu * g.k_b)
        .max(
            (2.0 * alpha1 * mu * mu + (1.0 + 2.0 * c_omega * mu).powi(2))
                / (2.0 * mu * lam_eff),
        );

    // Two readings of the k_v floor differ by a c1/c2 swap in one factor;
    // both are kept and the max taken, which dominates either reading.
    let drive = mu * (alpha3 + g.k_r * alpha4);
    let x_pd = g.k_r * g.rho2 * c2 + 8.0f64.sqrt() * c3 + drive;
    let k_v_pd = x_pd * x_pd / (4.0 * g.k_r * lam_eff);
    let x_txt = 0.5 * g.k_r * g.rho2 * c1 + SQRT_2 * c2 + 0.5 * drive;
    let k_v_txt = 2.0 * x_txt * x_txt / (g.k_r * lam_eff);
    let k_v_star = (c2 * c2 / mu)
        .max(c1 * c1 / mu)
        .max(k_v_pd)
        .max(k_v_txt)
        .max(c_a * g.k_r / b_a);
    let k_v_min = k_v_star.max(c_a / (r_a0_norm + eps_a));

    let t_r_lower = eps_r * eps_r / (c_b + g.k_r * g.rho2 * c2 * (r_a0_norm + eps_a));
    let ca_over_kv = c_a / g.k_v;
    let t_a_upper = if r_a0_norm <= ca_over_kv {
        0.0
    } else {
        let floor = b_a / g.k_r - ca_over_kv;
        if floor <= 0.0 {
            f64::INFINITY
        } else {
            (1.0 / g.k_v) * ((r_a0_norm - ca_over_kv) / floor).ln()
        }
    };

    let p1 = Matrix3::new(
        1.0, -mu, 0.0,
        -mu, mu * g.k_r / (2.0 * g.k_b), 0.0,
        0.0, 0.0, 0.5,
    );
    let off12 = -(0.5 + c_omega * mu);
    let p12 = Matrix2::new(
        g.k_r * (2.0 * lam_eff - mu * alpha2) - mu * alpha1, off12,
        off12, 0.5 * mu,
    );
    let p13 = Matrix2::new(
        2.0 * g.k_r * lam_eff, -0.5 * x_pd,
        -0.5 * x_pd, 0.5 * g.k_v,
    );
    let p23 = Matrix2::new(
        0.5 * mu, -0.5 * c2,
        -0.5 * c2, 0.5 * g.k_v,
    );

    let entries = [
        ("lambda_min_positive", lam_min),
        ("mu_below_cap", mu_max - mu),
        ("k_R_above_floor", g.k_r - k_r_min),
        ("k_v_above_floor", g.k_v - k_v_min),
        ("P1_positive_definite", min_minor3(&p1)),
        ("P12_positive_definite", min_minor2(&p12)),
        ("P13_positive_definite", min_minor2(&p13)),
        ("P23_positive_definite", min_minor2(&p23)),
        ("t_a_within_dwell", t_r_lower - t_a_upper),
    ];
    let conditions: Vec<ConditionReport> = entries
        .iter()
        .map(|&(name, margin)| ConditionReport { name, satisfied: margin > 0.0, margin })
        .collect();
    let satisfied = conditions.iter().all(|c| c.satisfied);

    Certificate {
        epsilon_r: eps_r,
        epsilon_a: eps_a,
        mu,
        b_a,
        r_a0_norm,
        alpha1,
        alpha2,
        alpha3,
        alpha4,
        mu_max,
        k_r_min,
        k_v_star,
        k_v_min,
        t_r_lower,
        t_a_upper,
        p1,
        p12,
        p13,
        p23,
        conditions,
        satisfied,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::extract_constants;
    use rigid_body_sim::TrajectorySpec;
    use so3_core::Vec3;

    fn hover_tc() -> TrajectoryConstants {
        let spec =
            TrajectorySpec::Hover { v0: Vec3::new(1.0, 0.0, 0.0), omega: Vec3::new(0.0, 0.0, 0.3) };
        extract_constants(&spec, Vec3::x(), 0.002, 1e-3, 10.0)
    }

    fn hover_gains(k_v: f64, k_r: f64) -> GainConfig {
        GainConfig { k_v, k_r, k_b: 0.5, rho1: 1.0, rho2: 1.0, c5: 0.002, eps_proj: 0.0005 }
    }

    #[test]
    fn minors_detect_definiteness() {
        let pd = Matrix2::new(2.0, -1.0, -1.0, 2.0);
        assert!(min_minor2(&pd) > 0.0);
        let indefinite = Matrix2::new(2.0, -3.0, -3.0, 2.0);
        assert!(min_minor2(&indefinite) < 0.0);
        let pd3 = Matrix3::new(2.0, -1.0, 0.0, -1.0, 2.0, -1.0, 0.0, -1.0, 2.0);
        assert!(min_minor3(&pd3) > 0.0);
        let neg3 = Matrix3::new(-1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0);
        assert!(min_minor3(&neg3) < 0.0);
    }

    #[test]
    fn evaluation_is_pure() {
        let tc = hover_tc();
        let g = hover_gains(1e5, 800.0);
        let mu = 0.5 * mu_cap(&tc, 0.92);
        let a = evaluate_certificate(&tc, &g, 0.92, 0.1, 0.1, mu, 14.0);
        let b = evaluate_certificate(&tc, &g, 0.92, 0.1, 0.1, mu, 14.0);
        assert_eq!(a, b);
    }

    #[test]
    fn hover_chain_matches_hand_computation() {
        let tc = hover_tc();
        let mu = 0.5 * mu_cap(&tc, 0.92);
        let cert = evaluate_certificate(&tc, &hover_gains(1.0, 1.0), 0.92, 0.1, 0.1, mu, 14.0);
        // α₂ = 4·λ_max·c_b·(4+√2) with λ_max = ½(1 + 9.81²), c_b = 0.004.
        let lam_max = 0.5 + 0.5 * 9.81 * 9.81;
        let a2 = 4.0 * lam_max * 0.004 * (4.0 + SQRT_2);
        assert!((cert.alpha2 - a2).abs() <= 1e-9);
        assert!((cert.mu_max - 0.5 * (1.0 - 0.92 * 0.92) / a2).abs() <= 1e-12);
        assert!((cert.mu - 0.5 * cert.mu_max).abs() <= 1e-15);
        // k_R floor ≈ 745 is dominated by the μ-quadratic term.
        assert!(cert.k_r_min > 500.0 && cert.k_r_min < 1000.0, "k_r_min = {}", cert.k_r_min);
        assert!(!cert.satisfied);
    }

    #[test]
    fn attitude_margin_near_one_blows_up_the_floor() {
        let tc = hover_tc();
        let eps_r = 1.0 - 1e-9;
        let cert =
            evaluate_certificate(&tc, &hover_gains(1.0, 1.0), eps_r, 0.1, 0.1, 1e-9, 14.0);
        assert!(cert.k_r_min > 1e12, "k_r_min = {}", cert.k_r_min);
        assert!(!cert.condition("k_R_above_floor").unwrap().satisfied);
    }

    #[test]
    #[should_panic(expected = "attitude margin must lie in (0, 1)")]
    fn unit_attitude_margin_is_rejected() {
        let tc = hover_tc();
        evaluate_certificate(&tc, &hover_gains(1.0, 1.0), 1.0, 0.1, 0.1, 1e-3, 14.0);
    }

    #[test]
    fn huge_gains_satisfy_every_condition() {
        let tc = hover_tc();
        let mu = 0.5 * mu_cap(&tc, 0.92);
        let cert = evaluate_certificate(&tc, &hover_gains(1e12, 1e6), 0.92, 0.1, 0.1, mu, 1.0);
        for c in &cert.conditions {
            assert!(c.satisfied, "{} violated with margin {}", c.name, c.margin);
        }
        assert!(cert.satisfied);
    }
}
