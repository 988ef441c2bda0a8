//! Flat key-value scenario configuration.
//!
//! A config file is plain text, one `key = value` per line, `#` comments,
//! blank lines ignored. Every key is optional; the defaults reproduce the
//! benchmark scenario (Lissajous profile, half-turn initial attitude error,
//! 5°/s gyro bias, stock gains, δ = 3.6, α = 0.1, 60 s at dt = 1e-3).
//! Unknown and duplicate keys are errors.
//!
//! Keys:
//!
//! ```text
//! scenario.trajectory                lissajous | hover | freefall
//! scenario.t_end                     run horizon, s
//! scenario.r_m                       inertial magnetic field, "x,y,z"
//! scenario.bias_deg                  true gyro bias, deg/s, "x,y,z"
//! scenario.hover_v0                  hover velocity (hover only), "x,y,z"
//! scenario.hover_omega               hover body rate (hover only), "x,y,z"
//! scenario.noise_gyro|noise_accel|noise_mag|noise_vel   Gaussian std dev
//! scenario.seed                      noise seed, u64
//! scenario.init_attitude_error_rad   initial estimate error angle
//! scenario.init_attitude_error_axis  its axis, "x,y,z" (normalized)
//! scenario.init_vhat                 initial velocity estimate (default v(0))
//! gains.k_v|k_r|k_b|rho1|rho2|c5|eps_proj
//! hybrid.delta                       reset threshold
//! hybrid.alpha                       surrogate error budget
//! sim.dt                             integrator step, s
//! sim.mode                           continuous | hybrid | hua2010 | roberts2011
//! sim.out                            default CSV output path
//! sim.grid_dt                        constants grid step, s
//! sim.cert_eps_r|cert_b_a|cert_eps_a certificate parameters
//! sim.cert_mu                        certificate cross-weight (default cap/2)
//! ```

use crate::HarnessError;
use hybrid_observer::{HybridConfig, Scenario};
use observers::{GainConfig, ObserverState};
use rigid_body_sim::TrajectorySpec;
use sensor_suite::{deg_to_rad, NoiseStd, SensorConfig};
use so3_core::{angle_axis, Vec3};
use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::str::FromStr;

/// Which observer a simulation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Continuous,
    Hybrid,
    Hua2010,
    Roberts2011,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Self, HarnessError> {
        match s {
            "continuous" => Ok(Self::Continuous),
            "hybrid" => Ok(Self::Hybrid),
            "hua2010" => Ok(Self::Hua2010),
            "roberts2011" => Ok(Self::Roberts2011),
            other => Err(HarnessError::Config(format!(
                "unknown mode `{other}` (expected continuous, hybrid, hua2010, or roberts2011)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Continuous => "continuous",
            Self::Hybrid => "hybrid",
            Self::Hua2010 => "hua2010",
            Self::Roberts2011 => "roberts2011",
        }
    }
}

/// One fully resolved scenario: flight profile, sensors, gains, hybrid
/// policy, simulation grid, and certificate parameters.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub spec: TrajectorySpec,
    pub t_end: f64,
    pub sensors: SensorConfig,
    pub gains: GainConfig,
    pub hybrid: HybridConfig,
    pub dt: f64,
    pub mode: Mode,
    pub out: Option<PathBuf>,
    pub grid_dt: f64,
    pub cert_eps_r: f64,
    pub cert_b_a: f64,
    pub cert_eps_a: f64,
    /// Certificate cross-weight; `None` selects half the admissible cap.
    pub cert_mu: Option<f64>,
    pub init_attitude_error_rad: f64,
    /// Unit axis of the initial attitude error.
    pub init_attitude_error_axis: Vec3,
    /// Initial velocity estimate; `None` means the true v(0).
    pub init_vhat: Option<Vec3>,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            spec: TrajectorySpec::Lissajous,
            t_end: 60.0,
            sensors: SensorConfig::exact(
                Vec3::new(0.18, 0.0, 0.54),
                deg_to_rad(Vec3::new(5.0, 5.0, 5.0)),
            ),
            gains: GainConfig::reference(),
            hybrid: HybridConfig::reference(),
            dt: 1e-3,
            mode: Mode::Continuous,
            out: None,
            grid_dt: 1e-4,
            cert_eps_r: 0.5,
            cert_b_a: 1.0,
            cert_eps_a: 0.1,
            cert_mu: None,
            init_attitude_error_rad: std::f64::consts::PI,
            init_attitude_error_axis: Vec3::y(),
            init_vhat: None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_file(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        text.parse().map_err(|e| match e {
            HarnessError::Config(msg) => {
                HarnessError::Config(format!("{}: {msg}", path.display()))
            }
            other => other,
        })
    }

    /// Initial observer state: R̂(0) = R̃(0)ᵀ·R(0) for the configured error
    /// rotation, v̂(0) as configured (default the true velocity), b̂(0) = 0.
    pub fn initial_estimate(&self) -> Result<ObserverState, HarnessError> {
        let r_tilde0 = angle_axis(self.init_attitude_error_rad, self.init_attitude_error_axis)
            .map_err(|e| HarnessError::Config(format!("initial attitude error: {e}")))?;
        Ok(ObserverState {
            v_hat: self.init_vhat.unwrap_or_else(|| self.spec.v_fn(0.0)),
            r_hat: r_tilde0.transpose() * self.spec.r0(),
            b_hat: Vec3::zeros(),
        })
    }

    /// Closed-loop run description for the executors.
    pub fn scenario(&self) -> Result<Scenario, HarnessError> {
        Ok(Scenario { spec: self.spec, sensors: self.sensors, init: self.initial_estimate()? })
    }

    /// ‖r̃_a(0)‖ implied by the initial estimate; the certificate's
    /// trajectory-dependent k_v floor is evaluated against it.
    pub fn initial_accel_error_norm(&self) -> Result<f64, HarnessError> {
        let init = self.initial_estimate()?;
        let r_a = rigid_body_sim::apparent_accel(&self.spec, 0.0);
        let b_a = self.spec.r0().transpose() * r_a;
        let r_a_hat = self.gains.k_v * (self.spec.v_fn(0.0) - init.v_hat) + init.r_hat * b_a;
        Ok((r_a - r_a_hat).norm())
    }
}

fn parse_f64(key: &str, val: &str) -> Result<f64, HarnessError> {
    val.parse().map_err(|_| {
        HarnessError::Config(format!("key `{key}`: expected a number, got `{val}`"))
    })
}

fn parse_u64(key: &str, val: &str) -> Result<u64, HarnessError> {
    val.parse().map_err(|_| {
        HarnessError::Config(format!("key `{key}`: expected an unsigned integer, got `{val}`"))
    })
}

fn parse_vec3(key: &str, val: &str) -> Result<Vec3, HarnessError> {
    let parts: Vec<&str> = val.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(HarnessError::Config(format!(
            "key `{key}`: expected three comma-separated numbers, got `{val}`"
        )));
    }
    Ok(Vec3::new(
        parse_f64(key, parts[0])?,
        parse_f64(key, parts[1])?,
        parse_f64(key, parts[2])?,
    ))
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<(), HarnessError> {
    if cond {
        Ok(())
    } else {
        Err(HarnessError::Config(msg()))
    }
}

impl FromStr for ScenarioConfig {
    type Err = HarnessError;

    fn from_str(text: &str) -> Result<Self, HarnessError> {
        let mut trajectory: Option<String> = None;
        let mut hover_v0: Option<Vec3> = None;
        let mut hover_omega: Option<Vec3> = None;
        let mut t_end: Option<f64> = None;
        let mut r_m: Option<Vec3> = None;
        let mut bias_deg: Option<Vec3> = None;
        let mut noise = NoiseStd::default();
        let mut seed: Option<u64> = None;
        let mut init_err: Option<f64> = None;
        let mut init_axis: Option<Vec3> = None;
        let mut init_vhat: Option<Vec3> = None;
        let mut gains = GainConfig::reference();
        let mut delta: Option<f64> = None;
        let mut alpha: Option<f64> = None;
        let mut dt: Option<f64> = None;
        let mut mode: Option<String> = None;
        let mut out: Option<PathBuf> = None;
        let mut grid_dt: Option<f64> = None;
        let mut cert_eps_r: Option<f64> = None;
        let mut cert_b_a: Option<f64> = None;
        let mut cert_eps_a: Option<f64> = None;
        let mut cert_mu: Option<f64> = None;

        let mut seen = BTreeSet::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, val) = line.split_once('=').ok_or_else(|| {
                HarnessError::Config(format!("line {}: expected `key = value`", idx + 1))
            })?;
            let key = key.trim();
            let val = val.trim();
            if !seen.insert(key.to_string()) {
                return Err(HarnessError::Config(format!(
                    "line {}: duplicate key `{key}`",
                    idx + 1
                )));
            }
            match key {
                "scenario.trajectory" => trajectory = Some(val.to_ascii_lowercase()),
                "scenario.t_end" => t_end = Some(parse_f64(key, val)?),
                "scenario.r_m" => r_m = Some(parse_vec3(key, val)?),
                "scenario.bias_deg" => bias_deg = Some(parse_vec3(key, val)?),
                "scenario.hover_v0" => hover_v0 = Some(parse_vec3(key, val)?),
                "scenario.hover_omega" => hover_omega = Some(parse_vec3(key, val)?),
                "scenario.noise_gyro" => noise.gyro = parse_f64(key, val)?,
                "scenario.noise_accel" => noise.accel = parse_f64(key, val)?,
                "scenario.noise_mag" => noise.mag = parse_f64(key, val)?,
                "scenario.noise_vel" => noise.vel = parse_f64(key, val)?,
                "scenario.seed" => seed = Some(parse_u64(key, val)?),
                "scenario.init_attitude_error_rad" => init_err = Some(parse_f64(key, val)?),
                "scenario.init_attitude_error_axis" => init_axis = Some(parse_vec3(key, val)?),
                "scenario.init_vhat" => init_vhat = Some(parse_vec3(key, val)?),
                "gains.k_v" => gains.k_v = parse_f64(key, val)?,
                "gains.k_r" => gains.k_r = parse_f64(key, val)?,
                "gains.k_b" => gains.k_b = parse_f64(key, val)?,
                "gains.rho1" => gains.rho1 = parse_f64(key, val)?,
                "gains.rho2" => gains.rho2 = parse_f64(key, val)?,
                "gains.c5" => gains.c5 = parse_f64(key, val)?,
                "gains.eps_proj" => gains.eps_proj = parse_f64(key, val)?,
                "hybrid.delta" => delta = Some(parse_f64(key, val)?),
                "hybrid.alpha" => alpha = Some(parse_f64(key, val)?),
                "sim.dt" => dt = Some(parse_f64(key, val)?),
                "sim.mode" => mode = Some(val.to_ascii_lowercase()),
                "sim.out" => out = Some(PathBuf::from(val)),
                "sim.grid_dt" => grid_dt = Some(parse_f64(key, val)?),
                "sim.cert_eps_r" => cert_eps_r = Some(parse_f64(key, val)?),
                "sim.cert_b_a" => cert_b_a = Some(parse_f64(key, val)?),
                "sim.cert_eps_a" => cert_eps_a = Some(parse_f64(key, val)?),
                "sim.cert_mu" => cert_mu = Some(parse_f64(key, val)?),
                _ => {
                    return Err(HarnessError::Config(format!(
                        "line {}: unknown key `{key}`",
                        idx + 1
                    )))
                }
            }
        }

        let trajectory = trajectory.unwrap_or_else(|| "lissajous".into());
        let spec = match trajectory.as_str() {
            "hover" => TrajectorySpec::Hover {
                v0: hover_v0.unwrap_or_else(Vec3::zeros),
                omega: hover_omega.unwrap_or_else(Vec3::zeros),
            },
            "lissajous" | "freefall" => {
                require(hover_v0.is_none() && hover_omega.is_none(), || {
                    "scenario.hover_* keys require scenario.trajectory = hover".into()
                })?;
                if trajectory == "lissajous" {
                    TrajectorySpec::Lissajous
                } else {
                    TrajectorySpec::FreeFall
                }
            }
            other => {
                return Err(HarnessError::Config(format!(
                    "unknown trajectory `{other}` (expected lissajous, hover, or freefall)"
                )))
            }
        };

        let defaults = ScenarioConfig::default();
        let t_end = t_end.unwrap_or(defaults.t_end);
        require(t_end.is_finite() && t_end > 0.0, || {
            format!("scenario.t_end must be positive, got {t_end}")
        })?;
        let dt = dt.unwrap_or(defaults.dt);
        require(dt.is_finite() && dt > 0.0 && dt <= 0.1, || {
            format!("sim.dt must lie in (0, 0.1], got {dt}")
        })?;
        let grid_dt = grid_dt.unwrap_or(defaults.grid_dt);
        require(grid_dt.is_finite() && grid_dt > 0.0 && grid_dt <= 1e-3 * t_end, || {
            format!("sim.grid_dt must lie in (0, t_end/1000], got {grid_dt} for t_end {t_end}")
        })?;

        let r_m = r_m.unwrap_or(defaults.sensors.r_m);
        require(r_m.norm() > 0.0, || "scenario.r_m must be nonzero".into())?;
        let b_omega = deg_to_rad(bias_deg.unwrap_or(Vec3::new(5.0, 5.0, 5.0)));
        for (name, v) in
            [("gyro", noise.gyro), ("accel", noise.accel), ("mag", noise.mag), ("vel", noise.vel)]
        {
            require(v.is_finite() && v >= 0.0, || {
                format!("scenario.noise_{name} must be nonnegative, got {v}")
            })?;
        }

        for (name, v, strict) in [
            ("k_v", gains.k_v, true),
            ("k_r", gains.k_r, false),
            ("k_b", gains.k_b, true),
            ("rho1", gains.rho1, false),
            ("rho2", gains.rho2, false),
            ("c5", gains.c5, true),
            ("eps_proj", gains.eps_proj, true),
        ] {
            let ok = v.is_finite() && if strict { v > 0.0 } else { v >= 0.0 };
            require(ok, || {
                format!(
                    "gains.{name} must be {}, got {v}",
                    if strict { "positive" } else { "nonnegative" }
                )
            })?;
        }

        let hybrid = HybridConfig::new(
            delta.unwrap_or(defaults.hybrid.delta()),
            alpha.unwrap_or(defaults.hybrid.alpha()),
            [Vec3::x(), Vec3::y(), Vec3::z()],
        )
        .map_err(|e| HarnessError::Config(format!("hybrid policy: {e}")))?;

        let mode = match mode {
            Some(s) => Mode::parse(&s)?,
            None => defaults.mode,
        };

        let init_err = init_err.unwrap_or(defaults.init_attitude_error_rad);
        require(init_err.is_finite() && init_err >= 0.0, || {
            format!("scenario.init_attitude_error_rad must be nonnegative, got {init_err}")
        })?;
        let axis_raw = init_axis.unwrap_or(defaults.init_attitude_error_axis);
        require(axis_raw.norm() > 0.0, || {
            "scenario.init_attitude_error_axis must be nonzero".into()
        })?;
        let init_axis = axis_raw / axis_raw.norm();

        let cert_eps_r = cert_eps_r.unwrap_or(defaults.cert_eps_r);
        require(cert_eps_r > 0.0 && cert_eps_r < 1.0, || {
            format!("sim.cert_eps_r must lie in (0, 1), got {cert_eps_r}")
        })?;
        let cert_b_a = cert_b_a.unwrap_or(defaults.cert_b_a);
        require(cert_b_a.is_finite() && cert_b_a > 0.0, || {
            format!("sim.cert_b_a must be positive, got {cert_b_a}")
        })?;
        let cert_eps_a = cert_eps_a.unwrap_or(defaults.cert_eps_a);
        require(cert_eps_a.is_finite() && cert_eps_a > 0.0, || {
            format!("sim.cert_eps_a must be positive, got {cert_eps_a}")
        })?;
        if let Some(mu) = cert_mu {
            require(mu.is_finite() && mu > 0.0, || {
                format!("sim.cert_mu must be positive, got {mu}")
            })?;
        }

        Ok(ScenarioConfig {
            spec,
            t_end,
            sensors: SensorConfig { r_m, b_omega, noise_std: noise, seed: seed.unwrap_or(0) },
            gains,
            hybrid,
            dt,
            mode,
            out,
            grid_dt,
            cert_eps_r,
            cert_b_a,
            cert_eps_a,
            cert_mu,
            init_attitude_error_rad: init_err,
            init_attitude_error_axis: init_axis,
            init_vhat,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use so3_core::Mat3;

    #[test]
    fn empty_text_yields_the_reference_scenario() {
        let cfg: ScenarioConfig = "".parse().unwrap();
        assert_eq!(cfg.spec, TrajectorySpec::Lissajous);
        assert_eq!(cfg.t_end, 60.0);
        assert_eq!(cfg.dt, 1e-3);
        assert_eq!(cfg.mode, Mode::Continuous);
        assert_eq!(cfg.sensors.r_m, Vec3::new(0.18, 0.0, 0.54));
        let five_deg = 5.0 * std::f64::consts::PI / 180.0;
        assert_abs_diff_eq!(cfg.sensors.b_omega.x, five_deg, epsilon = 1e-15);
        assert_eq!(cfg.gains, GainConfig::reference());
        assert_eq!(cfg.hybrid.delta(), 3.6);
        assert_eq!(cfg.hybrid.alpha(), 0.1);
        assert!(cfg.sensors.noise_std.is_zero());
    }

    #[test]
    fn reference_initial_estimate_cancels_the_half_turn() {
        // R̃(0) and R(0) are the same half-turn about e₂, so R̂(0) = I.
        let cfg = ScenarioConfig::default();
        let init = cfg.initial_estimate().unwrap();
        assert!((init.r_hat.matrix() - Mat3::identity()).norm() <= 1e-12);
        assert_eq!(init.v_hat, cfg.spec.v_fn(0.0));
        assert_eq!(init.b_hat, Vec3::zeros());
    }

    #[test]
    fn full_file_round_trips() {
        let text = "\
# comment
scenario.trajectory = hover
scenario.hover_v0 = 1, 0, 0
scenario.hover_omega = 0,0,0.3
scenario.t_end = 10
scenario.r_m = 1,0,0
scenario.bias_deg = 0.1,0.1,0.1
scenario.noise_gyro = 0.01
scenario.seed = 7
scenario.init_attitude_error_rad = 0.5
scenario.init_attitude_error_axis = 1,1,1
scenario.init_vhat = 0,0,0
gains.k_v = 2.5
gains.c5 = 0.002
hybrid.delta = 3.7
hybrid.alpha = 0.05
sim.dt = 0.01
sim.mode = hybrid
sim.out = run.csv
sim.grid_dt = 0.005
sim.cert_eps_r = 0.92
sim.cert_mu = 0.001
";
        let cfg: ScenarioConfig = text.parse().unwrap();
        assert_eq!(
            cfg.spec,
            TrajectorySpec::Hover { v0: Vec3::new(1.0, 0.0, 0.0), omega: Vec3::new(0.0, 0.0, 0.3) }
        );
        assert_eq!(cfg.sensors.seed, 7);
        assert_eq!(cfg.sensors.noise_std.gyro, 0.01);
        assert_eq!(cfg.gains.k_v, 2.5);
        assert_eq!(cfg.gains.c5, 0.002);
        assert_eq!(cfg.hybrid.delta(), 3.7);
        assert_eq!(cfg.mode, Mode::Hybrid);
        assert_eq!(cfg.out.as_deref(), Some(Path::new("run.csv")));
        assert_eq!(cfg.cert_mu, Some(0.001));
        assert_abs_diff_eq!(cfg.init_attitude_error_axis.norm(), 1.0, epsilon = 1e-15);
        assert_eq!(cfg.init_vhat, Some(Vec3::zeros()));
    }

    #[test]
    fn unknown_and_duplicate_keys_are_rejected() {
        let err = "scenario.banana = 1".parse::<ScenarioConfig>().unwrap_err();
        assert!(err.to_string().contains("unknown key"), "{err}");
        let err = "sim.dt = 0.01\nsim.dt = 0.02".parse::<ScenarioConfig>().unwrap_err();
        assert!(err.to_string().contains("duplicate key"), "{err}");
        let err = "sim.dt0.01".parse::<ScenarioConfig>().unwrap_err();
        assert!(err.to_string().contains("expected `key = value`"), "{err}");
    }

    #[test]
    fn semantic_errors_are_rejected() {
        assert!("scenario.trajectory = spiral".parse::<ScenarioConfig>().is_err());
        assert!("scenario.hover_v0 = 1,0,0".parse::<ScenarioConfig>().is_err());
        assert!("scenario.r_m = 1,0".parse::<ScenarioConfig>().is_err());
        assert!("scenario.r_m = a,b,c".parse::<ScenarioConfig>().is_err());
        assert!("sim.dt = 0.5".parse::<ScenarioConfig>().is_err());
        assert!("sim.mode = banana".parse::<ScenarioConfig>().is_err());
        assert!("hybrid.delta = 3.0".parse::<ScenarioConfig>().is_err());
        assert!("gains.k_v = 0".parse::<ScenarioConfig>().is_err());
        assert!("sim.cert_eps_r = 1.5".parse::<ScenarioConfig>().is_err());
        assert!("sim.grid_dt = 1".parse::<ScenarioConfig>().is_err());
    }

    #[test]
    fn initial_accel_error_matches_reference_value() {
        // With v̂(0) = v(0) and R̂(0) = I the initial acceleration error is
        // ‖(I − R(0)ᵀ)r_a(0)‖ ≈ 19.88 for the benchmark profile.
        let cfg = ScenarioConfig::default();
        let n = cfg.initial_accel_error_norm().unwrap();
        assert!((n - 19.8828).abs() < 1e-3, "got {n}");
    }
}
